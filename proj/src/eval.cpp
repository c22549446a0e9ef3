// SPDX-License-Identifier: Apache-2.0

#include "ddarec/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ddarec/dataset.hpp"

namespace dda {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
    system.validate();
    require(!snr_db.empty(), "ExperimentConfig: snr list is empty");
    require(n_samples >= 1, "ExperimentConfig: sample count must be >= 1");
    require(n_paths >= 1, "ExperimentConfig: path count must be >= 1");
    require(k_fd >= 1 && k_fd <= 3, "ExperimentConfig: k_fd must be in {1,2,3}");
    require(jobs >= 0, "ExperimentConfig: jobs must be >= 0");
}

namespace {

std::string format_snr(double snr) {
    if (std::isinf(snr)) return "inf";
    std::ostringstream os;
    os.precision(10);
    os << snr;
    return os.str();
}

std::string format_nmse(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

PilotSchedule schedule_for(const ExperimentConfig& cfg, int offset) {
    return cfg.pilot == PilotKind::Mcr ? mcr_schedule(cfg.system, offset)
                                       : standard_schedule(cfg.system, offset);
}

ResultRecord base_record(const ExperimentConfig& cfg, int sample_id, int offset, double snr) {
    ResultRecord r;
    r.sample_id = sample_id;
    r.offset = offset;
    r.snr_db = snr;
    r.solver = to_string(cfg.solver.id);
    r.variant = to_string(cfg.solver.temporal_mode);
    r.k_fd = cfg.k_fd;
    r.pilot = to_string(cfg.pilot);
    return r;
}

/// One (sample, offset, snr) reconstruction; fills nmse/iters/wall_s.
void run_task(const ChannelWindow& h, const DictionarySet& dict, const ExperimentConfig& cfg,
              int offset, double snr, uint64_t noise_seed, ResultRecord& rec) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const PilotSchedule sched = schedule_for(cfg, offset);
        const ObservationWindow y = observe(h, sched, snr, noise_seed);
        const ReconResult res = reconstruct(y, dict, cfg.solver);
        rec.nmse_db = nmse_db(res.h_hat, h);
        rec.iters = res.iterations;
    } catch (const std::exception&) {
        rec.failed = true;
        rec.nmse_db = std::numeric_limits<double>::quiet_NaN();
        rec.iters = 0;
    }
    rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<ChannelWindow> load_samples(const ExperimentConfig& cfg) {
    std::vector<ChannelWindow> samples;
    samples.reserve(static_cast<size_t>(cfg.n_samples));
    if (!cfg.dataset_path.empty()) {
        DatasetReader reader(cfg.dataset_path);
        require(reader.n_samples() >= static_cast<uint64_t>(cfg.n_samples),
                "sweep: dataset has fewer samples than requested");
        require(reader.config() == cfg.system,
                "sweep: dataset config does not match experiment config");
        for (int i = 0; i < cfg.n_samples; ++i)
            samples.push_back(reader.read_sample(static_cast<uint64_t>(i)));
    } else {
        for (int i = 0; i < cfg.n_samples; ++i) {
            const uint64_t seed = mix64(cfg.data_seed ^ mix64(static_cast<uint64_t>(i)));
            samples.push_back(
                synthesize_window(sample_paths(seed, cfg.n_paths, cfg.scenario, cfg.system),
                                  cfg.system));
        }
    }
    return samples;
}

} // namespace

std::string csv_header() {
    return "sample_id,offset,snr_db,solver,variant,kfd,pilot,nmse_db,iters,wall_s";
}

std::string to_csv_row(const ResultRecord& r) {
    std::ostringstream os;
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.4f", r.wall_s);
    os << r.sample_id << ',' << r.offset << ',' << format_snr(r.snr_db) << ',' << r.solver << ','
       << r.variant << ',' << r.k_fd << ',' << r.pilot << ',' << format_nmse(r.nmse_db) << ','
       << r.iters << ',' << wall;
    return os.str();
}

uint64_t task_noise_seed(uint64_t base, int sample_id, int offset, int snr_index) {
    uint64_t tag = static_cast<uint64_t>(sample_id);
    tag = tag * 0x100000001b3ULL + static_cast<uint64_t>(offset + 1);
    tag = tag * 0x100000001b3ULL + static_cast<uint64_t>(snr_index + 1);
    return mix64(base ^ mix64(tag));
}

OffsetEvaluation evaluate_all_offsets(const ChannelWindow& h, const DictionarySet& dict,
                                      const ExperimentConfig& cfg, int sample_id, double snr_db) {
    cfg.validate();
    int snr_index = 0;
    for (size_t i = 0; i < cfg.snr_db.size(); ++i)
        if (cfg.snr_db[i] == snr_db) snr_index = static_cast<int>(i);

    OffsetEvaluation out;
    const int k = cfg.system.pilot_blocks();
    double mean_lin = 0.0;
    int ok = 0;
    for (int offset = 0; offset < k; ++offset) {
        ResultRecord rec = base_record(cfg, sample_id, offset, snr_db);
        run_task(h, dict, cfg, offset, snr_db,
                 task_noise_seed(cfg.noise_seed, sample_id, offset, snr_index), rec);
        if (rec.failed) {
            ++out.failures;
        } else {
            mean_lin += db_to_linear(rec.nmse_db);
            ++ok;
        }
        out.records.push_back(std::move(rec));
    }
    ResultRecord agg = base_record(cfg, sample_id, -1, snr_db);
    if (ok > 0) {
        agg.nmse_db = linear_to_db(mean_lin / ok);
        out.aggregate_nmse_db = agg.nmse_db;
    } else {
        agg.failed = true;
        agg.nmse_db = std::numeric_limits<double>::quiet_NaN();
        out.aggregate_nmse_db = std::numeric_limits<double>::quiet_NaN();
    }
    out.records.push_back(std::move(agg));
    return out;
}

namespace {

struct Task {
    int sample_id;
    int offset;
    int snr_index;
};

std::string task_key(const ExperimentConfig& cfg, const Task& t) {
    std::ostringstream os;
    os << t.sample_id << '/' << t.offset << '/' << format_snr(cfg.snr_db[static_cast<size_t>(t.snr_index)]);
    return os.str();
}

/// Task key for a CSV row (sample/offset/snr), used to filter stale rows
/// against the manifest when resuming.
std::string row_key(const std::string& row) {
    std::istringstream is(row);
    std::string sample, offset, snr;
    std::getline(is, sample, ',');
    std::getline(is, offset, ',');
    std::getline(is, snr, ',');
    return sample + '/' + offset + '/' + snr;
}

void write_summary(const std::string& csv_path, const std::string& summary_path) {
    std::ifstream is(csv_path);
    if (!is) throw std::runtime_error("sweep: cannot reopen csv for summary");
    std::string line;
    std::getline(is, line); // schema comment
    std::getline(is, line); // header
    struct Group {
        double mean_lin = 0.0;
        uint64_t n = 0, failed = 0;
    };
    std::map<std::string, Group> groups;
    std::map<std::string, nlohmann::json> group_fields;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> cols;
        std::string c;
        while (std::getline(ls, c, ',')) cols.push_back(c);
        if (cols.size() < 10) continue;
        const std::string key = cols[3] + '|' + cols[6] + '|' + cols[4] + '|' + cols[5] + '|' + cols[2];
        Group& g = groups[key];
        if (cols[7] == "nan") {
            ++g.failed;
        } else {
            g.mean_lin += db_to_linear(std::stod(cols[7]));
            ++g.n;
        }
        if (!group_fields.count(key))
            group_fields[key] = {{"solver", cols[3]}, {"pilot", cols[6]},   {"variant", cols[4]},
                                 {"kfd", std::stoi(cols[5])}, {"snr_db", cols[2]}};
    }
    nlohmann::json summary;
    summary["schema"] = "ddarec.sweep.summary.v1";
    summary["csv"] = csv_path;
    nlohmann::json arr = nlohmann::json::array();
    for (auto& [key, g] : groups) {
        nlohmann::json j = group_fields[key];
        j["n_rows"] = g.n;
        j["n_failed"] = g.failed;
        j["mean_nmse_db"] = g.n > 0 ? linear_to_db(g.mean_lin / static_cast<double>(g.n))
                                    : std::numeric_limits<double>::quiet_NaN();
        arr.push_back(std::move(j));
    }
    summary["groups"] = std::move(arr);
    std::ofstream os(summary_path, std::ios::trunc);
    os << summary.dump(2) << "\n";
    if (!os) throw std::runtime_error("sweep: cannot write summary json");
}

} // namespace

SweepOutcome run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    const std::string csv_path = (fs::path(cfg.out_dir) / "results.csv").string();
    const std::string manifest_path = (fs::path(cfg.out_dir) / "manifest.txt").string();
    const std::string summary_path = (fs::path(cfg.out_dir) / "summary.json").string();

    // Resume state: a task counts as done only if its key is in the
    // manifest; CSV rows without a manifest entry are dropped on rewrite.
    std::set<std::string> done;
    if (fs::exists(manifest_path)) {
        std::ifstream ms(manifest_path);
        std::string line;
        while (std::getline(ms, line))
            if (!line.empty()) done.insert(line);
    }
    std::vector<std::string> kept_rows;
    if (fs::exists(csv_path) && !done.empty()) {
        std::ifstream is(csv_path);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("sample_id", 0) == 0) continue;
            if (done.count(row_key(line))) kept_rows.push_back(line);
        }
    }
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("sweep: cannot open csv for writing: " + csv_path);
    csv << "# schema: ddarec.sweep.v1\n" << csv_header() << "\n";
    for (const auto& r : kept_rows) csv << r << "\n";
    csv.flush();
    std::ofstream manifest(manifest_path, std::ios::trunc);
    for (const auto& k : done) manifest << k << "\n";
    manifest.flush();

    const std::vector<ChannelWindow> samples = load_samples(cfg);
    const DictionarySet dict = build_dictionaries(cfg.system, 1, cfg.k_fd);

    std::vector<Task> tasks;
    const int k = cfg.system.pilot_blocks();
    uint64_t skipped = 0;
    for (int snr_index = 0; snr_index < static_cast<int>(cfg.snr_db.size()); ++snr_index)
        for (int sample = 0; sample < cfg.n_samples; ++sample)
            for (int offset = 0; offset < k; ++offset) {
                const Task t{sample, offset, snr_index};
                if (done.count(task_key(cfg, t)))
                    ++skipped;
                else
                    tasks.push_back(t);
            }

    std::atomic<size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex writer_mutex;
    uint64_t written = 0;

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            const double snr = cfg.snr_db[static_cast<size_t>(t.snr_index)];
            ResultRecord rec = base_record(cfg, t.sample_id, t.offset, snr);
            run_task(samples[static_cast<size_t>(t.sample_id)], dict, cfg, t.offset, snr,
                     task_noise_seed(cfg.noise_seed, t.sample_id, t.offset, t.snr_index), rec);
            if (rec.failed) failures.fetch_add(1);
            std::lock_guard<std::mutex> lock(writer_mutex);
            csv << to_csv_row(rec) << "\n";
            csv.flush();
            manifest << task_key(cfg, t) << "\n";
            manifest.flush();
            ++written;
        }
    };

    int n_jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (n_jobs < 1) n_jobs = 1;
    n_jobs = std::min<int>(n_jobs, std::max<size_t>(tasks.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_jobs));
    for (int i = 0; i < n_jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    csv.flush();
    manifest.flush();

    write_summary(csv_path, summary_path);

    SweepOutcome out;
    out.csv_path = csv_path;
    out.summary_path = summary_path;
    out.rows_written = written;
    out.rows_skipped = skipped;
    out.failures = failures.load();
    return out;
}

} // namespace dda
