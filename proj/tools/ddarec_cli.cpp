// SPDX-License-Identifier: Apache-2.0
//
// ddarec command-line tool: dataset generation, window reconstruction,
// sweeps, hyperparameter tuning, pilot-schedule inspection, denoiser
// weight management, and the invariant self-check.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <ddarec/dataset.hpp>
#include <ddarec/dc_core.hpp>
#include <ddarec/eval.hpp>
#include <ddarec/kvconfig.hpp>
#include <ddarec/metrics.hpp>
#include <ddarec/solvers.hpp>

using namespace dda;

namespace {

constexpr const char* kEnvPrefix = "DDAREC_";

// Environment overrides: DDAREC_SYSTEM_N_F=408 maps to system.n_f. The
// first underscore after the prefix separates the section from the key.
KvMap env_kv() {
    KvMap m;
    for (char** e = environ; *e != nullptr; ++e) {
        std::string entry(*e);
        if (entry.rfind(kEnvPrefix, 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(std::strlen(kEnvPrefix), eq - std::strlen(kEnvPrefix));
        const std::string val = entry.substr(eq + 1);
        const auto us = key.find('_');
        if (us == std::string::npos) continue;
        std::string mapped = key.substr(0, us) + "." + key.substr(us + 1);
        for (char& c : mapped) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        m[mapped] = val;
    }
    return m;
}

/// Precedence: defaults < environment < config file < explicit flags.
KvMap merged_kv(const std::string& config_path) {
    KvMap m = env_kv();
    if (!config_path.empty())
        for (const auto& [k, v] : parse_kv_file(config_path)) m[k] = v;
    return m;
}

void echo_kv(const KvMap& m) {
    for (const auto& [k, v] : m) std::cout << "# " << k << " = " << v << "\n";
}

// Flags shared by run/sweep/tune; every value is also reachable through
// the config file under the solver.*/system.*/data.* keys.
struct CommonArgs {
    std::string config_path;
    std::string solver = "admm";
    std::string variant = "doppler3d";
    std::string prior = "soft";
    std::string pilot = "standard";
    std::string weights_path;
    int k_fd = 1;
    double lambda = 0.5, rho = 0.3, gamma = 1.0, tol = 1e-5, sigma_floor = 1e-6;
    int iters = 160, n_stages = 8;
    bool init_prior = false;
    int paths = 8;
    bool on_grid = false;
    uint64_t seed = 1, noise_seed = 1;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "flat key=value config file");
        app->add_option("--solver", solver)->check(CLI::IsMember({"ls", "fista", "admm", "unfolded"}));
        app->add_option("--variant", variant)
            ->check(CLI::IsMember({"doppler3d", "time3d", "time2d"}));
        app->add_option("--prior", prior)->check(CLI::IsMember({"soft", "denoiser", "identity"}));
        app->add_option("--pilot", pilot)->check(CLI::IsMember({"standard", "mcr"}));
        app->add_option("--weights", weights_path, "denoiser weights file");
        app->add_option("--kfd", k_fd, "delay oversampling factor")->check(CLI::Range(1, 3));
        app->add_option("--lambda", lambda);
        app->add_option("--rho", rho);
        app->add_option("--gamma", gamma);
        app->add_option("--tol", tol);
        app->add_option("--sigma-floor", sigma_floor);
        app->add_option("--iters", iters, "solver iteration cap");
        app->add_option("--stages", n_stages, "unfolded stage count");
        app->add_flag("--init-prior", init_prior, "unfolded: seed with initial DC + denoiser");
        app->add_option("--paths", paths, "multipath count for synthesized samples");
        app->add_flag("--on-grid", on_grid, "snap path parameters to the dictionary grids");
        app->add_option("--seed", seed, "path-sampling seed");
        app->add_option("--noise-seed", noise_seed);
    }

    void merge_file(const CLI::App* app, const KvMap& m) {
        auto take_d = [&](const char* flag, const char* key, double& v) {
            if (app->count(flag) == 0) v = kv_get_double(m, key, v);
        };
        auto take_i = [&](const char* flag, const char* key, int& v) {
            if (app->count(flag) == 0) v = kv_get_int(m, key, v);
        };
        auto take_s = [&](const char* flag, const char* key, std::string& v) {
            if (app->count(flag) == 0) v = kv_get_string(m, key, v);
        };
        take_s("--solver", "solver.id", solver);
        take_s("--variant", "solver.variant", variant);
        take_s("--prior", "solver.prior", prior);
        take_s("--pilot", "data.pilot", pilot);
        take_s("--weights", "solver.weights", weights_path);
        take_i("--kfd", "solver.kfd", k_fd);
        take_d("--lambda", "solver.lambda", lambda);
        take_d("--rho", "solver.rho", rho);
        take_d("--gamma", "solver.gamma", gamma);
        take_d("--tol", "solver.tol", tol);
        take_d("--sigma-floor", "solver.sigma_floor", sigma_floor);
        take_i("--iters", "solver.iters", iters);
        take_i("--stages", "solver.stages", n_stages);
        take_i("--paths", "data.paths", paths);
        if (app->count("--seed") == 0)
            seed = static_cast<uint64_t>(kv_get_int(m, "data.seed", static_cast<int>(seed)));
        if (app->count("--noise-seed") == 0)
            noise_seed =
                static_cast<uint64_t>(kv_get_int(m, "data.noise_seed", static_cast<int>(noise_seed)));
    }

    SolverSpec spec() const {
        SolverSpec s;
        s.id = solver_id_from_string(solver);
        s.temporal_mode = temporal_mode_from_string(variant);
        s.prior = prior_kind_from_string(prior);
        s.n_iter = n_stages;
        s.lambda = lambda;
        s.rho = rho;
        s.gamma = gamma;
        s.max_iter = iters;
        s.tol = tol;
        s.sigma_floor = sigma_floor;
        s.init_prior = init_prior;
        if (s.prior == PriorKind::ResidualDenoiser || !weights_path.empty()) {
            if (weights_path.empty())
                throw std::runtime_error("--prior denoiser requires --weights PATH");
            s.weights = std::make_shared<DenoiserWeights>(load_weights(weights_path));
        }
        return s;
    }

    void echo(const SystemConfig& sys, std::ostream& os = std::cout) const {
        KvMap m;
        config_to_kv(sys, m);
        m["solver.id"] = solver;
        m["solver.variant"] = variant;
        m["solver.prior"] = prior;
        m["solver.kfd"] = std::to_string(k_fd);
        m["solver.lambda"] = std::to_string(lambda);
        m["solver.rho"] = std::to_string(rho);
        m["solver.gamma"] = std::to_string(gamma);
        m["solver.tol"] = std::to_string(tol);
        m["solver.iters"] = std::to_string(iters);
        m["solver.stages"] = std::to_string(n_stages);
        m["data.pilot"] = pilot;
        m["data.paths"] = std::to_string(paths);
        m["data.seed"] = std::to_string(seed);
        m["data.noise_seed"] = std::to_string(noise_seed);
        if (!weights_path.empty()) m["solver.weights"] = weights_path;
        for (const auto& [k, v] : m) os << "# " << k << " = " << v << "\n";
    }
};

std::vector<double> parse_snr_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "inf" || tok == "noiseless")
            out.push_back(kNoiselessSnrDb);
        else
            out.push_back(std::stod(tok));
    }
    require(!out.empty(), "empty SNR list");
    return out;
}

int cmd_gen_data(const std::string& config_path, const std::string& out_path, int n_samples,
                 uint64_t seed, int n_paths, bool on_grid) {
    const KvMap m = merged_kv(config_path);
    SystemConfig sys = config_from_kv(m);
    Scenario sc;
    sc.on_grid = on_grid;
    KvMap sidecar;
    sidecar["gen.seed"] = std::to_string(seed);
    sidecar["gen.paths"] = std::to_string(n_paths);
    sidecar["gen.on_grid"] = on_grid ? "1" : "0";

    KvMap echo;
    config_to_kv(sys, echo);
    echo.insert(sidecar.begin(), sidecar.end());
    echo["gen.samples"] = std::to_string(n_samples);
    echo_kv(echo);

    DatasetWriter w(out_path, sys, static_cast<uint64_t>(n_samples), sidecar);
    for (int i = 0; i < n_samples; ++i) {
        const uint64_t s = mix64(seed ^ mix64(static_cast<uint64_t>(i)));
        w.append(synthesize_window(sample_paths(s, n_paths, sc, sys), sys));
    }
    w.finalize();
    std::cout << "wrote " << n_samples << " samples to " << out_path << "\n";
    return 0;
}

ChannelWindow sample_for_run(const CommonArgs& args, SystemConfig& sys,
                             const std::string& data_path, int sample_index) {
    if (!data_path.empty()) {
        DatasetReader reader(data_path);
        require(sample_index >= 0 && static_cast<uint64_t>(sample_index) < reader.n_samples(),
                "sample index out of range for dataset");
        sys = reader.config();
        return reader.read_sample(static_cast<uint64_t>(sample_index));
    }
    Scenario sc;
    sc.on_grid = args.on_grid;
    const uint64_t s = mix64(args.seed ^ mix64(static_cast<uint64_t>(sample_index)));
    return synthesize_window(sample_paths(s, args.paths, sc, sys), sys);
}

int cmd_run(const CommonArgs& args, const std::string& data_path, int sample_index,
            double snr_db, int offset) {
    const KvMap m = merged_kv(args.config_path);
    SystemConfig sys = config_from_kv(m);
    const ChannelWindow h = sample_for_run(args, sys, data_path, sample_index);
    args.echo(sys);

    ExperimentConfig cfg;
    cfg.system = sys;
    cfg.pilot = pilot_kind_from_string(args.pilot);
    cfg.k_fd = args.k_fd;
    cfg.solver = args.spec();
    cfg.snr_db = {snr_db};
    cfg.noise_seed = args.noise_seed;
    const DictionarySet dict = build_dictionaries(sys, 1, args.k_fd);

    std::cout << "sample " << sample_index << "  snr "
              << (std::isinf(snr_db) ? std::string("inf") : std::to_string(snr_db)) << " dB\n";
    std::cout << "offset  nmse_db   iters\n";
    if (offset >= 0) {
        const PilotSchedule sched = cfg.pilot == PilotKind::Mcr
                                        ? mcr_schedule(sys, offset)
                                        : standard_schedule(sys, offset);
        const ObservationWindow y = observe(h, sched, snr_db, args.noise_seed);
        const ReconResult res = reconstruct(y, dict, cfg.solver);
        std::printf("%6d  %8.3f  %6d\n", offset, nmse_db(res.h_hat, h), res.iterations);
        return 0;
    }
    const OffsetEvaluation ev = evaluate_all_offsets(h, dict, cfg, sample_index, snr_db);
    for (const ResultRecord& r : ev.records) {
        if (r.offset < 0) continue;
        if (r.failed)
            std::printf("%6d  %8s  %6s\n", r.offset, "failed", "-");
        else
            std::printf("%6d  %8.3f  %6d\n", r.offset, r.nmse_db, r.iters);
    }
    std::printf("  mean  %8.3f  (linear-scale mean over %d offsets, %d failures)\n",
                ev.aggregate_nmse_db, cfg.system.pilot_blocks() - ev.failures, ev.failures);
    return ev.failures == 0 ? 0 : 2;
}

int cmd_sweep(const CommonArgs& args, const std::string& data_path, const std::string& snr_list,
              int n_samples, int jobs, const std::string& out_dir) {
    const KvMap m = merged_kv(args.config_path);
    ExperimentConfig cfg;
    cfg.system = config_from_kv(m);
    cfg.pilot = pilot_kind_from_string(args.pilot);
    cfg.k_fd = args.k_fd;
    cfg.solver = args.spec();
    cfg.snr_db = parse_snr_list(snr_list);
    cfg.n_samples = n_samples;
    cfg.n_paths = args.paths;
    cfg.scenario.on_grid = args.on_grid;
    cfg.data_seed = args.seed;
    cfg.noise_seed = args.noise_seed;
    cfg.dataset_path = data_path;
    cfg.out_dir = out_dir;
    cfg.jobs = jobs;
    if (!data_path.empty()) cfg.system = DatasetReader(data_path).config();
    args.echo(cfg.system);
    std::cout << "# sweep.snr = " << snr_list << "\n# sweep.samples = " << n_samples
              << "\n# sweep.jobs = " << jobs << "\n";

    const SweepOutcome out = run_sweep(cfg);
    std::cout << "rows written: " << out.rows_written << " (skipped via manifest: "
              << out.rows_skipped << ", failures: " << out.failures << ")\n"
              << "csv: " << out.csv_path << "\nsummary: " << out.summary_path << "\n";
    return out.failures == 0 ? 0 : 2;
}

int cmd_tune(const CommonArgs& args, const std::string& snr_list, int n_samples,
             const std::string& lg, const std::string& rg, const std::string& gg,
             const std::string& ig) {
    const KvMap m = merged_kv(args.config_path);
    const SystemConfig sys = config_from_kv(m);
    args.echo(sys);
    const SolverId id = solver_id_from_string(args.solver);
    const std::vector<double> snrs = parse_snr_list(snr_list);

    HyperGrid grid = HyperGrid::defaults(id);
    auto parse_list = [](const std::string& s) {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        return v;
    };
    if (!lg.empty()) grid.lambdas = parse_list(lg);
    if (!rg.empty()) grid.rhos = parse_list(rg);
    if (!gg.empty()) grid.gammas = parse_list(gg);
    if (!ig.empty()) {
        grid.iters.clear();
        for (double v : parse_list(ig)) grid.iters.push_back(static_cast<int>(v));
    }

    const DictionarySet dict = build_dictionaries(sys, 1, args.k_fd);
    Scenario sc;
    sc.on_grid = args.on_grid;
    std::vector<DevCase> dev;
    for (int i = 0; i < n_samples; ++i) {
        const uint64_t s = mix64(args.seed ^ mix64(static_cast<uint64_t>(i)));
        ChannelWindow h = synthesize_window(sample_paths(s, args.paths, sc, sys), sys);
        const PilotSchedule sched =
            pilot_kind_from_string(args.pilot) == PilotKind::Mcr
                ? mcr_schedule(sys, i % sys.pilot_blocks())
                : standard_schedule(sys, i % sys.pilot_blocks());
        const double snr = snrs[static_cast<size_t>(i) % snrs.size()];
        ObservationWindow y = observe(h, sched, snr,
                                      task_noise_seed(args.noise_seed, i, sched.offset, 0));
        dev.push_back({std::move(h), std::move(y)});
    }
    const TunedParams best = tune_hyperparams(dev, id, grid, dict,
                                              temporal_mode_from_string(args.variant));
    std::printf("best: lambda=%g rho=%g gamma=%g iters=%d  mean_nmse=%.3f dB\n", best.lambda,
                best.rho, best.gamma, best.iters, best.mean_nmse_db);
    return 0;
}

int cmd_pilots(const std::string& config_path, const std::string& kind, int offset, bool full) {
    const KvMap m = merged_kv(config_path);
    const SystemConfig sys = config_from_kv(m);
    const PilotKind pk = pilot_kind_from_string(kind);
    const PilotSchedule sched =
        pk == PilotKind::Mcr ? mcr_schedule(sys, offset) : standard_schedule(sys, offset);
    std::cout << "# schedule: " << serialize_schedule(sched) << "\n";
    std::cout << "pattern " << kind << ", K=" << sched.k << ", M_p=" << sched.m_p
              << ", T_w=" << sched.t_w << ", offset=" << sched.offset << "\n";
    std::printf("covering radius: %.6f (standard at same offset: %.6f)\n",
                covering_radius(sched, sys), covering_radius(standard_schedule(sys, offset), sys));
    if (full)
        for (int t = 0; t < sched.t_w; ++t)
            std::printf("t=%2d  block %2d  subcarriers [%d, %d]\n", t, sched.block_at(t),
                        sched.omega_start(t), sched.omega_start(t) + sched.m_p - 1);
    return 0;
}

int cmd_weights_init(const std::string& out_path, uint64_t seed, int hidden, int k_theta,
                     int k_tau, int k_t, int knots, double range, const std::string& padding) {
    DenoiserSpec spec;
    spec.hidden = hidden;
    spec.k_theta = k_theta;
    spec.k_tau = k_tau;
    spec.k_t = k_t;
    spec.grid.n_knots = knots;
    spec.grid.range = range;
    spec.padding = padding == "zero_time" ? PaddingMode::ZeroTime : PaddingMode::CircularTime;
    save_weights(random_weights(seed, spec), out_path);
    std::cout << "# weights.seed = " << seed << "\nwrote " << out_path << " (hidden=" << hidden
              << ", kernel=" << k_theta << "x" << k_tau << "x" << k_t << ", padding=" << padding
              << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify: the invariant self-check suite.

struct VerifyReport {
    int failures = 0;
    void check(const std::string& name, double measured, double tol) {
        const bool ok = measured < tol;
        if (!ok) ++failures;
        std::printf("[%s] %-46s measured=%.3e tol=%.0e\n", ok ? "PASS" : "FAIL", name.c_str(),
                    measured, tol);
    }
};

int cmd_verify(const std::string& inject_fault) {
    VerifyReport rep;
    SystemConfig sys; // paper geometry

    for (int k_fd : {1, 2, 3}) {
        DictionarySet dict = build_dictionaries(sys, 1, k_fd);
        if (inject_fault == "ffd-scale") dict.inject_fd_scale_fault(1.0 + 1e-6);
        rep.check("f_sa unitarity (k_fd=" + std::to_string(k_fd) + ")",
                  dict.sa_unitarity_defect(), 1e-12);
        const CMat ffd = dict.f_fd_dense();
        rep.check("f_fd row orthonormality (k_fd=" + std::to_string(k_fd) + ")",
                  (ffd * ffd.adjoint() - CMat::Identity(sys.n_f, sys.n_f)).cwiseAbs().maxCoeff(),
                  1e-12);
    }

    {
        DictionarySet dict = build_dictionaries(sys, 1, 3);
        if (inject_fault == "ffd-scale") dict.inject_fd_scale_fault(1.0 + 1e-6);
        double worst = 0.0;
        for (PilotKind kind : {PilotKind::Standard, PilotKind::Mcr})
            for (const PilotSchedule& s : enumerate_offsets(sys, kind))
                for (int t = 0; t < s.t_w; ++t) {
                    const CMat a = dict.sensing_matrix(s.omega(t));
                    worst = std::max(worst, (a * a.adjoint() - CMat::Identity(s.m_p, s.m_p))
                                                .cwiseAbs()
                                                .maxCoeff());
                }
        rep.check("sensing rows orthonormal (all offsets/patterns)", worst, 1e-12);

        Rng rng(11);
        ChannelWindow h(sys);
        for (int t = 0; t < sys.t_w; ++t)
            for (int r = 0; r < sys.n_rx(); ++r)
                for (int f = 0; f < sys.n_f; ++f) h.data(r, f, t) = rng.cgauss();
        rep.check("analysis/synthesis round trip",
                  rel_error(synthesis(analysis(h, dict), dict).data, h.data), 1e-12);
    }

    {
        // DC closed form vs dense normal equations on a small geometry.
        SystemConfig tiny;
        tiny.n_v = 2;
        tiny.n_h = 2;
        tiny.n_pol = 1;
        tiny.n_f = 12;
        tiny.pilot_block = 4;
        tiny.t_w = 3;
        double worst = 0.0;
        for (int k_fd : {1, 2}) {
            const DictionarySet dict = build_dictionaries(tiny, 1, k_fd);
            const PilotSchedule sched = standard_schedule(tiny, 1);
            Rng rng(21);
            ObservationWindow y;
            y.data = Tensor3(tiny.n_rx(), sched.m_p, tiny.t_w);
            for (int t = 0; t < tiny.t_w; ++t)
                for (int r = 0; r < tiny.n_rx(); ++r)
                    for (int p = 0; p < sched.m_p; ++p) y.data(r, p, t) = rng.cgauss();
            y.schedule = sched;
            y.config = tiny;
            y.sigma.assign(static_cast<size_t>(tiny.t_w), 0.4);
            DdaTensor v(dict.n_theta(), dict.n_tau(), tiny.t_w, Domain::Time);
            for (int t = 0; t < tiny.t_w; ++t)
                for (int i = 0; i < dict.n_theta(); ++i)
                    for (int j = 0; j < dict.n_tau(); ++j) v.data(i, j, t) = rng.cgauss();
            DcParams params;
            params.rho = 0.7;
            params.sigma = y.sigma;
            const DdaTensor fast = dc_update(v, y, dict, sched, params);
            DdaTensor oracle(dict.n_theta(), dict.n_tau(), tiny.t_w, Domain::Time);
            for (int t = 0; t < tiny.t_w; ++t) {
                const double alpha = params.rho * 0.4 * 0.4;
                const CMat a = dict.sensing_matrix(sched.omega(t));
                const CMat mm =
                    a.adjoint() * a / alpha + CMat::Identity(dict.n_tau(), dict.n_tau());
                const CMat rhs =
                    dict.f_sa().adjoint() * y.data.slice(t) * a / alpha + v.data.slice(t);
                oracle.data.slice(t) =
                    mm.transpose().partialPivLu().solve(rhs.transpose()).transpose();
            }
            worst = std::max(worst, rel_error(fast.data, oracle.data));
        }
        rep.check("closed-form DC vs dense solve", worst, 1e-8);
    }

    {
        // ADMM iterates == unfolded stage iterates, small geometry.
        SystemConfig small = SystemConfig::small_test();
        const DictionarySet dict = build_dictionaries(small, 1, 1);
        const PilotSchedule sched = standard_schedule(small, 0);
        Scenario sc;
        const ChannelWindow h = synthesize_window(sample_paths(5, 4, sc, small), small);
        const ObservationWindow y = observe(h, sched, 10.0, 6);
        std::vector<Tensor3> a_states, u_states;
        AdmmOptions o;
        o.lambda = 0.3;
        o.rho = 0.7;
        o.max_iter = 8;
        o.tol = 1e-15;
        admm_solve(y, dict, sched, o, TemporalMode::Doppler3d,
                   [&](const SolverState& s) { a_states.push_back(s.x_tilde.data); });
        VariantConfig variant;
        variant.n_iter = 8;
        variant.k_fd = 1;
        UnfoldedParams p;
        p.rho = 0.7;
        p.gamma = 1.0;
        p.stage_priors.assign(8, PriorOperator::soft(0.3));
        unfolded_forward(y, dict, sched, variant, p,
                         [&](const SolverState& s) { u_states.push_back(s.x_tilde.data); });
        double worst = 0.0;
        for (size_t i = 0; i < a_states.size() && i < u_states.size(); ++i) {
            for (Eigen::Index t = 0; t < a_states[i].n2(); ++t)
                worst = std::max(
                    worst, (a_states[i].slice(t) - u_states[i].slice(t)).cwiseAbs().maxCoeff());
        }
        rep.check("ADMM iterates == unfolded stage iterates", worst, 1e-10);
    }

    {
        DenoiserSpec spec;
        spec.hidden = 4;
        spec.k_tau = 5;
        DenoiserWeights w = random_weights(77, spec);
        std::fill(w.conv2.w.begin(), w.conv2.w.end(), 0.0);
        std::fill(w.conv2.bias.begin(), w.conv2.bias.end(), 0.0);
        DdaTensor u(6, 12, 5, Domain::Doppler);
        Rng rng(31);
        for (int t = 0; t < 5; ++t)
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 12; ++j) u.data(i, j, t) = rng.cgauss();
        double dev = 0.0;
        const DdaTensor out = apply_denoiser(u, w);
        for (Eigen::Index t = 0; t < u.data.n2(); ++t)
            dev = std::max(dev, (out.data.slice(t) - u.data.slice(t)).cwiseAbs().maxCoeff());
        rep.check("denoiser residual identity (zero conv2)", dev, 1e-15);
    }

    if (rep.failures > 0) {
        std::cout << rep.failures << " check(s) failed\n";
        return 1;
    }
    std::cout << "all checks passed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ddarec: DDA-domain channel reconstruction from frequency-hopping pilots"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "synthesize a channel dataset");
    std::string gen_config, gen_out = "channels.dda";
    int gen_samples = 10, gen_paths = 8;
    uint64_t gen_seed = 1;
    bool gen_on_grid = false;
    gen->add_option("--config", gen_config);
    gen->add_option("--out", gen_out);
    gen->add_option("--samples", gen_samples)->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--paths", gen_paths)->check(CLI::PositiveNumber);
    gen->add_flag("--on-grid", gen_on_grid);

    // run
    auto* run = app.add_subcommand("run", "reconstruct one sample and report NMSE per offset");
    CommonArgs run_args;
    run_args.attach(run);
    std::string run_data;
    int run_sample = 0, run_offset = -1;
    double run_snr = 10.0;
    run->add_option("--data", run_data, "dataset file (synthesized sample when omitted)");
    run->add_option("--sample", run_sample);
    run->add_option("--snr", run_snr, "SNR in dB (inf = noiseless)");
    run->add_option("--offset", run_offset, "single pilot offset (-1 = all offsets)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "NMSE sweep over (snr x sample x offset)");
    CommonArgs sweep_args;
    sweep_args.attach(sweep);
    std::string sweep_data, sweep_snr = "0,10,20", sweep_out = "out";
    int sweep_samples = 4, sweep_jobs = 0;
    sweep->add_option("--data", sweep_data);
    sweep->add_option("--snr", sweep_snr, "comma-separated dB list; inf allowed");
    sweep->add_option("--samples", sweep_samples)->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = hardware)");
    sweep->add_option("--out", sweep_out, "output directory");

    // tune
    auto* tune = app.add_subcommand("tune", "grid-search solver hyperparameters");
    CommonArgs tune_args;
    tune_args.attach(tune);
    std::string tune_snr = "10", tune_lg, tune_rg, tune_gg, tune_ig;
    int tune_samples = 2;
    tune->add_option("--snr", tune_snr);
    tune->add_option("--samples", tune_samples)->check(CLI::PositiveNumber);
    tune->add_option("--grid-lambda", tune_lg, "comma-separated lambda grid");
    tune->add_option("--grid-rho", tune_rg);
    tune->add_option("--grid-gamma", tune_gg);
    tune->add_option("--grid-iters", tune_ig);

    // pilots
    auto* pilots = app.add_subcommand("pilots", "inspect pilot schedules");
    std::string pil_config, pil_kind = "standard";
    int pil_offset = 0;
    bool pil_full = false;
    pilots->add_option("--config", pil_config);
    pilots->add_option("--pilot", pil_kind)->check(CLI::IsMember({"standard", "mcr"}));
    pilots->add_option("--offset", pil_offset);
    pilots->add_flag("--full", pil_full, "print the per-snapshot observed blocks");

    // verify
    auto* verify = app.add_subcommand("verify", "run the invariant self-checks");
    std::string verify_inject;
    verify->add_option("--inject-fault", verify_inject,
                       "test hook: 'ffd-scale' perturbs the delay dictionary scaling")
        ->check(CLI::IsMember({"ffd-scale"}));

    // weights-init
    auto* winit = app.add_subcommand("weights-init", "write randomly initialized denoiser weights");
    std::string w_out = "weights.ddw", w_padding = "circular_time";
    uint64_t w_seed = 1;
    int w_hidden = 16, w_kt = 3, w_ktau = 11, w_ktheta = 3, w_knots = 31;
    double w_range = 3.0;
    winit->add_option("--out", w_out);
    winit->add_option("--seed", w_seed);
    winit->add_option("--hidden", w_hidden)->check(CLI::PositiveNumber);
    winit->add_option("--k-theta", w_ktheta);
    winit->add_option("--k-tau", w_ktau);
    winit->add_option("--k-t", w_kt);
    winit->add_option("--knots", w_knots);
    winit->add_option("--range", w_range);
    winit->add_option("--padding", w_padding)
        ->check(CLI::IsMember({"circular_time", "zero_time"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage/config error
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_config, gen_out, gen_samples, gen_seed, gen_paths, gen_on_grid);
        if (run->parsed()) {
            run_args.merge_file(run, merged_kv(run_args.config_path));
            return cmd_run(run_args, run_data, run_sample, run_snr, run_offset);
        }
        if (sweep->parsed()) {
            sweep_args.merge_file(sweep, merged_kv(sweep_args.config_path));
            return cmd_sweep(sweep_args, sweep_data, sweep_snr, sweep_samples, sweep_jobs,
                             sweep_out);
        }
        if (tune->parsed()) {
            tune_args.merge_file(tune, merged_kv(tune_args.config_path));
            return cmd_tune(tune_args, tune_snr, tune_samples, tune_lg, tune_rg, tune_gg, tune_ig);
        }
        if (pilots->parsed()) return cmd_pilots(pil_config, pil_kind, pil_offset, pil_full);
        if (verify->parsed()) return cmd_verify(verify_inject);
        if (winit->parsed())
            return cmd_weights_init(w_out, w_seed, w_hidden, w_ktheta, w_ktau, w_kt, w_knots,
                                    w_range, w_padding);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
