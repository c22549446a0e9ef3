// SPDX-License-Identifier: Apache-2.0

#include "ddarec/dataset.hpp"

#include <cstring>

namespace dda {

namespace {

constexpr char kMagic[8] = {'D', 'D', 'A', 'C', 'H', 'N', '0', '1'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kDtypeComplex64 = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& is) {
    uint32_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("dataset file truncated");
    return v;
}
uint64_t read_u64(std::istream& is) {
    uint64_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("dataset file truncated");
    return v;
}

size_t sample_floats(const SystemConfig& cfg) {
    return 2ull * static_cast<size_t>(cfg.n_rx()) * cfg.n_f * cfg.t_w;
}

} // namespace

DatasetWriter::DatasetWriter(const std::string& path, const SystemConfig& cfg, uint64_t n_samples,
                             KvMap sidecar_extra)
    : path_(path), cfg_(cfg), n_samples_(n_samples) {
    cfg.validate();
    os_.open(path, std::ios::binary | std::ios::trunc);
    if (!os_) throw std::runtime_error("cannot open dataset file for writing: " + path);
    os_.write(kMagic, 8);
    write_u32(os_, kVersion);
    write_u32(os_, kDtypeComplex64);
    write_u32(os_, static_cast<uint32_t>(cfg.n_rx()));
    write_u32(os_, static_cast<uint32_t>(cfg.n_f));
    write_u32(os_, static_cast<uint32_t>(cfg.t_w));
    write_u64(os_, n_samples);
    index_.assign(n_samples, 0);
    for (uint64_t i = 0; i < n_samples; ++i) write_u64(os_, 0); // index placeholder

    KvMap meta = std::move(sidecar_extra);
    config_to_kv(cfg_, meta);
    meta["dataset.n_samples"] = std::to_string(n_samples);
    meta["dataset.dtype"] = "complex64";
    std::ofstream ms(path + ".meta", std::ios::trunc);
    if (!ms) throw std::runtime_error("cannot open sidecar for writing: " + path + ".meta");
    for (const auto& [k, v] : meta) ms << k << " = " << v << "\n";
}

DatasetWriter::~DatasetWriter() {
    try {
        finalize();
    } catch (...) {
        // destructor must not throw; an explicit finalize() reports errors
    }
}

void DatasetWriter::append(const ChannelWindow& w) {
    require(!finalized_, "DatasetWriter: already finalized");
    require(written_ < n_samples_, "DatasetWriter: more samples than declared");
    require(w.data.n0() == cfg_.n_rx() && w.data.n1() == cfg_.n_f && w.data.n2() == cfg_.t_w,
            "DatasetWriter: window shape does not match dataset config");
    index_[written_] = written_ * sample_floats(cfg_) * sizeof(float);
    std::vector<float> buf;
    buf.reserve(sample_floats(cfg_));
    for (int r = 0; r < cfg_.n_rx(); ++r)
        for (int f = 0; f < cfg_.n_f; ++f)
            for (int t = 0; t < cfg_.t_w; ++t) {
                const Complex v = w.data(r, f, t);
                buf.push_back(static_cast<float>(v.real()));
                buf.push_back(static_cast<float>(v.imag()));
            }
    os_.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!os_) throw std::runtime_error("dataset write failed: " + path_);
    ++written_;
}

void DatasetWriter::finalize() {
    if (finalized_) return;
    require(written_ == n_samples_, "DatasetWriter: sample count mismatch at finalize");
    os_.seekp(8 + 4 + 4 + 12 + 8);
    for (uint64_t off : index_) write_u64(os_, off);
    os_.flush();
    if (!os_) throw std::runtime_error("dataset finalize failed: " + path_);
    os_.close();
    finalized_ = true;
}

DatasetReader::DatasetReader(const std::string& path) : path_(path) {
    is_.open(path, std::ios::binary);
    if (!is_) throw std::runtime_error("cannot open dataset file: " + path);
    char magic[8];
    if (!is_.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("dataset magic mismatch: " + path);
    if (read_u32(is_) != kVersion) throw std::runtime_error("dataset version mismatch");
    if (read_u32(is_) != kDtypeComplex64) throw std::runtime_error("dataset dtype must be complex64");
    const uint32_t n_rx = read_u32(is_);
    const uint32_t n_f = read_u32(is_);
    const uint32_t t_w = read_u32(is_);
    const uint64_t n_samples = read_u64(is_);
    index_.resize(n_samples);
    for (uint64_t i = 0; i < n_samples; ++i) index_[i] = read_u64(is_);
    payload_start_ = is_.tellg();

    sidecar_ = parse_kv_file(path + ".meta");
    cfg_ = config_from_kv(sidecar_);
    require(cfg_.n_rx() == static_cast<int>(n_rx) && cfg_.n_f == static_cast<int>(n_f) &&
                cfg_.t_w == static_cast<int>(t_w),
            "dataset header dims disagree with sidecar config");
}

ChannelWindow DatasetReader::read_sample(uint64_t i) {
    require(i < index_.size(), "DatasetReader: sample index out of range");
    std::vector<float> buf(sample_floats(cfg_));
    is_.seekg(payload_start_ + static_cast<std::streamoff>(index_[i]));
    if (!is_.read(reinterpret_cast<char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float))))
        throw std::runtime_error("dataset file truncated reading sample " + std::to_string(i));
    ChannelWindow w(cfg_);
    size_t q = 0;
    for (int r = 0; r < cfg_.n_rx(); ++r)
        for (int f = 0; f < cfg_.n_f; ++f)
            for (int t = 0; t < cfg_.t_w; ++t) {
                w.data(r, f, t) = Complex(buf[q], buf[q + 1]);
                q += 2;
            }
    if (!w.data.all_finite())
        throw std::runtime_error("dataset sample " + std::to_string(i) + " has non-finite entries");
    return w;
}

} // namespace dda
