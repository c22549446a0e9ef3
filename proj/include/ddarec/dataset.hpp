// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ddarec/channel_sim.hpp"
#include "ddarec/kvconfig.hpp"

namespace dda {

// Channel dataset container: little-endian header (magic, version, dims,
// dtype = complex64), an index of per-sample byte offsets, then row-major
// [n_rx][n_f][t_w] complex64 payloads. A plain-text sidecar at
// <path>.meta records the generating config and seeds.

/// Streams samples to disk; finalize() (or the destructor) patches the
/// offset index into the header.
class DatasetWriter {
public:
    DatasetWriter(const std::string& path, const SystemConfig& cfg, uint64_t n_samples,
                  KvMap sidecar_extra = {});
    ~DatasetWriter();

    void append(const ChannelWindow& w);
    void finalize();

private:
    std::string path_;
    SystemConfig cfg_;
    uint64_t n_samples_;
    uint64_t written_ = 0;
    bool finalized_ = false;
    std::ofstream os_;
    std::vector<uint64_t> index_;
};

class DatasetReader {
public:
    explicit DatasetReader(const std::string& path);

    uint64_t n_samples() const { return index_.size(); }
    const SystemConfig& config() const { return cfg_; }
    const KvMap& sidecar() const { return sidecar_; }

    ChannelWindow read_sample(uint64_t i);

private:
    std::string path_;
    SystemConfig cfg_;
    KvMap sidecar_;
    std::vector<uint64_t> index_;
    std::ifstream is_;
    std::streampos payload_start_;
};

} // namespace dda
