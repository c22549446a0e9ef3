// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddarec/channel_sim.hpp"
#include "ddarec/metrics.hpp"
#include "ddarec/solvers.hpp"
#include "ddarec/transforms.hpp"

namespace dda {

/// Full description of one sweep: geometry, pilot pattern, solver, SNR
/// grid, sample count and seeds. Everything downstream is a deterministic
/// function of this struct.
struct ExperimentConfig {
    SystemConfig system;
    PilotKind pilot = PilotKind::Standard;
    int k_fd = 1;
    SolverSpec solver;
    std::vector<double> snr_db = {10.0}; // entries may be +inf (noiseless)
    int n_samples = 1;
    int n_paths = 8;
    Scenario scenario;
    uint64_t data_seed = 1;
    uint64_t noise_seed = 1;
    std::string dataset_path; // when set, samples are loaded instead of synthesized
    std::string out_dir = "out";
    int jobs = 0; // worker threads; 0 = hardware concurrency

    void validate() const;
};

struct ResultRecord {
    int sample_id = 0;
    int offset = 0; // -1 marks the per-sample aggregate over offsets
    double snr_db = 0.0;
    std::string solver;
    std::string variant;
    int k_fd = 1;
    std::string pilot;
    double nmse_db = 0.0;
    int iters = 0;
    double wall_s = 0.0;
    bool failed = false;
};

std::string csv_header();
std::string to_csv_row(const ResultRecord& r);

/// Runs the solver on every pilot starting offset of one sample and
/// appends an aggregate record (offset = -1) whose NMSE is the linear-scale
/// mean over the successful offsets, converted to dB afterwards. Solver
/// failures are kept as failed records and excluded from the aggregate.
struct OffsetEvaluation {
    std::vector<ResultRecord> records;
    double aggregate_nmse_db = 0.0;
    int failures = 0;
};

OffsetEvaluation evaluate_all_offsets(const ChannelWindow& h, const DictionarySet& dict,
                                      const ExperimentConfig& cfg, int sample_id, double snr_db);

/// Noise seed for one (sample, offset, snr-index) task; mixing the indices
/// this way keeps results independent of worker scheduling.
uint64_t task_noise_seed(uint64_t base, int sample_id, int offset, int snr_index);

struct SweepOutcome {
    std::string csv_path;
    std::string summary_path;
    uint64_t rows_written = 0;
    uint64_t rows_skipped = 0; // already present via the resume manifest
    int failures = 0;
};

/// Executes the (snr x sample x offset) product on a bounded worker pool,
/// appending CSV rows through a single serialized writer as tasks finish.
/// A manifest of completed task keys makes interrupted sweeps resumable:
/// rerunning completes only the missing tasks and yields the same row set.
/// Writes a summary JSON of per-(solver, pilot, variant, kfd, snr) means.
SweepOutcome run_sweep(const ExperimentConfig& cfg);

} // namespace dda
