// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ddarec/config.hpp"
#include "ddarec/pilots.hpp"
#include "ddarec/rng.hpp"
#include "ddarec/types.hpp"

namespace dda {

/// One propagation path of the multipath superposition.
struct Path {
    Complex gain;                      // complex amplitude
    double delay = 0.0;                // [s], in [0, 1/delta_f)
    double doppler = 0.0;              // [Hz]
    double theta_v = 0.0;              // normalized vertical spatial frequency [cycles/element]
    double theta_h = 0.0;              // normalized horizontal spatial frequency
    std::vector<Complex> pol_weights;  // unit-norm, length n_pol

    void validate(const SystemConfig& cfg) const;
};

struct PathSet {
    std::vector<Path> paths;
    uint64_t seed = 0;
};

/// Ground-truth (or reconstructed) window in the time-frequency-space
/// domain: [n_rx x n_f x t_w].
struct ChannelWindow {
    Tensor3 data;
    SystemConfig config;

    ChannelWindow() = default;
    ChannelWindow(const SystemConfig& cfg)
        : data(cfg.n_rx(), cfg.n_f, cfg.t_w), config(cfg) {}
};

/// Pilot observations [n_rx x m_p x t_w] plus the per-snapshot noise
/// standard deviations and the schedule that produced them. sigma is 0
/// for noiseless observations; consumers floor it before dividing.
struct ObservationWindow {
    Tensor3 data;
    std::vector<double> sigma;
    PilotSchedule schedule;
    SystemConfig config;
};

/// Unit-norm DFT steering vector, element m = (1/sqrt(n)) exp(-j 2 pi m theta).
CVec steering_vector(double theta, int n);

/// Frequency response of an ideal delay, element f = exp(-j 2 pi f delta_f tau).
/// Rejects tau outside [0, 1/delta_f): such a delay aliases onto the grid.
CVec delay_response(double tau, const SystemConfig& cfg);

/// Receive-array response p (x) a_h (x) a_v for one path (vertical index fastest).
CVec array_response(const Path& p, const SystemConfig& cfg);

/// Superposition of all paths: H_t = sum_l beta_l e^{j 2 pi nu_l (t-1) dt} a_l d(tau_l)^T.
ChannelWindow synthesize_window(const PathSet& paths, const SystemConfig& cfg);

/// Parameter ranges for random path generation.
struct Scenario {
    double delay_fraction = 0.1;   // delays uniform in [0, delay_fraction/delta_f)
    double doppler_max = 13.0;     // [Hz]; ~4 km/h at 3.5 GHz, past the 40 ms Nyquist limit
    double decay_db = 9.0;         // expected power drop from first to last path [dB]
    bool on_grid = false;          // snap delay/Doppler/angles to the k_fd=1 dictionary grids
};

/// Deterministic path set for the given seed. Gains follow a decaying
/// power profile with uniform phase; delays, Dopplers and angles are
/// uniform over the scenario ranges. With on_grid set, parameters are
/// snapped to the k_fd=1 grids and the polarization weight is a single
/// randomly-phased basis vector, so each path maps to one dictionary atom.
PathSet sample_paths(uint64_t seed, int l, const Scenario& scenario, const SystemConfig& cfg);

/// Noiseless SNR marker for observe().
inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();

/// Masked observation Y_t = P_Omega_t(H_t) + N_t. Noise is circular complex
/// Gaussian; sigma_t^2 is set per snapshot so that mean |signal|^2 over the
/// observed entries divided by sigma_t^2 equals 10^(snr_db/10). Passing
/// kNoiselessSnrDb disables noise and records sigma_t = 0.
ObservationWindow observe(const ChannelWindow& h, const PilotSchedule& sched,
                          double snr_db, uint64_t noise_seed);

} // namespace dda
