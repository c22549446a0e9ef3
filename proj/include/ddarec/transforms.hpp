// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "ddarec/channel_sim.hpp"
#include "ddarec/config.hpp"
#include "ddarec/fft.hpp"
#include "ddarec/pilots.hpp"
#include "ddarec/types.hpp"

namespace dda {

/// Space-angle and delay dictionaries plus the fast-transform machinery
/// for applying them. Immutable after construction and shareable across
/// threads.
///
/// Conventions (fixed project-wide):
///   - analysis direction uses the e^{-j 2 pi m theta} kernel;
///   - f_sa = I_pol (x) (F_h (x) F_v), square and unitary (k_sa = 1);
///   - f_fd[f, n] = e^{+j 2 pi f n / n_tau} / sqrt(n_tau), i.e. the first
///     n_f rows of the inverse n_tau-point DFT; its columns are the sampled
///     delay atoms on the grid tau_n = n / (n_tau delta_f).
///
/// f_sa is materialized (n_rx x n_rx); products with f_fd and the sensing
/// matrices are FFT-based and never materialize an n_tau-sized matrix.
/// Dense equivalents (f_fd_dense, sensing_matrix) exist for tests and
/// oracles and must agree with the fast path to 1e-10.
class DictionarySet {
public:
    DictionarySet(const SystemConfig& cfg, int k_sa, int k_fd);

    const SystemConfig& config() const { return cfg_; }
    int k_sa() const { return k_sa_; }
    int k_fd() const { return k_fd_; }
    int n_theta() const { return n_theta_; }
    int n_tau() const { return n_tau_; }

    const CMat& f_sa() const { return f_sa_; }

    /// Measured max |(f_sa^H f_sa - I)| from construction time; the DC
    /// update refuses dictionaries where this exceeds 1e-12.
    double sa_unitarity_defect() const { return sa_defect_; }

    /// Dense [n_f x n_tau] delay dictionary (test/oracle path).
    CMat f_fd_dense() const;

    /// Rows omega of f_fd, shape [m x n_tau]. Rejects out-of-range or
    /// duplicate indices.
    CMat sensing_matrix(const std::vector<int>& omega) const;

    // Fast paths. All operate row-wise on contiguous row-major blocks.

    /// G [r x n_f] -> G f_fd [r x n_tau].
    CMat rows_times_ffd(CMatConstMap g) const;
    /// X [r x n_tau] -> X f_fd^H [r x n_f].
    CMat rows_times_ffd_adj(CMatConstMap x) const;
    /// D [r x m_p] -> D A_t [r x n_tau] for the block starting at omega_start.
    CMat rows_times_a(const CMat& d, int omega_start, int m_p) const;
    /// C [r x n_tau] -> C A_t^H [r x m_p].
    CMat rows_times_a_adj(CMatConstMap c, int omega_start, int m_p) const;
    /// C [r x n_tau] -> C A_t^H A_t [r x n_tau], fused (one forward and one
    /// backward FFT per row, masking the unobserved bins in between).
    CMat project_rows(CMatConstMap c, int omega_start, int m_p) const;

    /// Verification hook: rescales the delay dictionary by `factor`,
    /// deliberately breaking A_t A_t^H = I. Only the self-check command
    /// uses this to prove the invariant suite catches a bad dictionary.
    void inject_fd_scale_fault(double factor) { fd_scale_ *= factor; }

private:
    SystemConfig cfg_;
    int k_sa_;
    int k_fd_;
    int n_theta_;
    int n_tau_;
    double fd_scale_; // 1/sqrt(n_tau) unless fault-injected
    double sa_defect_;
    CMat f_sa_;
    std::shared_ptr<const Fft> fft_;
};

/// Builds the dictionary pair for this config. Only k_sa = 1 is supported
/// (the closed-form data-consistency update needs unitary f_sa); k_fd must
/// be one of {1, 2, 3}.
DictionarySet build_dictionaries(const SystemConfig& cfg, int k_sa = 1, int k_fd = 1);

/// X_t = f_sa^H H_t f_fd, per snapshot. Result is in the time domain.
DdaTensor analysis(const ChannelWindow& h, const DictionarySet& dict);

/// H_t = f_sa X_t f_fd^H. Input must be a time-domain tensor; convert
/// Doppler-domain tensors with to_time first.
ChannelWindow synthesis(const DdaTensor& x, const DictionarySet& dict);

/// Unitary DFT along the window axis (time -> Doppler). Parseval holds.
DdaTensor to_doppler(const DdaTensor& x);

/// Inverse of to_doppler (Doppler -> time).
DdaTensor to_time(const DdaTensor& x);

} // namespace dda
