// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ddarec/channel_sim.hpp"
#include "ddarec/transforms.hpp"
#include "ddarec/types.hpp"

namespace dda {

/// Scalars of the data-consistency subproblem.
struct DcParams {
    double rho = 0.3;          // ADMM penalty, > 0
    std::vector<double> sigma; // per-snapshot noise std deviations, > 0

    void validate(int t_w) const;

    /// sigma taken from the observation, floored at sigma_floor so the
    /// noiseless case (recorded sigma = 0) keeps alpha = rho sigma^2 finite.
    static DcParams from_observation(double rho, const ObservationWindow& y,
                                     double sigma_floor = 1e-6);
};

/// Exact minimizer of the per-snapshot data-consistency subproblem
///
///   min_X  1/(2 sigma_t^2) ||Y_t - f_sa X A_t^H||_F^2 + rho/2 ||X - V_t||_F^2,
///
/// evaluated in closed form. With alpha = rho sigma_t^2 and
/// C_t = V_t + f_sa^H Y_t A_t / alpha, the minimizer is
/// X_t = C_t - C_t A_t^H A_t / (alpha + 1); row-orthonormality of A_t turns
/// the full inverse into this rank-m_p correction. The implementation
/// evaluates the equivalent regrouping
///
///   X_t = V_t - (V_t A_t^H A_t) / (alpha + 1) + (f_sa^H Y_t A_t) / (alpha + 1)
///
/// (identical by A_t A_t^H = I) so that nothing of magnitude 1/alpha is
/// ever formed; with floored noiseless sigmas, 1/alpha reaches 1e12 and
/// the textbook grouping loses ~4 digits to cancellation. Still a
/// rank-m_p correction; no n_tau x n_tau matrix is ever materialized.
DdaTensor dc_update(const DdaTensor& v, const ObservationWindow& y, const DictionarySet& dict,
                    const PilotSchedule& sched, const DcParams& params);

/// dc_update with a zero penalty center (the network's initial DC layer).
DdaTensor dc_initial(const ObservationWindow& y, const DictionarySet& dict,
                     const PilotSchedule& sched, const DcParams& params);

/// Stationarity residual of the DC subproblem at x_out:
/// || (1/sigma_t^2) f_sa^H (f_sa X_t A_t^H - Y_t) A_t + rho (X_t - V_t) ||_F
/// summed over t and normalized by ||X||_F (0/0 returns 0). Evaluated
/// through the dense sensing matrices, independent of the fast path, so
/// it doubles as a test oracle.
double dc_residual_check(const DdaTensor& x_out, const DdaTensor& v, const ObservationWindow& y,
                         const DictionarySet& dict, const PilotSchedule& sched,
                         const DcParams& params);

} // namespace dda
