// SPDX-License-Identifier: Apache-2.0

#include "ddarec/dc_core.hpp"

#include <cmath>

namespace dda {

void DcParams::validate(int t_w) const {
    require(rho > 0.0, "DcParams: rho must be positive");
    require(static_cast<int>(sigma.size()) == t_w, "DcParams: sigma must have t_w entries");
    for (double s : sigma) require(s > 0.0, "DcParams: all sigma_t must be positive");
}

DcParams DcParams::from_observation(double rho, const ObservationWindow& y, double sigma_floor) {
    require(sigma_floor > 0.0, "DcParams: sigma_floor must be positive");
    DcParams p;
    p.rho = rho;
    p.sigma.reserve(y.sigma.size());
    for (double s : y.sigma) p.sigma.push_back(std::max(s, sigma_floor));
    p.validate(static_cast<int>(y.sigma.size()));
    return p;
}

namespace {
void check_dc_inputs(const DdaTensor& v, const ObservationWindow& y, const DictionarySet& dict,
                     const PilotSchedule& sched, const DcParams& params) {
    require(v.domain == Domain::Time, "dc_update: penalty center must be a time-domain tensor");
    const int t_w = dict.config().t_w;
    require(v.data.n0() == dict.n_theta() && v.data.n1() == dict.n_tau() && v.data.n2() == t_w,
            "dc_update: center tensor shape mismatch");
    require(y.data.n0() == dict.config().n_rx() && y.data.n1() == sched.m_p &&
                y.data.n2() == t_w,
            "dc_update: observation shape mismatch");
    require(sched.n_f() == dict.config().n_f && sched.t_w == t_w,
            "dc_update: schedule does not match config");
    params.validate(t_w);
    require(dict.sa_unitarity_defect() < 1e-12,
            "dc_update: f_sa is not unitary; the closed form requires f_sa^H f_sa = I");
}
} // namespace

DdaTensor dc_update(const DdaTensor& v, const ObservationWindow& y, const DictionarySet& dict,
                    const PilotSchedule& sched, const DcParams& params) {
    check_dc_inputs(v, y, dict, sched, params);
    const int t_w = dict.config().t_w;
    DdaTensor x(dict.n_theta(), dict.n_tau(), t_w, Domain::Time);
    for (int t = 0; t < t_w; ++t) {
        const double sig = params.sigma[static_cast<size_t>(t)];
        const double alpha = params.rho * sig * sig;
        const double w = 1.0 / (alpha + 1.0);
        const int start = sched.omega_start(t);

        CMat g = dict.f_sa().adjoint() * y.data.slice(t); // [n_theta x m_p]
        const CMat ga = dict.rows_times_a(g, start, sched.m_p);
        const CMat pv = dict.project_rows(v.data.slice(t), start, sched.m_p);
        x.data.slice(t) = v.data.slice(t) - w * pv + w * ga;
    }
    return x;
}

DdaTensor dc_initial(const ObservationWindow& y, const DictionarySet& dict,
                     const PilotSchedule& sched, const DcParams& params) {
    DdaTensor zero(dict.n_theta(), dict.n_tau(), dict.config().t_w, Domain::Time);
    zero.data.setZero();
    return dc_update(zero, y, dict, sched, params);
}

double dc_residual_check(const DdaTensor& x_out, const DdaTensor& v, const ObservationWindow& y,
                         const DictionarySet& dict, const PilotSchedule& sched,
                         const DcParams& params) {
    check_dc_inputs(v, y, dict, sched, params);
    require(x_out.domain == Domain::Time && x_out.data.same_shape(v.data),
            "dc_residual_check: x_out shape mismatch");
    const int t_w = dict.config().t_w;
    double res_sq = 0.0;
    for (int t = 0; t < t_w; ++t) {
        const double inv_var = 1.0 / (params.sigma[static_cast<size_t>(t)] *
                                      params.sigma[static_cast<size_t>(t)]);
        const CMat a = dict.sensing_matrix(sched.omega(t));
        const CMat xt = x_out.data.slice(t);
        const CMat grad = inv_var * (dict.f_sa().adjoint() *
                                     (dict.f_sa() * (xt * a.adjoint()) - y.data.slice(t)) * a) +
                          params.rho * (xt - v.data.slice(t));
        res_sq += grad.squaredNorm();
    }
    const double xnorm = x_out.data.norm();
    if (xnorm == 0.0 && res_sq == 0.0) return 0.0;
    if (xnorm == 0.0) return std::sqrt(res_sq);
    return std::sqrt(res_sq) / xnorm;
}

} // namespace dda
