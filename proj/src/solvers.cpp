// SPDX-License-Identifier: Apache-2.0

#include "ddarec/solvers.hpp"

#include <cmath>

#include "ddarec/metrics.hpp"

namespace dda {

const char* to_string(TemporalMode m) {
    switch (m) {
        case TemporalMode::Doppler3d: return "doppler3d";
        case TemporalMode::Time3d: return "time3d";
        default: return "time2d";
    }
}

TemporalMode temporal_mode_from_string(const std::string& s) {
    if (s == "doppler3d") return TemporalMode::Doppler3d;
    if (s == "time3d") return TemporalMode::Time3d;
    if (s == "time2d") return TemporalMode::Time2d;
    throw std::invalid_argument("unknown temporal mode: " + s);
}

const char* to_string(PriorKind k) {
    switch (k) {
        case PriorKind::Identity: return "identity";
        case PriorKind::SoftThreshold: return "soft";
        default: return "denoiser";
    }
}

PriorKind prior_kind_from_string(const std::string& s) {
    if (s == "identity") return PriorKind::Identity;
    if (s == "soft") return PriorKind::SoftThreshold;
    if (s == "denoiser") return PriorKind::ResidualDenoiser;
    throw std::invalid_argument("unknown prior kind: " + s);
}

const char* to_string(SolverId s) {
    switch (s) {
        case SolverId::Ls: return "ls";
        case SolverId::Fista: return "fista";
        case SolverId::Admm: return "admm";
        default: return "unfolded";
    }
}

SolverId solver_id_from_string(const std::string& s) {
    if (s == "ls") return SolverId::Ls;
    if (s == "fista") return SolverId::Fista;
    if (s == "admm") return SolverId::Admm;
    if (s == "unfolded") return SolverId::Unfolded;
    throw std::invalid_argument("unknown solver: " + s);
}

DdaTensor PriorOperator::apply(const DdaTensor& u, double rho) const {
    switch (kind) {
        case PriorKind::Identity:
            return u;
        case PriorKind::SoftThreshold: {
            require(lambda >= 0.0, "PriorOperator: lambda must be nonnegative");
            require(rho > 0.0, "PriorOperator: rho must be positive");
            DdaTensor out(u.data.n0(), u.data.n1(), u.data.n2(), u.domain);
            const double thr = lambda / rho;
            const Complex* src = u.data.data();
            Complex* dst = out.data.data();
            for (size_t i = 0; i < u.data.size(); ++i) dst[i] = soft_threshold(src[i], thr);
            return out;
        }
        case PriorKind::ResidualDenoiser:
            require(weights != nullptr, "PriorOperator: denoiser prior needs weights");
            return apply_denoiser(u, *weights);
    }
    throw std::logic_error("PriorOperator: unknown kind");
}

void SolverState::validate(double gamma_bound) const {
    require(x_tilde.data.same_shape(z_tilde.data) && x_tilde.data.same_shape(beta_tilde.data),
            "SolverState: tensors must share one shape");
    require(x_tilde.domain == z_tilde.domain && x_tilde.domain == beta_tilde.domain,
            "SolverState: tensors must share one domain");
    require(rho > 0.0, "SolverState: rho must be positive");
    require(gamma > 0.0 && gamma <= gamma_bound, "SolverState: gamma outside (0, bound]");
}

namespace {

double l1_norm(const Tensor3& t) {
    double s = 0.0;
    const Complex* p = t.data();
    for (size_t i = 0; i < t.size(); ++i) s += std::abs(p[i]);
    return s;
}

/// Data term of the window objective: sum_t ||Y_t - f_sa X_t A_t^H||_F^2 / (2 sigma_t^2).
double data_objective(const Tensor3& x_time, const ObservationWindow& y,
                      const DictionarySet& dict, const PilotSchedule& sched,
                      const std::vector<double>& sigma) {
    double obj = 0.0;
    for (int t = 0; t < sched.t_w; ++t) {
        const CMat xa = dict.rows_times_a_adj(x_time.slice(t), sched.omega_start(t), sched.m_p);
        const double r2 = (dict.f_sa() * xa - y.data.slice(t)).squaredNorm();
        const double s = sigma[static_cast<size_t>(t)];
        obj += r2 / (2.0 * s * s);
    }
    return obj;
}

DdaTensor zeros_like(const DictionarySet& dict, Domain dom) {
    DdaTensor t(dict.n_theta(), dict.n_tau(), dict.config().t_w, dom);
    t.data.setZero();
    return t;
}

DdaTensor diff(const DdaTensor& a, const DdaTensor& b) {
    return DdaTensor(a.data - b.data, a.domain);
}

void check_observation(const ObservationWindow& y, const DictionarySet& dict,
                       const PilotSchedule& sched) {
    require(y.data.n0() == dict.config().n_rx() && y.data.n1() == sched.m_p &&
                y.data.n2() == dict.config().t_w,
            "solver: observation shape does not match dictionary/schedule");
    require(sched.n_f() == dict.config().n_f, "solver: schedule does not match config");
}

} // namespace

ChannelWindow ls_estimate(const ObservationWindow& y, const DictionarySet& dict,
                          const PilotSchedule& sched) {
    check_observation(y, dict, sched);
    DdaTensor x(dict.n_theta(), dict.n_tau(), dict.config().t_w, Domain::Time);
    for (int t = 0; t < dict.config().t_w; ++t) {
        CMat g = dict.f_sa().adjoint() * y.data.slice(t);
        x.data.slice(t) = dict.rows_times_a(g, sched.omega_start(t), sched.m_p);
    }
    return synthesis(x, dict);
}

ReconResult admm_solve(const ObservationWindow& y, const DictionarySet& dict,
                       const PilotSchedule& sched, const AdmmOptions& opts, TemporalMode mode,
                       const StateObserver& observer) {
    check_observation(y, dict, sched);
    require(opts.lambda >= 0.0, "admm_solve: lambda must be nonnegative");
    require(opts.gamma > 0.0 && opts.gamma <= kMaxGamma, "admm_solve: gamma outside (0, 1.8]");
    require(opts.tol > 0.0, "admm_solve: tol must be positive");
    require(opts.max_iter >= 1, "admm_solve: max_iter must be >= 1");
    const DcParams params = DcParams::from_observation(opts.rho, y, opts.sigma_floor);

    const bool doppler = mode == TemporalMode::Doppler3d;
    const Domain dom = doppler ? Domain::Doppler : Domain::Time;
    const PriorOperator prox = PriorOperator::soft(opts.lambda);

    DdaTensor z = zeros_like(dict, dom);
    DdaTensor beta = zeros_like(dict, dom);
    Tensor3 x_time_last;

    ReconResult res;
    double obj_initial = 0.0;
    for (int n = 1; n <= opts.max_iter; ++n) {
        const DdaTensor zb = diff(z, beta);
        const DdaTensor v = doppler ? to_time(zb) : zb;
        DdaTensor x_time = dc_update(v, y, dict, sched, params);
        DdaTensor x = doppler ? to_doppler(x_time) : x_time;

        DdaTensor u(x.data + beta.data, dom);
        const DdaTensor z_prev = z;
        z = prox.apply(u, opts.rho);

        Tensor3 gap = x.data - z.data;
        const double primal_abs = gap.norm();
        gap *= Complex(opts.gamma, 0.0);
        beta.data += gap;

        const double xnorm = x.data.norm();
        const double primal = primal_abs / std::max(xnorm, 1e-300);
        const double dual = opts.rho * (z.data - z_prev.data).norm();
        const double obj =
            data_objective(x_time.data, y, dict, sched, params.sigma) + opts.lambda * l1_norm(x.data);

        res.trace.push_back({n, obj, primal, dual});
        res.iterations = n;
        x_time_last = std::move(x_time.data);

        if (observer) {
            SolverState st{x, z, beta, opts.rho, opts.gamma, opts.lambda, n};
            st.validate();
            observer(st);
        }
        if (n == 1)
            obj_initial = obj;
        else if (obj > opts.divergence_factor * obj_initial && obj_initial > 0.0)
            throw SolverDivergence("admm_solve: objective exceeded its divergence guard");

        // Converged once the split is closed and the auxiliary state has
        // stopped moving. The dual condition matters at lambda = 0, where
        // z tracks x exactly and the primal residual is identically zero.
        const double dual_rel = (z.data - z_prev.data).norm() / std::max(z.data.norm(), 1e-300);
        if (primal < opts.tol && (n > 1 && dual_rel < opts.tol)) {
            res.converged = true;
            break;
        }
    }
    res.h_hat = synthesis(DdaTensor(std::move(x_time_last), Domain::Time), dict);
    return res;
}

ReconResult fista_solve(const ObservationWindow& y, const DictionarySet& dict,
                        const PilotSchedule& sched, const FistaOptions& opts) {
    check_observation(y, dict, sched);
    require(opts.lambda >= 0.0, "fista_solve: lambda must be nonnegative");
    require(opts.tol > 0.0, "fista_solve: tol must be positive");
    require(opts.max_iter >= 1, "fista_solve: max_iter must be >= 1");
    // rho only enters through the floored sigmas here.
    const DcParams params = DcParams::from_observation(1.0, y, opts.sigma_floor);
    const int t_w = dict.config().t_w;

    // Back-projected data b_t = f_sa^H Y_t A_t, fixed over the iteration.
    Tensor3 b(dict.n_theta(), dict.n_tau(), t_w);
    for (int t = 0; t < t_w; ++t) {
        CMat g = dict.f_sa().adjoint() * y.data.slice(t);
        b.slice(t) = dict.rows_times_a(g, sched.omega_start(t), sched.m_p);
    }

    double lips = 0.0;
    for (double s : params.sigma) lips = std::max(lips, 1.0 / (s * s));
    const double step = 1.0 / lips;

    auto grad = [&](const DdaTensor& xd) {
        const DdaTensor xt = to_time(xd);
        DdaTensor g(dict.n_theta(), dict.n_tau(), t_w, Domain::Time);
        for (int t = 0; t < t_w; ++t) {
            const double s = params.sigma[static_cast<size_t>(t)];
            g.data.slice(t) =
                (dict.project_rows(xt.data.slice(t), sched.omega_start(t), sched.m_p) -
                 b.slice(t)) /
                (s * s);
        }
        return to_doppler(g);
    };
    auto objective = [&](const DdaTensor& xd) {
        const DdaTensor xt = to_time(xd);
        return data_objective(xt.data, y, dict, sched, params.sigma) +
               opts.lambda * l1_norm(xd.data);
    };
    auto prox_step = [&](const DdaTensor& point) {
        const DdaTensor g = grad(point);
        DdaTensor out(point.data.n0(), point.data.n1(), point.data.n2(), Domain::Doppler);
        const double thr = opts.lambda * step;
        for (Eigen::Index t = 0; t < out.data.n2(); ++t)
            for (Eigen::Index i = 0; i < out.data.n0(); ++i)
                for (Eigen::Index j = 0; j < out.data.n1(); ++j)
                    out.data(i, j, t) =
                        soft_threshold(point.data(i, j, t) - step * g.data(i, j, t), thr);
        return out;
    };

    // Monotone accelerated scheme: the proximal candidate is kept only if
    // it does not increase the objective (the restart event), but momentum
    // keeps extrapolating through the candidate, which preserves the
    // accelerated rate while guaranteeing a non-increasing trace.
    DdaTensor x = zeros_like(dict, Domain::Doppler);
    DdaTensor x_prev = x;
    DdaTensor momentum = x;
    double tk = 1.0;
    double f_curr = objective(x);
    const double f_guard = f_curr;

    ReconResult res;
    for (int k = 1; k <= opts.max_iter; ++k) {
        const DdaTensor cand = prox_step(momentum);
        const double f_cand = objective(cand);
        const double rel =
            (cand.data - x.data).norm() / std::max(cand.data.norm(), 1e-300);

        x_prev = std::move(x);
        if (f_cand <= f_curr) {
            x = cand;
            f_curr = f_cand;
        } else {
            x = x_prev; // reject the candidate, keep the best iterate
        }
        const double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        Tensor3 extr = cand.data - x.data;
        extr *= Complex(tk / tk1, 0.0);
        Tensor3 inertia = x.data - x_prev.data;
        inertia *= Complex((tk - 1.0) / tk1, 0.0);
        momentum = DdaTensor(x.data + extr + inertia, Domain::Doppler);
        tk = tk1;

        res.trace.push_back({k, f_curr, rel, 0.0});
        res.iterations = k;
        if (f_curr > opts.divergence_factor * f_guard && f_guard > 0.0)
            throw SolverDivergence("fista_solve: objective exceeded its divergence guard");
        if (rel < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.h_hat = synthesis(to_time(x), dict);
    return res;
}

ChannelWindow unfolded_forward(const ObservationWindow& y, const DictionarySet& dict,
                               const PilotSchedule& sched, const VariantConfig& variant,
                               const UnfoldedParams& params, const StateObserver& observer) {
    check_observation(y, dict, sched);
    variant.validate();
    require(static_cast<int>(params.stage_priors.size()) == variant.n_iter,
            "unfolded_forward: stage parameter count does not match n_iter");
    require(variant.k_fd == dict.k_fd(),
            "unfolded_forward: variant k_fd does not match the dictionary");
    require(params.gamma > 0.0 && params.gamma <= kMaxGamma,
            "unfolded_forward: gamma outside (0, 1.8]");
    if (variant.temporal_mode == TemporalMode::Time2d) {
        auto check_2d = [](const PriorOperator& p) {
            if (p.kind == PriorKind::ResidualDenoiser)
                require(p.weights && p.weights->conv1.k_t == 1 && p.weights->conv2.k_t == 1,
                        "unfolded_forward: time2d needs denoiser kernels with time extent 1");
        };
        for (const auto& p : params.stage_priors) check_2d(p);
        if (params.init_prior) check_2d(*params.init_prior);
    }

    const DcParams dc_params = DcParams::from_observation(params.rho, y, params.sigma_floor);
    const bool doppler = variant.temporal_mode == TemporalMode::Doppler3d;
    const Domain dom = doppler ? Domain::Doppler : Domain::Time;

    DdaTensor z = zeros_like(dict, dom);
    DdaTensor beta = zeros_like(dict, dom);

    if (params.init_prior) {
        // Initial DC reconstruction layer feeding the initialization
        // denoiser; the denoised tensor seeds the auxiliary state.
        DdaTensor x0 = dc_initial(y, dict, sched, dc_params);
        if (doppler) x0 = to_doppler(x0);
        z = params.init_prior->apply(x0, params.rho);
    }

    for (int n = 1; n <= variant.n_iter; ++n) {
        const DdaTensor zb = diff(z, beta);
        const DdaTensor v = doppler ? to_time(zb) : zb;
        DdaTensor x_time = dc_update(v, y, dict, sched, dc_params);
        DdaTensor x = doppler ? to_doppler(x_time) : std::move(x_time);

        DdaTensor u(x.data + beta.data, dom);
        z = params.stage_priors[static_cast<size_t>(n - 1)].apply(u, params.rho);

        Tensor3 gap = x.data - z.data;
        gap *= Complex(params.gamma, 0.0);
        beta.data += gap;

        if (observer) {
            SolverState st{x, z, beta, params.rho, params.gamma,
                           params.stage_priors[static_cast<size_t>(n - 1)].lambda, n};
            st.validate();
            observer(st);
        }
    }

    // Final DC layer from the most recent auxiliary and dual states.
    const DdaTensor zb = diff(z, beta);
    const DdaTensor v = doppler ? to_time(zb) : zb;
    const DdaTensor x_final = dc_update(v, y, dict, sched, dc_params);
    return synthesis(x_final, dict);
}

VariantConfig SolverSpec::variant(int dict_k_fd) const {
    VariantConfig v;
    v.temporal_mode = temporal_mode;
    v.n_iter = n_iter;
    v.k_fd = dict_k_fd;
    switch (prior) {
        case PriorKind::Identity: v.prior = PriorOperator::identity(); break;
        case PriorKind::SoftThreshold: v.prior = PriorOperator::soft(lambda); break;
        case PriorKind::ResidualDenoiser: v.prior = PriorOperator::denoiser(weights); break;
    }
    return v;
}

ReconResult reconstruct(const ObservationWindow& y, const DictionarySet& dict,
                        const SolverSpec& spec) {
    const PilotSchedule& sched = y.schedule;
    switch (spec.id) {
        case SolverId::Ls: {
            ReconResult r;
            r.h_hat = ls_estimate(y, dict, sched);
            r.iterations = 1;
            r.converged = true;
            return r;
        }
        case SolverId::Fista: {
            FistaOptions o;
            o.lambda = spec.lambda;
            o.max_iter = spec.max_iter;
            o.tol = spec.tol;
            o.sigma_floor = spec.sigma_floor;
            return fista_solve(y, dict, sched, o);
        }
        case SolverId::Admm: {
            AdmmOptions o;
            o.lambda = spec.lambda;
            o.rho = spec.rho;
            o.gamma = spec.gamma;
            o.max_iter = spec.max_iter;
            o.tol = spec.tol;
            o.sigma_floor = spec.sigma_floor;
            return admm_solve(y, dict, sched, o, spec.temporal_mode);
        }
        case SolverId::Unfolded: {
            const VariantConfig variant = spec.variant(dict.k_fd());
            UnfoldedParams p;
            p.rho = spec.rho;
            p.gamma = spec.gamma;
            p.sigma_floor = spec.sigma_floor;
            p.stage_priors.assign(static_cast<size_t>(variant.n_iter), variant.prior);
            if (spec.init_prior) p.init_prior = variant.prior;
            ReconResult r;
            r.h_hat = unfolded_forward(y, dict, sched, variant, p);
            r.iterations = variant.n_iter;
            r.converged = true;
            return r;
        }
    }
    throw std::logic_error("reconstruct: unknown solver id");
}

HyperGrid HyperGrid::defaults(SolverId id) {
    HyperGrid g;
    g.gammas = {1.0};
    switch (id) {
        case SolverId::Ls:
            g.lambdas = {0.0};
            g.rhos = {1.0};
            g.iters = {1};
            break;
        case SolverId::Fista:
            g.lambdas = {0.05, 0.1, 0.2, 0.5, 0.8, 2.0, 8.0};
            g.rhos = {1.0};
            g.iters = {160};
            break;
        case SolverId::Admm:
            g.lambdas = {0.05, 0.1, 0.2, 0.5, 0.8, 2.0, 8.0};
            g.rhos = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 5.0};
            g.iters = {160};
            break;
        case SolverId::Unfolded:
            g.lambdas = {0.05, 0.1, 0.2, 0.5, 0.8, 2.0, 8.0};
            g.rhos = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 5.0};
            g.iters = {8};
            break;
    }
    return g;
}

TunedParams tune_hyperparams(const std::vector<DevCase>& dev_set, SolverId id,
                             const HyperGrid& grid, const DictionarySet& dict,
                             TemporalMode mode) {
    require(!dev_set.empty(), "tune_hyperparams: development set is empty");
    require(!grid.lambdas.empty() && !grid.rhos.empty() && !grid.gammas.empty() &&
                !grid.iters.empty(),
            "tune_hyperparams: grid is empty");

    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    const std::vector<double> lambdas = sorted(grid.lambdas);
    const std::vector<double> rhos = sorted(grid.rhos);
    const std::vector<double> gammas = sorted(grid.gammas);
    std::vector<int> iters = grid.iters;
    std::sort(iters.begin(), iters.end());

    TunedParams best;
    double best_nmse = std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (double lambda : lambdas)
        for (double rho : rhos)
            for (double gamma : gammas)
                for (int it : iters) {
                    SolverSpec spec;
                    spec.id = id;
                    spec.temporal_mode = mode;
                    spec.lambda = lambda;
                    spec.rho = rho;
                    spec.gamma = gamma;
                    spec.max_iter = it;
                    spec.n_iter = it;
                    double mean_lin = 0.0;
                    bool failed = false;
                    for (const DevCase& c : dev_set) {
                        try {
                            const ReconResult r = reconstruct(c.y, dict, spec);
                            mean_lin += db_to_linear(nmse_db(r.h_hat, c.h));
                        } catch (const SolverDivergence&) {
                            failed = true;
                            break;
                        }
                    }
                    if (failed) continue;
                    mean_lin /= static_cast<double>(dev_set.size());
                    // Strict improvement only: ascending loop order makes
                    // ties resolve to the smallest lambda, then rho, then
                    // gamma, then iteration count.
                    if (!have_best || mean_lin < best_nmse) {
                        best_nmse = mean_lin;
                        best = {lambda, rho, gamma, it, linear_to_db(mean_lin)};
                        have_best = true;
                    }
                }
    require(have_best, "tune_hyperparams: every grid point diverged");
    return best;
}

} // namespace dda
