// SPDX-License-Identifier: Apache-2.0

#include "ddarec/channel_sim.hpp"

#include <cmath>

namespace dda {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void Path::validate(const SystemConfig& cfg) const {
    require(delay >= 0.0 && delay < cfg.delay_range(),
            "Path: delay outside the unambiguous range [0, 1/delta_f)");
    require(static_cast<int>(pol_weights.size()) == cfg.n_pol,
            "Path: pol_weights length must equal n_pol");
    double nrm = 0.0;
    for (const Complex& w : pol_weights) nrm += std::norm(w);
    require(std::abs(nrm - 1.0) < 1e-9, "Path: pol_weights must have unit norm");
}

CVec steering_vector(double theta, int n) {
    require(n >= 1, "steering_vector: n must be >= 1");
    CVec a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m) {
        const double ph = -kTwoPi * m * theta;
        a[m] = scale * Complex(std::cos(ph), std::sin(ph));
    }
    return a;
}

CVec delay_response(double tau, const SystemConfig& cfg) {
    require(tau >= 0.0 && tau < cfg.delay_range(),
            "delay_response: tau outside [0, 1/delta_f) aliases onto the delay grid");
    CVec d(cfg.n_f);
    for (int f = 0; f < cfg.n_f; ++f) {
        const double ph = -kTwoPi * f * cfg.delta_f * tau;
        d[f] = Complex(std::cos(ph), std::sin(ph));
    }
    return d;
}

CVec array_response(const Path& p, const SystemConfig& cfg) {
    const CVec av = steering_vector(p.theta_v, cfg.n_v);
    const CVec ah = steering_vector(p.theta_h, cfg.n_h);
    CVec a(cfg.n_rx());
    for (int pol = 0; pol < cfg.n_pol; ++pol)
        for (int h = 0; h < cfg.n_h; ++h)
            for (int v = 0; v < cfg.n_v; ++v)
                a[rx_index(cfg, pol, h, v)] = p.pol_weights[static_cast<size_t>(pol)] * ah[h] * av[v];
    return a;
}

ChannelWindow synthesize_window(const PathSet& paths, const SystemConfig& cfg) {
    cfg.validate();
    require(!paths.paths.empty(), "synthesize_window: path set is empty");
    for (const Path& p : paths.paths) p.validate(cfg);

    ChannelWindow win(cfg);
    win.data.setZero();
    for (const Path& p : paths.paths) {
        const CVec a = array_response(p, cfg);
        const CVec d = delay_response(p.delay, cfg);
        for (int t = 0; t < cfg.t_w; ++t) {
            const double ph = kTwoPi * p.doppler * t * cfg.delta_t;
            const Complex g = p.gain * Complex(std::cos(ph), std::sin(ph));
            win.data.slice(t) += (g * a) * d.transpose();
        }
    }
    return win;
}

PathSet sample_paths(uint64_t seed, int l, const Scenario& scenario, const SystemConfig& cfg) {
    require(l >= 1, "sample_paths: path count must be >= 1");
    cfg.validate();
    Rng rng = Rng::stream(seed, rng_stream::kPaths);

    PathSet set;
    set.seed = seed;
    set.paths.reserve(static_cast<size_t>(l));

    const double delay_hi = scenario.delay_fraction * cfg.delay_range();
    // k_fd = 1 grid steps, used when snapping on-grid.
    const double tau_step = 1.0 / (cfg.n_f * cfg.delta_f);
    const double nu_step = 1.0 / (cfg.t_w * cfg.delta_t);

    for (int i = 0; i < l; ++i) {
        Path p;
        // Decaying power profile over path index, uniform phase.
        const double mean_pow = std::pow(10.0, -scenario.decay_db / 10.0 * i / std::max(1, l - 1));
        p.gain = std::sqrt(mean_pow) * rng.cgauss();

        double tau = rng.uniform(0.0, delay_hi);
        double nu = rng.uniform(-scenario.doppler_max, scenario.doppler_max);
        double th_v = rng.uniform();
        double th_h = rng.uniform();

        if (scenario.on_grid) {
            tau = std::round(tau / tau_step) * tau_step;
            if (tau >= cfg.delay_range()) tau = 0.0;
            nu = std::round(nu / nu_step) * nu_step;
            th_v = std::round(th_v * cfg.n_v) / cfg.n_v;
            th_h = std::round(th_h * cfg.n_h) / cfg.n_h;
            p.pol_weights.assign(static_cast<size_t>(cfg.n_pol), Complex(0.0, 0.0));
            const auto which = static_cast<size_t>(rng.uniform_index(static_cast<uint64_t>(cfg.n_pol)));
            const double ph = rng.uniform(0.0, kTwoPi);
            p.pol_weights[which] = Complex(std::cos(ph), std::sin(ph));
        } else {
            p.pol_weights.resize(static_cast<size_t>(cfg.n_pol));
            double nrm = 0.0;
            for (auto& w : p.pol_weights) {
                w = rng.cgauss();
                nrm += std::norm(w);
            }
            nrm = std::sqrt(nrm);
            for (auto& w : p.pol_weights) w /= nrm;
        }
        p.delay = tau;
        p.doppler = nu;
        p.theta_v = th_v;
        p.theta_h = th_h;
        set.paths.push_back(std::move(p));
    }
    return set;
}

ObservationWindow observe(const ChannelWindow& h, const PilotSchedule& sched,
                          double snr_db, uint64_t noise_seed) {
    ObservationWindow obs;
    obs.data = apply_mask(h, sched);
    obs.schedule = sched;
    obs.config = h.config;
    obs.sigma.assign(static_cast<size_t>(sched.t_w), 0.0);

    if (std::isinf(snr_db)) return obs;

    Rng rng = Rng::stream(noise_seed, rng_stream::kNoise);
    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    for (int t = 0; t < sched.t_w; ++t) {
        auto y = obs.data.slice(t);
        const double sig_pow = y.squaredNorm() / static_cast<double>(y.size());
        const double var = sig_pow / snr_lin;
        const double sigma = std::sqrt(var);
        obs.sigma[static_cast<size_t>(t)] = sigma;
        for (Eigen::Index r = 0; r < y.rows(); ++r)
            for (Eigen::Index c = 0; c < y.cols(); ++c)
                y(r, c) += sigma * rng.cgauss();
    }
    return obs;
}

} // namespace dda
