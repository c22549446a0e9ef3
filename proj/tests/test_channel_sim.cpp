// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ddarec/channel_sim.hpp>
#include <ddarec/transforms.hpp>

#include "test_helpers.hpp"

using namespace dda;

namespace {
Path single_path(const SystemConfig& cfg, Complex gain, double tau, double nu, double th_v,
                 double th_h, int pol = 0) {
    Path p;
    p.gain = gain;
    p.delay = tau;
    p.doppler = nu;
    p.theta_v = th_v;
    p.theta_h = th_h;
    p.pol_weights.assign(static_cast<size_t>(cfg.n_pol), Complex(0, 0));
    p.pol_weights[static_cast<size_t>(pol)] = Complex(1, 0);
    return p;
}
} // namespace

TEST_CASE("steering_vector basic values") {
    const CVec a0 = steering_vector(0.0, 4);
    for (int m = 0; m < 4; ++m) CHECK(std::abs(a0[m] - Complex(0.5, 0)) < 1e-15);

    // Quarter-cycle: (1/2) [1, -j, -1, j].
    const CVec a = steering_vector(0.25, 4);
    const Complex want[4] = {{0.5, 0}, {0, -0.5}, {-0.5, 0}, {0, 0.5}};
    for (int m = 0; m < 4; ++m) CHECK(std::abs(a[m] - want[m]) < 1e-15);
}

TEST_CASE("steering_vector equals unitary DFT column (oracle)") {
    // theta = 1/8, n = 8: direct DFT-matrix construction, e^{-j 2 pi m k / 8}.
    const int n = 8;
    const CVec a = steering_vector(1.0 / 8.0, n);
    for (int m = 0; m < n; ++m) {
        const double ph = -2.0 * M_PI * m * 1.0 / 8.0;
        const Complex dft = Complex(std::cos(ph), std::sin(ph)) / std::sqrt(8.0);
        CHECK(std::abs(a[m] - dft) < 1e-14);
    }
}

TEST_CASE("steering_vector has unit norm for arbitrary theta") {
    Rng rng(7);
    for (int it = 0; it < 25; ++it) {
        const double theta = rng.uniform(-2.0, 2.0);
        const int n = 1 + static_cast<int>(rng.uniform_index(16));
        CHECK(std::abs(steering_vector(theta, n).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("delay_response zero delay and domain errors") {
    SystemConfig cfg = SystemConfig::small_test();
    const CVec d = delay_response(0.0, cfg);
    for (int f = 0; f < cfg.n_f; ++f) CHECK(std::abs(d[f] - Complex(1, 0)) < 1e-15);

    CHECK_THROWS_AS(delay_response(-1e-9, cfg), std::invalid_argument);
    CHECK_THROWS_AS(delay_response(1.0 / cfg.delta_f, cfg), std::invalid_argument);
    CHECK_THROWS_AS(delay_response(2.0 / cfg.delta_f, cfg), std::invalid_argument);
}

TEST_CASE("delay_response matches the delay dictionary row (oracle)") {
    // tau on the k_fd = 1 grid equals the matching row of sqrt(n_tau) f_fd^H.
    SystemConfig cfg = SystemConfig::small_test();
    const DictionarySet dict = build_dictionaries(cfg, 1, 1);
    const CMat ffd = dict.f_fd_dense();
    const double tau = 1.0 / (cfg.n_f * cfg.delta_f);
    const CVec d = delay_response(tau, cfg);
    for (int f = 0; f < cfg.n_f; ++f)
        CHECK(std::abs(d[f] - std::sqrt(static_cast<double>(cfg.n_f)) * std::conj(ffd(f, 1))) < 1e-12);
}

TEST_CASE("delay_response exponential additivity") {
    SystemConfig cfg = SystemConfig::small_test();
    const double t0 = 0.11 / cfg.delta_f, t1 = 0.23 / cfg.delta_f;
    const CVec a = delay_response(t0, cfg), b = delay_response(t1, cfg),
               c = delay_response(t0 + t1, cfg);
    for (int f = 0; f < cfg.n_f; ++f) CHECK(std::abs(a[f] * b[f] - c[f]) < 1e-12);
    for (int f = 0; f < cfg.n_f; ++f) CHECK(std::abs(std::abs(a[f]) - 1.0) < 1e-14);
}

TEST_CASE("synthesize_window static single ray") {
    SystemConfig cfg = SystemConfig::small_test();
    cfg.n_pol = 1; // single polarization: the array response is constant-modulus
    PathSet ps;
    ps.paths.push_back(single_path(cfg, Complex(1, 0), 0.0, 0.0, 0.0, 0.0));
    const ChannelWindow w = synthesize_window(ps, cfg);
    // Every snapshot identical, and H_t = a d^T with d all-ones.
    for (int t = 1; t < cfg.t_w; ++t)
        CHECK((w.data.slice(t) - w.data.slice(0)).cwiseAbs().maxCoeff() == 0.0);
    const CVec a = array_response(ps.paths[0], cfg);
    for (int r = 0; r < cfg.n_rx(); ++r) {
        CHECK(std::abs(std::abs(a[r]) - std::abs(a[0])) < 1e-14); // constant modulus
        for (int f = 0; f < cfg.n_f; ++f) CHECK(std::abs(w.data(r, f, 0) - a[r]) < 1e-14);
    }
}

TEST_CASE("doppler aliasing: nu and nu + 1/delta_t are indistinguishable") {
    SystemConfig cfg = SystemConfig::small_test();
    PathSet ps1, ps2;
    ps1.paths.push_back(single_path(cfg, Complex(0.8, -0.6), 1e-7, 7.0, 0.3, 0.6));
    ps2 = ps1;
    ps2.paths[0].doppler += 1.0 / cfg.delta_t;
    const ChannelWindow w1 = synthesize_window(ps1, cfg);
    const ChannelWindow w2 = synthesize_window(ps2, cfg);
    CHECK(test::max_abs_diff(w1.data, w2.data) < 1e-9);
}

TEST_CASE("two on-grid paths give exactly 2 t_w analysis atoms (oracle)") {
    SystemConfig cfg = SystemConfig::small_test();
    PathSet ps;
    // On the k_fd = 1 grids: tau = n/(n_f df), theta = k/n, any nu.
    ps.paths.push_back(single_path(cfg, Complex(1.0, 0.5), 3.0 / (cfg.n_f * cfg.delta_f),
                                   1.0 / (cfg.t_w * cfg.delta_t), 1.0 / cfg.n_v, 0.0, 0));
    ps.paths.push_back(single_path(cfg, Complex(-0.3, 0.9), 7.0 / (cfg.n_f * cfg.delta_f), 4.0,
                                   0.0, 1.0 / cfg.n_h, 1));
    const ChannelWindow w = synthesize_window(ps, cfg);
    const DictionarySet dict = build_dictionaries(cfg, 1, 1);
    const DdaTensor x = analysis(w, dict);
    double peak = 0.0;
    for (Eigen::Index t = 0; t < x.data.n2(); ++t)
        peak = std::max(peak, x.data.slice(t).cwiseAbs().maxCoeff());
    int nonzero = 0;
    for (Eigen::Index t = 0; t < x.data.n2(); ++t)
        for (int i = 0; i < dict.n_theta(); ++i)
            for (int j = 0; j < dict.n_tau(); ++j)
                if (std::abs(x.data(i, j, t)) > 1e-10 * peak) ++nonzero;
    CHECK(nonzero == 2 * cfg.t_w);
}

TEST_CASE("synthesize_window is linear in the path set") {
    SystemConfig cfg = SystemConfig::small_test();
    const PathSet a = sample_paths(11, 3, Scenario{}, cfg);
    const PathSet b = sample_paths(12, 2, Scenario{}, cfg);
    PathSet both = a;
    both.paths.insert(both.paths.end(), b.paths.begin(), b.paths.end());
    const ChannelWindow wa = synthesize_window(a, cfg);
    const ChannelWindow wb = synthesize_window(b, cfg);
    const ChannelWindow wab = synthesize_window(both, cfg);
    CHECK(rel_error(wab.data, wa.data + wb.data) < 1e-12);
}

TEST_CASE("doppler periodicity across the whole path set") {
    SystemConfig cfg = SystemConfig::small_test();
    PathSet ps = sample_paths(21, 4, Scenario{}, cfg);
    PathSet shifted = ps;
    for (size_t i = 0; i < shifted.paths.size(); ++i)
        shifted.paths[i].doppler += (static_cast<int>(i) - 1) * (1.0 / cfg.delta_t);
    CHECK(rel_error(synthesize_window(shifted, cfg).data, synthesize_window(ps, cfg).data) < 1e-9);
}

TEST_CASE("sample_paths determinism and ranges") {
    SystemConfig cfg = SystemConfig::small_test();
    Scenario sc;
    const PathSet a = sample_paths(1, 8, sc, cfg);
    const PathSet b = sample_paths(1, 8, sc, cfg);
    REQUIRE(a.paths.size() == 8);
    for (size_t i = 0; i < 8; ++i) {
        CHECK(a.paths[i].gain == b.paths[i].gain);
        CHECK(a.paths[i].delay == b.paths[i].delay);
        CHECK(a.paths[i].doppler == b.paths[i].doppler);
        CHECK(a.paths[i].delay >= 0.0);
        CHECK(a.paths[i].delay < sc.delay_fraction * cfg.delay_range());
        CHECK(std::abs(a.paths[i].doppler) <= sc.doppler_max);
        CHECK(a.paths[i].theta_v >= 0.0);
        CHECK(a.paths[i].theta_v < 1.0);
    }
    const PathSet c = sample_paths(2, 8, sc, cfg);
    bool differs = false;
    for (size_t i = 0; i < 8; ++i)
        if (c.paths[i].gain != a.paths[i].gain || c.paths[i].delay != a.paths[i].delay)
            differs = true;
    CHECK(differs);
    CHECK_THROWS_AS(sample_paths(1, 0, sc, cfg), std::invalid_argument);
}

TEST_CASE("on-grid sampling lands on dictionary atoms") {
    SystemConfig cfg = SystemConfig::small_test();
    Scenario sc;
    sc.on_grid = true;
    const PathSet ps = sample_paths(5, 2, sc, cfg);
    const ChannelWindow w = synthesize_window(ps, cfg);
    const DictionarySet dict = build_dictionaries(cfg, 1, 1);
    const DdaTensor x = analysis(w, dict);
    double peak = 0.0;
    for (Eigen::Index t = 0; t < x.data.n2(); ++t)
        peak = std::max(peak, x.data.slice(t).cwiseAbs().maxCoeff());
    int nonzero = 0;
    for (Eigen::Index t = 0; t < x.data.n2(); ++t)
        for (int i = 0; i < dict.n_theta(); ++i)
            for (int j = 0; j < dict.n_tau(); ++j)
                if (std::abs(x.data(i, j, t)) > 1e-9 * peak) ++nonzero;
    CHECK(nonzero <= 2 * cfg.t_w); // paths may collide on one atom
}

TEST_CASE("observe: noiseless projection equals apply_mask exactly") {
    SystemConfig cfg = SystemConfig::small_test();
    const ChannelWindow w = test::random_window(cfg, 33);
    const PilotSchedule sched = standard_schedule(cfg, 2);
    const ObservationWindow y = observe(w, sched, kNoiselessSnrDb, 0);
    const Tensor3 masked = apply_mask(w, sched);
    CHECK(test::max_abs_diff(y.data, masked) == 0.0);
    for (double s : y.sigma) CHECK(s == 0.0);
}

TEST_CASE("observe determinism and schedule mismatch") {
    SystemConfig cfg = SystemConfig::small_test();
    const ChannelWindow w = test::random_window(cfg, 34);
    const PilotSchedule sched = standard_schedule(cfg, 0);
    const ObservationWindow y1 = observe(w, sched, 10.0, 99);
    const ObservationWindow y2 = observe(w, sched, 10.0, 99);
    CHECK(test::max_abs_diff(y1.data, y2.data) == 0.0);

    SystemConfig other = cfg;
    other.n_f = 48;
    other.pilot_block = 8;
    const PilotSchedule bad = standard_schedule(other, 0);
    CHECK_THROWS_AS(observe(w, bad, 10.0, 1), std::invalid_argument);
}

TEST_CASE("observe: SNR calibration at 0 dB (Monte-Carlo oracle)") {
    // At 0 dB the empirical noise power must match the observed signal
    // power within 2% over ~1e5 entries.
    SystemConfig cfg = SystemConfig::small_test();
    cfg.n_v = 4;
    cfg.n_h = 4;
    const ChannelWindow w = test::random_window(cfg, 35);
    const PilotSchedule sched = standard_schedule(cfg, 0);
    const Tensor3 clean = apply_mask(w, sched);
    double sig = 0.0, noise = 0.0;
    size_t n_entries = 0;
    for (uint64_t rep = 0; rep < 40; ++rep) {
        const ObservationWindow y = observe(w, sched, 0.0, 1000 + rep);
        for (Eigen::Index t = 0; t < clean.n2(); ++t) {
            noise += (y.data.slice(t) - clean.slice(t)).squaredNorm();
            sig += clean.slice(t).squaredNorm();
            n_entries += static_cast<size_t>(clean.n0() * clean.n1());
        }
    }
    CHECK(n_entries >= 100000);
    CHECK(std::abs(noise / sig - 1.0) < 0.02);
}
