// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ddarec/dc_core.hpp>

#include "test_helpers.hpp"

using namespace dda;

namespace {

/// Brute-force oracle: solve the stationarity system
/// X_t (alpha^-1 A^H A + I) = alpha^-1 f_sa^H Y_t A + V_t densely.
DdaTensor dense_dc_solve(const DdaTensor& v, const ObservationWindow& y,
                         const DictionarySet& dict, const PilotSchedule& sched,
                         const DcParams& params) {
    DdaTensor x(dict.n_theta(), dict.n_tau(), dict.config().t_w, Domain::Time);
    for (int t = 0; t < dict.config().t_w; ++t) {
        const double alpha = params.rho * params.sigma[static_cast<size_t>(t)] *
                             params.sigma[static_cast<size_t>(t)];
        const CMat a = dict.sensing_matrix(sched.omega(t));
        const CMat m =
            a.adjoint() * a / alpha + CMat::Identity(dict.n_tau(), dict.n_tau());
        const CMat rhs = dict.f_sa().adjoint() * y.data.slice(t) * a / alpha + v.data.slice(t);
        // X m = rhs  =>  m^T X^T = rhs^T
        x.data.slice(t) = m.transpose().partialPivLu().solve(rhs.transpose()).transpose();
    }
    return x;
}

struct Instance {
    SystemConfig cfg;
    DictionarySet dict;
    PilotSchedule sched;
    ObservationWindow y;
    DdaTensor v;
    DcParams params;
};

Instance random_instance(uint64_t seed, int k_fd) {
    SystemConfig cfg = dda::test::tiny_config(); // n_rx=4, n_f=12, m_p=4, t_w=3
    Instance inst{cfg, build_dictionaries(cfg, 1, k_fd), standard_schedule(cfg, 0), {}, {}, {}};
    Rng rng(seed);
    inst.sched = standard_schedule(cfg, static_cast<int>(rng.uniform_index(3)));
    inst.y.data = dda::test::random_tensor(cfg.n_rx(), inst.sched.m_p, cfg.t_w, seed * 3 + 1);
    inst.y.schedule = inst.sched;
    inst.y.config = cfg;
    inst.y.sigma.clear();
    for (int t = 0; t < cfg.t_w; ++t) inst.y.sigma.push_back(rng.uniform(0.05, 2.0));
    inst.v = DdaTensor(
        dda::test::random_tensor(inst.dict.n_theta(), inst.dict.n_tau(), cfg.t_w, seed * 3 + 2),
        Domain::Time);
    inst.params.rho = rng.uniform(0.05, 3.0);
    inst.params.sigma = inst.y.sigma;
    return inst;
}

} // namespace

TEST_CASE("dc_update matches the dense normal-equations oracle (k_fd 1 and 2)") {
    for (int k_fd : {1, 2}) {
        for (uint64_t seed = 1; seed <= 12; ++seed) {
            const Instance inst = random_instance(seed + 100 * static_cast<uint64_t>(k_fd), k_fd);
            const DdaTensor fast = dc_update(inst.v, inst.y, inst.dict, inst.sched, inst.params);
            const DdaTensor oracle = dense_dc_solve(inst.v, inst.y, inst.dict, inst.sched, inst.params);
            CHECK(rel_error(fast.data, oracle.data) < 1e-8);
        }
    }
}

TEST_CASE("SMW identity on the sensing gram matrix") {
    // (I + A^H A / alpha)(I - A^H A / (alpha + 1)) = I
    const Instance inst = random_instance(77, 2);
    const CMat a = inst.dict.sensing_matrix(inst.sched.omega(1));
    const double alpha = 0.37;
    const CMat id = CMat::Identity(inst.dict.n_tau(), inst.dict.n_tau());
    const CMat lhs = (id + a.adjoint() * a / alpha) * (id - a.adjoint() * a / (alpha + 1.0));
    CHECK((lhs - id).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("stationarity residual is tiny at the solution, grows when perturbed") {
    const Instance inst = random_instance(5, 2);
    const DdaTensor x = dc_update(inst.v, inst.y, inst.dict, inst.sched, inst.params);
    CHECK(dc_residual_check(x, inst.v, inst.y, inst.dict, inst.sched, inst.params) < 1e-9);

    DdaTensor noisy = x;
    Rng rng(6);
    const double scale = 1e-3 * x.data.norm() / std::sqrt(static_cast<double>(x.data.size()));
    for (Eigen::Index t = 0; t < noisy.data.n2(); ++t)
        for (Eigen::Index i = 0; i < noisy.data.n0(); ++i)
            for (Eigen::Index j = 0; j < noisy.data.n1(); ++j)
                noisy.data(i, j, t) += scale * rng.cgauss();
    CHECK(dc_residual_check(noisy, inst.v, inst.y, inst.dict, inst.sched, inst.params) > 1e-5);
}

TEST_CASE("degenerate all-zero residual returns 0") {
    Instance inst = random_instance(8, 1);
    inst.y.data.setZero();
    DdaTensor zero = inst.v;
    zero.data.setZero();
    CHECK(dc_residual_check(zero, zero, inst.y, inst.dict, inst.sched, inst.params) == 0.0);
}

TEST_CASE("null measurement: center orthogonal to the row space passes through") {
    Instance inst = random_instance(9, 2);
    inst.y.data.setZero();
    // Project the center onto the orthogonal complement of each row space.
    DdaTensor v_perp = inst.v;
    for (int t = 0; t < inst.cfg.t_w; ++t) {
        const CMat a = inst.dict.sensing_matrix(inst.sched.omega(t));
        v_perp.data.slice(t) -= (CMat(v_perp.data.slice(t)) * a.adjoint()) * a;
    }
    const DdaTensor x = dc_update(v_perp, inst.y, inst.dict, inst.sched, inst.params);
    CHECK(rel_error(x.data, v_perp.data) < 1e-12);

    // Generic center: X = V - V A^H A / (alpha + 1).
    const DdaTensor x2 = dc_update(inst.v, inst.y, inst.dict, inst.sched, inst.params);
    DdaTensor expect = inst.v;
    for (int t = 0; t < inst.cfg.t_w; ++t) {
        const double sig = inst.params.sigma[static_cast<size_t>(t)];
        const double alpha = inst.params.rho * sig * sig;
        const CMat a = inst.dict.sensing_matrix(inst.sched.omega(t));
        expect.data.slice(t) -= (CMat(inst.v.data.slice(t)) * a.adjoint()) * a / (alpha + 1.0);
    }
    CHECK(rel_error(x2.data, expect.data) < 1e-10);
}

TEST_CASE("huge rho pins the output to the center") {
    Instance inst = random_instance(10, 1);
    inst.params.rho = 1e12;
    const DdaTensor x = dc_update(inst.v, inst.y, inst.dict, inst.sched, inst.params);
    CHECK(rel_error(x.data, inst.v.data) < 1e-6);
}

TEST_CASE("dc_initial equals dc_update with a zero center, bit-exactly") {
    const Instance inst = random_instance(11, 2);
    DdaTensor zero = inst.v;
    zero.data.setZero();
    const DdaTensor a = dc_initial(inst.y, inst.dict, inst.sched, inst.params);
    const DdaTensor b = dc_update(zero, inst.y, inst.dict, inst.sched, inst.params);
    CHECK(dda::test::max_abs_diff(a.data, b.data) == 0.0);

    ObservationWindow y0 = inst.y;
    y0.data.setZero();
    CHECK(dc_initial(y0, inst.dict, inst.sched, inst.params).data.norm() == 0.0);
}

TEST_CASE("noiseless on-grid atom is recovered at the right location by dc_initial") {
    SystemConfig cfg = SystemConfig::small_test();
    const DictionarySet dict = build_dictionaries(cfg, 1, 1);
    const PilotSchedule sched = standard_schedule(cfg, 0);
    Scenario sc;
    sc.on_grid = true;
    const ChannelWindow h = synthesize_window(sample_paths(14, 1, sc, cfg), cfg);
    const ObservationWindow y = observe(h, sched, kNoiselessSnrDb, 0);
    const DcParams params = DcParams::from_observation(0.3, y);
    const DdaTensor x_true = analysis(h, dict);
    const DdaTensor x0 = dc_initial(y, dict, sched, params);
    for (int t = 0; t < cfg.t_w; ++t) {
        Eigen::Index ti = 0, tj = 0, oi = 0, oj = 0;
        x_true.data.slice(t).cwiseAbs().maxCoeff(&ti, &tj);
        x0.data.slice(t).cwiseAbs().maxCoeff(&oi, &oj);
        CHECK(ti == oi);
        CHECK(tj == oj);
    }
}

TEST_CASE("dc_update is jointly affine in (V, Y)") {
    const Instance a = random_instance(21, 2);
    Instance b = a;
    b.y.data = dda::test::random_tensor(a.cfg.n_rx(), a.sched.m_p, a.cfg.t_w, 500);
    b.v = DdaTensor(dda::test::random_tensor(a.dict.n_theta(), a.dict.n_tau(), a.cfg.t_w, 501),
                    Domain::Time);

    const double c1 = 0.6, c2 = 0.4; // affine combination weights, c1 + c2 = 1
    Instance mix = a;
    for (Eigen::Index t = 0; t < mix.y.data.n2(); ++t) {
        mix.y.data.slice(t) = c1 * a.y.data.slice(t) + c2 * b.y.data.slice(t);
        mix.v.data.slice(t) = c1 * a.v.data.slice(t) + c2 * b.v.data.slice(t);
    }
    const DdaTensor xa = dc_update(a.v, a.y, a.dict, a.sched, a.params);
    const DdaTensor xb = dc_update(b.v, b.y, a.dict, a.sched, a.params);
    const DdaTensor xm = dc_update(mix.v, mix.y, a.dict, a.sched, a.params);
    Tensor3 combo = xa.data;
    for (Eigen::Index t = 0; t < combo.n2(); ++t)
        combo.slice(t) = c1 * xa.data.slice(t) + c2 * xb.data.slice(t);
    CHECK(rel_error(xm.data, combo) < 1e-12);
}

TEST_CASE("dc_update output minimizes the subproblem objective") {
    const Instance inst = random_instance(31, 2);
    auto objective = [&](const DdaTensor& x) {
        double obj = 0.0;
        for (int t = 0; t < inst.cfg.t_w; ++t) {
            const CMat a = inst.dict.sensing_matrix(inst.sched.omega(t));
            const double sig = inst.params.sigma[static_cast<size_t>(t)];
            obj += (inst.y.data.slice(t) - inst.dict.f_sa() * (CMat(x.data.slice(t)) * a.adjoint()))
                       .squaredNorm() /
                   (2.0 * sig * sig);
            obj += inst.params.rho / 2.0 * (x.data.slice(t) - inst.v.data.slice(t)).squaredNorm();
        }
        return obj;
    };
    const DdaTensor x = dc_update(inst.v, inst.y, inst.dict, inst.sched, inst.params);
    const double fx = objective(x);
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        DdaTensor perturbed = x;
        const double eps = std::pow(10.0, rng.uniform(-6.0, -1.0));
        for (Eigen::Index t = 0; t < perturbed.data.n2(); ++t)
            for (Eigen::Index i = 0; i < perturbed.data.n0(); ++i)
                for (Eigen::Index j = 0; j < perturbed.data.n1(); ++j)
                    perturbed.data(i, j, t) += eps * rng.cgauss();
        CHECK(objective(perturbed) >= fx);
    }
}

TEST_CASE("invalid parameters are rejected") {
    Instance inst = random_instance(41, 1);
    DcParams bad = inst.params;
    bad.rho = 0.0;
    CHECK_THROWS_AS(dc_update(inst.v, inst.y, inst.dict, inst.sched, bad),
                    std::invalid_argument);
    bad = inst.params;
    bad.sigma[1] = 0.0;
    CHECK_THROWS_AS(dc_update(inst.v, inst.y, inst.dict, inst.sched, bad),
                    std::invalid_argument);
    DdaTensor wrong(inst.dict.n_theta(), inst.dict.n_tau() + 1, inst.cfg.t_w, Domain::Time);
    wrong.data.setZero();
    CHECK_THROWS_AS(dc_update(wrong, inst.y, inst.dict, inst.sched, inst.params),
                    std::invalid_argument);
}
