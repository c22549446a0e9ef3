// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <ddarec/channel_sim.hpp>
#include <ddarec/pilots.hpp>

#include "test_helpers.hpp"

using namespace dda;

namespace {
SystemConfig paper_config() { return SystemConfig{}; } // 408 carriers, 17x24 blocks

/// Covering radius of an arbitrary block order at one offset, for the
/// exhaustive permutation oracle.
double radius_of_order(const std::vector<int>& order, const SystemConfig& cfg, int offset) {
    PilotSchedule s;
    s.k = cfg.pilot_blocks();
    s.m_p = cfg.pilot_block;
    s.t_w = cfg.t_w;
    s.offset = offset;
    s.order = order;
    return covering_radius(s, cfg);
}

double worst_offset_radius(const std::vector<int>& order, const SystemConfig& cfg) {
    double worst = 0.0;
    for (int o = 0; o < cfg.pilot_blocks(); ++o)
        worst = std::max(worst, radius_of_order(order, cfg, o));
    return worst;
}
} // namespace

TEST_CASE("standard schedule: identity hopping with cyclic wrap") {
    const SystemConfig cfg = paper_config();
    const PilotSchedule s0 = standard_schedule(cfg, 0);
    CHECK(s0.k == 17);
    CHECK(s0.m_p == 24);
    for (int t = 0; t < 10; ++t) CHECK(s0.block_at(t) == t);

    const PilotSchedule s16 = standard_schedule(cfg, 16);
    CHECK(s16.block_at(0) == 16);
    for (int t = 1; t < 10; ++t) CHECK(s16.block_at(t) == t - 1);

    CHECK_THROWS_AS(standard_schedule(cfg, 17), std::invalid_argument);
    CHECK_THROWS_AS(standard_schedule(cfg, -1), std::invalid_argument);
}

TEST_CASE("standard schedule covers the band exactly once per cycle") {
    SystemConfig cfg = paper_config();
    cfg.t_w = 17; // full cycle window
    const PilotSchedule s = standard_schedule(cfg, 5);
    std::vector<int> hits(static_cast<size_t>(cfg.n_f), 0);
    for (int t = 0; t < cfg.t_w; ++t)
        for (int f : s.omega(t)) ++hits[static_cast<size_t>(f)];
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST_CASE("omega sets are contiguous runs of m_p subcarriers") {
    const SystemConfig cfg = paper_config();
    for (PilotKind kind : {PilotKind::Standard, PilotKind::Mcr})
        for (const PilotSchedule& s : enumerate_offsets(cfg, kind))
            for (int t = 0; t < s.t_w; ++t) {
                const std::vector<int> om = s.omega(t);
                REQUIRE(static_cast<int>(om.size()) == s.m_p);
                CHECK(om.front() >= 0);
                CHECK(om.back() < cfg.n_f);
                for (size_t i = 1; i < om.size(); ++i) CHECK(om[i] == om[i - 1] + 1);
            }
}

TEST_CASE("offset equivariance: shifted offsets walk the same cyclic order") {
    const SystemConfig cfg = paper_config();
    for (PilotKind kind : {PilotKind::Standard, PilotKind::Mcr}) {
        const auto all = enumerate_offsets(cfg, kind);
        for (int o = 0; o < 17; ++o)
            for (int t = 0; t < cfg.t_w; ++t)
                CHECK(all[static_cast<size_t>(o)].block_at(t) == all[0].block_at(t + o));
    }
}

TEST_CASE("mcr order: adjacent active blocks separated by >= 3 at k=17") {
    const std::vector<int> order = mcr_order(17);
    for (int i = 0; i < 17; ++i) {
        const int gap = std::abs(order[static_cast<size_t>((i + 1) % 17)] -
                                 order[static_cast<size_t>(i)]);
        CHECK(gap >= 3);
    }
}

TEST_CASE("covering radius: full observation is zero, single block by hand") {
    SystemConfig cfg;
    cfg.n_v = cfg.n_h = cfg.n_pol = 1;
    cfg.n_f = 8;
    cfg.pilot_block = 8; // k = 1: every snapshot observes the whole band
    cfg.t_w = 3;
    const PilotSchedule full = standard_schedule(cfg, 0);
    CHECK(covering_radius(full, cfg) == 0.0);

    // k = 2, t_w = 1, block 0 observed: farthest point is (t=0, f=n_f-1),
    // horizontal distance (n_f-1 - (m_p-1))/n_f = 4/8.
    SystemConfig cfg2 = cfg;
    cfg2.pilot_block = 4;
    cfg2.t_w = 1;
    const PilotSchedule half = standard_schedule(cfg2, 0);
    CHECK(covering_radius(half, cfg2) == doctest::Approx(4.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("mcr beats standard covering radius at the paper geometry") {
    const SystemConfig cfg = paper_config();
    for (int o = 0; o < 17; ++o) {
        const double r_mcr = covering_radius(mcr_schedule(cfg, o), cfg);
        const double r_std = covering_radius(standard_schedule(cfg, o), cfg);
        CHECK(r_mcr < r_std);
    }
}

TEST_CASE("mcr <= standard for k >= 3 small geometries") {
    for (int k : {3, 4, 5, 6, 7, 8}) {
        SystemConfig cfg;
        cfg.n_v = cfg.n_h = cfg.n_pol = 1;
        cfg.pilot_block = 8;
        cfg.n_f = 8 * k;
        cfg.t_w = k;
        for (int o = 0; o < k; ++o) {
            const double r_mcr = covering_radius(mcr_schedule(cfg, o), cfg);
            const double r_std = covering_radius(standard_schedule(cfg, o), cfg);
            CHECK(r_mcr <= r_std + 1e-12);
        }
    }
}

TEST_CASE("exhaustive oracle: greedy order is minimax-optimal at k=5") {
    // All 120 permutations, worst covering radius over the 5 offsets. The
    // greedy construction must attain the exhaustive optimum and never lose
    // to the standard order.
    SystemConfig cfg;
    cfg.n_v = cfg.n_h = cfg.n_pol = 1;
    cfg.pilot_block = 8;
    cfg.n_f = 40;
    cfg.t_w = 5;
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, worst_offset_radius(perm, cfg));
    } while (std::next_permutation(perm.begin(), perm.end()));

    const double greedy = worst_offset_radius(mcr_order(5), cfg);
    std::vector<int> ident(5);
    std::iota(ident.begin(), ident.end(), 0);
    const double standard = worst_offset_radius(ident, cfg);
    CHECK(greedy == doctest::Approx(best).epsilon(1e-12));
    CHECK(greedy <= standard + 1e-12);
}

TEST_CASE("enumerate_offsets: count, degenerate k=1, distinct first blocks") {
    const SystemConfig cfg = paper_config();
    const auto all = enumerate_offsets(cfg, PilotKind::Standard);
    CHECK(all.size() == 17);
    std::vector<int> first;
    for (const auto& s : all) first.push_back(s.block_at(0));
    std::sort(first.begin(), first.end());
    CHECK(std::adjacent_find(first.begin(), first.end()) == first.end());

    SystemConfig one;
    one.n_v = one.n_h = one.n_pol = 1;
    one.n_f = 16;
    one.pilot_block = 16;
    one.t_w = 4;
    const auto single = enumerate_offsets(one, PilotKind::Standard);
    REQUIRE(single.size() == 1);
    CHECK(single[0].m_p == 16);
}

TEST_CASE("apply_mask selection semantics") {
    SystemConfig cfg = SystemConfig::small_test();
    ChannelWindow w = test::random_window(cfg, 5);
    const PilotSchedule s = standard_schedule(cfg, 1);

    const int t_probe = 3;
    const int f_probe = s.omega_start(t_probe) + 2;
    w.data(1, f_probe, t_probe) = Complex(1234.5, -987.0);
    const Tensor3 masked = apply_mask(w, s);
    CHECK(masked.n1() == s.m_p);
    int hits = 0;
    for (int r = 0; r < cfg.n_rx(); ++r)
        for (int p = 0; p < s.m_p; ++p)
            if (masked(r, p, t_probe) == Complex(1234.5, -987.0)) ++hits;
    CHECK(hits == 1);
    CHECK(masked(1, 2, t_probe) == Complex(1234.5, -987.0));

    // k = 1 degenerate case returns the window itself.
    SystemConfig one = cfg;
    one.pilot_block = one.n_f;
    const ChannelWindow w1 = test::random_window(one, 6);
    const Tensor3 full = apply_mask(w1, standard_schedule(one, 0));
    CHECK(test::max_abs_diff(full, w1.data) == 0.0);
}

TEST_CASE("apply_mask equals noiseless observe (cross-module)") {
    SystemConfig cfg = SystemConfig::small_test();
    const PathSet ps = sample_paths(17, 4, Scenario{}, cfg);
    const ChannelWindow w = synthesize_window(ps, cfg);
    const PilotSchedule s = mcr_schedule(cfg, 2);
    CHECK(test::max_abs_diff(apply_mask(w, s), observe(w, s, kNoiselessSnrDb, 0).data) == 0.0);
}

TEST_CASE("schedule text round trip") {
    const SystemConfig cfg = paper_config();
    for (PilotKind kind : {PilotKind::Standard, PilotKind::Mcr}) {
        const PilotSchedule s =
            kind == PilotKind::Mcr ? mcr_schedule(cfg, 7) : standard_schedule(cfg, 7);
        const PilotSchedule back = parse_schedule(serialize_schedule(s));
        CHECK(back.k == s.k);
        CHECK(back.m_p == s.m_p);
        CHECK(back.t_w == s.t_w);
        CHECK(back.offset == s.offset);
        CHECK(back.order == s.order);
        CHECK(back.kind == kind);
    }
    CHECK_THROWS(parse_schedule("17 24 10"));           // truncated header
    CHECK_THROWS(parse_schedule("2 4 3 0 0 0"));        // not a permutation
}
