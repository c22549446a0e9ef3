// SPDX-License-Identifier: Apache-2.0

#include "ddarec/pilots.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ddarec/channel_sim.hpp"

namespace dda {

const char* to_string(PilotKind k) {
    switch (k) {
        case PilotKind::Standard: return "standard";
        case PilotKind::Mcr: return "mcr";
        default: return "custom";
    }
}

PilotKind pilot_kind_from_string(const std::string& s) {
    if (s == "standard") return PilotKind::Standard;
    if (s == "mcr") return PilotKind::Mcr;
    if (s == "custom") return PilotKind::Custom;
    throw std::invalid_argument("unknown pilot kind: " + s);
}

std::vector<int> PilotSchedule::omega(int t) const {
    std::vector<int> idx(static_cast<size_t>(m_p));
    std::iota(idx.begin(), idx.end(), omega_start(t));
    return idx;
}

void PilotSchedule::validate() const {
    require(k >= 1 && m_p >= 1 && t_w >= 1, "PilotSchedule: k, m_p, t_w must be >= 1");
    require(offset >= 0 && offset < k, "PilotSchedule: offset out of range");
    require(static_cast<int>(order.size()) == k, "PilotSchedule: order must have k entries");
    std::vector<bool> seen(static_cast<size_t>(k), false);
    for (int b : order) {
        require(b >= 0 && b < k && !seen[static_cast<size_t>(b)],
                "PilotSchedule: order is not a permutation of 0..k-1");
        seen[static_cast<size_t>(b)] = true;
    }
}

namespace {

std::pair<int, int> block_geometry(const SystemConfig& cfg) {
    return {cfg.pilot_blocks(), cfg.pilot_block};
}

PilotSchedule make_schedule(const SystemConfig& cfg, int offset, std::vector<int> order,
                            PilotKind kind) {
    cfg.validate();
    auto [k, m_p] = block_geometry(cfg);
    require(offset >= 0 && offset < k, "pilot offset out of range [0, k)");
    PilotSchedule s;
    s.k = k;
    s.m_p = m_p;
    s.t_w = cfg.t_w;
    s.offset = offset;
    s.order = std::move(order);
    s.kind = kind;
    s.validate();
    return s;
}

} // namespace

PilotSchedule standard_schedule(const SystemConfig& cfg, int offset) {
    auto [k, m_p] = block_geometry(cfg);
    (void)m_p;
    std::vector<int> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    return make_schedule(cfg, offset, std::move(order), PilotKind::Standard);
}

std::vector<int> mcr_order(int k) {
    require(k >= 1, "mcr_order: k must be >= 1");
    std::vector<int> order;
    order.reserve(static_cast<size_t>(k));
    std::vector<bool> used(static_cast<size_t>(k), false);
    for (int s = 0; s < k; ++s) {
        int best_b = -1;
        long best_d = -1;
        for (int b = 0; b < k; ++b) {
            if (used[static_cast<size_t>(b)]) continue;
            // min Chebyshev distance to already placed (step, block) points;
            // both axes share the 1/k normalization, so integers suffice.
            long d = std::numeric_limits<long>::max();
            for (int ps = 0; ps < s; ++ps)
                d = std::min(d, static_cast<long>(std::max(std::abs(s - ps),
                                                           std::abs(b - order[static_cast<size_t>(ps)]))));
            if (d > best_d) {
                best_d = d;
                best_b = b;
            }
        }
        used[static_cast<size_t>(best_b)] = true;
        order.push_back(best_b);
    }
    return order;
}

PilotSchedule mcr_schedule(const SystemConfig& cfg, int offset) {
    auto [k, m_p] = block_geometry(cfg);
    (void)m_p;
    return make_schedule(cfg, offset, mcr_order(k), PilotKind::Mcr);
}

double covering_radius(const PilotSchedule& sched, const SystemConfig& cfg) {
    sched.validate();
    require(sched.n_f() == cfg.n_f && sched.t_w == cfg.t_w,
            "covering_radius: schedule does not match config");
    const double inv_t = 1.0 / sched.t_w;
    const double inv_f = 1.0 / cfg.n_f;
    double radius = 0.0;
    for (int t = 0; t < sched.t_w; ++t) {
        for (int f = 0; f < cfg.n_f; ++f) {
            double dmin = std::numeric_limits<double>::infinity();
            for (int tp = 0; tp < sched.t_w; ++tp) {
                // Blocks are contiguous, so the nearest observed subcarrier
                // in snapshot tp is f clamped into the block.
                const int lo = sched.omega_start(tp);
                const int hi = lo + sched.m_p - 1;
                const int fp = std::clamp(f, lo, hi);
                const double d = std::max(std::abs(t - tp) * inv_t, std::abs(f - fp) * inv_f);
                dmin = std::min(dmin, d);
            }
            radius = std::max(radius, dmin);
        }
    }
    return radius;
}

std::vector<PilotSchedule> enumerate_offsets(const SystemConfig& cfg, PilotKind kind) {
    auto [k, m_p] = block_geometry(cfg);
    (void)m_p;
    std::vector<PilotSchedule> out;
    out.reserve(static_cast<size_t>(k));
    for (int o = 0; o < k; ++o)
        out.push_back(kind == PilotKind::Mcr ? mcr_schedule(cfg, o) : standard_schedule(cfg, o));
    return out;
}

Tensor3 apply_mask(const ChannelWindow& h, const PilotSchedule& sched) {
    sched.validate();
    require(h.data.n1() == sched.n_f() && h.data.n2() == sched.t_w,
            "apply_mask: window shape does not match schedule");
    Tensor3 out(h.data.n0(), sched.m_p, sched.t_w);
    for (int t = 0; t < sched.t_w; ++t)
        out.slice(t) = h.data.slice(t).middleCols(sched.omega_start(t), sched.m_p);
    return out;
}

std::string serialize_schedule(const PilotSchedule& sched) {
    std::ostringstream os;
    os << sched.k << ' ' << sched.m_p << ' ' << sched.t_w << ' ' << sched.offset;
    for (int b : sched.order) os << ' ' << b;
    return os.str();
}

PilotSchedule parse_schedule(const std::string& text) {
    std::istringstream is(text);
    PilotSchedule s;
    if (!(is >> s.k >> s.m_p >> s.t_w >> s.offset))
        throw std::invalid_argument("parse_schedule: malformed header");
    require(s.k >= 1, "parse_schedule: k must be >= 1");
    s.order.resize(static_cast<size_t>(s.k));
    for (int i = 0; i < s.k; ++i)
        if (!(is >> s.order[static_cast<size_t>(i)]))
            throw std::invalid_argument("parse_schedule: truncated order permutation");
    s.validate();
    std::vector<int> identity(static_cast<size_t>(s.k));
    std::iota(identity.begin(), identity.end(), 0);
    if (s.order == identity)
        s.kind = PilotKind::Standard;
    else if (s.order == mcr_order(s.k))
        s.kind = PilotKind::Mcr;
    else
        s.kind = PilotKind::Custom;
    return s;
}

} // namespace dda
