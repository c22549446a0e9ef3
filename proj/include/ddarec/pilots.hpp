// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddarec/config.hpp"
#include "ddarec/types.hpp"

namespace dda {

struct ChannelWindow; // channel_sim.hpp

enum class PilotKind { Standard, Mcr, Custom };

const char* to_string(PilotKind k);
PilotKind pilot_kind_from_string(const std::string& s);

/// Frequency-hopping pilot schedule over one reconstruction window.
///
/// The band is split into k contiguous blocks of m_p subcarriers
/// (k * m_p == n_f). Snapshot t observes block order[(offset + t) mod k],
/// i.e. `order` fixes the hopping sequence and `offset` the starting
/// position in that cycle.
struct PilotSchedule {
    int k = 0;
    int m_p = 0;
    int t_w = 0;
    int offset = 0;
    std::vector<int> order; // permutation of 0..k-1
    PilotKind kind = PilotKind::Custom;

    /// Active block index at snapshot t (0-based).
    int block_at(int t) const { return order[static_cast<size_t>((offset + t) % k)]; }

    /// First subcarrier of the block observed at snapshot t.
    int omega_start(int t) const { return block_at(t) * m_p; }

    /// Observed subcarrier set at snapshot t, ascending.
    std::vector<int> omega(int t) const;

    int n_f() const { return k * m_p; }

    void validate() const;
};

/// Protocol-default cyclic hopping: block index advances by one per snapshot.
PilotSchedule standard_schedule(const SystemConfig& cfg, int offset);

/// Coverage-aware hopping order built by a greedy farthest-point rule:
/// each cycle step picks the unused block maximizing the minimum Chebyshev
/// distance max(|dstep|, |dblock|) to all previously placed (step, block)
/// points, ties broken by the smallest block index.
PilotSchedule mcr_schedule(const SystemConfig& cfg, int offset);

/// The greedy hopping order by itself (exposed for the exhaustive-search
/// oracle in tests).
std::vector<int> mcr_order(int k);

/// Largest normalized Chebyshev distance from any (snapshot, subcarrier)
/// grid point to its nearest observed pilot sample, where distances are
/// max(|dt|/t_w, |df|/n_f). Zero means every grid point is observed.
double covering_radius(const PilotSchedule& sched, const SystemConfig& cfg);

/// All k schedules of the given pattern, offsets 0..k-1.
std::vector<PilotSchedule> enumerate_offsets(const SystemConfig& cfg,
                                             PilotKind kind = PilotKind::Standard);

/// Column selection P_Omega: slice t of the result holds the observed
/// columns of H_t in ascending subcarrier order, shape [n_rx x m_p x t_w].
Tensor3 apply_mask(const ChannelWindow& h, const PilotSchedule& sched);

// Plain-text round trip: "k m_p t_w offset order[0] ... order[k-1]".
std::string serialize_schedule(const PilotSchedule& sched);
PilotSchedule parse_schedule(const std::string& text);

} // namespace dda
