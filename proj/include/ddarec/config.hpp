// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

#include "ddarec/types.hpp"

namespace dda {

/// Array / grid / window geometry of one reconstruction problem.
///
/// Receive-axis index convention, used everywhere a length-n_rx vector is
/// unpacked: r = pol * (n_h * n_v) + h * n_v + v, i.e. polarization is the
/// outermost Kronecker factor and the vertical element index varies fastest.
struct SystemConfig {
    int n_v = 4;             // vertical antenna elements
    int n_h = 8;             // horizontal antenna elements
    int n_pol = 2;           // polarizations
    int n_f = 408;           // subcarriers
    double delta_f = 240e3;  // subcarrier spacing [Hz]
    int t_w = 10;            // snapshots per reconstruction window
    double delta_t = 0.040;  // inter-snapshot interval [s]
    double carrier_freq = 3.5e9; // [Hz]
    int pilot_block = 24;    // subcarriers per pilot block; must divide n_f

    int n_rx() const { return n_v * n_h * n_pol; }

    /// Largest delay representable without aliasing on the delay grid.
    double delay_range() const { return 1.0 / delta_f; }

    /// Half-width of the unambiguous Doppler interval; +/-12.5 Hz at the
    /// default 40 ms snapshot spacing.
    double doppler_limit() const { return 0.5 / delta_t; }

    void validate() const {
        require(n_v >= 1 && n_h >= 1 && n_pol >= 1, "SystemConfig: antenna counts must be >= 1");
        require(n_f >= 1, "SystemConfig: n_f must be >= 1");
        require(t_w >= 1, "SystemConfig: t_w must be >= 1");
        require(delta_f > 0.0, "SystemConfig: delta_f must be positive");
        require(delta_t > 0.0, "SystemConfig: delta_t must be positive");
        require(pilot_block >= 1 && n_f % pilot_block == 0,
                "SystemConfig: pilot_block must divide n_f");
    }

    int pilot_blocks() const { return n_f / pilot_block; }

    static SystemConfig small_test() {
        SystemConfig c;
        c.n_v = 2;
        c.n_h = 2;
        c.n_pol = 2;
        c.n_f = 40;
        c.t_w = 10;
        c.pilot_block = 8;
        return c;
    }

    bool operator==(const SystemConfig&) const = default;
};

/// Receive-axis flattening helper; all modules go through this so the
/// Kronecker order (pol (x) horizontal (x) vertical) cannot drift apart.
inline int rx_index(const SystemConfig& cfg, int pol, int h, int v) {
    return (pol * cfg.n_h + h) * cfg.n_v + v;
}

} // namespace dda
