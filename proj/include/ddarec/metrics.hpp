// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ddarec/channel_sim.hpp"
#include "ddarec/types.hpp"

namespace dda {

/// Exact-recovery floor substituted for -inf dB.
inline constexpr double kNmseFloorDb = -300.0;

/// 10 log10(||h_hat - h||_F^2 / ||h||_F^2), floored at kNmseFloorDb.
/// Rejects a zero-norm reference.
double nmse_db(const ChannelWindow& h_hat, const ChannelWindow& h);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) {
    return std::max(kNmseFloorDb, 10.0 * std::log10(std::max(lin, 1e-300)));
}

} // namespace dda
