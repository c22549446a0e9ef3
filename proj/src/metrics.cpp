// SPDX-License-Identifier: Apache-2.0

#include "ddarec/metrics.hpp"

namespace dda {

double nmse_db(const ChannelWindow& h_hat, const ChannelWindow& h) {
    require(h_hat.data.same_shape(h.data), "nmse_db: shape mismatch");
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 0; t < h.data.n2(); ++t) {
        num += (h_hat.data.slice(t) - h.data.slice(t)).squaredNorm();
        den += h.data.slice(t).squaredNorm();
    }
    require(den > 0.0, "nmse_db: reference window has zero norm");
    return linear_to_db(num / den);
}

} // namespace dda
