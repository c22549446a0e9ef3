// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddarec/types.hpp"

namespace dda {

/// Padding along the window axis. Doppler-domain tensors are DFT-periodic,
/// so they pad circularly; time-domain tensors pad with zeros. The angle
/// and delay axes always pad with zeros.
enum class PaddingMode { CircularTime, ZeroTime };

const char* to_string(PaddingMode m);

struct Conv3dWeights {
    int out_ch = 0, in_ch = 0;
    int k_theta = 0, k_tau = 0, k_t = 0; // kernel extents, all odd
    std::vector<double> w;               // [out][in][k_theta][k_tau][k_t]
    std::vector<double> bias;            // [out]

    double& at(int co, int ci, int dth, int dta, int dt) {
        return w[static_cast<size_t>((((co * in_ch + ci) * k_theta + dth) * k_tau + dta) * k_t + dt)];
    }
    const double& at(int co, int ci, int dth, int dta, int dt) const {
        return w[static_cast<size_t>((((co * in_ch + ci) * k_theta + dth) * k_tau + dta) * k_t + dt)];
    }
};

/// Uniform knot grid on [-range, range] for the cubic B-spline activations.
struct KnotGrid {
    int n_knots = 31;
    double range = 3.0;

    double spacing() const { return 2.0 * range / (n_knots - 1); }
    /// Coefficient count: one per knot plus one padding coefficient on each
    /// side, so partition of unity and linear reproduction hold on the
    /// whole span [-range, range].
    int n_coeffs() const { return n_knots + 2; }
};

/// Cubic B-spline on the uniform grid; linear extrapolation with the
/// boundary slope outside the span. C^1 everywhere.
double bspline_eval(double x, const std::vector<double>& coeffs, const KnotGrid& grid);

/// Coefficients that reproduce f(x) = x exactly on the span.
std::vector<double> bspline_identity_coeffs(const KnotGrid& grid);

/// Residual denoiser parameters: conv -> channel-wise B-spline -> conv,
/// acting on the real/imaginary-split tensor.
struct DenoiserWeights {
    Conv3dWeights conv1; // 2 -> hidden
    Conv3dWeights conv2; // hidden -> 2
    KnotGrid grid;
    std::vector<std::vector<double>> spline_coeffs; // [hidden][grid.n_coeffs()]
    PaddingMode padding = PaddingMode::CircularTime;

    int hidden() const { return conv1.out_ch; }
    void validate() const;
};

/// Shape/extent spec for building fresh weights.
struct DenoiserSpec {
    int hidden = 16;
    int k_theta = 3;
    int k_tau = 11;
    int k_t = 3;
    KnotGrid grid;
    PaddingMode padding = PaddingMode::CircularTime;
};

/// Per-invocation amplitude normalization: the tensor is divided by its
/// RMS amplitude before conv1 and the correction branch is scaled back
/// after conv2.
struct NormalizationState {
    double scale = 1.0; // max(rms, 1e-12)
};

NormalizationState normalization_scale(const Tensor3& u);

/// D(U) = U - C2(Psi(C1(U / rms))) * rms, on the 2-channel real/imag
/// packing of U. Padding mode must match the tensor's domain tag.
DdaTensor apply_denoiser(const DdaTensor& u, const DenoiserWeights& w);

/// Deterministic variance-scaled init; splines start as the identity map
/// on their span.
DenoiserWeights random_weights(uint64_t seed, const DenoiserSpec& spec);

// Binary weights file: magic + version + named-array directory
// (name, dtype, dims, byte offset), arrays row-major f64 little-endian.
// Round trips are bit-exact.
void save_weights(const DenoiserWeights& w, const std::string& path);
DenoiserWeights load_weights(const std::string& path);

} // namespace dda
