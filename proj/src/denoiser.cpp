// SPDX-License-Identifier: Apache-2.0

#include "ddarec/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "ddarec/rng.hpp"

namespace dda {

const char* to_string(PaddingMode m) {
    return m == PaddingMode::CircularTime ? "circular_time" : "zero_time";
}

double bspline_eval(double x, const std::vector<double>& coeffs, const KnotGrid& grid) {
    require(grid.n_knots >= 4, "bspline_eval: need at least 4 knots");
    require(static_cast<int>(coeffs.size()) == grid.n_coeffs(),
            "bspline_eval: coefficient count must be n_knots + 2");
    const double h = grid.spacing();
    const double r = grid.range;

    auto eval_inside = [&](double xi, double* deriv) {
        const double u = (xi + r) / h;
        int k = static_cast<int>(std::floor(u));
        k = std::clamp(k, 0, grid.n_knots - 2);
        const double s = u - k;
        const double* c = coeffs.data() + k;
        const double s2 = s * s, s3 = s2 * s;
        const double b0 = (1 - 3 * s + 3 * s2 - s3) / 6.0;
        const double b1 = (4 - 6 * s2 + 3 * s3) / 6.0;
        const double b2 = (1 + 3 * s + 3 * s2 - 3 * s3) / 6.0;
        const double b3 = s3 / 6.0;
        if (deriv) {
            const double d0 = (-1 + 2 * s - s2) / 2.0;
            const double d1 = (-4 * s + 3 * s2) / 2.0;
            const double d2 = (1 + 2 * s - 3 * s2) / 2.0;
            const double d3 = s2 / 2.0;
            *deriv = (c[0] * d0 + c[1] * d1 + c[2] * d2 + c[3] * d3) / h;
        }
        return c[0] * b0 + c[1] * b1 + c[2] * b2 + c[3] * b3;
    };

    if (x >= -r && x <= r) return eval_inside(x, nullptr);
    const double edge = x < -r ? -r : r;
    double slope;
    const double val = eval_inside(edge, &slope);
    return val + slope * (x - edge);
}

std::vector<double> bspline_identity_coeffs(const KnotGrid& grid) {
    // Cubic B-splines reproduce linear functions when each coefficient
    // equals its basis center; coefficient j is centered at -range + (j-1)h.
    // Computed about the grid midpoint so the values are exactly
    // antisymmetric.
    std::vector<double> c(static_cast<size_t>(grid.n_coeffs()));
    const double h = grid.spacing();
    for (int j = 0; j < grid.n_coeffs(); ++j)
        c[static_cast<size_t>(j)] = ((j - 1) - 0.5 * (grid.n_knots - 1)) * h;
    return c;
}

namespace {

void validate_conv(const Conv3dWeights& c, const char* name) {
    require(c.out_ch >= 1 && c.in_ch >= 1, std::string(name) + ": channel counts must be >= 1");
    require(c.k_theta >= 1 && c.k_tau >= 1 && c.k_t >= 1 && c.k_theta % 2 == 1 &&
                c.k_tau % 2 == 1 && c.k_t % 2 == 1,
            std::string(name) + ": kernel extents must be odd and >= 1");
    const size_t expect = static_cast<size_t>(c.out_ch) * c.in_ch * c.k_theta * c.k_tau * c.k_t;
    require(c.w.size() == expect, std::string(name) + ": kernel size mismatch");
    require(c.bias.size() == static_cast<size_t>(c.out_ch), std::string(name) + ": bias size mismatch");
    for (double v : c.w)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + ": non-finite kernel entry");
    for (double v : c.bias)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + ": non-finite bias entry");
}

/// Real tensor [ch][t][n_theta][n_tau], delay axis contiguous.
struct Packed {
    int ch, n_t, n_theta, n_tau;
    std::vector<double> v;

    Packed(int c, int t, int th, int ta)
        : ch(c), n_t(t), n_theta(th), n_tau(ta),
          v(static_cast<size_t>(c) * t * th * ta, 0.0) {}

    double* row(int c, int t, int i) {
        return v.data() + ((static_cast<size_t>(c) * n_t + t) * n_theta + i) * n_tau;
    }
    const double* row(int c, int t, int i) const {
        return v.data() + ((static_cast<size_t>(c) * n_t + t) * n_theta + i) * n_tau;
    }
};

void conv3d(const Packed& in, const Conv3dWeights& k, PaddingMode pad, Packed& out) {
    const int ht = (k.k_t - 1) / 2, hi = (k.k_theta - 1) / 2, hj = (k.k_tau - 1) / 2;
    const bool circ = pad == PaddingMode::CircularTime;
    for (int co = 0; co < k.out_ch; ++co) {
        for (int t = 0; t < in.n_t; ++t)
            for (int i = 0; i < in.n_theta; ++i)
                std::fill_n(out.row(co, t, i), in.n_tau, k.bias[static_cast<size_t>(co)]);
        for (int ci = 0; ci < k.in_ch; ++ci)
            for (int dth = 0; dth < k.k_theta; ++dth)
                for (int dta = 0; dta < k.k_tau; ++dta)
                    for (int dt = 0; dt < k.k_t; ++dt) {
                        const double w = k.at(co, ci, dth, dta, dt);
                        if (w == 0.0) continue;
                        const int oi = dth - hi, oj = dta - hj, ot = dt - ht;
                        const int jlo = std::max(0, -oj), jhi = std::min(in.n_tau, in.n_tau - oj);
                        for (int t = 0; t < in.n_t; ++t) {
                            int t_in = t + ot;
                            if (circ)
                                t_in = (t_in % in.n_t + in.n_t) % in.n_t;
                            else if (t_in < 0 || t_in >= in.n_t)
                                continue;
                            const int ilo = std::max(0, -oi),
                                      ihi = std::min(in.n_theta, in.n_theta - oi);
                            for (int i = ilo; i < ihi; ++i) {
                                const double* src = in.row(ci, t_in, i + oi) + oj;
                                double* dst = out.row(co, t, i);
                                for (int j = jlo; j < jhi; ++j) dst[j] += w * src[j];
                            }
                        }
                    }
    }
}

} // namespace

void DenoiserWeights::validate() const {
    validate_conv(conv1, "conv1");
    validate_conv(conv2, "conv2");
    require(conv1.in_ch == 2 && conv2.out_ch == 2,
            "DenoiserWeights: outer channel count must be 2 (real/imag split)");
    require(conv1.out_ch == conv2.in_ch, "DenoiserWeights: conv1.out must equal conv2.in");
    require(grid.n_knots >= 4, "DenoiserWeights: spline needs at least 4 knots");
    require(grid.range > 0.0, "DenoiserWeights: spline range must be positive");
    require(static_cast<int>(spline_coeffs.size()) == conv1.out_ch,
            "DenoiserWeights: one spline per hidden channel");
    for (const auto& c : spline_coeffs) {
        require(static_cast<int>(c.size()) == grid.n_coeffs(),
                "DenoiserWeights: spline coefficient count mismatch");
        for (double v : c)
            if (!std::isfinite(v))
                throw std::invalid_argument("DenoiserWeights: non-finite spline coefficient");
    }
}

NormalizationState normalization_scale(const Tensor3& u) {
    const double rms = std::sqrt(u.squared_norm() / static_cast<double>(u.size()));
    return NormalizationState{std::max(rms, 1e-12)};
}

DdaTensor apply_denoiser(const DdaTensor& u, const DenoiserWeights& w) {
    w.validate();
    const bool want_doppler = w.padding == PaddingMode::CircularTime;
    require((u.domain == Domain::Doppler) == want_doppler,
            "apply_denoiser: padding mode does not match the tensor domain "
            "(circular_time needs Doppler, zero_time needs time)");

    const int n_theta = static_cast<int>(u.data.n0());
    const int n_tau = static_cast<int>(u.data.n1());
    const int n_t = static_cast<int>(u.data.n2());

    const NormalizationState norm = normalization_scale(u.data);
    const double inv_scale = 1.0 / norm.scale;

    Packed x(2, n_t, n_theta, n_tau);
    for (int t = 0; t < n_t; ++t)
        for (int i = 0; i < n_theta; ++i) {
            double* re = x.row(0, t, i);
            double* im = x.row(1, t, i);
            for (int j = 0; j < n_tau; ++j) {
                const Complex c = u.data(i, j, t) * inv_scale;
                re[j] = c.real();
                im[j] = c.imag();
            }
        }

    Packed hid(w.hidden(), n_t, n_theta, n_tau);
    conv3d(x, w.conv1, w.padding, hid);

    for (int c = 0; c < w.hidden(); ++c) {
        const auto& coeffs = w.spline_coeffs[static_cast<size_t>(c)];
        double* p = hid.row(c, 0, 0);
        const size_t n = static_cast<size_t>(n_t) * n_theta * n_tau;
        for (size_t q = 0; q < n; ++q) p[q] = bspline_eval(p[q], coeffs, w.grid);
    }

    Packed corr(2, n_t, n_theta, n_tau);
    conv3d(hid, w.conv2, w.padding, corr);

    DdaTensor out(n_theta, n_tau, n_t, u.domain);
    for (int t = 0; t < n_t; ++t)
        for (int i = 0; i < n_theta; ++i) {
            const double* re = corr.row(0, t, i);
            const double* im = corr.row(1, t, i);
            for (int j = 0; j < n_tau; ++j)
                out.data(i, j, t) = u.data(i, j, t) - norm.scale * Complex(re[j], im[j]);
        }
    if (!out.data.all_finite())
        throw std::runtime_error("apply_denoiser: non-finite intermediate value");
    return out;
}

DenoiserWeights random_weights(uint64_t seed, const DenoiserSpec& spec) {
    Rng rng = Rng::stream(seed, rng_stream::kWeights);
    auto init_conv = [&](int out_ch, int in_ch) {
        Conv3dWeights c;
        c.out_ch = out_ch;
        c.in_ch = in_ch;
        c.k_theta = spec.k_theta;
        c.k_tau = spec.k_tau;
        c.k_t = spec.k_t;
        const size_t n = static_cast<size_t>(out_ch) * in_ch * spec.k_theta * spec.k_tau * spec.k_t;
        c.w.resize(n);
        const double std_dev = std::sqrt(1.0 / (in_ch * spec.k_theta * spec.k_tau * spec.k_t));
        for (double& v : c.w) v = std_dev * rng.gauss();
        c.bias.assign(static_cast<size_t>(out_ch), 0.0);
        return c;
    };
    DenoiserWeights w;
    w.conv1 = init_conv(spec.hidden, 2);
    w.conv2 = init_conv(2, spec.hidden);
    w.grid = spec.grid;
    w.spline_coeffs.assign(static_cast<size_t>(spec.hidden), bspline_identity_coeffs(spec.grid));
    w.padding = spec.padding;
    w.validate();
    return w;
}

// ---------------------------------------------------------------------------
// Weights file

namespace {

constexpr char kMagic[8] = {'D', 'D', 'A', 'W', 'G', 'T', '0', '1'};
constexpr uint32_t kVersion = 1;

struct NamedArray {
    std::string name;
    std::vector<uint64_t> dims;
    std::vector<double> data;
};

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& is) {
    uint32_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("weights file truncated");
    return v;
}
uint64_t read_u64(std::istream& is) {
    uint64_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("weights file truncated");
    return v;
}

void write_arrays(const std::string& path, const std::vector<NamedArray>& arrays) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open weights file for writing: " + path);
    os.write(kMagic, 8);
    write_u32(os, kVersion);
    write_u32(os, static_cast<uint32_t>(arrays.size()));
    uint64_t offset = 0;
    for (const auto& a : arrays) {
        write_u32(os, static_cast<uint32_t>(a.name.size()));
        os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        write_u32(os, static_cast<uint32_t>(a.dims.size()));
        for (uint64_t d : a.dims) write_u64(os, d);
        write_u64(os, offset);
        offset += a.data.size() * sizeof(double);
    }
    write_u64(os, offset);
    for (const auto& a : arrays)
        os.write(reinterpret_cast<const char*>(a.data.data()),
                 static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!os) throw std::runtime_error("failed writing weights file: " + path);
}

std::map<std::string, NamedArray> read_arrays(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open weights file: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("weights file magic mismatch");
    if (read_u32(is) != kVersion) throw std::runtime_error("weights file version mismatch");
    const uint32_t n_arrays = read_u32(is);
    struct Entry {
        std::string name;
        std::vector<uint64_t> dims;
        uint64_t offset, count;
    };
    std::vector<Entry> dir;
    for (uint32_t i = 0; i < n_arrays; ++i) {
        Entry e;
        const uint32_t len = read_u32(is);
        e.name.resize(len);
        if (!is.read(e.name.data(), len)) throw std::runtime_error("weights file truncated");
        const uint32_t ndim = read_u32(is);
        uint64_t count = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            e.dims.push_back(read_u64(is));
            count *= e.dims.back();
        }
        e.offset = read_u64(is);
        e.count = count;
        dir.push_back(std::move(e));
    }
    read_u64(is); // payload size
    const std::streampos payload_start = is.tellg();
    std::map<std::string, NamedArray> out;
    for (const auto& e : dir) {
        NamedArray a;
        a.name = e.name;
        a.dims = e.dims;
        a.data.resize(e.count);
        is.seekg(payload_start + static_cast<std::streamoff>(e.offset));
        if (!is.read(reinterpret_cast<char*>(a.data.data()),
                     static_cast<std::streamsize>(e.count * sizeof(double))))
            throw std::runtime_error("weights file truncated in array " + e.name);
        for (double v : a.data)
            if (!std::isfinite(v))
                throw std::runtime_error("weights file has non-finite values in array " + e.name);
        out.emplace(a.name, std::move(a));
    }
    return out;
}

const NamedArray& need(const std::map<std::string, NamedArray>& m, const std::string& name) {
    auto it = m.find(name);
    if (it == m.end()) throw std::runtime_error("weights file missing array " + name);
    return it->second;
}

} // namespace

void save_weights(const DenoiserWeights& w, const std::string& path) {
    w.validate();
    std::vector<NamedArray> arrays;
    auto conv_dims = [](const Conv3dWeights& c) {
        return std::vector<uint64_t>{static_cast<uint64_t>(c.out_ch), static_cast<uint64_t>(c.in_ch),
                                     static_cast<uint64_t>(c.k_theta), static_cast<uint64_t>(c.k_tau),
                                     static_cast<uint64_t>(c.k_t)};
    };
    arrays.push_back({"conv1.weight", conv_dims(w.conv1), w.conv1.w});
    arrays.push_back({"conv1.bias", {static_cast<uint64_t>(w.conv1.out_ch)}, w.conv1.bias});
    arrays.push_back({"conv2.weight", conv_dims(w.conv2), w.conv2.w});
    arrays.push_back({"conv2.bias", {static_cast<uint64_t>(w.conv2.out_ch)}, w.conv2.bias});
    std::vector<double> flat;
    for (const auto& c : w.spline_coeffs) flat.insert(flat.end(), c.begin(), c.end());
    arrays.push_back({"spline.coeffs",
                      {static_cast<uint64_t>(w.spline_coeffs.size()),
                       static_cast<uint64_t>(w.grid.n_coeffs())},
                      std::move(flat)});
    arrays.push_back({"spline.grid", {2}, {static_cast<double>(w.grid.n_knots), w.grid.range}});
    arrays.push_back({"padding", {1}, {w.padding == PaddingMode::CircularTime ? 0.0 : 1.0}});
    write_arrays(path, arrays);
}

DenoiserWeights load_weights(const std::string& path) {
    const auto arrays = read_arrays(path);
    DenoiserWeights w;
    auto load_conv = [&](const char* stem, Conv3dWeights& c) {
        const NamedArray& kw = need(arrays, std::string(stem) + ".weight");
        if (kw.dims.size() != 5) throw std::runtime_error("weights file: bad kernel rank in " + kw.name);
        c.out_ch = static_cast<int>(kw.dims[0]);
        c.in_ch = static_cast<int>(kw.dims[1]);
        c.k_theta = static_cast<int>(kw.dims[2]);
        c.k_tau = static_cast<int>(kw.dims[3]);
        c.k_t = static_cast<int>(kw.dims[4]);
        c.w = kw.data;
        c.bias = need(arrays, std::string(stem) + ".bias").data;
    };
    load_conv("conv1", w.conv1);
    load_conv("conv2", w.conv2);
    const NamedArray& grid = need(arrays, "spline.grid");
    if (grid.data.size() != 2) throw std::runtime_error("weights file: bad spline.grid");
    w.grid.n_knots = static_cast<int>(grid.data[0]);
    w.grid.range = grid.data[1];
    const NamedArray& sc = need(arrays, "spline.coeffs");
    if (sc.dims.size() != 2 || sc.dims[0] != static_cast<uint64_t>(w.conv1.out_ch) ||
        sc.dims[1] != static_cast<uint64_t>(w.grid.n_coeffs()))
        throw std::runtime_error("weights file: spline.coeffs dims mismatch declared config");
    w.spline_coeffs.resize(sc.dims[0]);
    for (size_t c = 0; c < sc.dims[0]; ++c)
        w.spline_coeffs[c].assign(sc.data.begin() + static_cast<std::ptrdiff_t>(c * sc.dims[1]),
                                  sc.data.begin() + static_cast<std::ptrdiff_t>((c + 1) * sc.dims[1]));
    const double pad = need(arrays, "padding").data.at(0);
    w.padding = pad == 0.0 ? PaddingMode::CircularTime : PaddingMode::ZeroTime;
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("weights file fails validation: ") + e.what());
    }
    return w;
}

} // namespace dda
