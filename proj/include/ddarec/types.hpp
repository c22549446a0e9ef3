// SPDX-License-Identifier: Apache-2.0
//
// ddarec: window-level wideband MIMO channel reconstruction from sparse
// frequency-hopping pilots via Doppler-delay-angle (DDA) sparse recovery.

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dda {

using Complex = std::complex<double>;

using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVec = Eigen::Vector<Complex, Eigen::Dynamic>;
using RVec = Eigen::Vector<double, Eigen::Dynamic>;

using CMatMap = Eigen::Map<CMat>;
using CMatConstMap = Eigen::Map<const CMat>;

/// Complex 3-axis tensor of shape [n0 x n1 x n2], with axis 2 indexing
/// window snapshots (time or Doppler bins). Each axis-2 slice is stored
/// as a contiguous row-major [n0 x n1] matrix, so per-snapshot matrix
/// operations map directly onto Eigen views.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(Eigen::Index n0, Eigen::Index n1, Eigen::Index n2)
        : n0_(n0), n1_(n1), n2_(n2), data_(static_cast<size_t>(n0 * n1 * n2)) {
        if (n0 < 1 || n1 < 1 || n2 < 1)
            throw std::invalid_argument("Tensor3: all dimensions must be >= 1");
    }

    Eigen::Index n0() const { return n0_; }
    Eigen::Index n1() const { return n1_; }
    Eigen::Index n2() const { return n2_; }
    size_t size() const { return data_.size(); }

    Complex& operator()(Eigen::Index i0, Eigen::Index i1, Eigen::Index i2) {
        return data_[static_cast<size_t>((i2 * n0_ + i0) * n1_ + i1)];
    }
    const Complex& operator()(Eigen::Index i0, Eigen::Index i1, Eigen::Index i2) const {
        return data_[static_cast<size_t>((i2 * n0_ + i0) * n1_ + i1)];
    }

    CMatMap slice(Eigen::Index i2) {
        return CMatMap(data_.data() + static_cast<size_t>(i2 * n0_ * n1_), n0_, n1_);
    }
    CMatConstMap slice(Eigen::Index i2) const {
        return CMatConstMap(data_.data() + static_cast<size_t>(i2 * n0_ * n1_), n0_, n1_);
    }

    Complex* data() { return data_.data(); }
    const Complex* data() const { return data_.data(); }

    void setZero() { std::fill(data_.begin(), data_.end(), Complex(0.0, 0.0)); }

    bool same_shape(const Tensor3& o) const {
        return n0_ == o.n0_ && n1_ == o.n1_ && n2_ == o.n2_;
    }

    double squared_norm() const {
        double s = 0.0;
        for (const Complex& v : data_) s += std::norm(v);
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    bool all_finite() const {
        for (const Complex& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    Tensor3& operator+=(const Tensor3& o) {
        check_shape(o);
        for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Tensor3& operator-=(const Tensor3& o) {
        check_shape(o);
        for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Tensor3& operator*=(Complex c) {
        for (Complex& v : data_) v *= c;
        return *this;
    }

    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }

private:
    void check_shape(const Tensor3& o) const {
        if (!same_shape(o)) throw std::invalid_argument("Tensor3: shape mismatch");
    }

    Eigen::Index n0_ = 0, n1_ = 0, n2_ = 0;
    std::vector<Complex> data_;
};

inline double rel_error(const Tensor3& a, const Tensor3& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("rel_error: shape mismatch");
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 0; t < a.n2(); ++t) {
        num += (a.slice(t) - b.slice(t)).squaredNorm();
        den += b.slice(t).squaredNorm();
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

/// Which domain the window axis (axis 2) of a DDA-domain tensor lives in.
enum class Domain { Time, Doppler };

inline const char* to_string(Domain d) { return d == Domain::Time ? "time" : "doppler"; }

/// Delay-angle coefficient tensor [n_theta x n_tau x t_w]; the window axis
/// is either in snapshot order (time) or DFT'd to Doppler bins.
struct DdaTensor {
    Tensor3 data;
    Domain domain = Domain::Time;

    DdaTensor() = default;
    DdaTensor(Tensor3 d, Domain dom) : data(std::move(d)), domain(dom) {}
    DdaTensor(Eigen::Index n_theta, Eigen::Index n_tau, Eigen::Index t_w, Domain dom)
        : data(n_theta, n_tau, t_w), domain(dom) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace dda
