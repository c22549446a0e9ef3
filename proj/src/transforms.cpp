// SPDX-License-Identifier: Apache-2.0

#include "ddarec/transforms.hpp"

#include <cmath>

namespace dda {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

Complex unit_phase(double ph) { return {std::cos(ph), std::sin(ph)}; }

/// Unitary t_w-point DFT matrix for the window axis, analysis sign.
CMat window_dft(int t_w) {
    CMat f(t_w, t_w);
    const double scale = 1.0 / std::sqrt(static_cast<double>(t_w));
    for (int m = 0; m < t_w; ++m)
        for (int t = 0; t < t_w; ++t)
            f(m, t) = scale * unit_phase(-kTwoPi * m * t / t_w);
    return f;
}
} // namespace

DictionarySet::DictionarySet(const SystemConfig& cfg, int k_sa, int k_fd) : cfg_(cfg) {
    cfg.validate();
    require(k_sa == 1, "DictionarySet: only k_sa = 1 is supported");
    require(k_fd >= 1 && k_fd <= 3, "DictionarySet: k_fd must be in {1,2,3}");
    k_sa_ = k_sa;
    k_fd_ = k_fd;
    n_theta_ = cfg.n_pol * cfg.n_v * cfg.n_h * k_sa * k_sa;
    n_tau_ = k_fd * cfg.n_f;
    fd_scale_ = 1.0 / std::sqrt(static_cast<double>(n_tau_));
    fft_ = std::make_shared<Fft>(n_tau_);

    // f_sa = I_pol (x) (F_h (x) F_v); columns are on-grid array responses.
    const int n_rx = cfg.n_rx();
    f_sa_ = CMat::Zero(n_rx, n_theta_);
    const double sv = 1.0 / std::sqrt(static_cast<double>(cfg.n_v));
    const double sh = 1.0 / std::sqrt(static_cast<double>(cfg.n_h));
    for (int pol = 0; pol < cfg.n_pol; ++pol)
        for (int h = 0; h < cfg.n_h; ++h)
            for (int v = 0; v < cfg.n_v; ++v) {
                const int r = rx_index(cfg, pol, h, v);
                for (int kh = 0; kh < cfg.n_h; ++kh)
                    for (int kv = 0; kv < cfg.n_v; ++kv) {
                        const int c = rx_index(cfg, pol, kh, kv);
                        f_sa_(r, c) = sh * unit_phase(-kTwoPi * h * kh / cfg.n_h) *
                                      sv * unit_phase(-kTwoPi * v * kv / cfg.n_v);
                    }
            }

    sa_defect_ = (f_sa_.adjoint() * f_sa_ - CMat::Identity(n_theta_, n_theta_))
                     .cwiseAbs()
                     .maxCoeff();
}

DictionarySet build_dictionaries(const SystemConfig& cfg, int k_sa, int k_fd) {
    return DictionarySet(cfg, k_sa, k_fd);
}

CMat DictionarySet::f_fd_dense() const {
    CMat f(cfg_.n_f, n_tau_);
    for (int row = 0; row < cfg_.n_f; ++row)
        for (int n = 0; n < n_tau_; ++n)
            f(row, n) = fd_scale_ * unit_phase(kTwoPi * row * n / n_tau_);
    return f;
}

CMat DictionarySet::sensing_matrix(const std::vector<int>& omega) const {
    std::vector<bool> seen(static_cast<size_t>(cfg_.n_f), false);
    for (int f : omega) {
        require(f >= 0 && f < cfg_.n_f, "sensing_matrix: subcarrier index out of range");
        require(!seen[static_cast<size_t>(f)], "sensing_matrix: duplicate subcarrier index");
        seen[static_cast<size_t>(f)] = true;
    }
    CMat a(static_cast<Eigen::Index>(omega.size()), n_tau_);
    for (size_t p = 0; p < omega.size(); ++p)
        for (int n = 0; n < n_tau_; ++n)
            a(static_cast<Eigen::Index>(p), n) =
                fd_scale_ * unit_phase(kTwoPi * omega[p] * n / n_tau_);
    return a;
}

CMat DictionarySet::rows_times_ffd(CMatConstMap g) const {
    require(g.cols() == cfg_.n_f, "rows_times_ffd: row length must be n_f");
    CMat out(g.rows(), n_tau_);
    std::vector<Complex> buf(static_cast<size_t>(n_tau_), Complex(0, 0));
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        std::copy(g.row(i).data(), g.row(i).data() + cfg_.n_f, buf.data());
        std::fill(buf.begin() + cfg_.n_f, buf.end(), Complex(0, 0));
        fft_->backward(buf.data(), out.row(i).data());
        out.row(i) *= fd_scale_;
    }
    return out;
}

CMat DictionarySet::rows_times_ffd_adj(CMatConstMap x) const {
    require(x.cols() == n_tau_, "rows_times_ffd_adj: row length must be n_tau");
    CMat out(x.rows(), cfg_.n_f);
    std::vector<Complex> buf(static_cast<size_t>(n_tau_));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        fft_->forward(x.row(i).data(), buf.data());
        for (int f = 0; f < cfg_.n_f; ++f) out(i, f) = fd_scale_ * buf[static_cast<size_t>(f)];
    }
    return out;
}

CMat DictionarySet::rows_times_a(const CMat& d, int omega_start, int m_p) const {
    require(d.cols() == m_p, "rows_times_a: row length must be m_p");
    require(omega_start >= 0 && omega_start + m_p <= cfg_.n_f, "rows_times_a: block out of range");
    CMat out(d.rows(), n_tau_);
    std::vector<Complex> buf(static_cast<size_t>(n_tau_), Complex(0, 0));
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        std::fill(buf.begin(), buf.end(), Complex(0, 0));
        for (int p = 0; p < m_p; ++p) buf[static_cast<size_t>(omega_start + p)] = d(i, p);
        fft_->backward(buf.data(), out.row(i).data());
        out.row(i) *= fd_scale_;
    }
    return out;
}

CMat DictionarySet::rows_times_a_adj(CMatConstMap c, int omega_start, int m_p) const {
    require(c.cols() == n_tau_, "rows_times_a_adj: row length must be n_tau");
    require(omega_start >= 0 && omega_start + m_p <= cfg_.n_f,
            "rows_times_a_adj: block out of range");
    CMat out(c.rows(), m_p);
    std::vector<Complex> buf(static_cast<size_t>(n_tau_));
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        fft_->forward(c.row(i).data(), buf.data());
        for (int p = 0; p < m_p; ++p) out(i, p) = fd_scale_ * buf[static_cast<size_t>(omega_start + p)];
    }
    return out;
}

CMat DictionarySet::project_rows(CMatConstMap c, int omega_start, int m_p) const {
    require(c.cols() == n_tau_, "project_rows: row length must be n_tau");
    require(omega_start >= 0 && omega_start + m_p <= cfg_.n_f, "project_rows: block out of range");
    CMat out(c.rows(), n_tau_);
    std::vector<Complex> buf(static_cast<size_t>(n_tau_));
    std::vector<Complex> masked(static_cast<size_t>(n_tau_), Complex(0, 0));
    const double s2 = fd_scale_ * fd_scale_;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        fft_->forward(c.row(i).data(), buf.data());
        std::fill(masked.begin(), masked.end(), Complex(0, 0));
        for (int p = 0; p < m_p; ++p) {
            const auto f = static_cast<size_t>(omega_start + p);
            masked[f] = buf[f];
        }
        fft_->backward(masked.data(), out.row(i).data());
        out.row(i) *= s2;
    }
    return out;
}

DdaTensor analysis(const ChannelWindow& h, const DictionarySet& dict) {
    const SystemConfig& cfg = dict.config();
    require(h.data.n0() == cfg.n_rx() && h.data.n1() == cfg.n_f && h.data.n2() == cfg.t_w,
            "analysis: window shape does not match dictionary config");
    DdaTensor x(dict.n_theta(), dict.n_tau(), cfg.t_w, Domain::Time);
    for (int t = 0; t < cfg.t_w; ++t) {
        CMat g = dict.f_sa().adjoint() * h.data.slice(t);
        x.data.slice(t) = dict.rows_times_ffd(CMatConstMap(g.data(), g.rows(), g.cols()));
    }
    return x;
}

ChannelWindow synthesis(const DdaTensor& x, const DictionarySet& dict) {
    require(x.domain == Domain::Time,
            "synthesis: input must be in the time domain (apply to_time first)");
    const SystemConfig& cfg = dict.config();
    require(x.data.n0() == dict.n_theta() && x.data.n1() == dict.n_tau() &&
                x.data.n2() == cfg.t_w,
            "synthesis: tensor shape does not match dictionary config");
    ChannelWindow h(cfg);
    for (int t = 0; t < cfg.t_w; ++t)
        h.data.slice(t) = dict.f_sa() * dict.rows_times_ffd_adj(x.data.slice(t));
    return h;
}

namespace {
DdaTensor window_transform(const DdaTensor& x, Domain from, Domain to, bool inverse) {
    require(x.domain == from, inverse ? "to_time: input must be Doppler-domain"
                                      : "to_doppler: input must be time-domain");
    const auto t_w = static_cast<int>(x.data.n2());
    const CMat f = window_dft(t_w);
    DdaTensor out(x.data.n0(), x.data.n1(), t_w, to);
    out.data.setZero();
    for (int m = 0; m < t_w; ++m) {
        auto dst = out.data.slice(m);
        for (int t = 0; t < t_w; ++t) {
            const Complex w = inverse ? std::conj(f(t, m)) : f(m, t);
            dst += w * x.data.slice(t);
        }
    }
    return out;
}
} // namespace

DdaTensor to_doppler(const DdaTensor& x) {
    return window_transform(x, Domain::Time, Domain::Doppler, false);
}

DdaTensor to_time(const DdaTensor& x) {
    return window_transform(x, Domain::Doppler, Domain::Time, true);
}

} // namespace dda
