// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>

namespace dda {

/// One-dimensional complex DFT of a fixed length, both directions,
/// backed by FFTW. Forward applies e^{-j 2 pi k n / N} (no scaling),
/// backward its conjugate; backward(forward(x)) == N * x.
///
/// Plan creation is serialized internally; execution on caller-provided
/// buffers is thread-safe, so one Fft can be shared across workers.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return n_; }

    // in and out must be distinct buffers of length size().
    void forward(const std::complex<double>* in, std::complex<double>* out) const;
    void backward(const std::complex<double>* in, std::complex<double>* out) const;

private:
    int n_;
    void* plan_fwd_;
    void* plan_bwd_;
};

} // namespace dda
