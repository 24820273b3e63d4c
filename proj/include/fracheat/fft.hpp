#pragma once

// Minimal power-of-two complex FFT with an N-dimensional driver (separable
// axis passes).  Twiddles come from one precomputed exp table indexed
// exactly, so no incremental-rotation drift accumulates.

#include <complex>
#include <vector>

#include "fracheat/errors.hpp"

namespace fracheat {

/// In-place radix-2 FFT of a power-of-two-length complex vector.
/// `inverse` applies the conjugate transform and the 1/n scale.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw DomainError("fft_pow2: length must be a positive power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    static thread_local std::vector<std::complex<double>> twiddle;
    static thread_local std::size_t twiddle_n = 0;
    if (twiddle_n != n) {
        twiddle.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j)
            twiddle[j] = std::polar(1.0, -2.0 * M_PI * double(j) / double(n));
        twiddle_n = n;
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> w = twiddle[j * stride];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / double(n);
        for (auto& z : a) z *= s;
    }
}

/// N-dimensional FFT of a row-major array (dims.back() is the fastest axis).
inline void fft_nd(std::vector<std::complex<double>>& a, const std::vector<int>& dims,
                   bool inverse) {
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    if (total != a.size()) throw DomainError("fft_nd: dims do not match array size");
    const int nd = static_cast<int>(dims.size());
    std::vector<std::complex<double>> line;
    for (int axis = 0; axis < nd; ++axis) {
        const std::size_t n = dims[axis];
        std::size_t stride = 1;
        for (int d = axis + 1; d < nd; ++d) stride *= dims[d];
        const std::size_t block = stride * n;
        line.resize(n);
        for (std::size_t base = 0; base < total; base += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                for (std::size_t i = 0; i < n; ++i) line[i] = a[base + off + i * stride];
                fft_pow2(line, inverse);
                for (std::size_t i = 0; i < n; ++i) a[base + off + i * stride] = line[i];
            }
        }
    }
}

} // namespace fracheat
