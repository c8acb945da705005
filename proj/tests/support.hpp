#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <cadzow/common.hpp>
#include <cadzow/series.hpp>

namespace cadzow::testing
{

inline Vector random_vector(std::mt19937_64& rng, Index n, double scale = 1.0)
{
    std::normal_distribution<double> d(0.0, scale);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = d(rng);
    }
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols)
{
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = d(rng);
        }
    }
    return m;
}

inline Vector random_positive(std::mt19937_64& rng, Index n, double lo = 0.1, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = d(rng);
    }
    return v;
}

inline Matrix random_positive_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = 0.1, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = d(rng);
        }
    }
    return m;
}

/// Noisy 5 sin(2 pi k / 6), k = 1..n.
inline Vector noisy_sine(std::mt19937_64& rng, Index n, double sigma)
{
    Vector v = random_vector(rng, n, sigma);
    for (Index k = 1; k <= n; ++k) {
        v[k - 1] += 5.0 * std::sin(2.0 * M_PI * static_cast<double>(k) / 6.0);
    }
    return v;
}

/// Sum of damped cosines and an exponential: L-rank 2 * terms + 1.
inline Vector finite_rank_series(std::mt19937_64& rng, Index n, Index terms)
{
    std::uniform_real_distribution<double> freq(0.05, 0.45);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> amp(1.0, 3.0);
    std::uniform_real_distribution<double> base(0.97, 1.02);
    Vector v = Vector::Zero(n);
    const double b0 = base(rng);
    const double a0 = amp(rng);
    for (Index k = 1; k <= n; ++k) {
        v[k - 1] = a0 * std::pow(b0, static_cast<double>(k));
    }
    for (Index t = 0; t < terms; ++t) {
        const double w = freq(rng);
        const double p = phase(rng);
        const double a = amp(rng);
        const double b = base(rng);
        for (Index k = 1; k <= n; ++k) {
            const double x = static_cast<double>(k);
            v[k - 1] += a * std::pow(b, x) * std::cos(2.0 * M_PI * w * x + p);
        }
    }
    return v;
}

inline double rel_diff(double a, double b)
{
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

inline double rel_diff(const Matrix& a, const Matrix& b)
{
    const double scale = std::max(a.norm(), b.norm());
    return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

} // namespace cadzow::testing
