#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <cadzow/common.hpp>
#include <cadzow/lowrank.hpp>
#include <cadzow/series.hpp>
#include <cadzow/weights.hpp>

namespace cadzow
{

/// Largest absolute correlation and its (1-based) index pair.
struct CorrelationPeak
{
    double value = 0.0;
    Index first  = 0;
    Index second = 0;
};

struct SeparabilityReport
{
    double max_col_corr = 0.0;
    double max_row_corr = 0.0;
    double rho          = 0.0;
    CorrelationPeak col_peak;
    CorrelationPeak row_peak;
    /// Some rows had zero C-norm and were left out of the row maximum.
    bool excluded_rows = false;
};

namespace detail
{

inline void check_pair(const Vector& x1, const Vector& x2, Index window)
{
    require(x1.size() == x2.size(), "separability: series lengths differ");
    check_window(x1.size(), window);
}

inline CorrelationPeak peak_of(const Matrix& table)
{
    CorrelationPeak peak;
    peak.value = -1.0;
    for (Index j = 0; j < table.cols(); ++j) {
        for (Index i = 0; i < table.rows(); ++i) {
            const double v = table(i, j);
            if (std::isfinite(v) && std::abs(v) > peak.value) {
                peak = CorrelationPeak{std::abs(v), i + 1, j + 1};
            }
        }
    }
    if (peak.value < 0.0) {
        peak = CorrelationPeak{};
    }
    return peak;
}

} // namespace detail

///
/// K x K table of Euclidean cosines between column i of T(x1) and column j of T(x2).
/// Throws degenerate_error on a zero lagged vector.
///
inline Matrix column_correlations(const Vector& x1, const Vector& x2, Index window)
{
    detail::check_pair(x1, x2, window);
    const Matrix a  = embed(x1, window);
    const Matrix b  = embed(x2, window);
    const Vector na = a.colwise().norm();
    const Vector nb = b.colwise().norm();
    if ((na.array() == 0.0).any() || (nb.array() == 0.0).any()) {
        throw degenerate_error("separability: a lagged vector has zero norm");
    }
    Matrix out = a.transpose() * b;
    for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
            out(i, j) /= na[i] * nb[j];
        }
    }
    return out;
}

///
/// L x L table of cosines between row i of T(x1) and row j of T(x2) in the
/// oblique inner product (X, Y)_C = X C Y^T. Pairs involving a row of zero
/// C-norm are NaN.
///
inline Matrix row_correlations(const Vector& x1, const Vector& x2, Index window, const DiagonalMetric& metric)
{
    detail::check_pair(x1, x2, window);
    detail::require(metric.size() == x1.size() - window + 1, "metric size must equal K = N - L + 1");
    const Matrix a  = embed(x1, window);
    const Matrix b  = embed(x2, window);
    const Vector& c = metric.diagonal();
    const Matrix ac = a * c.asDiagonal();
    const Vector na = (ac.array() * a.array()).rowwise().sum().sqrt();
    const Vector nb = ((b * c.asDiagonal()).array() * b.array()).rowwise().sum().sqrt();
    Matrix out      = ac * b.transpose();
    for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
            const double denom = na[i] * nb[j];
            out(i, j)          = denom > 0.0 ? out(i, j) / denom : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

/// rho = max(max |col corr|, max |row corr|).
inline SeparabilityReport weak_separability(const Vector& x1, const Vector& x2, Index window,
                                            const DiagonalMetric& metric)
{
    const Matrix cols = column_correlations(x1, x2, window);
    const Matrix rows = row_correlations(x1, x2, window, metric);
    SeparabilityReport report;
    report.col_peak      = detail::peak_of(cols);
    report.row_peak      = detail::peak_of(rows);
    report.max_col_corr  = std::min(1.0, report.col_peak.value);
    report.max_row_corr  = std::min(1.0, report.row_peak.value);
    report.rho           = std::max(report.max_col_corr, report.max_row_corr);
    report.excluded_rows = rows.hasNaN();
    return report;
}

/// sum_{k=1}^{n} cos(a k + b), summed term by term.
inline double sum_cos_direct(double a, double b, Index n)
{
    double s = 0.0;
    for (Index k = 1; k <= n; ++k) {
        s += std::cos(a * static_cast<double>(k) + b);
    }
    return s;
}

/// sum_{k=1}^{n} cos^2(a k + b), summed term by term.
inline double sum_cos_sq_direct(double a, double b, Index n)
{
    double s = 0.0;
    for (Index k = 1; k <= n; ++k) {
        const double v = std::cos(a * static_cast<double>(k) + b);
        s += v * v;
    }
    return s;
}

/// csc(a/2) sin(an/2) cos((an + a + 2b)/2); undefined where sin(a/2) = 0.
inline double sum_cos_closed(double a, double b, Index n)
{
    const double x = static_cast<double>(n);
    return std::sin(a * x / 2.0) * std::cos((a * x + a + 2.0 * b) / 2.0) / std::sin(a / 2.0);
}

/// (2n + csc(a) sin(2an + a + 2b) - csc(a) sin(a + 2b)) / 4; undefined where sin(a) = 0.
inline double sum_cos_sq_closed(double a, double b, Index n)
{
    const double x = static_cast<double>(n);
    return (2.0 * x + (std::sin(2.0 * a * x + a + 2.0 * b) - std::sin(a + 2.0 * b)) / std::sin(a)) / 4.0;
}

struct SeparabilityBound
{
    double c_lk  = 0.0; ///< max over j of the cosine sum over unit-metric columns
    double d_lk  = 0.0; ///< min over j of the squared-cosine sum over unit-metric columns
    double bound = 0.0; ///< max(1/L, ((1-a)C + a) / ((1-a)D + aK))
};

///
/// Order-of-magnitude prediction of rho for cos(2 pi omega k) against a
/// constant under C(alpha). C and D sum over the h = floor(N/L) columns
/// k = jL + 1, i.e. cos(2 pi omega (j + k - 1)) with stride L.
///
inline SeparabilityBound separability_bounds(Index n, Index window, double alpha, double omega)
{
    check_window(n, window);
    detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    const Index cols   = n - window + 1;
    const Index h      = n / window;
    const double two_pi_w = 2.0 * std::numbers::pi * omega;
    SeparabilityBound out;
    out.c_lk = -std::numeric_limits<double>::infinity();
    out.d_lk = std::numeric_limits<double>::infinity();
    for (Index j = 1; j <= window; ++j) {
        double sc = 0.0;
        double sq = 0.0;
        for (Index t = 0; t < h; ++t) {
            const Index k  = t * window + 1;
            const double v = std::cos(two_pi_w * static_cast<double>(j + k - 1));
            sc += v;
            sq += v * v;
        }
        out.c_lk = std::max(out.c_lk, sc);
        out.d_lk = std::min(out.d_lk, sq);
    }
    const double ratio = ((1.0 - alpha) * out.c_lk + alpha) / ((1.0 - alpha) * out.d_lk + alpha * cols);
    out.bound          = std::max(1.0 / static_cast<double>(window), ratio);
    return out;
}

///
/// separability_bounds with the stride sums evaluated by the closed forms: the h
/// columns k = tL + 1 give sum_{t=1}^{h} cos(a t + b) with a = 2 pi omega L,
/// b = 2 pi omega j - a. Falls back to direct summation where the closed form
/// is singular (sin(a/2) or sin(a) near zero).
///
inline SeparabilityBound separability_bounds_closed(Index n, Index window, double alpha, double omega)
{
    check_window(n, window);
    detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    const Index cols   = n - window + 1;
    const Index h      = n / window;
    const double two_pi_w = 2.0 * std::numbers::pi * omega;
    const double a     = two_pi_w * static_cast<double>(window);
    const bool cos_ok  = std::abs(std::sin(a / 2.0)) > 1e-8;
    const bool sq_ok   = std::abs(std::sin(a)) > 1e-8;
    SeparabilityBound out;
    out.c_lk = -std::numeric_limits<double>::infinity();
    out.d_lk = std::numeric_limits<double>::infinity();
    for (Index j = 1; j <= window; ++j) {
        const double b  = two_pi_w * static_cast<double>(j) - a;
        const double sc = cos_ok ? sum_cos_closed(a, b, h) : sum_cos_direct(a, b, h);
        const double sq = sq_ok ? sum_cos_sq_closed(a, b, h) : sum_cos_sq_direct(a, b, h);
        out.c_lk = std::max(out.c_lk, sc);
        out.d_lk = std::min(out.d_lk, sq);
    }
    const double ratio = ((1.0 - alpha) * out.c_lk + alpha) / ((1.0 - alpha) * out.d_lk + alpha * cols);
    out.bound          = std::max(1.0 / static_cast<double>(window), ratio);
    return out;
}

///
/// Window length balancing 1/L against 1/((1-alpha)N/L + alpha K):
///
///   L = (alpha(N+1) + sqrt(alpha^2 (N+1)^2 + 4N(1 - alpha^2))) / (2(1 + alpha)),
///
/// rounded to the nearest integer in [2, N-1].
///
inline Index optimal_window(Index n, double alpha)
{
    detail::require(n >= 3, "optimal_window requires N >= 3");
    detail::require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    const double np1  = static_cast<double>(n) + 1.0;
    const double disc = alpha * alpha * np1 * np1 + 4.0 * static_cast<double>(n) * (1.0 - alpha * alpha);
    const double l    = (alpha * np1 + std::sqrt(disc)) / (2.0 * (1.0 + alpha));
    const Index rounded = static_cast<Index>(std::llround(l));
    return std::clamp<Index>(rounded, 2, n - 1);
}

} // namespace cadzow
