#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <cadzow/common.hpp>
#include <cadzow/lowrank.hpp>
#include <cadzow/series.hpp>

namespace cadzow
{

///
/// Series weights q_1, ..., q_N of the target f_q(Y) = sum q_i (x_i - y_i)^2.
///
/// Formulas throughout this header use 1-based indices (i, l, k) as in the
/// mathematical definitions; storage is 0-based.
///
class SeriesWeights
{
public:
    explicit SeriesWeights(Vector q) : q_(std::move(q))
    {
        for (Index i = 0; i < q_.size(); ++i) {
            detail::require(std::isfinite(q_[i]) && q_[i] >= 0.0, "series weights must be finite and >= 0");
        }
    }

    Index size() const noexcept { return q_.size(); }
    const Vector& values() const noexcept { return q_; }
    double operator[](Index i) const { return q_[i]; }

private:
    Vector q_;
};

/// Number of trajectory-matrix entries on anti-diagonal i (1-based), i.e. w_i.
inline double trapezoid_weight(Index n, Index window, Index i)
{
    const Index cols = n - window + 1;
    const Index lo   = std::min(window, cols);
    if (i < lo) {
        return static_cast<double>(i);
    }
    if (i <= n - lo + 1) {
        return static_cast<double>(lo);
    }
    return static_cast<double>(n - i + 1);
}

/// w_i = i for i < L, L for L <= i <= K, N - i + 1 for i > K (with L <= K;
/// symmetric in L and K otherwise).
inline SeriesWeights trapezoid_weights(Index n, Index window)
{
    check_window(n, window);
    Vector w(n);
    for (Index i = 1; i <= n; ++i) {
        w[i - 1] = trapezoid_weight(n, window, i);
    }
    return SeriesWeights(std::move(w));
}

///
/// Matrix weights whose anti-diagonal sums equal q, distributing each q_i
/// equally over the w_i entries of its anti-diagonal: m_{lk} = q_{l+k-1} / w_{l+k-1}.
///
inline MatrixWeights matrix_weights_from_series(const SeriesWeights& q, Index window)
{
    const Index n = q.size();
    check_window(n, window);
    const Index cols = n - window + 1;
    Matrix m(window, cols);
    for (Index k = 0; k < cols; ++k) {
        for (Index l = 0; l < window; ++l) {
            const Index i = l + k + 1;
            m(l, k)       = q[i - 1] / trapezoid_weight(n, window, i);
        }
    }
    return MatrixWeights(std::move(m));
}

/// q_i = sum_{l+k-1=i} m_{lk}.
inline SeriesWeights series_weights_from_matrix(const MatrixWeights& m)
{
    const Index n = m.rows() + m.cols() - 1;
    Vector q      = Vector::Zero(n);
    for (Index k = 0; k < m.cols(); ++k) {
        for (Index l = 0; l < m.rows(); ++l) {
            q[l + k] += m(l, k);
        }
    }
    return SeriesWeights(std::move(q));
}

/// m_{lk} = 1 / w_{l+k-1}: the matrix weights equivalent to equal series weights.
inline MatrixWeights inverse_trapezoid_matrix_weights(Index n, Index window)
{
    check_window(n, window);
    return matrix_weights_from_series(SeriesWeights(Vector::Ones(n)), window);
}

///
/// Zero-one mask for the L x (N+L-1) trajectory matrix of a series padded with
/// L-1 gaps on each side: m_{ij} = 1 iff 1 <= i + j - L <= N.
///
inline MatrixWeights extended_mask(Index n, Index window)
{
    check_window(n, window);
    const Index cols = n + window - 1;
    Matrix m(window, cols);
    for (Index j = 1; j <= cols; ++j) {
        for (Index i = 1; i <= window; ++i) {
            const Index pos  = i + j - window;
            m(i - 1, j - 1) = (pos >= 1 && pos <= n) ? 1.0 : 0.0;
        }
    }
    return MatrixWeights(std::move(m));
}

///
/// c_k(alpha) = 1 if k = jL + 1 for some j = 0, ..., h - 1, alpha otherwise,
/// with h = floor(N / L). alpha = 1 gives the identity; alpha = 0 a metric of rank h.
/// Only for integer N / L do the unit entries cover the series exactly once.
///
inline DiagonalMetric alpha_metric(Index n, Index window, double alpha)
{
    check_window(n, window);
    detail::require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    const Index cols = n - window + 1;
    const Index h    = n / window;
    Vector c         = Vector::Constant(cols, alpha);
    for (Index j = 0; j < h; ++j) {
        c[j * window] = 1.0;
    }
    return DiagonalMetric(std::move(c));
}

/// True when N / L is an integer, the case where C(0) reproduces equal series weights.
inline bool alpha_metric_is_exact(Index n, Index window) { return window > 0 && n % window == 0; }

///
/// Column average of the equal-series-weight matrix M = (1 / w_{l+k-1}):
/// c_k = (1/L) sum_l m_{lk}. Valid for any 1 < L <= K.
///
inline DiagonalMetric chat_metric(Index n, Index window)
{
    check_window(n, window);
    const Index cols = n - window + 1;
    detail::require(window <= cols, "C-hat metric requires L <= K");
    Vector c(cols);
    for (Index k = 1; k <= cols; ++k) {
        double sum = 0.0;
        for (Index l = 1; l <= window; ++l) {
            sum += 1.0 / trapezoid_weight(n, window, l + k - 1);
        }
        c[k - 1] = sum / static_cast<double>(window);
    }
    return DiagonalMetric(std::move(c));
}

/// H_i = sum_{j=1}^{i} 1/j, H_0 = 0.
inline double harmonic_number(Index i)
{
    double h = 0.0;
    for (Index j = 1; j <= i; ++j) {
        h += 1.0 / static_cast<double>(j);
    }
    return h;
}

///
/// Closed form of the C-hat metric for N >= 3(L - 1):
///
///   c_k = (1/L)(k/L + sum_{j=k}^{L-1} 1/j)   for 1 <= k <= L-1,
///         1/L                                for L <= k <= K-L+1,
///         c_{K-k+1}                          for K-L+2 <= k <= K.
///
inline DiagonalMetric chat_metric_closed_form(Index n, Index window)
{
    check_window(n, window);
    detail::require(n >= 3 * (window - 1), "closed-form C-hat metric requires N >= 3(L - 1)");
    const Index cols = n - window + 1;
    const double len = static_cast<double>(window);
    Vector c(cols);
    for (Index k = 1; k <= cols; ++k) {
        Index kk = k;
        if (k >= cols - window + 2) {
            kk = cols - k + 1;
        }
        if (kk <= window - 1) {
            double tail = 0.0;
            for (Index j = kk; j <= window - 1; ++j) {
                tail += 1.0 / static_cast<double>(j);
            }
            c[k - 1] = (static_cast<double>(kk) / len + tail) / len;
        } else {
            c[k - 1] = 1.0 / len;
        }
    }
    return DiagonalMetric(std::move(c));
}

///
/// Series weights induced by C(alpha) when N / L is an integer:
///
///   q_i = 1 + (i - 1) alpha   for i = 1, ..., L-1,
///         1 + (L - 1) alpha   for i = L, ..., K-1,
///         1 + (N - i) alpha   for i = K, ..., N.
///
inline SeriesWeights alpha_series_weights(Index n, Index window, double alpha)
{
    check_window(n, window);
    detail::require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    detail::require(alpha_metric_is_exact(n, window), "closed-form alpha weights require N / L to be an integer");
    const Index cols = n - window + 1;
    Vector q(n);
    for (Index i = 1; i <= n; ++i) {
        double steps = 0.0;
        if (i <= window - 1) {
            steps = static_cast<double>(i - 1);
        } else if (i <= cols - 1) {
            steps = static_cast<double>(window - 1);
        } else {
            steps = static_cast<double>(n - i);
        }
        q[i - 1] = 1.0 + steps * alpha;
    }
    return SeriesWeights(std::move(q));
}

///
/// Series weights induced by the C-hat metric for N >= 4L - 3, where the two
/// boundary regions of length 2L - 1 do not overlap:
///
///   u_i = i(i+1)/(2L^2) + (i/L)(1 + H_{L-1} - H_i)                 for 1 <= i <= L-1,
///   u_i = 1 + (2iL - i - i^2)/(2L^2) + ((L-i)/L)(H_{L-1} - H_{i-L})  for L <= i <= 2L-1,
///
/// and q_i = u_i near the start, 1 in the center, u_{N-i+1} near the end.
///
inline SeriesWeights chat_series_weights(Index n, Index window)
{
    check_window(n, window);
    detail::require(n >= 4 * window - 3, "closed-form C-hat series weights require N >= 4L - 3");
    const double len  = static_cast<double>(window);
    const double h_lm1 = harmonic_number(window - 1);
    auto u = [&](Index i) {
        const double x = static_cast<double>(i);
        if (i <= window - 1) {
            return x * (x + 1.0) / (2.0 * len * len) + (x / len) * (1.0 + h_lm1 - harmonic_number(i));
        }
        return 1.0 + (2.0 * x * len - x - x * x) / (2.0 * len * len)
             + ((len - x) / len) * (h_lm1 - harmonic_number(i - window));
    };
    Vector q(n);
    for (Index i = 1; i <= n; ++i) {
        if (i <= 2 * window - 1) {
            q[i - 1] = u(i);
        } else if (i <= n - 2 * window + 1) {
            q[i - 1] = 1.0;
        } else {
            q[i - 1] = u(n - i + 1);
        }
    }
    return SeriesWeights(std::move(q));
}

/// Series weights induced by a diagonal metric through m_{lk} = c_k.
inline SeriesWeights series_weights_from_metric(const DiagonalMetric& metric, Index window)
{
    return series_weights_from_matrix(metric.as_matrix_weights(window));
}

/// q / sum(q).
inline SeriesWeights normalize_weights(const SeriesWeights& q)
{
    double total = 0.0;
    for (Index i = 0; i < q.size(); ++i) {
        total += q[i];
    }
    if (!(total > 0.0)) {
        throw degenerate_error("cannot normalize series weights that sum to zero");
    }
    Vector out(q.size());
    for (Index i = 0; i < q.size(); ++i) {
        out[i] = q[i] / total;
    }
    return SeriesWeights(std::move(out));
}

/// Named weighting schemes, as exposed on the command line.
enum class SchemeKind
{
    unit,        ///< q_i = 1
    trapezoid,   ///< q_i = w_i (unit matrix weights)
    inverse,     ///< series weights of m_{lk} = 1 / w_{l+k-1}
    alpha,       ///< series weights of C(alpha)
    chat,        ///< series weights of C-hat
    extended,    ///< series weights of the extended mask restricted to the observed points
};

struct WeightScheme
{
    SchemeKind kind = SchemeKind::unit;
    double alpha    = 1.0;
};

inline std::optional<SchemeKind> parse_scheme(std::string_view name)
{
    if (name == "unit") return SchemeKind::unit;
    if (name == "trapezoid") return SchemeKind::trapezoid;
    if (name == "inverse") return SchemeKind::inverse;
    if (name == "alpha") return SchemeKind::alpha;
    if (name == "chat") return SchemeKind::chat;
    if (name == "extended") return SchemeKind::extended;
    return std::nullopt;
}

///
/// Series weights of a scheme. Closed forms are used where their
/// preconditions hold (integer N / L for alpha, N >= 4L - 3 for C-hat);
/// otherwise the generic metric-to-series conversion is used.
///
inline SeriesWeights scheme_series_weights(const WeightScheme& scheme, Index n, Index window)
{
    check_window(n, window);
    switch (scheme.kind) {
    case SchemeKind::unit:
        return SeriesWeights(Vector::Ones(n));
    case SchemeKind::trapezoid:
        return trapezoid_weights(n, window);
    case SchemeKind::inverse:
        return series_weights_from_matrix(inverse_trapezoid_matrix_weights(n, window));
    case SchemeKind::alpha:
        if (alpha_metric_is_exact(n, window)) {
            return alpha_series_weights(n, window, scheme.alpha);
        }
        return series_weights_from_metric(alpha_metric(n, window, scheme.alpha), window);
    case SchemeKind::chat:
        if (n >= 4 * window - 3) {
            return chat_series_weights(n, window);
        }
        return series_weights_from_metric(chat_metric(n, window), window);
    case SchemeKind::extended: {
        const SeriesWeights padded = series_weights_from_matrix(extended_mask(n, window));
        return SeriesWeights(Vector(padded.values().segment(window - 1, n)));
    }
    }
    throw parameter_error("unknown weight scheme");
}

} // namespace cadzow
