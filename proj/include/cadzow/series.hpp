#pragma once

#include <utility>
#include <vector>

#include <cadzow/common.hpp>

namespace cadzow
{

///
/// A finite real-valued series x_1, ..., x_N with N >= 3 and finite values.
///
/// Storage is 0-based: values()[i] holds x_{i+1}.
///
class TimeSeries
{
public:
    explicit TimeSeries(Vector values) : values_(std::move(values))
    {
        detail::require(values_.size() >= 3, "time series must have length N >= 3, got "
                                                 + std::to_string(values_.size()));
        detail::require(detail::all_finite(values_), "time series contains NaN or Inf");
    }

    explicit TimeSeries(const std::vector<double>& values)
        : TimeSeries(Vector(Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()))))
    {
    }

    Index size() const noexcept { return values_.size(); }
    const Vector& values() const noexcept { return values_; }
    double operator[](Index i) const { return values_[i]; }

private:
    Vector values_;
};

///
/// Non-negative entrywise weights m_{lk} defining the semi-norm
/// ||Y||_M^2 = sum_{l,k} m_{lk} y_{lk}^2 on L x K matrices.
///
class MatrixWeights
{
public:
    explicit MatrixWeights(Matrix entries) : entries_(std::move(entries))
    {
        for (Index k = 0; k < entries_.cols(); ++k) {
            for (Index l = 0; l < entries_.rows(); ++l) {
                const double m = entries_(l, k);
                detail::require(std::isfinite(m) && m >= 0.0,
                                "matrix weights must be finite and non-negative");
            }
        }
    }

    static MatrixWeights ones(Index rows, Index cols) { return MatrixWeights(Matrix::Ones(rows, cols)); }

    /// Column-constant weights m_{lk} = c_k.
    static MatrixWeights column_constant(Index rows, const Vector& column_weights)
    {
        return MatrixWeights(Matrix(column_weights.transpose().replicate(rows, 1)));
    }

    Index rows() const noexcept { return entries_.rows(); }
    Index cols() const noexcept { return entries_.cols(); }
    const Matrix& entries() const noexcept { return entries_; }
    double operator()(Index l, Index k) const { return entries_(l, k); }

private:
    Matrix entries_;
};

/// What diagonal averaging does on an anti-diagonal whose weights sum to zero.
enum class ZeroWeightPolicy
{
    error,      ///< throw degenerate_error
    unweighted, ///< plain mean of the entries on that anti-diagonal
};

/// Hankel embedding T: result(l, k) = x_{l+k-1} (1-based), an L x (N-L+1) matrix.
inline Matrix embed(const Eigen::Ref<const Vector>& series, Index window)
{
    const Index n = series.size();
    check_window(n, window);
    const Index cols = n - window + 1;
    Matrix out(window, cols);
    for (Index k = 0; k < cols; ++k) {
        out.col(k) = series.segment(k, window);
    }
    return out;
}

inline Matrix embed(const TimeSeries& series, Index window) { return embed(series.values(), window); }

namespace detail
{

// Shared kernel so the weighted and unit-weight paths perform identical
// floating-point operations when every weight equals 1.
template <typename WeightFn>
Vector average_antidiagonals(const Matrix& mat, WeightFn weight, ZeroWeightPolicy policy)
{
    const Index rows = mat.rows();
    const Index cols = mat.cols();
    const Index n    = rows + cols - 1;
    Vector num       = Vector::Zero(n);
    Vector den       = Vector::Zero(n);
    for (Index k = 0; k < cols; ++k) {
        for (Index l = 0; l < rows; ++l) {
            const double m = weight(l, k);
            num[l + k] += m * mat(l, k);
            den[l + k] += m;
        }
    }
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
        if (den[i] > 0.0) {
            out[i] = num[i] / den[i];
            continue;
        }
        if (policy == ZeroWeightPolicy::error) {
            throw degenerate_error("anti-diagonal " + std::to_string(i + 1)
                                   + " has zero total weight; the Hankel projection is undefined");
        }
        const Index lo = std::max<Index>(0, i - cols + 1);
        const Index hi = std::min<Index>(rows - 1, i);
        double sum     = 0.0;
        for (Index l = lo; l <= hi; ++l) {
            sum += mat(l, i - l);
        }
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

} // namespace detail

///
/// Weighted diagonal averaging, i.e. the series whose embedding is the
/// ||.||_M-orthogonal projection of `mat` onto Hankel matrices:
///
///   y_i = sum_{l+k-1=i} m_{lk} y_{lk} / sum_{l+k-1=i} m_{lk}.
///
inline Vector diagonal_average(const Matrix& mat, const MatrixWeights& weights,
                               ZeroWeightPolicy policy = ZeroWeightPolicy::error)
{
    detail::require(weights.rows() == mat.rows() && weights.cols() == mat.cols(),
                    "weight matrix shape does not match the matrix being averaged");
    const Matrix& m = weights.entries();
    return detail::average_antidiagonals(mat, [&m](Index l, Index k) { return m(l, k); }, policy);
}

/// Unweighted diagonal averaging (all m_{lk} = 1).
inline Vector diagonal_average(const Matrix& mat)
{
    return detail::average_antidiagonals(mat, [](Index, Index) { return 1.0; }, ZeroWeightPolicy::error);
}

/// Column-constant weights m_{lk} = c_k, without materializing M.
inline Vector diagonal_average_columns(const Matrix& mat, const Vector& column_weights,
                                       ZeroWeightPolicy policy = ZeroWeightPolicy::error)
{
    detail::require(column_weights.size() == mat.cols(), "column weight count must equal K");
    return detail::average_antidiagonals(mat, [&column_weights](Index, Index k) { return column_weights[k]; },
                                         policy);
}

inline Matrix project_hankel(const Matrix& mat, const MatrixWeights& weights,
                             ZeroWeightPolicy policy = ZeroWeightPolicy::error)
{
    return embed(diagonal_average(mat, weights, policy), mat.rows());
}

inline Matrix project_hankel(const Matrix& mat) { return embed(diagonal_average(mat), mat.rows()); }

/// True when entries agree along every anti-diagonal up to `tol` (absolute).
inline bool is_hankel(const Matrix& mat, double tol = 0.0)
{
    for (Index k = 1; k < mat.cols(); ++k) {
        for (Index l = 0; l + 1 < mat.rows(); ++l) {
            if (std::abs(mat(l + 1, k - 1) - mat(l, k)) > tol) {
                return false;
            }
        }
    }
    return true;
}

/// <Y, Z>_M = sum m_{lk} y_{lk} z_{lk}.
inline double weighted_inner(const Matrix& y, const Matrix& z, const Matrix& m)
{
    return (m.array() * y.array() * z.array()).sum();
}

inline double weighted_norm_sq(const Matrix& y, const Matrix& m) { return (m.array() * y.array().square()).sum(); }

/// <y, z>_q = sum q_i y_i z_i.
inline double series_inner(const Vector& y, const Vector& z, const Vector& q)
{
    return (q.array() * y.array() * z.array()).sum();
}

} // namespace cadzow
