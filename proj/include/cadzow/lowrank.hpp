#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include <cadzow/common.hpp>
#include <cadzow/series.hpp>

namespace cadzow
{

///
/// Diagonal metric C = diag(c_1, ..., c_K) on the row space R^K, giving
/// ||Z||_{2,C}^2 = tr(Z C Z^T) = sum_{l,k} c_k z_{lk}^2.
///
class DiagonalMetric
{
public:
    explicit DiagonalMetric(Vector diagonal) : c_(std::move(diagonal))
    {
        for (Index k = 0; k < c_.size(); ++k) {
            detail::require(std::isfinite(c_[k]) && c_[k] >= 0.0, "metric entries must be finite and >= 0");
        }
    }

    static DiagonalMetric identity(Index k) { return DiagonalMetric(Vector::Ones(k)); }

    Index size() const noexcept { return c_.size(); }
    const Vector& diagonal() const noexcept { return c_; }
    double operator[](Index k) const { return c_[k]; }

    bool full_rank() const { return (c_.array() > 0.0).all(); }
    Index rank() const { return (c_.array() > 0.0).count(); }

    /// Equivalent column-constant matrix weights, m_{lk} = c_k.
    MatrixWeights as_matrix_weights(Index rows) const { return MatrixWeights::column_constant(rows, c_); }

    double norm_sq(const Matrix& z) const { return (z.array().square().rowwise() * c_.transpose().array()).sum(); }

private:
    Vector c_;
};

/// Full SVD Y = U diag(s) V^T with U (L x L), V (K x K).
struct SvdFactors
{
    Matrix U;
    Vector singular_values; ///< non-increasing
    Matrix V;
};

///
/// Full SVD with a deterministic sign convention: the first component of each
/// left singular vector whose magnitude exceeds round-off is positive, and the
/// matching right vector is flipped with it.
///
inline SvdFactors svd_factors(const Matrix& mat)
{
    Eigen::JacobiSVD<Matrix> svd(mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdFactors out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    const Index p = out.singular_values.size();
    for (Index j = 0; j < out.U.cols(); ++j) {
        for (Index i = 0; i < out.U.rows(); ++i) {
            if (std::abs(out.U(i, j)) > 1e-12) {
                if (out.U(i, j) < 0.0) {
                    out.U.col(j) *= -1.0;
                    if (j < p) {
                        out.V.col(j) *= -1.0;
                    }
                }
                break;
            }
        }
    }
    return out;
}

inline Vector singular_values(const Matrix& mat)
{
    Eigen::BDCSVD<Matrix> svd(mat);
    return svd.singularValues();
}

/// Number of singular values with s_i / s_1 >= tol.
inline Index numerical_rank(const Matrix& mat, double tol = 1e-8)
{
    const Vector s = singular_values(mat);
    if (s.size() == 0 || s[0] == 0.0) {
        return 0;
    }
    return (s.array() / s[0] >= tol).count();
}

/// Output of a rank-r projector along with diagnostic flags.
struct Projection
{
    Matrix matrix;
    /// s_r and s_{r+1} coincide to round-off; the first r in sorted order were kept.
    bool degenerate_spectrum = false;
    /// Input had nonzero columns where the metric vanishes (oblique projector only).
    bool outside_support = false;
};

///
/// Euclidean rank-r projector: the sum of the r leading SVD components,
/// the Frobenius-nearest matrix of rank <= r.
///
inline Projection truncated_svd_project(const Matrix& mat, Index rank)
{
    check_rank(mat.rows(), mat.cols(), rank);
    Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Projection out;
    out.matrix = svd.matrixU().leftCols(rank) * s.head(rank).asDiagonal() * svd.matrixV().leftCols(rank).transpose();
    if (rank < s.size() && s[rank - 1] > 0.0) {
        out.degenerate_spectrum = (s[rank - 1] - s[rank]) <= 1e-12 * s[0];
    }
    return out;
}

///
/// Rank-r projector in the oblique norm ||.||_{2,C} for diagonal C:
///
///   Pi(Y) = Pi_r(Y O^T) (O^T)^+,  O = diag(sqrt(c_k)).
///
/// Columns with c_k = 0 come back as zero. If the input has nonzero entries
/// there, the result is still the minimizer over the weighted coordinates and
/// `outside_support` is set.
///
inline Projection oblique_project(const Matrix& mat, Index rank, const DiagonalMetric& metric)
{
    detail::require(metric.size() == mat.cols(), "metric size must equal the number of columns K");
    check_rank(mat.rows(), mat.cols(), rank);
    const Vector root = metric.diagonal().array().sqrt();
    bool outside      = false;
    Matrix scaled(mat.rows(), mat.cols());
    for (Index k = 0; k < mat.cols(); ++k) {
        scaled.col(k) = mat.col(k) * root[k];
        if (root[k] == 0.0 && !mat.col(k).isZero(0.0)) {
            outside = true;
        }
    }
    Projection out = truncated_svd_project(scaled, rank);
    for (Index k = 0; k < mat.cols(); ++k) {
        if (root[k] > 0.0) {
            out.matrix.col(k) /= root[k];
        } else {
            out.matrix.col(k).setZero();
        }
    }
    out.outside_support = outside;
    return out;
}

/// Stop rule for the weighted EM projector: ||Y_k - Y_{k+1}||_F^2 / (LK) < tol.
struct EmStop
{
    Index max_iter = 1000;
    double tol     = 1e-4;
};

struct EmResult
{
    Matrix matrix;
    Index iterations = 0;
    bool converged   = false;
    /// ||mat - Y_k||_M^2 for k = 1, 2, ... (original, unnormalized M).
    std::vector<double> objective;
};

///
/// Iterative rank-r projector for arbitrary entrywise weights:
///
///   Y_{k+1} = Pi_r(mat .* M + Y_k .* (1 - M)),  Y_0 = init,
///
/// with M rescaled to max(M) = 1 first. For 0/1 weights this is EM for
/// low-rank matrix completion; for general weights in [0, 1] each step is a
/// majorize-minimize step, so the objective is non-increasing from Y_1 on.
///
/// If the stop rule never fires, the iterate with the smallest objective is
/// returned with converged = false.
///
inline EmResult em_weighted_project(const Matrix& mat, Index rank, const MatrixWeights& weights, const Matrix& init,
                                    const EmStop& stop = {})
{
    detail::require(weights.rows() == mat.rows() && weights.cols() == mat.cols(),
                    "weight matrix shape does not match the data matrix");
    detail::require(init.rows() == mat.rows() && init.cols() == mat.cols(), "initial matrix shape mismatch");
    detail::require(init.allFinite(), "initial matrix must be finite");
    detail::require(stop.max_iter >= 1 && stop.tol > 0.0, "EM stop rule needs max_iter >= 1 and tol > 0");
    check_rank(mat.rows(), mat.cols(), rank);

    const Matrix& m   = weights.entries();
    const double peak = m.maxCoeff();
    if (!(peak > 0.0)) {
        throw degenerate_error("all matrix weights are zero");
    }
    const Matrix scaled       = m / peak;
    const Matrix complement   = Matrix::Ones(m.rows(), m.cols()) - scaled;
    const Matrix observed     = mat.cwiseProduct(scaled);
    const bool unit_weights   = (scaled.array() == 1.0).all();
    const double cells        = static_cast<double>(mat.size());

    EmResult out;
    Matrix current = init;
    Matrix best;
    double best_objective = std::numeric_limits<double>::infinity();
    for (Index it = 1; it <= stop.max_iter; ++it) {
        Matrix next = truncated_svd_project(observed + current.cwiseProduct(complement), rank).matrix;
        const double delta = (next - current).squaredNorm() / cells;
        current            = std::move(next);
        const double obj   = weighted_norm_sq(mat - current, m);
        out.objective.push_back(obj);
        out.iterations = it;
        if (unit_weights || delta < stop.tol) {
            out.converged = true;
            out.matrix    = std::move(current);
            return out;
        }
        if (obj < best_objective) {
            best_objective = obj;
            best           = current;
        }
    }
    out.matrix = std::move(best);
    return out;
}

} // namespace cadzow
