#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cadzow
{

using Index  = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid user-supplied parameter (window length, rank, alpha, ...).
class parameter_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Weights that leave a projector undefined (zero total weight, zero vector).
class degenerate_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

namespace detail
{

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw parameter_error(message);
    }
}

inline bool all_finite(const Eigen::Ref<const Vector>& v)
{
    for (Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            return false;
        }
    }
    return true;
}

} // namespace detail

/// Checks 1 < L < N.
inline void check_window(Index n, Index window)
{
    if (window <= 1 || window >= n) {
        throw parameter_error("window length L=" + std::to_string(window)
                              + " must satisfy 1 < L < N=" + std::to_string(n));
    }
}

/// Checks the rank condition 1 <= r <= min(L, K).
inline void check_rank(Index window, Index columns, Index rank)
{
    const Index bound = std::min(window, columns);
    if (rank < 1 || rank > bound) {
        throw parameter_error("rank r=" + std::to_string(rank)
                              + " violates the rank condition r <= min(L, K) = "
                              + std::to_string(bound));
    }
}

} // namespace cadzow
