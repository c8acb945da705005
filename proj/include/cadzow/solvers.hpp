#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include <cadzow/common.hpp>
#include <cadzow/lowrank.hpp>
#include <cadzow/series.hpp>
#include <cadzow/weights.hpp>

namespace cadzow
{

///
/// Outer stop rule. Iteration stops after `max_iter` steps, or earlier once
/// ||T^{-1}(Y_k) - T^{-1}(Y_{k+1})||^2 / N < tol when a tolerance is set.
///
struct StopRule
{
    Index max_iter = 1000;
    std::optional<double> tol;

    static StopRule iterations(Index k) { return StopRule{k, std::nullopt}; }
    static StopRule mean_square_delta(double eps, Index guard = 1000) { return StopRule{guard, eps}; }
};

enum class Algorithm
{
    cadzow,          ///< Euclidean alternating projections
    weighted_cadzow, ///< EM rank projector with m_{lk} = 1 / w_{l+k-1}
    extended_cadzow, ///< series padded by L-1 gaps per side, EM with a 0/1 mask
    cadzow_alpha,    ///< oblique projector with C(alpha)
    cadzow_chat,     ///< oblique projector with C-hat
};

inline std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::cadzow: return "cadzow";
    case Algorithm::weighted_cadzow: return "weighted";
    case Algorithm::extended_cadzow: return "extended";
    case Algorithm::cadzow_alpha: return "alpha";
    case Algorithm::cadzow_chat: return "chat";
    }
    return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name)
{
    if (name == "cadzow") return Algorithm::cadzow;
    if (name == "weighted") return Algorithm::weighted_cadzow;
    if (name == "extended") return Algorithm::extended_cadzow;
    if (name == "alpha") return Algorithm::cadzow_alpha;
    if (name == "chat") return Algorithm::cadzow_chat;
    return std::nullopt;
}

/// Initial values of the L-1 padded points on each side for Extended Cadzow.
enum class ExtensionPolicy
{
    recurrent, ///< recurrent SSA forecast, backwards and forwards
    zeros,
    constant,  ///< repeat the first / last observation
};

inline std::optional<ExtensionPolicy> parse_extension(std::string_view name)
{
    if (name == "recurrent") return ExtensionPolicy::recurrent;
    if (name == "zeros") return ExtensionPolicy::zeros;
    if (name == "constant") return ExtensionPolicy::constant;
    return std::nullopt;
}

struct SolverConfig
{
    Algorithm algorithm       = Algorithm::cadzow;
    Index window              = 0;
    Index rank                = 0;
    double alpha              = 1.0;
    ExtensionPolicy extension = ExtensionPolicy::recurrent;
    StopRule stop             = StopRule::mean_square_delta(1e-8);
    EmStop inner              = {};
    bool adjust               = false;
    /// Permit alpha = 0, whose metric is rank-deficient (Cadzow(0) does not
    /// solve the series approximation problem).
    bool allow_degenerate_metric = false;
    /// Compute the numerical rank of every iterate (one extra SVD per step).
    bool rank_diagnostics = false;
};

struct IterationRecord
{
    Index iter = 0;
    /// ||Y_k - P(Y_k)|| in the algorithm's norm, P the rank-r step.
    double objective = 0.0;
    /// ||P(Y_k) - Y_{k+1}|| in the algorithm's norm.
    double hankel_gap = 0.0;
    /// ||T^{-1} Y_k - T^{-1} Y_{k+1}||^2 / N.
    double series_delta = 0.0;
    /// |‖Y_k‖² - objective² - hankel_gap² - ‖Y_{k+1}‖²| / ‖Y_k‖².
    double pyth_residual = 0.0;
    /// Numerical rank of Y_{k+1} at 1e-8, or -1 when not computed.
    Index num_rank = -1;
    Index inner_iterations = 0;
    bool inner_converged   = true;
};

enum class StopReason
{
    tolerance,
    iteration_limit,
};

struct SolverTrace
{
    std::vector<IterationRecord> records;
    Index iterations       = 0;
    StopReason stop_reason = StopReason::iteration_limit;
    /// The stop rule fired: the tolerance was met, or no tolerance was requested.
    bool converged            = false;
    Index inner_failures      = 0;
    bool degenerate_spectrum  = false;
    bool outside_support      = false;
    std::optional<double> adjustment; ///< gamma, when the result was adjusted
};

struct SolveResult
{
    Vector estimate;
    SolverTrace trace;
};

/// Called after each outer iteration with the current (unadjusted) series estimate.
using IterateObserver = std::function<void(Index iteration, const Vector& estimate)>;

namespace detail
{

struct StepOutcome
{
    double objective_sq = 0.0;
    double gap_sq       = 0.0;
    Index inner_iterations = 0;
    bool inner_converged   = true;
    bool degenerate        = false;
    bool outside_support   = false;
};

// Shared bookkeeping: stop rule, trace records, observer.
class IterationLog
{
public:
    IterationLog(const StopRule& stop, const IterateObserver& observer, bool rank_diagnostics)
        : stop_(stop), observer_(observer), rank_diagnostics_(rank_diagnostics)
    {
        require(stop.max_iter >= 1, "stop rule needs max_iter >= 1");
        require(!stop.tol || *stop.tol > 0.0, "stop tolerance must be positive");
    }

    // Returns true when iteration should stop.
    bool record(Index iter, const StepOutcome& step, double norm_before_sq, double norm_after_sq,
                const Vector& previous, const Vector& current, const Matrix& next_matrix)
    {
        IterationRecord rec;
        rec.iter             = iter;
        rec.objective        = std::sqrt(step.objective_sq);
        rec.hankel_gap       = std::sqrt(step.gap_sq);
        rec.series_delta     = (previous - current).squaredNorm() / static_cast<double>(current.size());
        rec.inner_iterations = step.inner_iterations;
        rec.inner_converged  = step.inner_converged;
        const double balance = norm_before_sq - step.objective_sq - step.gap_sq - norm_after_sq;
        rec.pyth_residual    = norm_before_sq > 0.0 ? std::abs(balance) / norm_before_sq : std::abs(balance);
        if (rank_diagnostics_) {
            rec.num_rank = numerical_rank(next_matrix);
        }
        trace_.records.push_back(rec);
        trace_.iterations = iter;
        if (!step.inner_converged) {
            ++trace_.inner_failures;
        }
        trace_.degenerate_spectrum = trace_.degenerate_spectrum || step.degenerate;
        trace_.outside_support     = trace_.outside_support || step.outside_support;
        if (observer_) {
            observer_(iter, current);
        }
        if (stop_.tol && rec.series_delta < *stop_.tol) {
            trace_.stop_reason = StopReason::tolerance;
            trace_.converged   = true;
            return true;
        }
        if (iter >= stop_.max_iter) {
            trace_.stop_reason = StopReason::iteration_limit;
            trace_.converged   = !stop_.tol.has_value();
            return true;
        }
        return false;
    }

    SolverTrace take() { return std::move(trace_); }

private:
    StopRule stop_;
    const IterateObserver& observer_;
    bool rank_diagnostics_;
    SolverTrace trace_;
};

inline void check_problem(Index n, Index window, Index rank)
{
    check_window(n, window);
    check_rank(window, n - window + 1, rank);
}

inline Vector reversed(const Vector& v) { return v.reverse(); }

} // namespace detail

///
/// Recurrent SSA forecast: the min-norm linear recurrence from the r leading
/// left singular vectors of the L-trajectory matrix, applied to the rank-r
/// reconstruction of the series. Returns `steps` values after x_N.
///
inline Vector ssa_forecast(const Vector& series, Index window, Index rank, Index steps)
{
    detail::check_problem(series.size(), window, rank);
    const Matrix traj = embed(series, window);
    Eigen::BDCSVD<Matrix> svd(traj, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix basis   = svd.matrixU().leftCols(rank);
    const Vector last    = basis.row(window - 1).transpose();
    const double verticality = last.squaredNorm();
    if (verticality >= 1.0 - 1e-12) {
        throw degenerate_error("signal subspace contains the last unit vector; no forecasting recurrence exists");
    }
    const Vector coeffs = basis.topRows(window - 1) * last / (1.0 - verticality);
    const Vector recon  = diagonal_average(basis * (basis.transpose() * traj));

    const Index n = series.size();
    Vector extended(n + steps);
    extended.head(n) = recon;
    for (Index t = n; t < n + steps; ++t) {
        extended[t] = coeffs.dot(extended.segment(t - window + 1, window - 1));
    }
    return extended.tail(steps);
}

/// Adjustment gamma * estimate with gamma = <x, y> / <y, y> (Euclidean).
inline Vector adjust(const Vector& original, const Vector& estimate, double* gamma_out = nullptr)
{
    detail::require(original.size() == estimate.size(), "adjust: series lengths differ");
    const double yy = estimate.squaredNorm();
    if (!(yy > 0.0)) {
        throw degenerate_error("adjust: estimate is identically zero, gamma is undefined");
    }
    const double gamma = original.dot(estimate) / yy;
    if (gamma_out != nullptr) {
        *gamma_out = gamma;
    }
    return gamma * estimate;
}

inline TimeSeries adjust(const TimeSeries& original, const TimeSeries& estimate)
{
    return TimeSeries(adjust(original.values(), estimate.values()));
}

namespace detail
{

// sum_{l,k} weight(k) z_{lk}^2 in a fixed order, shared by both geometries.
template <typename ColumnWeight>
double column_weighted_norm_sq(const Matrix& z, ColumnWeight weight)
{
    double sum = 0.0;
    for (Index k = 0; k < z.cols(); ++k) {
        const double c = weight(k);
        for (Index l = 0; l < z.rows(); ++l) {
            sum += c * (z(l, k) * z(l, k));
        }
    }
    return sum;
}

struct EuclideanGeometry
{
    Index rank;

    Projection project(const Matrix& y) const { return truncated_svd_project(y, rank); }
    Vector average(const Matrix& z) const { return diagonal_average(z); }
    double norm_sq(const Matrix& z) const
    {
        return column_weighted_norm_sq(z, [](Index) { return 1.0; });
    }
};

struct ObliqueGeometry
{
    Index rank;
    const DiagonalMetric& metric;

    Projection project(const Matrix& y) const { return oblique_project(y, rank, metric); }
    Vector average(const Matrix& z) const { return diagonal_average_columns(z, metric.diagonal()); }
    double norm_sq(const Matrix& z) const
    {
        const Vector& c = metric.diagonal();
        return column_weighted_norm_sq(z, [&c](Index k) { return c[k]; });
    }
};

// Y_{k+1} = Pi_H P(Y_k) with exact projectors taken in the geometry's norm.
template <typename Geometry>
SolveResult alternating_loop(const Vector& series, Index window, const Geometry& geometry, const StopRule& stop,
                             const IterateObserver& observer, bool rank_diagnostics)
{
    IterationLog log(stop, observer, rank_diagnostics);
    Matrix current  = embed(series, window);
    Vector previous = series;
    double norm_sq  = geometry.norm_sq(current);
    for (Index iter = 1;; ++iter) {
        Projection low     = geometry.project(current);
        Vector next        = geometry.average(low.matrix);
        Matrix next_matrix = embed(next, window);

        StepOutcome step;
        step.objective_sq    = geometry.norm_sq(current - low.matrix);
        step.gap_sq          = geometry.norm_sq(low.matrix - next_matrix);
        step.degenerate      = low.degenerate_spectrum;
        step.outside_support = low.outside_support;
        const double next_norm_sq = geometry.norm_sq(next_matrix);
        const bool done = log.record(iter, step, norm_sq, next_norm_sq, previous, next, next_matrix);
        current  = std::move(next_matrix);
        previous = std::move(next);
        norm_sq  = next_norm_sq;
        if (done) {
            break;
        }
    }
    return SolveResult{std::move(previous), log.take()};
}

} // namespace detail

/// Conventional Cadzow iterations Y_{k+1} = Pi_H Pi_r Y_k. One iteration is Basic SSA.
inline SolveResult cadzow(const Vector& series, Index window, Index rank, const StopRule& stop,
                          const IterateObserver& observer = {}, bool rank_diagnostics = false)
{
    detail::check_problem(series.size(), window, rank);
    return detail::alternating_loop(series, window, detail::EuclideanGeometry{rank}, stop, observer,
                                    rank_diagnostics);
}

///
/// Alternating projections under the oblique norm ||.||_{2,C}:
/// Y_{k+1} = Pi_H Pi_{M_r} Y_k, both projectors taken in that norm
/// (Pi_H with column-constant weights m_{lk} = c_k).
///
inline SolveResult oblique_cadzow(const Vector& series, Index window, Index rank, const DiagonalMetric& metric,
                                  const StopRule& stop, const IterateObserver& observer = {},
                                  bool allow_degenerate = false, bool rank_diagnostics = false)
{
    detail::check_problem(series.size(), window, rank);
    detail::require(metric.size() == series.size() - window + 1, "metric size must equal K = N - L + 1");
    detail::require(allow_degenerate || metric.full_rank(),
                    "metric has zero entries; pass allow_degenerate to run Cadzow(0)");
    return detail::alternating_loop(series, window, detail::ObliqueGeometry{rank, metric}, stop, observer,
                                    rank_diagnostics);
}

namespace detail
{

// Outer loop shared by Weighted and Extended Cadzow. `weights` lives on the
// (possibly padded) trajectory matrix; `extract` maps the padded series to the
// estimate on the original points.
template <typename Extract>
SolveResult em_cadzow_loop(const Vector& start, Index window, Index rank, const MatrixWeights& weights,
                           ZeroWeightPolicy policy, Extract extract, const Vector& series, const StopRule& stop,
                           const EmStop& inner, const IterateObserver& observer, bool rank_diagnostics)
{
    IterationLog log(stop, observer, rank_diagnostics);
    const Matrix& m = weights.entries();
    Matrix current  = embed(start, window);
    Vector previous = series;
    double norm_sq  = weighted_norm_sq(current, m);
    for (Index iter = 1;; ++iter) {
        EmResult em        = em_weighted_project(current, rank, weights, current, inner);
        Vector padded      = diagonal_average(em.matrix, weights, policy);
        Matrix next_matrix = embed(padded, window);
        Vector next        = extract(padded);

        StepOutcome step;
        step.objective_sq     = weighted_norm_sq(current - em.matrix, m);
        step.gap_sq           = weighted_norm_sq(em.matrix - next_matrix, m);
        step.inner_iterations = em.iterations;
        step.inner_converged  = em.converged;
        const double next_norm_sq = weighted_norm_sq(next_matrix, m);
        const bool done = log.record(iter, step, norm_sq, next_norm_sq, previous, next, next_matrix);
        current  = std::move(next_matrix);
        previous = std::move(next);
        norm_sq  = next_norm_sq;
        if (done) {
            break;
        }
    }
    return SolveResult{std::move(previous), log.take()};
}

} // namespace detail

///
/// Weighted Cadzow: alternating projections in ||.||_M with
/// m_{lk} = 1 / w_{l+k-1}, i.e. equal series weights. The rank step is the
/// EM projector warm-started at the current iterate.
///
inline SolveResult weighted_cadzow(const Vector& series, Index window, Index rank, const StopRule& stop,
                                   const EmStop& inner = {}, const IterateObserver& observer = {},
                                   bool rank_diagnostics = false)
{
    detail::check_problem(series.size(), window, rank);
    const MatrixWeights weights = inverse_trapezoid_matrix_weights(series.size(), window);
    return detail::em_cadzow_loop(
        series, window, rank, weights, ZeroWeightPolicy::error, [](const Vector& s) { return s; }, series, stop,
        inner, observer, rank_diagnostics);
}

/// The length N + 2L - 2 padded series (left, x, right) used by Extended Cadzow.
inline Vector extend_series(const Vector& series, Index window, Index rank, ExtensionPolicy policy)
{
    const Index n   = series.size();
    const Index pad = window - 1;
    Vector out(n + 2 * pad);
    out.segment(pad, n) = series;
    switch (policy) {
    case ExtensionPolicy::zeros:
        out.head(pad).setZero();
        out.tail(pad).setZero();
        break;
    case ExtensionPolicy::constant:
        out.head(pad).setConstant(series[0]);
        out.tail(pad).setConstant(series[n - 1]);
        break;
    case ExtensionPolicy::recurrent:
        out.tail(pad) = ssa_forecast(series, window, rank, pad);
        out.head(pad) = ssa_forecast(detail::reversed(series), window, rank, pad).reverse();
        break;
    }
    return out;
}

///
/// Extended Cadzow: the series is padded by L-1 zero-weight points per side,
/// so every observed point lies on a full anti-diagonal of the L x (N+L-1)
/// trajectory matrix and equal matrix weights give equal series weights.
/// The stop rule sees only the estimate on the original points.
///
inline SolveResult extended_cadzow(const Vector& series, Index window, Index rank, const StopRule& stop,
                                   const EmStop& inner = {}, ExtensionPolicy policy = ExtensionPolicy::recurrent,
                                   const IterateObserver& observer = {}, bool rank_diagnostics = false)
{
    detail::check_problem(series.size(), window, rank);
    const Index n               = series.size();
    const Vector padded         = extend_series(series, window, rank, policy);
    const MatrixWeights weights = extended_mask(n, window);
    // Gap-only anti-diagonals have zero weight; they take the plain mean of the EM output.
    return detail::em_cadzow_loop(
        padded, window, rank, weights, ZeroWeightPolicy::unweighted,
        [window, n](const Vector& s) { return Vector(s.segment(window - 1, n)); }, series, stop, inner, observer,
        rank_diagnostics);
}

/// Metric used by the oblique algorithms for a given config.
inline DiagonalMetric config_metric(const SolverConfig& config, Index n)
{
    switch (config.algorithm) {
    case Algorithm::cadzow: return DiagonalMetric::identity(n - config.window + 1);
    case Algorithm::cadzow_alpha: return alpha_metric(n, config.window, config.alpha);
    case Algorithm::cadzow_chat: return chat_metric(n, config.window);
    default: break;
    }
    throw parameter_error("algorithm has no diagonal metric");
}

inline void validate(const SolverConfig& config, Index n)
{
    check_window(n, config.window);
    check_rank(config.window, n - config.window + 1, config.rank);
    if (config.algorithm == Algorithm::cadzow_alpha) {
        detail::require(config.alpha >= 0.0 && config.alpha <= 1.0, "alpha must lie in (0, 1]");
        detail::require(config.alpha > 0.0 || config.allow_degenerate_metric,
                        "alpha = 0 gives a rank-deficient metric; enable allow_degenerate_metric to use it");
    }
    if (config.algorithm == Algorithm::cadzow_chat) {
        detail::require(config.window <= n - config.window + 1, "C-hat metric requires L <= K");
    }
    detail::require(config.stop.max_iter >= 1, "stop rule needs max_iter >= 1");
    detail::require(!config.stop.tol || *config.stop.tol > 0.0, "stop tolerance must be positive");
    detail::require(config.inner.max_iter >= 1 && config.inner.tol > 0.0, "inner stop rule is invalid");
}

/// Runs the configured algorithm, then the adjustment when requested.
inline SolveResult solve(const Vector& series, const SolverConfig& config, const IterateObserver& observer = {})
{
    const Index n = series.size();
    validate(config, n);
    SolveResult out;
    switch (config.algorithm) {
    case Algorithm::cadzow:
        out = cadzow(series, config.window, config.rank, config.stop, observer, config.rank_diagnostics);
        break;
    case Algorithm::weighted_cadzow:
        out = weighted_cadzow(series, config.window, config.rank, config.stop, config.inner, observer,
                              config.rank_diagnostics);
        break;
    case Algorithm::extended_cadzow:
        out = extended_cadzow(series, config.window, config.rank, config.stop, config.inner, config.extension,
                              observer, config.rank_diagnostics);
        break;
    case Algorithm::cadzow_alpha:
    case Algorithm::cadzow_chat:
        out = oblique_cadzow(series, config.window, config.rank, config_metric(config, n), config.stop, observer,
                             config.allow_degenerate_metric, config.rank_diagnostics);
        break;
    }
    if (config.adjust) {
        double gamma = 1.0;
        out.estimate = adjust(series, out.estimate, &gamma);
        out.trace.adjustment = gamma;
    }
    return out;
}

inline SolveResult solve(const TimeSeries& series, const SolverConfig& config, const IterateObserver& observer = {})
{
    return solve(series.values(), config, observer);
}

} // namespace cadzow
