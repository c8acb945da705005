#include <gtest/gtest.h>

#include <random>

#include <Eigen/SVD>

#include <cadzow/solvers.hpp>

#include "properties.hpp"
#include "support.hpp"

using namespace cadzow;
using namespace cadzow::testing;

namespace
{

Vector sine_signal(Index n)
{
    Vector s(n);
    for (Index k = 1; k <= n; ++k) {
        s[k - 1] = 5.0 * std::sin(2.0 * M_PI * static_cast<double>(k) / 6.0);
    }
    return s;
}

} // namespace

// One iteration is the Basic SSA reconstruction: rank-r SVD, then anti-diagonal means.
TEST(Cadzow, FirstIterationIsBasicSsa)
{
    std::mt19937_64 rng(31);
    const Vector x = noisy_sine(rng, 30, 1.0);
    const Index L  = 12;
    const Matrix t = embed(x, L);
    Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix low = svd.matrixU().leftCols(2) * svd.singularValues().head(2).asDiagonal()
                     * svd.matrixV().leftCols(2).transpose();
    Vector oracle(30);
    for (Index i = 0; i < 30; ++i) {
        double s = 0.0;
        int c    = 0;
        for (Index l = 0; l < L; ++l) {
            const Index k = i - l;
            if (k >= 0 && k < t.cols()) {
                s += low(l, k);
                ++c;
            }
        }
        oracle[i] = s / c;
    }
    const SolveResult r = cadzow::cadzow(x, L, 2, StopRule::iterations(1));
    EXPECT_LT(rel_diff(r.estimate, oracle), 1e-12);
    EXPECT_EQ(r.trace.iterations, 1);
}

TEST(Cadzow, AlphaOneIsConventionalCadzowBitForBit)
{
    std::mt19937_64 rng(32);
    const Vector x = noisy_sine(rng, 40, 1.0);
    const SolveResult a = cadzow::cadzow(x, 20, 2, StopRule::iterations(25));
    const SolveResult b = oblique_cadzow(x, 20, 2, alpha_metric(40, 20, 1.0), StopRule::iterations(25));
    EXPECT_EQ(a.estimate, b.estimate);
    ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
    for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
        EXPECT_EQ(a.trace.records[k].objective, b.trace.records[k].objective);
    }
}

TEST(Cadzow, ResidualChainIsMonotone)
{
    const PropertyResult r = monotone_residuals(404, 50, 1e-9);
    EXPECT_TRUE(r.ok) << r.detail << " worst " << r.worst;
}

TEST(Cadzow, TelescopingNormIdentity)
{
    std::mt19937_64 rng(33);
    for (int t = 0; t < 10; ++t) {
        const Vector x     = noisy_sine(rng, 36, 1.0);
        const SolveResult a = cadzow::cadzow(x, 12, 2, StopRule::iterations(20));
        const SolveResult b = oblique_cadzow(x, 12, 2, alpha_metric(36, 12, 0.2), StopRule::iterations(20));
        const SolveResult c = oblique_cadzow(x, 12, 2, chat_metric(36, 12), StopRule::iterations(20));
        for (const SolveResult* r : {&a, &b, &c}) {
            for (const auto& rec : r->trace.records) {
                EXPECT_LT(rec.pyth_residual, 1e-8);
            }
        }
    }
}

TEST(Solvers, FiniteRankInputsAreFixedPoints)
{
    const PropertyResult r = fixed_points(505, 10, 1e-9);
    EXPECT_TRUE(r.ok) << r.detail << " worst " << r.worst;
}

TEST(Solvers, EstimatesHaveTheTargetRank)
{
    std::mt19937_64 rng(34);
    const Vector x = noisy_sine(rng, 40, 1.0);
    for (Algorithm a : {Algorithm::cadzow, Algorithm::weighted_cadzow, Algorithm::extended_cadzow,
                        Algorithm::cadzow_alpha, Algorithm::cadzow_chat}) {
        SolverConfig c;
        c.algorithm = a;
        c.window    = 20;
        c.rank      = 2;
        c.alpha     = 0.5;
        c.stop      = StopRule::mean_square_delta(1e-12, 3000);
        const SolveResult r = solve(x, c);
        const Vector sv     = singular_values(embed(r.estimate, 20));
        EXPECT_LT(sv[2] / sv[0], 1e-4) << algorithm_name(a);
    }
}

TEST(StopRules, IterationCountAndTolerance)
{
    std::mt19937_64 rng(35);
    const Vector x = noisy_sine(rng, 40, 1.0);
    const SolveResult fixed = cadzow::cadzow(x, 20, 2, StopRule::iterations(7));
    EXPECT_EQ(fixed.trace.iterations, 7);
    EXPECT_EQ(fixed.trace.stop_reason, StopReason::iteration_limit);
    EXPECT_TRUE(fixed.trace.converged);

    const SolveResult tol = cadzow::cadzow(x, 20, 2, StopRule::mean_square_delta(1e-8));
    EXPECT_EQ(tol.trace.stop_reason, StopReason::tolerance);
    EXPECT_TRUE(tol.trace.converged);
    EXPECT_LT(tol.trace.records.back().series_delta, 1e-8);

    const SolveResult guard = oblique_cadzow(x, 20, 2, alpha_metric(40, 20, 0.01),
                                             StopRule::mean_square_delta(1e-30, 3));
    EXPECT_EQ(guard.trace.stop_reason, StopReason::iteration_limit);
    EXPECT_FALSE(guard.trace.converged);
}

TEST(StopRules, ObserverSeesEveryIterate)
{
    std::mt19937_64 rng(36);
    const Vector x = noisy_sine(rng, 30, 1.0);
    std::vector<Index> seen;
    Vector last;
    const SolveResult r = cadzow::cadzow(x, 10, 2, StopRule::iterations(5), [&](Index k, const Vector& e) {
        seen.push_back(k);
        last = e;
    });
    EXPECT_EQ(seen, (std::vector<Index>{1, 2, 3, 4, 5}));
    EXPECT_EQ(last, r.estimate);
}

TEST(WeightedCadzow, InnerFailuresAreFlaggedAndOuterLoopContinues)
{
    std::mt19937_64 rng(37);
    const Vector x       = noisy_sine(rng, 30, 1.0);
    const SolveResult r  = weighted_cadzow(x, 10, 2, StopRule::iterations(4), EmStop{1, 1e-30});
    EXPECT_EQ(r.trace.iterations, 4);
    EXPECT_EQ(r.trace.inner_failures, 4);
    for (const auto& rec : r.trace.records) {
        EXPECT_FALSE(rec.inner_converged);
        EXPECT_EQ(rec.inner_iterations, 1);
    }
}

TEST(WeightedCadzow, ObjectiveIsInTheEqualSeriesWeightNorm)
{
    // Pi_H under m = 1/w is plain averaging; ||T(y)||_M^2 = ||y||^2.
    std::mt19937_64 rng(38);
    const Vector y = random_vector(rng, 25);
    const MatrixWeights m = inverse_trapezoid_matrix_weights(25, 9);
    EXPECT_LT(rel_diff(weighted_norm_sq(embed(y, 9), m.entries()), y.squaredNorm()), 1e-13);
    const Matrix z = random_matrix(rng, 9, 17);
    EXPECT_LT(rel_diff(diagonal_average(z, m), diagonal_average(z)), 1e-14);
}

TEST(ExtendedCadzow, ForecastContinuesAnExactSignal)
{
    const Vector s        = sine_signal(60);
    const Vector forecast = ssa_forecast(Vector(s.head(40)), 12, 2, 20);
    EXPECT_LT((forecast - s.tail(20)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ExtendedCadzow, PaddingPolicies)
{
    const Vector s = sine_signal(40);
    const Vector z = extend_series(s, 8, 2, ExtensionPolicy::zeros);
    EXPECT_EQ(z.size(), 40 + 14);
    EXPECT_EQ(z.head(7).norm(), 0.0);
    EXPECT_EQ(z.segment(7, 40), s);
    const Vector c = extend_series(s, 8, 2, ExtensionPolicy::constant);
    EXPECT_EQ(c[0], s[0]);
    EXPECT_EQ(c[c.size() - 1], s[39]);
    const Vector r = extend_series(s, 8, 2, ExtensionPolicy::recurrent);
    const Vector full = sine_signal(47);
    EXPECT_LT((r.tail(7) - full.tail(7)).cwiseAbs().maxCoeff(), 1e-9);
    // Backward: s_{1-t} = 5 sin(2 pi (1-t) / 6).
    for (Index t = 1; t <= 7; ++t) {
        EXPECT_NEAR(r[7 - t], 5.0 * std::sin(2.0 * M_PI * static_cast<double>(1 - t) / 6.0), 1e-9);
    }
}

TEST(ExtendedCadzow, GapValuesDoNotEnterTheObjective)
{
    std::mt19937_64 rng(39);
    const Vector x = noisy_sine(rng, 30, 1.0);
    const SolveResult a = extended_cadzow(x, 10, 2, StopRule::iterations(30), {}, ExtensionPolicy::zeros);
    const SolveResult b = extended_cadzow(x, 10, 2, StopRule::iterations(30), {}, ExtensionPolicy::recurrent);
    EXPECT_EQ(a.estimate.size(), 30);
    // Both end near the same local solution; the start only affects EM warm starts.
    EXPECT_LT(rel_diff(a.estimate, b.estimate), 0.05);
}

TEST(Adjust, LeastSquaresScaling)
{
    std::mt19937_64 rng(40);
    const Vector x = random_vector(rng, 20);
    const Vector y = x * 0.7 + 0.1 * random_vector(rng, 20);
    double gamma   = 0.0;
    const Vector a = adjust(x, y, &gamma);
    EXPECT_NEAR(gamma, x.dot(y) / y.dot(y), 1e-15);
    EXPECT_LE((x - a).squaredNorm(), (x - y).squaredNorm());
    // gamma is the minimizer: nearby scalings do worse.
    for (double d : {-1e-3, 1e-3}) {
        EXPECT_GE((x - (gamma + d) * y).squaredNorm(), (x - a).squaredNorm());
    }
    EXPECT_THROW(adjust(x, Vector::Zero(20)), degenerate_error);
}

TEST(Solve, DispatchMatchesDirectCalls)
{
    std::mt19937_64 rng(41);
    const Vector x = noisy_sine(rng, 40, 1.0);
    SolverConfig c;
    c.window = 20;
    c.rank   = 2;
    c.stop   = StopRule::iterations(10);

    c.algorithm = Algorithm::cadzow_alpha;
    c.alpha     = 0.1;
    EXPECT_EQ(solve(x, c).estimate, oblique_cadzow(x, 20, 2, alpha_metric(40, 20, 0.1), c.stop).estimate);

    c.algorithm = Algorithm::weighted_cadzow;
    EXPECT_EQ(solve(x, c).estimate, weighted_cadzow(x, 20, 2, c.stop).estimate);

    c.algorithm = Algorithm::cadzow_chat;
    c.adjust    = true;
    const SolveResult r = solve(x, c);
    const Vector raw    = oblique_cadzow(x, 20, 2, chat_metric(40, 20), c.stop).estimate;
    EXPECT_EQ(r.estimate, adjust(x, raw));
    ASSERT_TRUE(r.trace.adjustment.has_value());
}

TEST(Solve, ValidatesParameters)
{
    const Vector x = Vector::LinSpaced(20, 1.0, 2.0);
    SolverConfig c;
    c.window = 10;
    c.rank   = 11;
    EXPECT_THROW(solve(x, c), parameter_error);
    c.rank = 2;
    c.window = 20;
    EXPECT_THROW(solve(x, c), parameter_error);
    c.window    = 10;
    c.algorithm = Algorithm::cadzow_alpha;
    c.alpha     = 0.0;
    EXPECT_THROW(solve(x, c), parameter_error);
    c.allow_degenerate_metric = true;
    const SolveResult r       = solve(x, c);
    EXPECT_TRUE(r.trace.outside_support || r.trace.records.size() > 0);
    c.alpha = 1.5;
    EXPECT_THROW(solve(x, c), parameter_error);
    c.alpha     = 0.5;
    c.algorithm = Algorithm::cadzow_chat;
    c.window    = 15;
    EXPECT_THROW(solve(x, c), parameter_error);
}

TEST(Solve, CadzowZeroFlagsColumnsOutsideTheMetricSupport)
{
    std::mt19937_64 rng(42);
    const Vector x = noisy_sine(rng, 40, 1.0);
    const SolveResult r =
        oblique_cadzow(x, 8, 2, alpha_metric(40, 8, 0.0), StopRule::iterations(3), {}, true);
    EXPECT_TRUE(r.trace.outside_support);
}

TEST(Solve, RankDiagnostics)
{
    std::mt19937_64 rng(43);
    const Vector x = noisy_sine(rng, 40, 1.0);
    const SolveResult plain = cadzow::cadzow(x, 20, 2, StopRule::iterations(3));
    EXPECT_EQ(plain.trace.records[0].num_rank, -1);
    const SolveResult diag = cadzow::cadzow(x, 20, 2, StopRule::iterations(3), {}, true);
    EXPECT_GE(diag.trace.records[0].num_rank, 2);
}
