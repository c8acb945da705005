#include <gtest/gtest.h>

#include <random>

#include <cadzow/weights.hpp>

#include "properties.hpp"
#include "support.hpp"

using namespace cadzow;
using namespace cadzow::testing;

namespace
{

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) {
        out[i++] = x;
    }
    return out;
}

} // namespace

TEST(Trapezoid, SmallExamples)
{
    EXPECT_EQ(trapezoid_weights(5, 3).values(), vec({1, 2, 3, 2, 1}));
    EXPECT_EQ(trapezoid_weights(4, 2).values(), vec({1, 2, 2, 1}));
}

TEST(Trapezoid, SymmetricInLAndK)
{
    for (Index n = 3; n < 30; ++n) {
        for (Index L = 2; L < n; ++L) {
            EXPECT_EQ(trapezoid_weights(n, L).values(), trapezoid_weights(n, n - L + 1).values());
        }
    }
}

TEST(MatrixFromSeries, TrapezoidGivesOnesAndOnesGiveInverseTrapezoid)
{
    const Index n = 11;
    const Index L = 4;
    const Matrix ones = matrix_weights_from_series(trapezoid_weights(n, L), L).entries();
    EXPECT_EQ(ones, Matrix::Ones(L, n - L + 1));
    const Matrix inv = matrix_weights_from_series(SeriesWeights(Vector::Ones(n)), L).entries();
    const Vector w   = trapezoid_weights(n, L).values();
    for (Index k = 0; k < inv.cols(); ++k) {
        for (Index l = 0; l < L; ++l) {
            EXPECT_DOUBLE_EQ(inv(l, k), 1.0 / w[l + k]);
        }
    }
    EXPECT_EQ(matrix_weights_from_series(SeriesWeights(Vector::Zero(n)), L).entries(), Matrix::Zero(L, n - L + 1));
}

TEST(SeriesFromMatrix, OnesGiveTrapezoid)
{
    EXPECT_EQ(series_weights_from_matrix(MatrixWeights::ones(3, 3)).values(), vec({1, 2, 3, 2, 1}));
    EXPECT_EQ(series_weights_from_matrix(MatrixWeights(Matrix::Zero(3, 4))).values(), Vector::Zero(6));
}

TEST(SeriesFromMatrix, DegenerateMetricGivesEqualWeightsForIntegerNOverL)
{
    for (Index L = 2; L <= 10; ++L) {
        for (Index h = 2; h <= 5; ++h) {
            const Index n = L * h;
            const Vector q = series_weights_from_metric(alpha_metric(n, L, 0.0), L).values();
            EXPECT_EQ(q, Vector::Ones(n)) << "N=" << n << " L=" << L;
        }
    }
}

TEST(SeriesFromMatrix, RoundTrip)
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 50; ++t) {
        const Index n = std::uniform_int_distribution<Index>(4, 40)(rng);
        const Index L = std::uniform_int_distribution<Index>(2, n - 1)(rng);
        const SeriesWeights q(random_positive(rng, n, 0.0, 5.0));
        const Vector back = series_weights_from_matrix(matrix_weights_from_series(q, L)).values();
        EXPECT_LT((back - q.values()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(AlphaMetric, Examples)
{
    EXPECT_EQ(alpha_metric(20, 5, 1.0).diagonal(), Vector::Ones(16));
    const DiagonalMetric c = alpha_metric(40, 8, 0.0);
    EXPECT_EQ(c.rank(), 5);
    for (Index k = 1; k <= c.size(); ++k) {
        const bool unit = k == 1 || k == 9 || k == 17 || k == 25 || k == 33;
        EXPECT_EQ(c[k - 1], unit ? 1.0 : 0.0) << "k=" << k;
    }
    EXPECT_THROW(alpha_metric(40, 8, 1.5), parameter_error);
    EXPECT_THROW(alpha_metric(40, 8, -0.1), parameter_error);
}

TEST(AlphaMetric, NonIntegerNOverLUsesFloor)
{
    EXPECT_FALSE(alpha_metric_is_exact(41, 8));
    EXPECT_EQ(alpha_metric(41, 8, 0.0).rank(), 5);
    // Equal weights are lost: index 41 is covered by no unit column.
    const Vector q = series_weights_from_metric(alpha_metric(41, 8, 0.0), 8).values();
    EXPECT_EQ(q[40], 0.0);
}

TEST(ChatMetric, BoundaryValueAgainstDirectSum)
{
    // k = 1, L = 4, N large: (1/4)(1/4 + 1/1 + 1/2 + 1/3).
    const double oracle = (1.0 / 4.0) * (1.0 / 4.0 + 1.0 + 1.0 / 2.0 + 1.0 / 3.0);
    EXPECT_NEAR(chat_metric(20, 4)[0], oracle, 1e-15);
    EXPECT_NEAR(chat_metric(20, 4)[0], 0.520833333333333, 1e-14);
    EXPECT_NEAR(chat_metric_closed_form(20, 4)[0], oracle, 1e-15);
}

TEST(ChatMetric, CentreAndSymmetry)
{
    const Index n = 40;
    const Index L = 8;
    const DiagonalMetric c = chat_metric(n, L);
    const Index K          = n - L + 1;
    for (Index k = L; k <= K - L + 1; ++k) {
        EXPECT_NEAR(c[k - 1], 1.0 / L, 1e-15);
    }
    for (Index k = 1; k <= K; ++k) {
        EXPECT_NEAR(c[k - 1], c[K - k], 1e-15);
    }
    EXPECT_THROW(chat_metric(10, 7), parameter_error);
    EXPECT_THROW(chat_metric_closed_form(10, 5), parameter_error);
}

TEST(AlphaSeriesWeights, Examples)
{
    EXPECT_EQ(alpha_series_weights(40, 8, 0.0).values(), Vector::Ones(40));
    const SeriesWeights q = alpha_series_weights(40, 8, 0.1);
    EXPECT_DOUBLE_EQ(q[0], 1.0);
    EXPECT_DOUBLE_EQ(q[7], 1.7);
    EXPECT_DOUBLE_EQ(q[19], 1.7);
    EXPECT_THROW(alpha_series_weights(41, 8, 0.1), parameter_error);
}

// Both branches give 1 + (L-1) alpha at i = K, so alpha = 1 is the trapezoid exactly.
TEST(AlphaSeriesWeights, AlphaOneIsTrapezoid)
{
    for (Index L = 2; L <= 10; ++L) {
        for (Index h = 2; h <= 6; ++h) {
            const Index n = L * h;
            EXPECT_EQ(alpha_series_weights(n, L, 1.0).values(), trapezoid_weights(n, L).values());
            EXPECT_EQ(alpha_series_weights(n, L, 1.0).values(),
                      series_weights_from_matrix(MatrixWeights::ones(L, n - L + 1)).values());
        }
    }
}

TEST(ChatSeriesWeights, Examples)
{
    const Index n = 40;
    const Index L = 8;
    const SeriesWeights q = chat_series_weights(n, L);
    for (Index i = 2 * L; i <= n - 2 * L + 1; ++i) {
        EXPECT_EQ(q[i - 1], 1.0);
    }
    for (Index i = 1; i <= n; ++i) {
        EXPECT_EQ(q[i - 1], q[n - i]);
    }
    // L = 2, i = 1: 2/8 + (1/2)(1 + H_1 - H_1) = 0.75; oracle from the metric pipeline.
    const SeriesWeights q2 = chat_series_weights(12, 2);
    EXPECT_DOUBLE_EQ(q2[0], 0.75);
    EXPECT_NEAR(q2[0], series_weights_from_metric(chat_metric(12, 2), 2)[0], 1e-15);
    EXPECT_THROW(chat_series_weights(20, 7), parameter_error);
}

// At N = 4(L - 1) the boundary regions overlap and the piecewise form no longer holds.
TEST(ChatSeriesWeights, SmallestValidLength)
{
    for (Index L = 2; L <= 12; ++L) {
        EXPECT_THROW(chat_series_weights(4 * (L - 1), L), parameter_error);
        const Vector q = chat_series_weights(4 * L - 3, L).values();
        const Vector p = series_weights_from_metric(chat_metric(4 * L - 3, L), L).values();
        EXPECT_LT((q - p).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(scheme_series_weights({SchemeKind::chat}, 4 * (L - 1), L).values(),
                  series_weights_from_metric(chat_metric(4 * (L - 1), L), L).values());
    }
}

TEST(ClosedForms, AgreeWithTheConversionPipeline)
{
    const PropertyResult r = closed_forms_vs_pipeline(1e-12);
    EXPECT_TRUE(r.ok) << r.detail << " worst " << r.worst;
}

TEST(Equivalences, SeriesMatrixAndObliqueNorms)
{
    const PropertyResult r = weight_equivalences(303, 200, 1e-10);
    EXPECT_TRUE(r.ok) << r.detail << " worst " << r.worst;
}

TEST(Normalize, Examples)
{
    EXPECT_EQ(normalize_weights(SeriesWeights(Vector::Ones(4))).values(), Vector::Constant(4, 0.25));
    const Vector t = normalize_weights(trapezoid_weights(5, 3)).values();
    EXPECT_EQ(t, vec({1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9}));
    EXPECT_THROW(normalize_weights(SeriesWeights(Vector::Zero(3))), degenerate_error);
}

TEST(Schemes, ParseAndDispatch)
{
    EXPECT_EQ(parse_scheme("chat"), SchemeKind::chat);
    EXPECT_FALSE(parse_scheme("bogus").has_value());
    EXPECT_EQ(scheme_series_weights({SchemeKind::unit}, 6, 3).values(), Vector::Ones(6));
    EXPECT_EQ(scheme_series_weights({SchemeKind::trapezoid}, 5, 3).values(), vec({1, 2, 3, 2, 1}));
    EXPECT_LT((scheme_series_weights({SchemeKind::inverse}, 9, 4).values() - Vector::Ones(9)).cwiseAbs().maxCoeff(),
              1e-15);
    EXPECT_EQ(scheme_series_weights({SchemeKind::extended}, 9, 4).values(), Vector::Constant(9, 4.0));
    // Generic fallbacks when the closed-form preconditions fail.
    EXPECT_EQ(scheme_series_weights({SchemeKind::alpha, 0.3}, 41, 8).values(),
              series_weights_from_metric(alpha_metric(41, 8, 0.3), 8).values());
    EXPECT_EQ(scheme_series_weights({SchemeKind::chat}, 20, 7).values(),
              series_weights_from_metric(chat_metric(20, 7), 7).values());
}

TEST(ExtendedMask, CoversEachObservedPointOnAFullAntiDiagonal)
{
    const Index n = 10;
    const Index L = 4;
    const MatrixWeights m = extended_mask(n, L);
    EXPECT_EQ(m.rows(), L);
    EXPECT_EQ(m.cols(), n + L - 1);
    const Vector q = series_weights_from_matrix(m).values();
    for (Index i = 0; i < q.size(); ++i) {
        const bool observed = i >= L - 1 && i < L - 1 + n;
        EXPECT_EQ(q[i] == static_cast<double>(L), observed) << i;
    }
}
