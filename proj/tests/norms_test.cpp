#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "advlab/error.hpp"
#include "advlab/norms.hpp"
#include "test_support.hpp"

namespace advlab {
namespace {

constexpr NormKind kAllNorms[] = {NormKind::l1, NormKind::l2, NormKind::linf};

std::vector<double> scaled(std::vector<double> v, double a) {
    for (double& x : v) x *= a;
    return v;
}

std::vector<double> sum(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
    return total;
}

// Minimizer of ||z - v||^2 subject to ||z||_1 <= beta by enumerating every
// support set: on support S, z_i = v_i - lambda sign(v_i) with a common
// lambda chosen to hit the boundary. The best feasible candidate wins.
std::vector<double> l1_projection_oracle(const std::vector<double>& v, double beta) {
    const std::size_t n = v.size();
    std::vector<double> best(n, 0.0);
    double best_cost = squared_distance(best, v);
    double v_norm = 0.0;
    for (double x : v) v_norm += std::abs(x);
    if (v_norm <= beta) return v;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                total += std::abs(v[i]);
                ++count;
            }
        }
        const double lambda = (total - beta) / static_cast<double>(count);
        if (lambda < 0.0) continue;
        std::vector<double> z(n, 0.0);
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            if (!(mask & (1u << i))) continue;
            const double magnitude = std::abs(v[i]) - lambda;
            if (magnitude < 0.0) feasible = false;
            z[i] = std::copysign(magnitude, v[i]);
        }
        if (!feasible) continue;
        const double cost = squared_distance(z, v);
        if (cost < best_cost) {
            best_cost = cost;
            best = z;
        }
    }
    return best;
}

TEST(NormsTest, Examples) {
    const std::vector<double> v{3.0, -4.0};
    EXPECT_DOUBLE_EQ(norm(v, NormKind::l1), 7.0);
    EXPECT_DOUBLE_EQ(norm(v, NormKind::l2), 5.0);
    EXPECT_DOUBLE_EQ(norm(v, NormKind::linf), 4.0);
    EXPECT_DOUBLE_EQ(norm(std::vector<double>{1.0, -2.0, 3.0}, NormKind::l1), 6.0);
    EXPECT_DOUBLE_EQ(norm(std::vector<double>{1.0, -7.0, 3.0}, NormKind::linf), 7.0);
    for (NormKind k : kAllNorms) EXPECT_EQ(norm(std::vector<double>{}, k), 0.0);
}

TEST(NormsTest, ParseAndPrint) {
    for (NormKind k : kAllNorms) EXPECT_EQ(parse_norm_kind(to_string(k)), k);
    EXPECT_THROW(parse_norm_kind("L2"), ParameterError);
    EXPECT_THROW(parse_norm_kind("l3"), ParameterError);
}

TEST(NormsTest, DistanceChecksShape) {
    EXPECT_DOUBLE_EQ(distance(Image({1, 2, 1}, {0.0, 1.0}), Image({1, 2, 1}, {0.5, 0.5}), NormKind::l1), 1.0);
    EXPECT_THROW(distance(Image({1, 2, 1}), Image({2, 1, 1}), NormKind::l2), ShapeError);
    const Image x({1, 2, 1}, {0.5, 0.4});
    const Image y({1, 2, 1}, {0.4, 0.5});
    EXPECT_NEAR(distance(x, y, NormKind::l2), 0.1 * std::sqrt(2.0), 1e-12);
    for (NormKind k : kAllNorms) {
        EXPECT_EQ(distance(x, x, k), 0.0);
        EXPECT_EQ(distance(x, y, k), distance(y, x, k));
    }
}

TEST(NormsTest, HomogeneityAndTriangleInequality) {
    SplitMix64 rng(3);
    for (NormKind k : kAllNorms) {
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 1 + rng.below(20);
            const auto x = testing::random_vector(n, 2.0, rng);
            const auto y = testing::random_vector(n, 2.0, rng);
            const double a = rng.uniform(-3.0, 3.0);
            EXPECT_NEAR(norm(scaled(x, a), k), std::abs(a) * norm(x, k), 1e-12 * (1.0 + norm(x, k)));
            EXPECT_LE(norm(sum(x, y), k), norm(x, k) + norm(y, k) + 1e-12);
        }
    }
}

TEST(ProjectionTest, Examples) {
    const std::vector<double> v{3.0, -4.0};
    const auto l2 = project_to_ball(v, NormKind::l2, 1.0);
    EXPECT_NEAR(l2[0], 0.6, 1e-15);
    EXPECT_NEAR(l2[1], -0.8, 1e-15);
    EXPECT_EQ(project_to_ball(v, NormKind::linf, 1.0), (std::vector<double>{1.0, -1.0}));
    EXPECT_EQ(project_to_ball(std::vector<double>{0.3, -0.5}, NormKind::linf, 0.2), (std::vector<double>{0.2, -0.2}));
    const auto l1 = project_to_ball(v, NormKind::l1, 1.0);
    EXPECT_NEAR(l1[0], 0.0, 1e-15);
    EXPECT_NEAR(l1[1], -1.0, 1e-15);
    const auto l1b = project_to_ball(std::vector<double>{0.5, 0.5}, NormKind::l1, 0.5);
    EXPECT_NEAR(l1b[0], 0.25, 1e-15);
    EXPECT_NEAR(l1b[1], 0.25, 1e-15);
}

TEST(ProjectionTest, ZeroBudgetAndBadBudget) {
    for (NormKind k : kAllNorms) {
        EXPECT_EQ(project_to_ball(std::vector<double>{0.3, -0.2}, k, 0.0), (std::vector<double>{0.0, 0.0}));
        EXPECT_THROW(project_to_ball(std::vector<double>{0.3}, k, -1.0), ParameterError);
    }
}

TEST(ProjectionTest, TensorOverloadKeepsShape) {
    const Tensor t({2, 1, 1}, std::vector<double>{3.0, 4.0});
    const Tensor p = project_to_ball(t, NormKind::l2, 2.5);
    EXPECT_EQ(p.shape(), t.shape());
    EXPECT_NEAR(p[0], 1.5, 1e-15);
}

TEST(ProjectionTest, PropertiesOnRandomVectors) {
    SplitMix64 rng(11);
    for (NormKind k : kAllNorms) {
        for (int trial = 0; trial < 300; ++trial) {
            const std::size_t n = 1 + rng.below(50);
            const auto v = testing::random_vector(n, 1.0, rng);
            const double beta = rng.uniform(0.01, 2.0);
            const auto p = project_to_ball(v, k, beta);
            ASSERT_LE(norm(p, k), beta);
            ASSERT_EQ(project_to_ball(p, k, beta), p);  // idempotent
            const auto inside = scaled(v, 0.99 * beta / std::max(norm(v, k), 1e-300));
            ASSERT_EQ(project_to_ball(inside, k, beta), inside);
        }
    }
}

TEST(ProjectionTest, L1MatchesSupportEnumerationOracle) {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.below(4);
        const auto v = testing::random_vector(n, 1.0, rng);
        const double beta = rng.uniform(0.0, 1.5 * norm(v, NormKind::l1));
        const auto expected = l1_projection_oracle(v, beta);
        const auto actual = project_to_ball(v, NormKind::l1, beta);
        for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(actual[i], expected[i], 1e-6);
    }
}

TEST(ProjectionTest, L1HandlesTiesAndLargeVectors) {
    const auto p = project_to_ball(std::vector<double>{1.0, -1.0, 1.0, -1.0}, NormKind::l1, 2.0);
    for (double x : p) EXPECT_NEAR(std::abs(x), 0.5, 1e-15);
    SplitMix64 rng(5);
    const auto big = testing::random_vector(4096, 1.0, rng);
    EXPECT_LE(norm(project_to_ball(big, NormKind::l1, 3.0), NormKind::l1), 3.0);
}

}  // namespace
}  // namespace advlab
