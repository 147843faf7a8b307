#include <cmath>

#include <gtest/gtest.h>

#include "sqopen/random.hpp"
#include "sqopen/zerodim.hpp"

using namespace sqopen;

TEST(ClopenSqrt, Examples)
{
    const DiscreteSpace X(4);
    const std::vector<double> g{4, 1, 9, 0.25};
    EXPECT_EQ(clopen_sqrt(X, X.subset({1, 2}), g), (std::vector<double>{2, 1, -3, -0.5}));
    const std::vector<double> zero(4, 0.0);
    for (const auto& h : {clopen_sqrt(X, 0, zero), clopen_sqrt(X, X.subset({1, 3}), zero)})
        for (double x : h)
            EXPECT_EQ(std::abs(x), 0.0);
    EXPECT_THROW(X.subset({5}), Error);
    EXPECT_THROW(DiscreteSpace(0), Error);
}

// rho_U(f^2) = f when f >= 0 exactly on U.
TEST(ClopenSqrt, RecoversSignedFunction)
{
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + static_cast<int>(rng.below(16));
        const DiscreteSpace X(k);
        std::vector<double> f(k), g(k);
        std::vector<int> U;
        for (int v = 0; v < k; ++v) {
            f[v] = rng.uniform(-3, 3);
            g[v] = f[v] * f[v];
            if (f[v] >= 0)
                U.push_back(v + 1);
        }
        const auto h = clopen_sqrt(X, X.subset(U), g);
        for (int v = 0; v < k; ++v) {
            EXPECT_NEAR(h[v], f[v], 1e-15 * std::abs(f[v]));
            EXPECT_NEAR(h[v] * h[v], g[v], 1e-15 * g[v]);
        }
    }
}

TEST(SqrtNear, Examples)
{
    auto h = sqrt_near(std::vector<double>{1, -2}, std::vector<double>{1.21, 3.61});
    EXPECT_NEAR(h[0], 1.1, 1e-15);
    EXPECT_NEAR(h[1], -1.9, 1e-15);
    EXPECT_EQ(sqrt_near(std::vector<double>{0}, std::vector<double>{0.04}), std::vector<double>{0.2});
    EXPECT_EQ(sqrt_near(std::vector<double>{3}, std::vector<double>{9}), std::vector<double>{3});
    EXPECT_THROW(sqrt_near(std::vector<double>{1}, std::vector<double>{-1}), Error);
}

TEST(SqrtNear, ModulusAndOracle)
{
    Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 1 + rng.below(8);
        std::vector<double> f(k), g(k);
        bool has_zero = false;
        for (std::size_t v = 0; v < k; ++v) {
            f[v] = rng.uniform() < 0.1 ? 0.0 : rng.uniform(-2, 2);
            has_zero |= f[v] == 0.0;
            g[v] = std::max(0.0, f[v] * f[v] + rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-6, 0)));
        }
        const auto h = sqrt_near(f, g);
        double dist = 0, gap = 0;
        for (std::size_t v = 0; v < k; ++v) {
            dist = std::max(dist, std::abs(h[v] - f[v]));
            gap = std::max(gap, std::abs(g[v] - f[v] * f[v]));
        }
        EXPECT_LE(dist, std::sqrt(gap));
        const auto best = brute_force_best({f}, g);
        EXPECT_GE(dist, best.distance);
        if (!has_zero) {
            EXPECT_EQ(dist, best.distance);
        }
    }
}

TEST(BruteForceBest, Examples)
{
    auto b = brute_force_best({{1, -2}}, std::vector<double>{4, 9});
    EXPECT_EQ(b.tuple[0], (std::vector<double>{2, -3}));
    EXPECT_EQ(b.distance, 1.0);

    auto r = brute_force_best({{0.6}, {0.8}}, std::vector<double>{4});
    EXPECT_NEAR(r.tuple[0][0], 1.2, 1e-15);
    EXPECT_NEAR(r.tuple[1][0], 1.6, 1e-15);
    EXPECT_NEAR(r.euclidean_gap, 1.0, 1e-15);

    auto exact = brute_force_best({{1, -2, 0.5}}, std::vector<double>{1, 4, 0.25});
    EXPECT_EQ(exact.distance, 0.0);
    EXPECT_THROW(brute_force_best({std::vector<double>(21, 1.0)}, std::vector<double>(21, 1.0)), Error);
}
