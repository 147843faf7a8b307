#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sqopen/decompose.hpp"
#include "sqopen/obstruction.hpp"
#include "test_util.hpp"

using namespace sqopen;

namespace {

std::vector<Eigen::Vector2d> circle_values(int n, int k, double sign = 1.0)
{
    std::vector<Eigen::Vector2d> out;
    for (int i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi * i / n;
        out.emplace_back(std::cos(k * t), sign * std::sin(k * t));
    }
    return out;
}

} // namespace

TEST(Winding, Examples)
{
    EXPECT_EQ(winding_number(circle_values(8, 1)), 1);
    EXPECT_EQ(winding_number(std::vector<Eigen::Vector2d>(5, Eigen::Vector2d(1, 0))), 0);
    EXPECT_EQ(winding_number(circle_values(16, 2, -1.0)), -2);
}

TEST(Winding, Errors)
{
    auto with_zero = circle_values(8, 1);
    with_zero[3].setZero();
    try {
        winding_number(with_zero);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
        EXPECT_EQ(e.index(), std::optional<std::size_t>(3));
    }
    const std::vector<Eigen::Vector2d> antipodal{{1, 0}, {-1, 0}};
    try {
        winding_number(antipodal);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AmbiguousSampling);
    }
    EXPECT_FALSE(winding_detail(circle_values(4, 1)).valid);
    EXPECT_TRUE(winding_detail(circle_values(5, 1)).valid);
}

TEST(Winding, VertexCycleOverload)
{
    const auto vals = circle_values(8, 1);
    std::vector<int> cycle{0, 1, 2, 3, 4, 5, 6, 7};
    EXPECT_EQ(winding_number(cycle, vals), 1);
    std::reverse(cycle.begin(), cycle.end());
    EXPECT_EQ(winding_number(cycle, vals), -1);
}

// Total angle of a closed curve splits over two arcs through a common point.
TEST(Winding, AdditiveUnderConcatenation)
{
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int k1 = static_cast<int>(rng.below(5)) - 2;
        const int k2 = static_cast<int>(rng.below(5)) - 2;
        const int n = 64;
        std::vector<Eigen::Vector2d> a = circle_values(n, k1), b = circle_values(n, k2);
        // Concatenate loops based at (1, 0): a then b.
        std::vector<Eigen::Vector2d> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        EXPECT_EQ(winding_number(ab), k1 + k2);
    }
}

TEST(Winding, InvariantUnderSubdivision)
{
    Rng rng(13);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // Smooth nonvanishing boundary field: a centre offset plus a random
        // Fourier perturbation, sampled on a 48-gon.
        const double cx = rng.uniform(-1.5, 1.5), cy = rng.uniform(-1.5, 1.5);
        const double a1 = rng.uniform(-0.3, 0.3), a2 = rng.uniform(-0.3, 0.3), ph = rng.uniform(0, 6.3);
        const int k = static_cast<int>(rng.below(3)) + 1;
        auto field = [&](double t) {
            return Eigen::Vector2d(std::cos(t) - cx + a1 * std::cos(k * t + ph),
                                   std::sin(t) - cy + a2 * std::sin(k * t));
        };
        std::vector<Eigen::Vector2d> coarse, fine;
        bool vanishes = false;
        const int n = 48;
        for (int i = 0; i < n; ++i) {
            const double t0 = 2 * std::numbers::pi * i / n;
            const double t1 = 2 * std::numbers::pi * (i + 1) / n;
            const Eigen::Vector2d p = field(t0);
            const Eigen::Vector2d q = field(t1);
            vanishes |= p.norm() < 0.05;
            coarse.push_back(p);
            fine.push_back(p);
            fine.push_back(0.5 * (p + q));
        }
        if (vanishes)
            continue;
        const auto dc = winding_detail(coarse);
        if (!dc.valid)
            continue;
        ++checked;
        EXPECT_EQ(winding_detail(fine).winding, dc.winding);
        EXPECT_NEAR(winding_detail(fine).total_angle, dc.total_angle, 1e-9);
    }
    EXPECT_GT(checked, 50);
}

TEST(SignObstruction, Examples)
{
    const auto K = build_standard_complex(SpaceKind::Interval, 64);
    const auto f = VertexFunction::sample(K, [](auto c) { return c[0]; });
    const auto g = VertexFunction::sample(K, [](auto c) { return c[0] * c[0] + 0.01; });
    const auto cert = sign_obstruction(f.values(), g.values());
    ASSERT_TRUE(cert);
    EXPECT_NEAR(cert->lower_bound, 1 + std::sqrt(1.01), 1e-12);
    EXPECT_GE(cert->lower_bound, 2.0);

    EXPECT_FALSE(sign_obstruction(std::vector<double>{1, 1, 1}, std::vector<double>{1, 1, 1}));
    EXPECT_FALSE(sign_obstruction(std::vector<double>{-0.5}, std::vector<double>{1}));
    EXPECT_THROW(sign_obstruction(std::vector<double>{1, -1}, std::vector<double>{1, 0}), Error);
}

// On the discrete model the bound is attained by one of the two constant-sign roots.
TEST(SignObstruction, TightAgainstBruteForce)
{
    Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(10);
        std::vector<double> f(n), g(n);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = rng.uniform(-2, 2);
            g[i] = rng.uniform(0.01, 3);
        }
        f[0] = std::abs(f[0]) + 0.1;
        f[1] = -std::abs(f[1]) - 0.1;
        const auto cert = sign_obstruction(f, g);
        ASSERT_TRUE(cert);
        double best = std::numeric_limits<double>::infinity();
        for (double sigma : {1.0, -1.0}) {
            double d = 0;
            for (std::size_t i = 0; i < n; ++i)
                d = std::max(d, std::abs(f[i] - sigma * std::sqrt(g[i])));
            best = std::min(best, d);
        }
        EXPECT_EQ(cert->lower_bound, best);
    }
}

TEST(CertifyNonopenness, DiskIdentity)
{
    const auto K = build_standard_complex(SpaceKind::Disk, 12);
    const FunctionTuple f({VertexFunction::sample(K, [](auto c) { return c[0]; }),
                           VertexFunction::sample(K, [](auto c) { return c[1]; })});
    const auto g = VertexFunction::sample(K, [](auto c) { return c[0] * c[0] + c[1] * c[1] + 0.01; });
    const auto cert = certify_nonopenness(K, f, g);
    ASSERT_TRUE(cert);
    ASSERT_TRUE(cert->winding);
    EXPECT_EQ(cert->winding->winding, 1);
    EXPECT_NEAR(cert->lower_bound, 1.0, 1e-9);
    EXPECT_NEAR(cert->winding->component_lower_bound, 1.0 / std::sqrt(2.0), 1e-9);

    // Cross-check: the pipeline must not produce a closer exact decomposition.
    try {
        const auto r = decompose(K, f, g, 0.3, 0);
        EXPECT_GE(r.tuple_distance, cert->winding->component_lower_bound);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionObstruction);
    }
}

TEST(CertifyNonopenness, NoWindingNoCertificate)
{
    const auto K = build_standard_complex(SpaceKind::Disk, 8);
    const FunctionTuple f({VertexFunction::sample(K, [](auto c) { return c[0] * c[0] - c[1] * c[1]; }),
                           VertexFunction::constant(K, 2)});
    EXPECT_FALSE(certify_nonopenness(K, f, VertexFunction::constant(K, 1)));
}

TEST(CertifyNonopenness, RequiresDisk)
{
    const auto K = build_standard_complex(SpaceKind::Circle, 16);
    const FunctionTuple f({VertexFunction::sample(K, [](auto c) { return c[0]; }),
                           VertexFunction::sample(K, [](auto c) { return c[1]; })});
    EXPECT_THROW(certify_nonopenness(K, f, VertexFunction::constant(K, 1)), Error);
}

TEST(CertifyNonopenness, CoarseBoundaryIsAmbiguous)
{
    const auto K = build_standard_complex(SpaceKind::Disk, 3);
    // Five turns around an 18-gon: 100 degrees per boundary step.
    const FunctionTuple f({VertexFunction::sample(K, [](auto c) { return std::cos(5 * std::atan2(c[1], c[0])); }),
                           VertexFunction::sample(K, [](auto c) { return std::sin(5 * std::atan2(c[1], c[0])); })});
    try {
        certify_nonopenness(K, f, VertexFunction::constant(K, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AmbiguousSampling);
    }
}
