#include <cmath>

#include <gtest/gtest.h>

#include "sqopen/matops.hpp"

using namespace sqopen;

namespace {

Eigen::MatrixXd m2(double a, double b, double c, double d)
{
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

SymmetricMatrix random_symmetric(Rng& rng, int k, double scale = 1.0)
{
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            a(i, j) = scale * rng.uniform(-1, 1);
    return SymmetricMatrix(Eigen::MatrixXd(a + a.transpose()));
}

SymmetricMatrix random_pd(Rng& rng, int k)
{
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            a(i, j) = rng.uniform(-1, 1);
    Eigen::MatrixXd b = a * a.transpose();
    b.diagonal().array() += 0.05;
    return SymmetricMatrix(b);
}

// Closed form for roots of (1 r; r 1): (a s; s a) with a^2 + s^2 = 1 and
// 2as = r; the distance to diag(1, -1) is |a| + sqrt(1 + s^2).
double counterexample_oracle(double r)
{
    const double big = 0.5 * (std::sqrt(1 + r) + std::sqrt(1 - r));
    const double small = 0.5 * (std::sqrt(1 + r) - std::sqrt(1 - r));
    return std::min(big + std::sqrt(1 + small * small), small + std::sqrt(1 + big * big));
}

} // namespace

TEST(SelfAdjoint, RejectsAsymmetric)
{
    EXPECT_THROW(SymmetricMatrix(m2(1, 2, 3, 4)), Error);
    EXPECT_THROW(SymmetricMatrix(Eigen::MatrixXd(2, 3)), Error);
    EXPECT_DOUBLE_EQ(SymmetricMatrix::diagonal({3, -5}).norm(), 5.0);
}

TEST(SelfAdjoint, HermitianSupported)
{
    HermitianMatrix::Matrix h(2, 2);
    h << 2.0, std::complex<double>(0, 1), std::complex<double>(0, -1), 2.0;
    const HermitianMatrix H(h);
    EXPECT_NEAR(H.norm(), 3.0, 1e-12);
    const auto e = enumerate_sqrts(H);
    ASSERT_EQ(e.roots.size(), 4u);
    for (const auto& r : e.roots)
        EXPECT_LE(op_norm(Eigen::MatrixXcd(r.matrix.matrix() * r.matrix.matrix() - h)), 1e-12);
}

TEST(EnumerateSqrts, Diagonal)
{
    const auto e = enumerate_sqrts(SymmetricMatrix::diagonal({4, 9}));
    ASSERT_EQ(e.roots.size(), 4u);
    EXPECT_TRUE(e.psd_root().matrix().isApprox(m2(2, 0, 0, 3)));
    std::set<std::pair<double, double>> diagonals;
    for (const auto& r : e.roots)
        diagonals.insert({std::round(r.matrix.matrix()(0, 0)), std::round(r.matrix.matrix()(1, 1))});
    EXPECT_EQ(diagonals, (std::set<std::pair<double, double>>{{2, 3}, {2, -3}, {-2, 3}, {-2, -3}}));
}

TEST(EnumerateSqrts, PaperFormExample)
{
    const auto e = enumerate_sqrts(SymmetricMatrix(m2(1, 0.6, 0.6, 1)));
    ASSERT_EQ(e.roots.size(), 4u);
    const auto& p = e.psd_root().matrix();
    EXPECT_NEAR(p(0, 0), std::sqrt(0.9), 1e-12);
    EXPECT_NEAR(p(0, 1), std::sqrt(0.1), 1e-12);
    EXPECT_NEAR(p(0, 0) * p(0, 0) + p(0, 1) * p(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(2 * p(0, 0) * p(0, 1), 0.6, 1e-12);
}

TEST(EnumerateSqrts, DegenerateSpectrum)
{
    try {
        enumerate_sqrts(SymmetricMatrix::identity(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateSpectrum);
    }
    const auto psd = enumerate_sqrts(SymmetricMatrix::identity(2), DegeneratePolicy::PsdRootOnly);
    EXPECT_TRUE(psd.degenerate);
    EXPECT_EQ(psd.roots.size(), 1u);
    EXPECT_FALSE(psd.warning.empty());
}

TEST(EnumerateSqrts, RootSoundness)
{
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const auto B = random_pd(rng, 2 + static_cast<int>(rng.below(3)));
        const auto e = enumerate_sqrts(B);
        EXPECT_EQ(e.roots.size(), std::size_t{1} << B.size());
        for (const auto& r : e.roots)
            EXPECT_LE(op_norm(r.matrix.matrix() * r.matrix.matrix() - B.matrix()), 1e-9 * B.norm());
        EXPECT_GE(e.psd_root().spectrum().eigenvalues().minCoeff(), 0.0);
    }
}

// Grid search over symmetric 2x2 matrices with Newton polishing: every exact
// root found must coincide with an enumerated one.
TEST(EnumerateSqrts, CompletenessAgainstGridSearch)
{
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const auto B = random_pd(rng, 2);
        const auto e = enumerate_sqrts(B);
        const Eigen::MatrixXd b = B.matrix();
        const double bound = 2 * std::sqrt(B.norm());
        const int steps = 24;
        std::set<std::size_t> hit;
        for (int i = 0; i <= steps; ++i)
            for (int j = 0; j <= steps; ++j)
                for (int k = 0; k <= steps; ++k) {
                    Eigen::Vector3d p(-bound + 2 * bound * i / steps, -bound + 2 * bound * j / steps,
                                      -bound + 2 * bound * k / steps);
                    auto residual = [&](const Eigen::Vector3d& z) {
                        const Eigen::Matrix2d y = (Eigen::Matrix2d() << z[0], z[1], z[1], z[2]).finished();
                        const Eigen::Matrix2d d = y * y - b;
                        return Eigen::Vector3d(d(0, 0), d(0, 1), d(1, 1));
                    };
                    if (residual(p).norm() > 0.5 * B.norm())
                        continue;
                    for (int it = 0; it < 50; ++it) {
                        const Eigen::Vector3d r0 = residual(p);
                        Eigen::Matrix3d jac;
                        for (int c = 0; c < 3; ++c) {
                            Eigen::Vector3d dp = Eigen::Vector3d::Zero();
                            dp[c] = 1e-7;
                            jac.col(c) = (residual(p + dp) - r0) / 1e-7;
                        }
                        p -= jac.completeOrthogonalDecomposition().solve(r0);
                    }
                    const Eigen::Matrix2d y = (Eigen::Matrix2d() << p[0], p[1], p[1], p[2]).finished();
                    if (op_norm(Eigen::MatrixXd(y * y - b)) > 1e-6 || y.cwiseAbs().maxCoeff() > bound)
                        continue;
                    double nearest = std::numeric_limits<double>::infinity();
                    std::size_t which = 0;
                    for (std::size_t r = 0; r < e.roots.size(); ++r) {
                        const double d = op_norm(Eigen::MatrixXd(y - e.roots[r].matrix.matrix()));
                        if (d < nearest) {
                            nearest = d;
                            which = r;
                        }
                    }
                    EXPECT_LE(nearest, 1e-3);
                    hit.insert(which);
                }
        EXPECT_EQ(hit.size(), 4u);
    }
}

TEST(LocalSqrtBranch, Examples)
{
    EXPECT_THROW(local_sqrt_branch(SymmetricMatrix::diagonal({1, -1}), SymmetricMatrix::identity(2)), Error);
    const auto x = SymmetricMatrix::diagonal({2, -3});
    EXPECT_TRUE(local_sqrt_branch(x, x.squared()).matrix().isApprox(x.matrix(), 1e-12));
    const auto y = local_sqrt_branch(SymmetricMatrix::diagonal({1, -2}), SymmetricMatrix::diagonal({1.21, 3.61}));
    EXPECT_TRUE(y.matrix().isApprox(m2(1.1, 0, 0, -1.9), 1e-12));
}

TEST(LocalSqrtBranch, ReproducesXOnRandomInputs)
{
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_symmetric(rng, 3);
        const auto e = x.squared().spectrum().eigenvalues();
        if ((e[1] - e[0]) < 1e-3 || (e[2] - e[1]) < 1e-3 || x.spectrum().eigenvalues().cwiseAbs().minCoeff() < 1e-3)
            continue;
        EXPECT_LE(distance(local_sqrt_branch(x, x.squared()), x), 1e-9 * (1 + x.norm()));
    }
}

TEST(PosPart, Examples)
{
    EXPECT_TRUE(pos_part(SymmetricMatrix::diagonal({3, -2})).matrix().isApprox(m2(3, 0, 0, 0)));
    EXPECT_EQ(pos_part(SymmetricMatrix::zero(2)).matrix().norm(), 0.0);
    EXPECT_TRUE(pos_part(SymmetricMatrix(m2(0, 1, 1, 0))).matrix().isApprox(m2(0.5, 0.5, 0.5, 0.5), 1e-12));
}

TEST(PosPart, CommutesWithSquare)
{
    Rng rng(24);
    for (int trial = 0; trial < 500; ++trial) {
        const auto y = random_symmetric(rng, 2 + static_cast<int>(rng.below(4)), rng.uniform(0.1, 10));
        const Eigen::MatrixXd p = pos_part(y).matrix();
        const Eigen::MatrixXd y2 = y.squared().matrix();
        EXPECT_LE(op_norm(Eigen::MatrixXd(p * y2 - y2 * p)), 1e-10 * y.norm() * y.norm());
    }
}

TEST(RrZeroPerturb, Examples)
{
    EXPECT_TRUE(rr_zero_perturb(SymmetricMatrix::diagonal({1, 0}), 0.1).matrix().isApprox(m2(1, 0, 0, 0.025)));
    const auto inv = SymmetricMatrix::diagonal({1, -0.5});
    EXPECT_EQ(rr_zero_perturb(inv, 0.1).matrix(), inv.matrix());
    EXPECT_TRUE(rr_zero_perturb(SymmetricMatrix::zero(2), 0.1).matrix().isApprox(m2(0.025, 0, 0, 0.025)));
}

TEST(RrZeroPerturb, InvertibleAndClose)
{
    Rng rng(25);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_symmetric(rng, 3, 0.1);
        const double eps = rng.uniform(0.01, 0.5);
        const auto y = rr_zero_perturb(x, eps);
        EXPECT_LT(distance(x, y), eps);
        EXPECT_GE(y.spectrum().eigenvalues().cwiseAbs().minCoeff(), eps / 4 * (1 - 1e-12));
    }
}

TEST(Counterexample, SpotValues)
{
    const auto r6 = counterexample_report(0.6);
    EXPECT_NEAR(r6.min_distance, 1.6946, 1e-3);
    EXPECT_NEAR(r6.min_distance, counterexample_oracle(0.6), 1e-12);
    // The two mixed-sign roots tie; both differ from diag(1, -1) by the same amount.
    const auto& mixed = r6.roots[r6.argmin].signs;
    EXPECT_EQ(mixed[0] * mixed[1], -1);
    for (const auto& root : r6.roots)
        EXPECT_LE(root.form_error, 1e-9);

    // Near r = 0 the minimum approaches sqrt 2 from above, with slope 1/2.
    const auto r001 = counterexample_report(0.01);
    EXPECT_NEAR(r001.min_distance, counterexample_oracle(0.01), 1e-12);
    EXPECT_NEAR(r001.min_distance, std::sqrt(2.0) + 0.005, 1e-4);
    EXPECT_THROW(counterexample_report(0.0), Error);
}

TEST(Counterexample, SweepAboveOne)
{
    for (int i = 1; i <= 19; ++i) {
        const double r = 0.05 * i;
        const auto rep = counterexample_report(r);
        EXPECT_GE(rep.min_distance, 1.0 - 1e-9);
        EXPECT_NEAR(rep.min_distance, counterexample_oracle(r), 1e-12);
    }
}

TEST(SymmetryProbe, Examples)
{
    const SymmetricMatrix q(m2(0.5, 0.5, 0.5, 0.5));
    const auto p10 = symmetry_probe(q, 10);
    EXPECT_EQ(p10.roots.size(), 4u);
    EXPECT_NEAR(p10.min_distance, 1.4560, 1e-3);
    EXPECT_FALSE(p10.commutes);

    const auto diag = symmetry_probe(SymmetricMatrix::diagonal({1, 0}), 10);
    EXPECT_TRUE(diag.commutes);
    EXPECT_NEAR(diag.min_distance, std::sqrt(1.1) - 1, 1e-12);

    const auto zero = symmetry_probe(SymmetricMatrix::zero(2), 10);
    EXPECT_TRUE(zero.degenerate);
    EXPECT_TRUE(zero.symmetry_is_root);
    EXPECT_EQ(zero.min_distance, 0.0);
}

// In q's eigenbasis the roots are diag(+-sqrt(1 + 1/n), +-1); the oracle
// rotates them back and measures the distance to diag(1, -1) directly.
TEST(SymmetryProbe, MatchesRotatedDiagonalOracle)
{
    const SymmetricMatrix q(m2(0.5, 0.5, 0.5, 0.5));
    Eigen::Matrix2d u;
    u << 1, 1, 1, -1;
    u /= std::sqrt(2.0);
    const Eigen::Matrix2d s = Eigen::Vector2d(1, -1).asDiagonal();
    for (int n = 1; n <= 100; ++n) {
        double best = std::numeric_limits<double>::infinity();
        for (double a : {1.0, -1.0})
            for (double b : {1.0, -1.0}) {
                const Eigen::Matrix2d d = Eigen::Vector2d(a * std::sqrt(1 + 1.0 / n), b).asDiagonal();
                best = std::min(best, op_norm(Eigen::MatrixXd(u * d * u.transpose() - s)));
            }
        const auto rep = symmetry_probe(q, n);
        EXPECT_NEAR(rep.min_distance, best, 1e-12);
        EXPECT_GE(rep.min_distance, 1.0 - 1e-9);
    }
}

TEST(SolveSumOfSquares, DiagonalExample)
{
    const std::vector<Eigen::MatrixXd> x{m2(1, 0, 0, 0), m2(0, 0, 0, 1)};
    const auto r = solve_sum_of_squares(x, m2(1.21, 0, 0, 1.21));
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_LE(r.distance, 0.2 + 1e-8);
}

TEST(SolveSumOfSquares, AlreadyFeasible)
{
    const std::vector<Eigen::MatrixXd> x{m2(1, 0.2, 0.2, 0.5), m2(0.3, 0, 0, -0.4)};
    const Eigen::MatrixXd b = x[0] * x[0] + x[1] * x[1];
    const auto r = solve_sum_of_squares(x, b);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.distance, 0.0);
}

TEST(SolveSumOfSquares, SymmetryProbeInstance)
{
    const std::vector<Eigen::MatrixXd> x{m2(1, 0, 0, -1), m2(0, 0, 0, 0)};
    const auto r = solve_sum_of_squares(x, m2(1.05, 0.05, 0.05, 1.05), {.seed = 3});
    EXPECT_TRUE(r.converged) << r.message;
    EXPECT_LE(r.residual, 1e-8);
    const auto again = solve_sum_of_squares(x, m2(1.05, 0.05, 0.05, 1.05), {.seed = 3});
    EXPECT_EQ(r.distance, again.distance);
}
