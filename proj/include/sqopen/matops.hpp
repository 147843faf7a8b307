#pragma once

// Self-adjoint matrices: square roots by spectral sign patterns, the positive
// part, invertible perturbations, and the M_2 probes around diag(1, -1).
//
// The norm throughout is the operator norm (largest |eigenvalue| for
// self-adjoint matrices). Frobenius only appears inside the objective of
// solve_sum_of_squares.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqopen/error.hpp"
#include "sqopen/random.hpp"

namespace sqopen {

template <typename Scalar = double>
class SelfAdjoint {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

    static constexpr Real symmetry_tolerance = Real(1e-12);

    explicit SelfAdjoint(const Matrix& m)
    {
        require(m.rows() == m.cols() && m.rows() > 0, "self-adjoint matrix must be square and nonempty");
        const Real asym = (m - m.adjoint()).norm();
        require(asym <= symmetry_tolerance * m.norm(), "matrix is not self-adjoint");
        m_ = (m + m.adjoint()) / Scalar(2);
    }

    static SelfAdjoint diagonal(std::initializer_list<Real> entries)
    {
        RealVector d(static_cast<Eigen::Index>(entries.size()));
        Eigen::Index i = 0;
        for (Real e : entries)
            d[i++] = e;
        return SelfAdjoint(Matrix(d.template cast<Scalar>().asDiagonal()));
    }
    static SelfAdjoint identity(Eigen::Index k) { return SelfAdjoint(Matrix::Identity(k, k)); }
    static SelfAdjoint zero(Eigen::Index k) { return SelfAdjoint(Matrix::Zero(k, k)); }

    const Matrix& matrix() const { return m_; }
    Eigen::Index size() const { return m_.rows(); }

    /// Ascending eigenvalues with orthonormal eigenvectors in the columns.
    Eigen::SelfAdjointEigenSolver<Matrix> spectrum() const { return Eigen::SelfAdjointEigenSolver<Matrix>(m_); }

    Real norm() const { return spectrum().eigenvalues().cwiseAbs().maxCoeff(); }

    SelfAdjoint operator+(const SelfAdjoint& o) const { return SelfAdjoint(Matrix(m_ + o.m_)); }
    SelfAdjoint operator-(const SelfAdjoint& o) const { return SelfAdjoint(Matrix(m_ - o.m_)); }
    SelfAdjoint operator*(Real c) const { return SelfAdjoint(Matrix(m_ * Scalar(c))); }
    SelfAdjoint squared() const { return SelfAdjoint(Matrix(m_ * m_)); }

private:
    Matrix m_;
};

using SymmetricMatrix = SelfAdjoint<double>;
using HermitianMatrix = SelfAdjoint<std::complex<double>>;

/// Operator norm of a self-adjoint matrix given as a plain matrix.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real op_norm(const Eigen::MatrixBase<Derived>& m)
{
    using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const M sym = (m + m.adjoint()) / typename Derived::Scalar(2);
    return Eigen::SelfAdjointEigenSolver<M>(sym, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Scalar>
typename SelfAdjoint<Scalar>::Real distance(const SelfAdjoint<Scalar>& a, const SelfAdjoint<Scalar>& b)
{
    return (a - b).norm();
}

/// Spectral functional calculus: V diag(fn(lambda)) V*.
template <typename Scalar, typename Fn>
SelfAdjoint<Scalar> apply_spectral(const SelfAdjoint<Scalar>& x, Fn&& fn)
{
    using Matrix = typename SelfAdjoint<Scalar>::Matrix;
    const auto es = x.spectrum();
    auto values = es.eigenvalues();
    for (Eigen::Index i = 0; i < values.size(); ++i)
        values[i] = fn(values[i]);
    const Matrix& v = es.eigenvectors();
    return SelfAdjoint<Scalar>(Matrix(v * values.template cast<Scalar>().asDiagonal() * v.adjoint()));
}

// ---------------------------------------------------------------------------
// Square roots

template <typename Scalar>
struct SqrtRoot {
    /// One sign per distinct eigenvalue, ascending eigenvalue order.
    std::vector<int> signs{};
    SelfAdjoint<Scalar> matrix;
};

template <typename Scalar>
struct SqrtEnumeration {
    using Matrix = typename SelfAdjoint<Scalar>::Matrix;

    SelfAdjoint<Scalar> base;
    /// Distinct eigenvalues (ascending), their multiplicities and projections.
    std::vector<double> eigenvalues{};
    std::vector<int> multiplicities{};
    std::vector<Matrix> projections{};
    /// All 2^d roots; only the positive semidefinite one when degenerate.
    std::vector<SqrtRoot<Scalar>> roots{};
    bool degenerate = false;
    std::string warning{};

    /// The functional-calculus root (all signs +).
    const SelfAdjoint<Scalar>& psd_root() const { return roots.front().matrix; }
};

enum class DegeneratePolicy { Refuse, PsdRootOnly };

/// Every self-adjoint square root of a positive definite B with simple
/// spectrum: sum_j sigma_j sqrt(mu_j) P_j over sigma in {+-1}^d. Pattern p
/// assigns sign - to eigenvalue j when bit j of p is set, so roots[0] is PSD.
template <typename Scalar>
SqrtEnumeration<Scalar> enumerate_sqrts(const SelfAdjoint<Scalar>& B,
                                        DegeneratePolicy policy = DegeneratePolicy::Refuse)
{
    using Matrix = typename SelfAdjoint<Scalar>::Matrix;
    const auto es = B.spectrum();
    const auto& lambda = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    const double norm = lambda.cwiseAbs().maxCoeff();
    require(lambda.minCoeff() > 0.0, "matrix is not positive definite");
    const double gap_tol = 1e-8 * norm;

    SqrtEnumeration<Scalar> out{.base = B};
    std::vector<std::vector<Eigen::Index>> clusters;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (i > 0 && lambda[i] - lambda[i - 1] < gap_tol)
            clusters.back().push_back(i);
        else
            clusters.push_back({i});
    }
    for (const auto& c : clusters) {
        double mean = 0.0;
        Matrix p = Matrix::Zero(B.size(), B.size());
        for (Eigen::Index i : c) {
            mean += lambda[i];
            p += vecs.col(i) * vecs.col(i).adjoint();
        }
        out.eigenvalues.push_back(mean / static_cast<double>(c.size()));
        out.multiplicities.push_back(static_cast<int>(c.size()));
        out.projections.push_back(std::move(p));
        out.degenerate |= c.size() > 1;
    }

    auto build = [&](std::uint64_t pattern) {
        SqrtRoot<Scalar> root{.matrix = SelfAdjoint<Scalar>::zero(B.size())};
        Matrix r = Matrix::Zero(B.size(), B.size());
        for (std::size_t j = 0; j < out.eigenvalues.size(); ++j) {
            const int sign = ((pattern >> j) & 1u) ? -1 : 1;
            root.signs.push_back(sign);
            r += Scalar(sign * std::sqrt(out.eigenvalues[j])) * out.projections[j];
        }
        root.matrix = SelfAdjoint<Scalar>(r);
        return root;
    };

    if (out.degenerate) {
        if (policy == DegeneratePolicy::Refuse)
            throw Error(ErrorCode::DegenerateSpectrum,
                        "repeated eigenvalue: the square roots form a manifold and are not enumerated");
        out.warning = "degenerate spectrum; only the positive semidefinite root is listed";
        out.roots.push_back(build(0));
        return out;
    }
    require(out.eigenvalues.size() < 63, "too many eigenvalues to enumerate");
    const std::uint64_t count = std::uint64_t{1} << out.eigenvalues.size();
    for (std::uint64_t p = 0; p < count; ++p)
        out.roots.push_back(build(p));
    return out;
}

/// The continuous square-root branch through x: for B near x^2, the root of B
/// whose sign pattern matches the eigenvalue signs of x. Needs x^2 to have a
/// simple spectrum and ||B - x^2|| below half its smallest eigenvalue gap.
template <typename Scalar>
SelfAdjoint<Scalar> local_sqrt_branch(const SelfAdjoint<Scalar>& x, const SelfAdjoint<Scalar>& B)
{
    using Matrix = typename SelfAdjoint<Scalar>::Matrix;
    require(x.size() == B.size(), "size mismatch");
    const SelfAdjoint<Scalar> x2 = x.squared();
    const auto es_x2 = x2.spectrum();
    const auto& mu = es_x2.eigenvalues();
    const double gap_tol = 1e-8 * mu.cwiseAbs().maxCoeff();
    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < mu.size(); ++i)
        min_gap = std::min(min_gap, mu[i] - mu[i - 1]);
    require(min_gap > gap_tol && min_gap > 0.0, "x^2 has a repeated eigenvalue; no continuous branch through x");
    require(distance(B, x2) < 0.5 * min_gap, "B lies outside the matching radius around x^2");

    const Matrix& u = es_x2.eigenvectors();
    const auto es_b = B.spectrum();
    const auto& nu = es_b.eigenvalues();
    const Matrix& q = es_b.eigenvectors();
    Matrix root = Matrix::Zero(B.size(), B.size());
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
        // Weyl: the j-th eigenvalue of B stays within half a gap of mu_j.
        const double rayleigh = std::real((u.col(j).adjoint() * x.matrix() * u.col(j))(0, 0));
        const double sign = rayleigh < 0.0 ? -1.0 : 1.0;
        require(nu[j] >= -1e-12 * nu.cwiseAbs().maxCoeff(), "B is not positive semidefinite");
        root += Scalar(sign * std::sqrt(std::max(nu[j], 0.0))) * (q.col(j) * q.col(j).adjoint());
    }
    return SelfAdjoint<Scalar>(root);
}

/// phi(x) for phi(t) = max{0, t}.
template <typename Scalar>
SelfAdjoint<Scalar> pos_part(const SelfAdjoint<Scalar>& x)
{
    return apply_spectral(x, [](double t) { return std::max(0.0, t); });
}

/// Invertible y with ||y - x|| < eps: eigenvalues in [-eps/4, eps/4] move to
/// sign(lambda) eps/4 (sign(0) = +1); x is returned untouched when none do.
template <typename Scalar>
SelfAdjoint<Scalar> rr_zero_perturb(const SelfAdjoint<Scalar>& x, double eps)
{
    require(eps > 0.0, "eps must be positive");
    const double floor = eps / 4.0;
    const auto lambda = x.spectrum().eigenvalues();
    if (lambda.cwiseAbs().minCoeff() >= floor)
        return x;
    return apply_spectral(x, [floor](double t) {
        if (std::abs(t) >= floor)
            return t;
        return t < 0.0 ? -floor : floor;
    });
}

// ---------------------------------------------------------------------------
// M_2 probes

struct CounterexampleRoot {
    std::vector<int> signs;
    Eigen::Matrix2d root;
    double a = 0.0;
    double s = 0.0;
    /// max of |R00 - R11|, |R01 - R10|, |a^2 + s^2 - 1|, |2as - r|
    double form_error = 0.0;
    double distance = 0.0;
};

struct CounterexampleReport {
    double r = 0.0;
    std::vector<CounterexampleRoot> roots;
    double min_distance = 0.0;
    std::size_t argmin = 0;
};

/// Roots of (1 r; r 1), their (a s; s a) form and operator distances to
/// diag(1, -1).
inline CounterexampleReport counterexample_report(double r)
{
    require(std::abs(r) > 0.0 && std::abs(r) < 1.0, "need 0 < |r| < 1");
    Eigen::Matrix2d b;
    b << 1.0, r, r, 1.0;
    const auto roots = enumerate_sqrts(SymmetricMatrix(b));
    const SymmetricMatrix s = SymmetricMatrix::diagonal({1.0, -1.0});

    CounterexampleReport out;
    out.r = r;
    out.min_distance = std::numeric_limits<double>::infinity();
    for (const auto& root : roots.roots) {
        CounterexampleRoot row;
        row.signs = root.signs;
        row.root = root.matrix.matrix();
        row.a = 0.5 * (row.root(0, 0) + row.root(1, 1));
        row.s = 0.5 * (row.root(0, 1) + row.root(1, 0));
        row.form_error = std::max({std::abs(row.root(0, 0) - row.root(1, 1)), std::abs(row.root(0, 1) - row.root(1, 0)),
                                   std::abs(row.a * row.a + row.s * row.s - 1.0), std::abs(2.0 * row.a * row.s - r)});
        row.distance = distance(root.matrix, s);
        if (row.distance < out.min_distance) {
            out.min_distance = row.distance;
            out.argmin = out.roots.size();
        }
        out.roots.push_back(std::move(row));
    }
    return out;
}

struct SymmetryProbeReport {
    int n = 0;
    std::vector<Eigen::MatrixXd> roots;
    std::vector<double> distances;
    double min_distance = 0.0;
    bool degenerate = false;
    /// q commutes with s (no obstruction expected).
    bool commutes = false;
    /// s itself squares to 1 + q/n and was added to the candidates.
    bool symmetry_is_root = false;
};

/// Self-adjoint roots of 1 + q/n for a projection q and their distances to
/// the symmetry s (default diag(1, -1)).
inline SymmetryProbeReport symmetry_probe(const SymmetricMatrix& q, int n)
{
    require(n >= 1, "n must be positive");
    require(q.size() == 2, "symmetry probe works in M_2");
    const Eigen::MatrixXd& qm = q.matrix();
    require((qm * qm - qm).norm() <= 1e-10, "q is not a projection");
    const SymmetricMatrix s = SymmetricMatrix::diagonal({1.0, -1.0});

    SymmetryProbeReport out;
    out.n = n;
    out.commutes = (qm * s.matrix() - s.matrix() * qm).norm() <= 1e-10;
    const SymmetricMatrix b = SymmetricMatrix::identity(2) + q * (1.0 / n);
    const auto roots = enumerate_sqrts(b, DegeneratePolicy::PsdRootOnly);
    out.degenerate = roots.degenerate;
    for (const auto& root : roots.roots)
        out.roots.push_back(root.matrix.matrix());
    if ((s.matrix() * s.matrix() - b.matrix()).norm() <= 1e-9 * b.norm()) {
        out.symmetry_is_root = true;
        out.roots.push_back(s.matrix());
    }
    out.min_distance = std::numeric_limits<double>::infinity();
    for (const auto& root : out.roots) {
        out.distances.push_back(op_norm(root - s.matrix()));
        out.min_distance = std::min(out.min_distance, out.distances.back());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exploratory solver for sum y_i^2 = b in M_k

struct SosOptions {
    int max_iter = 200;
    double tol = 1e-8;
    std::uint64_t seed = 0;
};

struct SosResult {
    bool converged = false;
    /// Best tuple found (feasible when converged).
    std::vector<Eigen::MatrixXd> y;
    /// ||sum y_i^2 - b|| in operator norm.
    double residual = 0.0;
    /// sum_i ||y_i - x_i|| in operator norm.
    double distance = 0.0;
    int iterations = 0;
    std::string message;
};

namespace detail {

class SosProblem {
public:
    SosProblem(const std::vector<Eigen::MatrixXd>& x, const Eigen::MatrixXd& b) : x_(x), b_(b), k_(b.rows())
    {
        for (Eigen::Index p = 0; p < k_; ++p)
            for (Eigen::Index q = p; q < k_; ++q)
                entries_.emplace_back(p, q);
        per_matrix_ = static_cast<Eigen::Index>(entries_.size());
    }

    Eigen::Index parameter_count() const { return per_matrix_ * static_cast<Eigen::Index>(x_.size()); }
    Eigen::Index entry_count() const { return per_matrix_; }

    Eigen::VectorXd pack(const std::vector<Eigen::MatrixXd>& y) const
    {
        Eigen::VectorXd z(parameter_count());
        for (std::size_t i = 0; i < y.size(); ++i)
            for (Eigen::Index e = 0; e < per_matrix_; ++e)
                z[static_cast<Eigen::Index>(i) * per_matrix_ + e] = y[i](entries_[e].first, entries_[e].second);
        return z;
    }

    std::vector<Eigen::MatrixXd> unpack(const Eigen::VectorXd& z) const
    {
        std::vector<Eigen::MatrixXd> y(x_.size(), Eigen::MatrixXd::Zero(k_, k_));
        for (std::size_t i = 0; i < y.size(); ++i)
            for (Eigen::Index e = 0; e < per_matrix_; ++e) {
                const auto [p, q] = entries_[e];
                y[i](p, q) = y[i](q, p) = z[static_cast<Eigen::Index>(i) * per_matrix_ + e];
            }
        return y;
    }

    /// Upper-triangle entries weighted so the Euclidean norm is Frobenius.
    Eigen::VectorXd weighted(const Eigen::MatrixXd& m) const
    {
        Eigen::VectorXd v(per_matrix_);
        for (Eigen::Index e = 0; e < per_matrix_; ++e) {
            const auto [p, q] = entries_[e];
            v[e] = p == q ? m(p, q) : std::numbers::sqrt2 * m(p, q);
        }
        return v;
    }

    Eigen::MatrixXd constraint_matrix(const std::vector<Eigen::MatrixXd>& y) const
    {
        Eigen::MatrixXd c = -b_;
        for (const auto& yi : y)
            c += yi * yi;
        return c;
    }

    Eigen::VectorXd constraint(const std::vector<Eigen::MatrixXd>& y) const { return weighted(constraint_matrix(y)); }

    Eigen::MatrixXd constraint_jacobian(const std::vector<Eigen::MatrixXd>& y) const
    {
        Eigen::MatrixXd jac(per_matrix_, parameter_count());
        for (std::size_t i = 0; i < y.size(); ++i)
            for (Eigen::Index e = 0; e < per_matrix_; ++e) {
                const auto [p, q] = entries_[e];
                Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(k_, k_);
                unit(p, q) = unit(q, p) = 1.0;
                jac.col(static_cast<Eigen::Index>(i) * per_matrix_ + e) = weighted(y[i] * unit + unit * y[i]);
            }
        return jac;
    }

    Eigen::VectorXd distance_residual(const Eigen::VectorXd& z) const
    {
        const auto y = unpack(z);
        Eigen::VectorXd r(parameter_count());
        for (std::size_t i = 0; i < y.size(); ++i)
            r.segment(static_cast<Eigen::Index>(i) * per_matrix_, per_matrix_) = weighted(y[i] - x_[i]);
        return r;
    }

    /// d(distance_residual)/dz is diagonal with the Frobenius weights.
    Eigen::VectorXd distance_weights() const
    {
        Eigen::VectorXd w(parameter_count());
        for (std::size_t i = 0; i < x_.size(); ++i)
            for (Eigen::Index e = 0; e < per_matrix_; ++e)
                w[static_cast<Eigen::Index>(i) * per_matrix_ + e] =
                    entries_[e].first == entries_[e].second ? 1.0 : std::numbers::sqrt2;
        return w;
    }

private:
    std::vector<Eigen::MatrixXd> x_;
    Eigen::MatrixXd b_;
    Eigen::Index k_;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> entries_;
    Eigen::Index per_matrix_ = 0;
};

} // namespace detail

/// Searches for y near x with sum y_i^2 = b: Levenberg-Marquardt on
/// ||y - x||_F^2 + mu ||sum y_i^2 - b||_F^2 for increasing mu, then
/// minimum-norm Gauss-Newton steps on the constraint alone. Exploratory: the
/// returned distance is whatever the search reached, not a certified optimum.
inline SosResult solve_sum_of_squares(const std::vector<Eigen::MatrixXd>& x, const Eigen::MatrixXd& b,
                                      const SosOptions& opts = {})
{
    require(!x.empty(), "need at least one matrix");
    const Eigen::Index k = b.rows();
    for (const auto& xi : x) {
        require(xi.rows() == k && xi.cols() == k, "matrices must share one size");
        SymmetricMatrix check(xi);
    }
    const SymmetricMatrix b_sym(b);
    require(b_sym.spectrum().eigenvalues().minCoeff() > 0.0, "b is not positive definite");

    detail::SosProblem problem(x, b_sym.matrix());
    auto finish = [&](const Eigen::VectorXd& z, int iterations, bool converged_hint, std::string message) {
        SosResult out;
        out.y = problem.unpack(z);
        out.residual = op_norm(problem.constraint_matrix(out.y));
        for (std::size_t i = 0; i < x.size(); ++i)
            out.distance += op_norm(out.y[i] - x[i]);
        out.iterations = iterations;
        out.converged = converged_hint && out.residual <= opts.tol;
        out.message = out.converged ? std::move(message) : "residual above tolerance";
        return out;
    };

    Eigen::VectorXd z = problem.pack(x);
    if (op_norm(problem.constraint_matrix(x)) <= opts.tol)
        return finish(z, 0, true, "input already feasible");

    Rng rng(opts.seed);
    for (Eigen::Index i = 0; i < z.size(); ++i)
        z[i] += rng.uniform(-1e-3, 1e-3);

    const Eigen::VectorXd weights = problem.distance_weights();
    int iterations = 0;
    for (double mu = 1.0; mu <= 1e8; mu *= 10.0) {
        const double sqrt_mu = std::sqrt(mu);
        auto cost = [&](const Eigen::VectorXd& zz) {
            return problem.distance_residual(zz).squaredNorm() + mu * problem.constraint(problem.unpack(zz)).squaredNorm();
        };
        double damping = 1e-3;
        double current = cost(z);
        for (int it = 0; it < opts.max_iter && iterations < 50 * opts.max_iter; ++it, ++iterations) {
            const auto y = problem.unpack(z);
            const Eigen::Index p = problem.parameter_count();
            Eigen::MatrixXd jac(p + problem.entry_count(), p);
            jac.topRows(p) = weights.asDiagonal();
            jac.bottomRows(problem.entry_count()) = sqrt_mu * problem.constraint_jacobian(y);
            Eigen::VectorXd res(p + problem.entry_count());
            res.head(p) = problem.distance_residual(z);
            res.tail(problem.entry_count()) = sqrt_mu * problem.constraint(y);
            const Eigen::MatrixXd normal = jac.transpose() * jac;
            const Eigen::VectorXd grad = jac.transpose() * res;
            bool accepted = false;
            for (int tries = 0; tries < 20 && !accepted; ++tries) {
                Eigen::MatrixXd damped = normal;
                damped.diagonal().array() += damping * (1.0 + normal.diagonal().array());
                const Eigen::VectorXd step = damped.ldlt().solve(-grad);
                const double trial = cost(z + step);
                if (trial < current) {
                    z += step;
                    accepted = true;
                    damping = std::max(damping / 3.0, 1e-12);
                    if (current - trial <= 1e-15 * (1.0 + current)) {
                        current = trial;
                        break;
                    }
                    current = trial;
                } else {
                    damping *= 4.0;
                }
            }
            if (!accepted || grad.norm() <= 1e-14)
                break;
        }
    }

    // Polish onto the constraint surface with minimum-norm Newton steps.
    for (int it = 0; it < opts.max_iter; ++it, ++iterations) {
        const auto y = problem.unpack(z);
        const Eigen::VectorXd c = problem.constraint(y);
        if (op_norm(problem.constraint_matrix(y)) <= 1e-3 * opts.tol)
            break;
        const Eigen::MatrixXd jac = problem.constraint_jacobian(y);
        z -= jac.completeOrthogonalDecomposition().solve(c);
    }
    return finish(z, iterations, true, "converged");
}

} // namespace sqopen
