#pragma once

// Extension of sphere-valued vertex maps from an interface S over the inner
// subcomplex A, with per-simplex certificates that the piecewise-linear
// interpolant of the constructed vector field never passes through the
// origin. Radial projection of that interpolant is then a continuous map
// A -> S^n that agrees with the boundary data on S.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sqopen/error.hpp"
#include "sqopen/random.hpp"
#include "sqopen/space.hpp"

namespace sqopen {

/// Vertex values on a radius-r sphere in R^{n+1}.
class SphereMapData {
public:
    static constexpr double norm_tolerance = 1e-12;

    SphereMapData() = default;

    /// `ambient_dim` is inferred from the values when left at -1; pass it
    /// explicitly for an empty map that still targets a known sphere.
    SphereMapData(double radius, std::vector<int> vertices, std::vector<Eigen::VectorXd> values,
                  int ambient_dim = -1)
        : radius_(radius), ambient_dim_(std::max(ambient_dim, 0)), vertices_(std::move(vertices)),
          values_(std::move(values))
    {
        require(radius_ > 0.0 && std::isfinite(radius_), "sphere radius must be positive");
        require(vertices_.size() == values_.size(), "vertex/value count mismatch");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (i == 0 && ambient_dim < 0)
                ambient_dim_ = static_cast<int>(values_[i].size());
            require(values_[i].size() == ambient_dim_, "sphere values have inconsistent dimension");
            require(std::abs(values_[i].norm() - radius_) <= norm_tolerance * radius_,
                    "vertex " + std::to_string(vertices_[i]) + " is not on the radius-r sphere");
            require(lookup_.emplace(vertices_[i], i).second, "duplicate vertex in sphere map");
        }
    }

    double radius() const { return radius_; }
    /// Dimension of the ambient space (n+1 for a map into S^n); 0 when empty.
    int ambient_dim() const { return ambient_dim_; }
    std::size_t size() const { return vertices_.size(); }
    const std::vector<int>& vertices() const { return vertices_; }
    const std::vector<Eigen::VectorXd>& values() const { return values_; }

    bool contains(int v) const { return lookup_.count(v) != 0; }
    const Eigen::VectorXd& value(int v) const
    {
        auto it = lookup_.find(v);
        require(it != lookup_.end(), "vertex " + std::to_string(v) + " has no sphere value");
        return values_[it->second];
    }

private:
    double radius_ = 1.0;
    int ambient_dim_ = 0;
    std::vector<int> vertices_;
    std::vector<Eigen::VectorXd> values_;
    std::map<int, std::size_t> lookup_;
};

/// Separating half-space for one simplex: <direction, value(v)> >= margin > 0
/// for every vertex v of the simplex.
struct SimplexWitness {
    Simplex simplex;
    Eigen::VectorXd direction;
    double margin = 0.0;
};

struct OriginAvoidanceCertificate {
    std::vector<SimplexWitness> witnesses;
};

struct OriginViolation {
    std::size_t simplex_index = 0;
    Simplex simplex;
};

using CertifyResult = std::variant<OriginAvoidanceCertificate, OriginViolation>;

namespace detail {

// Minimum-norm point of conv{points} by enumerating faces; exact up to the
// conditioning of the small KKT systems. Meant for at most 4 points.
inline Eigen::VectorXd min_norm_point_exact(const std::vector<Eigen::VectorXd>& points)
{
    const int k = static_cast<int>(points.size());
    Eigen::VectorXd best = points[0];
    double best_norm = best.squaredNorm();
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i))
                idx.push_back(i);
        const int s = static_cast<int>(idx.size());
        Eigen::VectorXd candidate;
        if (s == 1) {
            candidate = points[idx[0]];
        } else {
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
            for (int a = 0; a < s; ++a) {
                for (int b = 0; b < s; ++b)
                    kkt(a, b) = points[idx[a]].dot(points[idx[b]]);
                kkt(a, s) = 1.0;
                kkt(s, a) = 1.0;
            }
            rhs[s] = 1.0;
            const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
            const Eigen::VectorXd lambda = sol.head(s);
            if ((lambda.array() < -1e-12).any() || std::abs(lambda.sum() - 1.0) > 1e-9)
                continue;
            candidate = Eigen::VectorXd::Zero(points[0].size());
            for (int a = 0; a < s; ++a)
                candidate += std::max(lambda[a], 0.0) * points[idx[a]];
        }
        const double n2 = candidate.squaredNorm();
        if (n2 < best_norm) {
            best_norm = n2;
            best = candidate;
        }
    }
    return best;
}

// Euclidean projection onto the probability simplex.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& y)
{
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0)
            theta = t;
    }
    return (y.array() - theta).max(0.0).matrix();
}

// Projected gradient descent on barycentric weights.
inline Eigen::VectorXd min_norm_point_iterative(const std::vector<Eigen::VectorXd>& points, int iterations = 20000)
{
    const int k = static_cast<int>(points.size());
    Eigen::MatrixXd P(points[0].size(), k);
    for (int i = 0; i < k; ++i)
        P.col(i) = points[i];
    const Eigen::MatrixXd gram = P.transpose() * P;
    const double lipschitz = std::max(gram.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff(), 1e-300);
    Eigen::VectorXd lambda = Eigen::VectorXd::Constant(k, 1.0 / k);
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd next = project_to_simplex(lambda - (gram * lambda) / lipschitz);
        const double change = (next - lambda).lpNorm<Eigen::Infinity>();
        lambda = next;
        if (change < 1e-15)
            break;
    }
    return P * lambda;
}

} // namespace detail

/// Witness that conv{points} misses the origin, or nullopt when it does not.
/// Closest-point direction; exact face enumeration for up to 4 points.
inline std::optional<SimplexWitness> separate_from_origin(const std::vector<Eigen::VectorXd>& points)
{
    require(!points.empty(), "no points to separate");
    const Eigen::VectorXd p =
        points.size() <= 4 ? detail::min_norm_point_exact(points) : detail::min_norm_point_iterative(points);
    double scale = 0.0;
    for (const auto& q : points)
        scale = std::max(scale, q.norm());
    const double pn = p.norm();
    if (!(pn > 1e-14 * scale))
        return std::nullopt;
    SimplexWitness w;
    w.direction = p / pn;
    w.margin = std::numeric_limits<double>::infinity();
    for (const auto& q : points)
        w.margin = std::min(w.margin, w.direction.dot(q));
    if (!(w.margin > 1e-14 * scale))
        return std::nullopt;
    return w;
}

/// Certifies that the piecewise-linear image of every listed simplex misses
/// the origin. `value_of(v)` yields the vector at vertex v.
template <typename ValueOf>
CertifyResult certify_no_origin(std::span<const Simplex> simplices, ValueOf&& value_of)
{
    OriginAvoidanceCertificate cert;
    for (std::size_t i = 0; i < simplices.size(); ++i) {
        std::vector<Eigen::VectorXd> points;
        for (int v : simplices[i])
            points.push_back(value_of(v));
        auto witness = separate_from_origin(points);
        if (!witness)
            return OriginViolation{i, simplices[i]};
        witness->simplex = simplices[i];
        cert.witnesses.push_back(std::move(*witness));
    }
    return cert;
}

inline CertifyResult certify_no_origin(std::span<const Simplex> simplices, const std::vector<Eigen::VectorXd>& values)
{
    return certify_no_origin(simplices, [&](int v) -> const Eigen::VectorXd& { return values.at(v); });
}

/// Re-checks a certificate by direct dot products against `value_of`.
template <typename ValueOf>
bool verify_certificate(const OriginAvoidanceCertificate& cert, ValueOf&& value_of)
{
    for (const auto& w : cert.witnesses) {
        if (!(w.margin > 0.0) || std::abs(w.direction.norm() - 1.0) > 1e-12)
            return false;
        for (int v : w.simplex)
            if (!(w.direction.dot(value_of(v)) >= w.margin))
                return false;
    }
    return true;
}

/// Largest angle between the values at two vertices of a common simplex.
template <typename ValueOf>
double max_angular_diameter(std::span<const Simplex> simplices, ValueOf&& value_of)
{
    double worst = 0.0;
    for (const auto& s : simplices)
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a + 1; b < s.size(); ++b) {
                const Eigen::VectorXd p = value_of(s[a]);
                const Eigen::VectorXd q = value_of(s[b]);
                const double c = std::clamp(p.dot(q) / (p.norm() * q.norm()), -1.0, 1.0);
                worst = std::max(worst, std::acos(c));
            }
    return worst;
}

struct ExtensionOptions {
    int max_retries = 40;
    double jitter_scale = 1e-3;
};

struct SphereExtension {
    /// Sphere values on every vertex of A.
    SphereMapData map;
    /// Certificate for `field`, the vector field before radial normalization.
    OriginAvoidanceCertificate certificate;
    /// Pre-normalization vectors, aligned with map.vertices().
    std::vector<Eigen::VectorXd> field;
    int jitter_rounds = 0;

    const Eigen::VectorXd& field_at(int v) const
    {
        const auto& vs = map.vertices();
        auto it = std::lower_bound(vs.begin(), vs.end(), v);
        require(it != vs.end() && *it == v, "vertex outside the extension domain");
        return field[static_cast<std::size_t>(it - vs.begin())];
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Graph-Laplacian harmonic extension of boundary vectors over the inner
// subcomplex. Components without boundary vertices get the constant r e_1.
inline void harmonic_fill(const RegionSplit& split, const SphereMapData& boundary, int dim, double radius,
                          std::vector<Eigen::VectorXd>& field)
{
    const std::size_t n = split.complex->vertex_count();
    std::set<std::pair<int, int>> edges;
    for (const auto& s : split.inner_simplices)
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a + 1; b < s.size(); ++b)
                edges.emplace(s[a], s[b]);

    UnionFind uf(n);
    for (const auto& [a, b] : edges)
        uf.unite(a, b);
    std::vector<char> component_has_boundary(n, 0);
    for (int v : split.interface)
        component_has_boundary[uf.find(v)] = 1;

    std::vector<int> unknown_index(n, -1);
    std::vector<int> unknowns;
    for (int v : split.inner) {
        if (split.is_interface[v])
            continue;
        if (component_has_boundary[uf.find(v)]) {
            unknown_index[v] = static_cast<int>(unknowns.size());
            unknowns.push_back(v);
        } else {
            field[v] = Eigen::VectorXd::Zero(dim);
            field[v][0] = radius;
        }
    }
    if (unknowns.empty())
        return;

    const auto u = static_cast<Eigen::Index>(unknowns.size());
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(u, dim);
    std::vector<double> degree(u, 0.0);
    for (const auto& [a, b] : edges) {
        for (auto [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
            const int ip = unknown_index[p];
            if (ip < 0)
                continue;
            degree[ip] += 1.0;
            const int iq = unknown_index[q];
            if (iq >= 0)
                triplets.emplace_back(ip, iq, -1.0);
            else
                rhs.row(ip) += boundary.value(q).transpose();
        }
    }
    for (Eigen::Index i = 0; i < u; ++i)
        triplets.emplace_back(i, i, degree[i]);
    Eigen::SparseMatrix<double> laplacian(u, u);
    laplacian.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(laplacian);
    require(solver.info() == Eigen::Success, "harmonic extension system is singular");
    const Eigen::MatrixXd solution = solver.solve(rhs);
    for (Eigen::Index i = 0; i < u; ++i)
        field[unknowns[i]] = solution.row(i).transpose();
}

} // namespace detail

/// Extends `boundary` (values on the interface S, radius r) to a sphere map
/// on all of A. Interface values are copied bit for bit; every other vertex
/// is normalized to radius r from a certified origin-avoiding field.
inline SphereExtension extend_to_sphere(const RegionSplit& split, const SphereMapData& boundary, double radius,
                                        std::uint64_t seed, const ExtensionOptions& options = {})
{
    require(radius > 0.0, "radius must be positive");
    require(std::abs(boundary.radius() - radius) <= SphereMapData::norm_tolerance * radius,
            "boundary data lives on a different sphere");
    for (int v : split.interface)
        require(boundary.contains(v), "interface vertex " + std::to_string(v) + " has no boundary value");
    for (int v : boundary.vertices())
        require(v >= 0 && static_cast<std::size_t>(v) < split.is_interface.size() && split.is_interface[v],
                "boundary value given off the interface at vertex " + std::to_string(v));

    const int dim = boundary.ambient_dim();
    require(dim > 0, "boundary data does not name the target sphere dimension");
    SphereExtension out;
    if (split.inner.empty()) {
        out.map = SphereMapData(radius, {}, {}, dim);
        return out;
    }
    const int sphere_dim = dim - 1;
    if (split.inner_dimension() > sphere_dim)
        throw Error(ErrorCode::DimensionObstruction,
                    "inner subcomplex has dimension " + std::to_string(split.inner_dimension()) +
                        " > sphere dimension " + std::to_string(sphere_dim) + "; extension may be obstructed");

    // Interface simplices must already avoid the origin.
    {
        std::vector<Simplex> on_interface;
        for (const auto& s : split.inner_simplices) {
            Simplex part;
            for (int v : s)
                if (split.is_interface[v])
                    part.push_back(v);
            if (!part.empty())
                on_interface.push_back(std::move(part));
        }
        on_interface = SimplicialComplex::keep_maximal(std::move(on_interface));
        auto result = certify_no_origin(on_interface, [&](int v) { return boundary.value(v); });
        if (auto* bad = std::get_if<OriginViolation>(&result)) {
            std::string verts;
            for (int v : bad->simplex)
                verts += " " + std::to_string(v);
            throw Error(ErrorCode::BoundaryHullViolation,
                        "interface simplex {" + verts + " } surrounds the origin; subdivide", bad->simplex_index);
        }
    }

    const std::size_t n = split.complex->vertex_count();
    std::vector<Eigen::VectorXd> field(n);
    for (int v : split.interface)
        field[v] = boundary.value(v);
    detail::harmonic_fill(split, boundary, dim, radius, field);

    Rng rng(seed);
    const std::span<const Simplex> simplices(split.inner_simplices);
    auto value_of = [&](int v) -> const Eigen::VectorXd& { return field[v]; };
    for (int round = 0;; ++round) {
        std::vector<std::size_t> violating;
        for (std::size_t i = 0; i < simplices.size(); ++i) {
            std::vector<Eigen::VectorXd> points;
            for (int v : simplices[i])
                points.push_back(field[v]);
            if (!separate_from_origin(points))
                violating.push_back(i);
        }
        if (violating.empty()) {
            out.jitter_rounds = round;
            break;
        }
        if (round == options.max_retries)
            throw Error(ErrorCode::ExhaustedRetries,
                        "jitter failed " + std::to_string(options.max_retries) + " times; simplex " +
                            std::to_string(violating.front()) + " still surrounds the origin",
                        violating.front());
        const double eta = radius * options.jitter_scale * std::ldexp(1.0, round);
        for (std::size_t i : violating)
            for (int v : simplices[i]) {
                if (split.is_interface[v])
                    continue;
                for (int d = 0; d < dim; ++d)
                    field[v][d] += rng.uniform(-eta, eta);
            }
    }

    auto cert = certify_no_origin(simplices, value_of);
    out.certificate = std::get<OriginAvoidanceCertificate>(std::move(cert));

    std::vector<Eigen::VectorXd> values;
    for (int v : split.inner) {
        out.field.push_back(field[v]);
        if (split.is_interface[v])
            values.push_back(boundary.value(v));
        else
            values.push_back(field[v] * (radius / field[v].norm()));
    }
    out.map = SphereMapData(radius, split.inner, std::move(values), dim);
    return out;
}

} // namespace sqopen
