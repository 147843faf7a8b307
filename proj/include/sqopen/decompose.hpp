#pragma once

// Sum-of-squares decomposition near a given tuple.
//
// Given f_1..f_m on a complex of dimension <= m-1 and g >= 0 close to
// f = sum f_i^2, build g_1..g_m with sum g_i^2 = g at every vertex and each
// g_i within eps of f_i:
//
//   1. split the vertices at t = (eps/3)^2 into U = {f > t} and A = {f <= t};
//   2. on the interface S, push F = (f_1..f_m) radially onto the sphere of
//      radius eps/3 and extend that map over A (sphere_extension.hpp);
//   3. glue: h~ = F on U, the sphere map on A, so sum h~_i^2 > 0 everywhere;
//   4. rescale g_i = h~_i * sqrt(g / sum h~_i^2).
//
// With ||g - f|| < delta = min{(eps/3)^4 / m^2, (eps/3)^2}, m >= sup|f_i|,
// every |f_i - g_i| < eps: on A both |f_i| <= eps/3 and |g_i| < 2 eps/3; on U
// the rescaling factor satisfies |1 - lambda| <= eps / (3m).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "sqopen/error.hpp"
#include "sqopen/space.hpp"
#include "sqopen/sphere_extension.hpp"

namespace sqopen {

struct DeltaBudget {
    double eps = 0.0;
    double m_bound = 0.0;
    /// m_bound clamped below by eps/3.
    double m_eff = 0.0;
    double delta = 0.0;
    /// Region threshold (eps/3)^2.
    double threshold = 0.0;
};

inline DeltaBudget paper_delta(double eps, double m_bound)
{
    require(eps > 0.0 && std::isfinite(eps), "eps must be positive");
    require(m_bound >= 0.0 && std::isfinite(m_bound), "m_bound must be nonnegative");
    DeltaBudget b;
    b.eps = eps;
    b.m_bound = m_bound;
    const double third = eps / 3.0;
    b.m_eff = std::max(m_bound, third);
    b.threshold = third * third;
    b.delta = std::min(third * third * third * third / (b.m_eff * b.m_eff), b.threshold);
    return b;
}

/// h~_i = f_i on U and h_i on A.
inline FunctionTuple glue_tuple(const RegionSplit& split, const FunctionTuple& f, const SphereMapData& h)
{
    require(same_domain(split.complex, f.complex()), "split and tuple live on different complexes");
    require(h.size() == 0 || h.ambient_dim() == static_cast<int>(f.size()),
            "sphere map dimension does not match tuple length");
    const double r = h.radius();
    // The sphere must be the level set that defined A: r^2 = t, up to the
    // relative threshold nudges decompose may apply.
    require(h.size() == 0 || std::abs(r * r - split.threshold) <= 1e-5 * split.threshold,
            "sphere radius does not match the region threshold");
    std::vector<std::vector<double>> values(f.size(), std::vector<double>(f.vertex_count()));
    for (std::size_t v = 0; v < f.vertex_count(); ++v) {
        if (!split.is_inner[v]) {
            for (std::size_t i = 0; i < f.size(); ++i)
                values[i][v] = f[i][v];
            continue;
        }
        require(h.contains(static_cast<int>(v)), "inner vertex " + std::to_string(v) + " has no sphere value");
        const Eigen::VectorXd& p = h.value(static_cast<int>(v));
        require(std::abs(p.norm() - r) <= SphereMapData::norm_tolerance * r,
                "inner vertex " + std::to_string(v) + " is off the radius-eps/3 sphere");
        for (std::size_t i = 0; i < f.size(); ++i)
            values[i][v] = p[static_cast<Eigen::Index>(i)];
    }
    std::vector<VertexFunction> comps;
    for (auto& vals : values)
        comps.emplace_back(f.complex(), std::move(vals));
    return FunctionTuple(std::move(comps));
}

/// g_i = h~_i * lambda with lambda = sqrt(g / sum h~_i^2). Optionally
/// returns lambda per vertex.
inline FunctionTuple rescale_to_target(const FunctionTuple& h_tilde, const VertexFunction& g,
                                       std::vector<double>* lambda_out = nullptr)
{
    require(same_domain(h_tilde.complex(), g.complex()), "target lives on a different complex");
    const VertexFunction h = sum_of_squares(h_tilde);
    std::vector<double> lambda(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (!(g[v] >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "target is negative at vertex " + std::to_string(v), v);
        if (!(h[v] > 0.0))
            throw Error(ErrorCode::DegenerateDenominator,
                        "glued tuple vanishes at vertex " + std::to_string(v), v);
        lambda[v] = std::sqrt(g[v] / h[v]);
    }
    std::vector<VertexFunction> comps;
    for (const auto& c : h_tilde.components()) {
        std::vector<double> vals(g.size());
        for (std::size_t v = 0; v < g.size(); ++v)
            vals[v] = c[v] * lambda[v];
        comps.emplace_back(g.complex(), std::move(vals));
    }
    if (lambda_out)
        *lambda_out = std::move(lambda);
    return FunctionTuple(std::move(comps));
}

struct DecompositionReport {
    FunctionTuple output;
    /// max_v |sum g_i(v)^2 - g(v)|
    double residual = 0.0;
    /// ||f_i - g_i|| per component.
    std::vector<double> component_distances{};
    double tuple_distance = 0.0;
    DeltaBudget budget{};
    /// ||g - sum f_i^2||; the eps guarantee holds when this is below budget.delta.
    double input_gap = 0.0;
    /// Threshold actually used (differs from budget.threshold after interface retries).
    double threshold = 0.0;
    std::size_t outer_count = 0;
    std::size_t inner_count = 0;
    std::size_t interface_count = 0;
    std::vector<double> lambda{};
    std::vector<char> is_inner{};
    /// Present whenever A is nonempty.
    std::optional<SphereExtension> extension{};

    double max_component_distance() const
    {
        return component_distances.empty()
                   ? 0.0
                   : *std::max_element(component_distances.begin(), component_distances.end());
    }
    bool within_budget() const { return input_gap < budget.delta; }
};

inline DecompositionReport decompose(const ComplexPtr& K, const FunctionTuple& f, const VertexFunction& g, double eps,
                                     std::uint64_t seed, const ExtensionOptions& options = {})
{
    require(same_domain(K, f.complex()) && same_domain(K, g.complex()), "inputs live on different complexes");
    require(eps > 0.0 && std::isfinite(eps), "eps must be positive");
    const std::size_t m = f.size();
    if (K->dimension() > static_cast<int>(m) - 1)
        throw Error(ErrorCode::DimensionObstruction, "complex has dimension " + std::to_string(K->dimension()) +
                                                         " but only " + std::to_string(m) + " functions");
    for (std::size_t v = 0; v < g.size(); ++v)
        if (!(g[v] >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "target is negative at vertex " + std::to_string(v), v);

    const DeltaBudget budget = paper_delta(eps, f.max_sup_norm());
    const VertexFunction f_sq = sum_of_squares(f);

    // Split; retry with a nudged threshold while an interface vertex has F = 0.
    constexpr int max_split_attempts = 8;
    std::optional<RegionSplit> split;
    std::size_t bad_vertex = 0;
    for (int attempt = 0; attempt < max_split_attempts && !split; ++attempt) {
        RegionSplit candidate = region_split(K, f_sq, budget.threshold * (1.0 + 1e-6 * attempt));
        bool degenerate = false;
        for (int v : candidate.interface)
            if (f_sq[v] == 0.0) {
                degenerate = true;
                bad_vertex = static_cast<std::size_t>(v);
                break;
            }
        if (!degenerate)
            split = std::move(candidate);
    }
    if (!split)
        throw Error(ErrorCode::DegenerateInterface,
                    "tuple vanishes at interface vertex " + std::to_string(bad_vertex) + "; subdivide", bad_vertex);

    const double radius = eps / 3.0;
    std::optional<SphereExtension> extension;
    std::optional<FunctionTuple> h_tilde;
    if (split->inner.empty()) {
        h_tilde = f;
    } else {
        std::vector<Eigen::VectorXd> boundary_values;
        for (int v : split->interface) {
            Eigen::VectorXd p = f.at(v);
            boundary_values.push_back(p * (radius / p.norm()));
        }
        const SphereMapData boundary(radius, split->interface, std::move(boundary_values), static_cast<int>(m));
        extension = extend_to_sphere(*split, boundary, radius, seed, options);
        h_tilde = glue_tuple(*split, f, extension->map);
    }

    std::vector<double> lambda;
    FunctionTuple output = rescale_to_target(*h_tilde, g, &lambda);

    DecompositionReport report{.output = std::move(output)};
    const VertexFunction out_sq = sum_of_squares(report.output);
    for (std::size_t v = 0; v < g.size(); ++v)
        report.residual = std::max(report.residual, std::abs(out_sq[v] - g[v]));
    for (std::size_t i = 0; i < m; ++i)
        report.component_distances.push_back(sup_distance(f[i], report.output[i]));
    report.tuple_distance = tuple_distance(f, report.output);
    report.budget = budget;
    report.input_gap = sup_distance(g, f_sq);
    report.threshold = split->threshold;
    report.outer_count = split->outer.size();
    report.inner_count = split->inner.size();
    report.interface_count = split->interface.size();
    report.lambda = std::move(lambda);
    report.is_inner = split->is_inner;
    report.extension = std::move(extension);
    return report;
}

/// Perturbs f to a tuple y with sum y_i^2 strictly positive (invertible in
/// C(X)) and tuple_distance(f, y) < eps, by decomposing sum f_i^2 + delta'
/// with a per-component budget of eps/m.
inline FunctionTuple rr_perturb(const ComplexPtr& K, const FunctionTuple& f, double eps, std::uint64_t seed)
{
    require(eps > 0.0 && std::isfinite(eps), "eps must be positive");
    const double eps_component = eps / static_cast<double>(f.size());
    const double shift = paper_delta(eps_component, f.max_sup_norm()).delta / 2.0;
    const VertexFunction f_sq = sum_of_squares(f);
    std::vector<double> target = f_sq.values();
    for (double& x : target)
        x += shift;
    return decompose(K, f, VertexFunction(f.complex(), std::move(target)), eps_component, seed).output;
}

} // namespace sqopen
