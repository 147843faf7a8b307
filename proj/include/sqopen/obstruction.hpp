#pragma once

// Certified non-openness witnesses when m - 1 < dim X.
//
// sign:    m = 1 along a path. A continuous h with h^2 = g > 0 cannot change
//          sign, so h = sigma sqrt(g) with one global sigma; if f changes sign,
//          every exact root stays min_sigma max_v |f - sigma sqrt g| away.
// winding: m = 2 on a disk. An exact decomposition G of g > 0 never vanishes,
//          so its winding along the boundary is 0. If F winds w != 0 there, the
//          straight-line homotopy forces max_v |G(v) - F(v)|_2 >= min |F| on
//          the cycle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sqopen/error.hpp"
#include "sqopen/space.hpp"

namespace sqopen {

struct WindingDetail {
    int winding = 0;
    double total_angle = 0.0;
    double max_step = 0.0;
    /// Steps below pi/2; coarser sampling may alias.
    bool valid = false;
};

/// Winding of a closed sequence of planar vectors (last joins first).
inline WindingDetail winding_detail(std::span<const Eigen::Vector2d> values)
{
    require(!values.empty(), "empty cycle");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i].x() == 0.0 && values[i].y() == 0.0)
            throw Error(ErrorCode::InvalidArgument, "zero vector at cycle position " + std::to_string(i), i);
    WindingDetail out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Eigen::Vector2d& p = values[i];
        const Eigen::Vector2d& q = values[(i + 1) % values.size()];
        const double step = std::atan2(p.x() * q.y() - p.y() * q.x(), p.dot(q));
        if (std::abs(step) >= std::numbers::pi)
            throw Error(ErrorCode::AmbiguousSampling,
                        "angular step at cycle position " + std::to_string(i) + " reaches pi", i);
        out.total_angle += step;
        out.max_step = std::max(out.max_step, std::abs(step));
    }
    out.winding = static_cast<int>(std::lround(out.total_angle / (2.0 * std::numbers::pi)));
    out.valid = out.max_step < std::numbers::pi / 2.0;
    return out;
}

inline int winding_number(std::span<const Eigen::Vector2d> values) { return winding_detail(values).winding; }

/// Winding of per-vertex 2-vectors along an ordered vertex cycle.
inline int winding_number(const std::vector<int>& cycle, const std::vector<Eigen::Vector2d>& values)
{
    std::vector<Eigen::Vector2d> seq;
    for (int v : cycle)
        seq.push_back(values.at(v));
    return winding_number(seq);
}

struct SignEvidence {
    /// max_v |f(v) - sqrt g(v)| and max_v |f(v) + sqrt g(v)|.
    double distance_plus = 0.0;
    double distance_minus = 0.0;
};

struct WindingEvidence {
    std::vector<int> cycle;
    int winding = 0;
    /// min over the cycle of |F(v)|_2.
    double margin = 0.0;
    double max_step = 0.0;
    /// Bound in the per-component sup metric: margin / sqrt 2.
    double component_lower_bound = 0.0;
};

struct ObstructionCertificate {
    enum class Kind { Sign, Winding };
    Kind kind = Kind::Sign;
    std::vector<double> target;
    /// No exact decomposition lies within this distance of f.
    double lower_bound = 0.0;
    std::optional<SignEvidence> sign;
    std::optional<WindingEvidence> winding;
};

inline std::optional<ObstructionCertificate> sign_obstruction(std::span<const double> f, std::span<const double> g)
{
    require(f.size() == g.size(), "f and g have different lengths");
    for (std::size_t v = 0; v < g.size(); ++v)
        if (!(g[v] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "g must be positive along the path", v);
    bool has_negative = false;
    bool has_positive = false;
    for (double x : f) {
        has_negative |= x < 0.0;
        has_positive |= x > 0.0;
    }
    if (!(has_negative && has_positive))
        return std::nullopt;

    SignEvidence ev;
    for (std::size_t v = 0; v < f.size(); ++v) {
        const double root = std::sqrt(g[v]);
        ev.distance_plus = std::max(ev.distance_plus, std::abs(f[v] - root));
        ev.distance_minus = std::max(ev.distance_minus, std::abs(f[v] + root));
    }
    ObstructionCertificate cert;
    cert.kind = ObstructionCertificate::Kind::Sign;
    cert.target.assign(g.begin(), g.end());
    cert.lower_bound = std::min(ev.distance_plus, ev.distance_minus);
    cert.sign = ev;
    if (!(cert.lower_bound > 0.0))
        return std::nullopt;
    return cert;
}

/// Winding obstruction for a pair (f_1, f_2) on a 2-complex with a recorded
/// boundary cycle. Returns nullopt when F does not wind or touches zero on the
/// cycle; throws ambiguous-sampling when the cycle is too coarse for F.
inline std::optional<ObstructionCertificate> certify_nonopenness(const ComplexPtr& K, const FunctionTuple& f,
                                                                 const VertexFunction& g)
{
    require(same_domain(K, f.complex()) && same_domain(K, g.complex()), "inputs live on different complexes");
    require(f.size() == 2, "winding obstruction needs exactly two functions");
    require(K->dimension() == 2 && !K->boundary_cycles().empty(), "complex has no boundary cycle of a 2-cell");
    for (std::size_t v = 0; v < g.size(); ++v)
        if (!(g[v] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "g must be positive", v);

    const std::vector<int>& cycle = K->boundary_cycles().front();
    std::vector<Eigen::Vector2d> values;
    double margin = std::numeric_limits<double>::infinity();
    for (int v : cycle) {
        values.emplace_back(f[0][v], f[1][v]);
        margin = std::min(margin, values.back().norm());
    }
    if (!(margin > 0.0))
        return std::nullopt;
    const WindingDetail detail = winding_detail(values);
    if (!detail.valid)
        throw Error(ErrorCode::AmbiguousSampling, "boundary sampling too coarse for a valid winding certificate");
    if (detail.winding == 0)
        return std::nullopt;

    ObstructionCertificate cert;
    cert.kind = ObstructionCertificate::Kind::Winding;
    cert.target = g.values();
    cert.lower_bound = margin;
    cert.winding = WindingEvidence{cycle, detail.winding, margin, detail.max_step, margin / std::numbers::sqrt2};
    return cert;
}

} // namespace sqopen
