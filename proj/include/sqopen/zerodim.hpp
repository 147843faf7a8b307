#pragma once

// Square roots on finite discrete spaces, where every subset is clopen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "sqopen/error.hpp"

namespace sqopen {

/// Points are numbered 1..k; subsets are bit masks (bit id-1).
class DiscreteSpace {
public:
    explicit DiscreteSpace(int k) : k_(k) { require(k >= 1 && k <= 64, "discrete space needs 1..64 points"); }

    int size() const { return k_; }

    std::uint64_t subset(std::initializer_list<int> ids) const { return subset(std::span<const int>(ids.begin(), ids.size())); }
    std::uint64_t subset(std::span<const int> ids) const
    {
        std::uint64_t mask = 0;
        for (int id : ids) {
            require(id >= 1 && id <= k_, "point id out of range");
            mask |= std::uint64_t{1} << (id - 1);
        }
        return mask;
    }

    /// Membership by zero-based position.
    static bool contains(std::uint64_t mask, std::size_t position) { return (mask >> position) & 1u; }

private:
    int k_;
};

/// rho_U(g): +sqrt g on U, -sqrt g off U.
inline std::vector<double> clopen_sqrt(const DiscreteSpace& X, std::uint64_t U, std::span<const double> g)
{
    require(static_cast<int>(g.size()) == X.size(), "g has the wrong number of points");
    std::vector<double> h(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        require(g[v] >= 0.0, "g must be nonnegative");
        const double root = std::sqrt(g[v]);
        h[v] = DiscreteSpace::contains(U, v) ? root : -root;
    }
    return h;
}

/// sign(f) sqrt(g), sign(0) = +1. Satisfies ||h - f|| <= sqrt ||g - f^2||.
inline std::vector<double> sqrt_near(std::span<const double> f, std::span<const double> g)
{
    require(f.size() == g.size(), "f and g have different lengths");
    std::vector<double> h(f.size());
    for (std::size_t v = 0; v < f.size(); ++v) {
        require(g[v] >= 0.0, "g must be nonnegative");
        const double root = std::sqrt(g[v]);
        h[v] = f[v] < 0.0 ? -root : root;
    }
    return h;
}

struct BestDecomposition {
    /// components[i][v]
    std::vector<std::vector<double>> tuple;
    /// sum over components of sup_v |f_i - h_i|
    double distance = 0.0;
    /// max_v |F(v) - H(v)|_2
    double euclidean_gap = 0.0;
};

/// Closest exact decomposition of g on a discrete space, by exhaustive sign
/// enumeration (m = 1) or pointwise radial projection onto the radius-sqrt(g)
/// sphere (m >= 2). Requires m k <= 20.
inline BestDecomposition brute_force_best(const std::vector<std::vector<double>>& f, std::span<const double> g)
{
    require(!f.empty(), "need at least one component");
    const std::size_t m = f.size();
    const std::size_t k = g.size();
    for (const auto& c : f)
        require(c.size() == k, "component length does not match g");
    require(m * k <= 20, "brute force limited to m k <= 20");
    for (double x : g)
        require(x >= 0.0, "g must be nonnegative");

    BestDecomposition best;
    if (m == 1) {
        const std::uint64_t patterns = std::uint64_t{1} << k;
        double best_distance = std::numeric_limits<double>::infinity();
        std::uint64_t best_pattern = 0;
        for (std::uint64_t p = 0; p < patterns; ++p) {
            double d = 0.0;
            for (std::size_t v = 0; v < k; ++v) {
                const double root = ((p >> v) & 1u) ? -std::sqrt(g[v]) : std::sqrt(g[v]);
                d = std::max(d, std::abs(f[0][v] - root));
            }
            if (d < best_distance) {
                best_distance = d;
                best_pattern = p;
            }
        }
        best.tuple.assign(1, std::vector<double>(k));
        for (std::size_t v = 0; v < k; ++v)
            best.tuple[0][v] = ((best_pattern >> v) & 1u) ? -std::sqrt(g[v]) : std::sqrt(g[v]);
    } else {
        best.tuple.assign(m, std::vector<double>(k));
        for (std::size_t v = 0; v < k; ++v) {
            double norm = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                norm += f[i][v] * f[i][v];
            norm = std::sqrt(norm);
            const double root = std::sqrt(g[v]);
            for (std::size_t i = 0; i < m; ++i)
                best.tuple[i][v] = norm > 0.0 ? f[i][v] * (root / norm) : (i == 0 ? root : 0.0);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        double d = 0.0;
        for (std::size_t v = 0; v < k; ++v)
            d = std::max(d, std::abs(f[i][v] - best.tuple[i][v]));
        best.distance += d;
    }
    for (std::size_t v = 0; v < k; ++v) {
        double gap = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            gap += (f[i][v] - best.tuple[i][v]) * (f[i][v] - best.tuple[i][v]);
        best.euclidean_gap = std::max(best.euclidean_gap, std::sqrt(gap));
    }
    return best;
}

} // namespace sqopen
