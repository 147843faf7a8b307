#pragma once

// Finite simplicial complexes and vertex-sampled functions on them.
//
// A compact space X is modeled by a complex K; a continuous function on X is
// modeled by its values at the vertices of K (the continuous object being the
// piecewise-linear interpolant). Vertices are addressed by dense indices
// 0..n-1; the user-facing ids are kept alongside for file round-trips.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sqopen/error.hpp"

namespace sqopen {

/// Sorted list of distinct vertex indices.
using Simplex = std::vector<int>;

class SimplicialComplex;
using ComplexPtr = std::shared_ptr<const SimplicialComplex>;

class SimplicialComplex {
public:
    /// `simplices` are given by vertex index and need not be maximal; vertices
    /// not covered by any simplex become isolated 0-simplices. `coords` is
    /// either empty or holds one coordinate vector per vertex.
    SimplicialComplex(std::vector<int> ids, std::vector<std::vector<double>> coords,
                      std::vector<Simplex> simplices)
        : ids_(std::move(ids)), coords_(std::move(coords))
    {
        const int n = static_cast<int>(ids_.size());
        require(coords_.empty() || static_cast<int>(coords_.size()) == n,
                "coordinate count does not match vertex count");
        {
            std::set<int> seen(ids_.begin(), ids_.end());
            require(static_cast<int>(seen.size()) == n, "duplicate vertex id");
        }
        for (int v = 0; v < n; ++v)
            id_to_index_.emplace(ids_[v], v);

        std::vector<char> covered(n, 0);
        std::set<Simplex> unique;
        for (auto s : simplices) {
            require(!s.empty(), "empty simplex");
            std::sort(s.begin(), s.end());
            require(std::adjacent_find(s.begin(), s.end()) == s.end(), "repeated vertex in simplex");
            require(s.front() >= 0 && s.back() < n, "simplex vertex out of range");
            for (int v : s)
                covered[v] = 1;
            unique.insert(std::move(s));
        }
        for (int v = 0; v < n; ++v)
            if (!covered[v])
                unique.insert(Simplex{v});

        maximal_ = keep_maximal(std::vector<Simplex>(unique.begin(), unique.end()));
        build_derived();
    }

    std::size_t vertex_count() const { return ids_.size(); }
    const std::vector<int>& ids() const { return ids_; }

    int index_of(int id) const
    {
        auto it = id_to_index_.find(id);
        require(it != id_to_index_.end(), "unknown vertex id " + std::to_string(id));
        return it->second;
    }

    bool has_coords() const { return !coords_.empty(); }
    std::span<const double> coords(int v) const
    {
        if (coords_.empty())
            return {};
        return coords_[v];
    }
    const std::vector<std::vector<double>>& all_coords() const { return coords_; }

    /// Max simplex cardinality minus one; -1 for the empty complex.
    int dimension() const { return dimension_; }

    const std::vector<Simplex>& maximal_simplices() const { return maximal_; }

    /// faces()[d] lists every d-dimensional face, sorted lexicographically.
    const std::vector<std::vector<Simplex>>& faces() const { return faces_; }

    const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }

    /// Closed boundary cycles of a 2-complex (edges lying on exactly one
    /// triangle), each an ordered vertex list without repetition of the start.
    /// Counter-clockwise when planar coordinates are present.
    const std::vector<std::vector<int>>& boundary_cycles() const { return boundary_cycles_; }

    bool operator==(const SimplicialComplex& other) const
    {
        return ids_ == other.ids_ && maximal_ == other.maximal_;
    }

    /// Drops every simplex that is a proper face of another one in the list.
    static std::vector<Simplex> keep_maximal(std::vector<Simplex> simplices)
    {
        std::sort(simplices.begin(), simplices.end());
        simplices.erase(std::unique(simplices.begin(), simplices.end()), simplices.end());
        std::map<int, std::vector<std::size_t>> containing;
        for (std::size_t i = 0; i < simplices.size(); ++i)
            for (int v : simplices[i])
                containing[v].push_back(i);
        std::vector<Simplex> result;
        for (std::size_t i = 0; i < simplices.size(); ++i) {
            const Simplex& s = simplices[i];
            bool is_face = false;
            for (std::size_t j : containing[s.front()]) {
                const Simplex& t = simplices[j];
                if (t.size() > s.size() && std::includes(t.begin(), t.end(), s.begin(), s.end())) {
                    is_face = true;
                    break;
                }
            }
            if (!is_face)
                result.push_back(s);
        }
        return result;
    }

private:
    void build_derived()
    {
        const int n = static_cast<int>(ids_.size());
        dimension_ = -1;
        for (const auto& s : maximal_)
            dimension_ = std::max(dimension_, static_cast<int>(s.size()) - 1);

        std::vector<std::set<Simplex>> by_dim(std::max(dimension_ + 1, 0));
        for (const auto& s : maximal_) {
            const unsigned k = static_cast<unsigned>(s.size());
            for (unsigned mask = 1; mask < (1u << k); ++mask) {
                Simplex face;
                for (unsigned b = 0; b < k; ++b)
                    if (mask & (1u << b))
                        face.push_back(s[b]);
                by_dim[face.size() - 1].insert(std::move(face));
            }
        }
        faces_.clear();
        for (auto& level : by_dim)
            faces_.emplace_back(level.begin(), level.end());

        neighbors_.assign(n, {});
        if (dimension_ >= 1)
            for (const auto& e : faces_[1]) {
                neighbors_[e[0]].push_back(e[1]);
                neighbors_[e[1]].push_back(e[0]);
            }
        for (auto& nb : neighbors_)
            std::sort(nb.begin(), nb.end());

        if (dimension_ == 2)
            build_boundary_cycles();
    }

    void build_boundary_cycles()
    {
        std::map<std::pair<int, int>, int> edge_use;
        for (const auto& tri : faces_[2]) {
            ++edge_use[{tri[0], tri[1]}];
            ++edge_use[{tri[0], tri[2]}];
            ++edge_use[{tri[1], tri[2]}];
        }
        std::map<int, std::vector<int>> adjacency;
        for (const auto& [edge, count] : edge_use)
            if (count == 1) {
                adjacency[edge.first].push_back(edge.second);
                adjacency[edge.second].push_back(edge.first);
            }
        for (const auto& [v, nb] : adjacency)
            if (nb.size() != 2)
                return; // non-manifold boundary: no cycles recorded

        std::set<int> visited;
        for (const auto& [start, nb] : adjacency) {
            if (visited.count(start))
                continue;
            std::vector<int> cycle{start};
            visited.insert(start);
            int prev = start;
            int cur = nb[0];
            while (cur != start) {
                cycle.push_back(cur);
                visited.insert(cur);
                const auto& next = adjacency[cur];
                int nxt = next[0] == prev ? next[1] : next[0];
                prev = cur;
                cur = nxt;
            }
            if (has_coords() && coords_[cycle[0]].size() >= 2) {
                double area = 0.0;
                for (std::size_t i = 0; i < cycle.size(); ++i) {
                    const auto& p = coords_[cycle[i]];
                    const auto& q = coords_[cycle[(i + 1) % cycle.size()]];
                    area += p[0] * q[1] - q[0] * p[1];
                }
                if (area < 0)
                    std::reverse(cycle.begin() + 1, cycle.end());
            }
            boundary_cycles_.push_back(std::move(cycle));
        }
    }

    std::vector<int> ids_;
    std::map<int, int> id_to_index_;
    std::vector<std::vector<double>> coords_;
    std::vector<Simplex> maximal_;
    int dimension_ = -1;
    std::vector<std::vector<Simplex>> faces_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::vector<int>> boundary_cycles_;
};

inline bool same_domain(const ComplexPtr& a, const ComplexPtr& b)
{
    return a == b || (a && b && *a == *b);
}

class VertexFunction {
public:
    VertexFunction(ComplexPtr complex, std::vector<double> values)
        : complex_(std::move(complex)), values_(std::move(values))
    {
        require(complex_ != nullptr, "null complex");
        require(values_.size() == complex_->vertex_count(), "value count does not match vertex count");
    }

    static VertexFunction constant(ComplexPtr complex, double c)
    {
        const std::size_t n = complex->vertex_count();
        return VertexFunction(std::move(complex), std::vector<double>(n, c));
    }

    /// Samples `fn(coords)` at every vertex.
    template <typename Fn>
    static VertexFunction sample(ComplexPtr complex, Fn&& fn)
    {
        std::vector<double> values(complex->vertex_count());
        for (std::size_t v = 0; v < values.size(); ++v)
            values[v] = fn(complex->coords(static_cast<int>(v)));
        return VertexFunction(std::move(complex), std::move(values));
    }

    const ComplexPtr& complex() const { return complex_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t v) const { return values_[v]; }
    const std::vector<double>& values() const { return values_; }

    double sup_norm() const
    {
        double m = 0.0;
        for (double x : values_)
            m = std::max(m, std::abs(x));
        return m;
    }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }

private:
    ComplexPtr complex_;
    std::vector<double> values_;
};

/// m vertex functions over one complex.
class FunctionTuple {
public:
    explicit FunctionTuple(std::vector<VertexFunction> components) : components_(std::move(components))
    {
        require(!components_.empty(), "function tuple needs at least one component");
        for (const auto& c : components_)
            require(same_domain(c.complex(), components_.front().complex()),
                    "tuple components live on different complexes");
    }

    std::size_t size() const { return components_.size(); }
    const VertexFunction& operator[](std::size_t i) const { return components_[i]; }
    const std::vector<VertexFunction>& components() const { return components_; }
    const ComplexPtr& complex() const { return components_.front().complex(); }
    std::size_t vertex_count() const { return components_.front().size(); }

    /// The point (f_1(v), ..., f_m(v)).
    Eigen::VectorXd at(std::size_t v) const
    {
        Eigen::VectorXd p(components_.size());
        for (std::size_t i = 0; i < components_.size(); ++i)
            p[static_cast<Eigen::Index>(i)] = components_[i][v];
        return p;
    }

    double max_sup_norm() const
    {
        double m = 0.0;
        for (const auto& c : components_)
            m = std::max(m, c.sup_norm());
        return m;
    }

private:
    std::vector<VertexFunction> components_;
};

// ---------------------------------------------------------------------------
// Standard complexes

enum class SpaceKind { Interval, Circle, Disk, Discrete };

inline SpaceKind parse_space_kind(std::string_view name)
{
    if (name == "interval") return SpaceKind::Interval;
    if (name == "circle") return SpaceKind::Circle;
    if (name == "disk") return SpaceKind::Disk;
    if (name == "discrete") return SpaceKind::Discrete;
    throw Error(ErrorCode::InvalidArgument, "unknown space kind '" + std::string(name) + "'");
}

namespace detail {

inline std::vector<int> iota_ids(int n)
{
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i)
        ids[i] = i;
    return ids;
}

// Concentric rings at radii j/rings holding 6j vertices each, zipped together
// by angle. Ring j contributes 6(2j-1) triangles, 6 rings^2 in total.
inline ComplexPtr build_disk(int rings)
{
    std::vector<std::vector<double>> coords{{0.0, 0.0}};
    std::vector<std::vector<int>> ring_vertices{{0}};
    for (int j = 1; j <= rings; ++j) {
        const int count = 6 * j;
        const double radius = static_cast<double>(j) / rings;
        std::vector<int> ring;
        for (int k = 0; k < count; ++k) {
            const double angle = 2.0 * std::numbers::pi * k / count;
            ring.push_back(static_cast<int>(coords.size()));
            coords.push_back({radius * std::cos(angle), radius * std::sin(angle)});
        }
        ring_vertices.push_back(std::move(ring));
    }
    // Snap the outer ring onto the unit circle exactly.
    for (int v : ring_vertices.back()) {
        const double r = std::hypot(coords[v][0], coords[v][1]);
        coords[v][0] /= r;
        coords[v][1] /= r;
    }

    std::vector<Simplex> triangles;
    for (int j = 1; j <= rings; ++j) {
        const auto& inner = ring_vertices[j - 1];
        const auto& outer = ring_vertices[j];
        const int ni = static_cast<int>(inner.size());
        const int no = static_cast<int>(outer.size());
        if (ni == 1) {
            for (int k = 0; k < no; ++k)
                triangles.push_back({inner[0], outer[k], outer[(k + 1) % no]});
            continue;
        }
        int i = 0;
        int k = 0;
        while (i < ni || k < no) {
            // Compare next angles as fractions (i+1)/ni vs (k+1)/no exactly.
            const bool advance_inner = i < ni && (k >= no || (i + 1) * no <= (k + 1) * ni);
            if (advance_inner) {
                triangles.push_back({inner[i % ni], inner[(i + 1) % ni], outer[k % no]});
                ++i;
            } else {
                triangles.push_back({inner[i % ni], outer[k % no], outer[(k + 1) % no]});
                ++k;
            }
        }
    }
    const int n = static_cast<int>(coords.size());
    return std::make_shared<const SimplicialComplex>(iota_ids(n), std::move(coords), std::move(triangles));
}

} // namespace detail

/// Test spaces: interval = path on [-1,1] with `resolution` edges; circle =
/// `resolution`-cycle on the unit circle; disk = unit disk with `resolution`
/// rings (6 resolution^2 triangles); discrete = `resolution` isolated points.
inline ComplexPtr build_standard_complex(SpaceKind kind, int resolution)
{
    switch (kind) {
    case SpaceKind::Interval: {
        require(resolution >= 1, "interval needs resolution >= 1");
        std::vector<std::vector<double>> coords;
        std::vector<Simplex> edges;
        for (int i = 0; i <= resolution; ++i)
            coords.push_back({-1.0 + 2.0 * i / resolution});
        for (int i = 0; i < resolution; ++i)
            edges.push_back({i, i + 1});
        return std::make_shared<const SimplicialComplex>(detail::iota_ids(resolution + 1), std::move(coords),
                                                         std::move(edges));
    }
    case SpaceKind::Circle: {
        require(resolution >= 3, "circle needs resolution >= 3");
        std::vector<std::vector<double>> coords;
        std::vector<Simplex> edges;
        for (int k = 0; k < resolution; ++k) {
            const double angle = 2.0 * std::numbers::pi * k / resolution;
            coords.push_back({std::cos(angle), std::sin(angle)});
            edges.push_back({k, (k + 1) % resolution});
        }
        return std::make_shared<const SimplicialComplex>(detail::iota_ids(resolution), std::move(coords),
                                                         std::move(edges));
    }
    case SpaceKind::Disk:
        require(resolution >= 3, "disk needs resolution >= 3");
        return detail::build_disk(resolution);
    case SpaceKind::Discrete: {
        require(resolution >= 1, "discrete space needs at least one point");
        return std::make_shared<const SimplicialComplex>(detail::iota_ids(resolution),
                                                         std::vector<std::vector<double>>{}, std::vector<Simplex>{});
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown space kind");
}

// ---------------------------------------------------------------------------
// Edge subdivision

/// A subdivided complex together with the parent edge of every new vertex.
/// Old vertices keep their indices; new vertex n0 + k bisects parents[k].
struct Refinement {
    ComplexPtr complex;
    std::size_t original_vertex_count = 0;
    std::vector<std::pair<int, int>> parents;

    /// Linear re-interpolation of `f` onto the refined complex.
    VertexFunction prolong(const VertexFunction& f) const
    {
        require(f.size() == original_vertex_count, "function does not live on the coarse complex");
        std::vector<double> values = f.values();
        for (const auto& [a, b] : parents)
            values.push_back(0.5 * (f[a] + f[b]));
        return VertexFunction(complex, std::move(values));
    }

    Eigen::VectorXd prolong(const std::vector<Eigen::VectorXd>& vectors, std::size_t new_vertex) const
    {
        if (new_vertex < original_vertex_count)
            return vectors[new_vertex];
        const auto& [a, b] = parents[new_vertex - original_vertex_count];
        return 0.5 * (vectors[a] + vectors[b]);
    }
};

/// Bisects every edge and replaces each simplex by its standard edge
/// subdivision (2 edges, 4 triangles, 8 tetrahedra). Complexes above
/// dimension 3 are rejected.
inline Refinement refine(const SimplicialComplex& K)
{
    require(K.dimension() <= 3, "edge subdivision is implemented up to dimension 3");
    Refinement out;
    out.original_vertex_count = K.vertex_count();

    std::vector<int> ids = K.ids();
    std::vector<std::vector<double>> coords = K.all_coords();
    int next_id = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
    std::map<std::pair<int, int>, int> midpoint;
    if (K.dimension() >= 1)
        for (const auto& e : K.faces()[1]) {
            const int index = static_cast<int>(ids.size());
            midpoint[{e[0], e[1]}] = index;
            ids.push_back(next_id++);
            out.parents.emplace_back(e[0], e[1]);
            if (K.has_coords()) {
                const auto& p = coords[e[0]];
                const auto& q = coords[e[1]];
                std::vector<double> c(p.size());
                for (std::size_t d = 0; d < p.size(); ++d)
                    c[d] = 0.5 * (p[d] + q[d]);
                coords.push_back(std::move(c));
            }
        }

    auto mid = [&](int a, int b) { return midpoint.at({std::min(a, b), std::max(a, b)}); };
    std::vector<Simplex> simplices;
    for (const auto& s : K.maximal_simplices()) {
        switch (s.size()) {
        case 1:
            simplices.push_back(s);
            break;
        case 2: {
            const int m = mid(s[0], s[1]);
            simplices.push_back({s[0], m});
            simplices.push_back({m, s[1]});
            break;
        }
        case 3: {
            const int a = s[0], b = s[1], c = s[2];
            const int ab = mid(a, b), bc = mid(b, c), ac = mid(a, c);
            simplices.push_back({a, ab, ac});
            simplices.push_back({b, ab, bc});
            simplices.push_back({c, ac, bc});
            simplices.push_back({ab, bc, ac});
            break;
        }
        case 4: {
            const int a = s[0], b = s[1], c = s[2], d = s[3];
            const int ab = mid(a, b), ac = mid(a, c), ad = mid(a, d);
            const int bc = mid(b, c), bd = mid(b, d), cd = mid(c, d);
            simplices.push_back({a, ab, ac, ad});
            simplices.push_back({b, ab, bc, bd});
            simplices.push_back({c, ac, bc, cd});
            simplices.push_back({d, ad, bd, cd});
            // Octahedron split along the ac-bd diagonal.
            simplices.push_back({ac, bd, ab, ad});
            simplices.push_back({ac, bd, ad, cd});
            simplices.push_back({ac, bd, cd, bc});
            simplices.push_back({ac, bd, bc, ab});
            break;
        }
        default:
            break;
        }
    }
    out.complex = std::make_shared<const SimplicialComplex>(std::move(ids), std::move(coords), std::move(simplices));
    return out;
}

inline ComplexPtr subdivide(const SimplicialComplex& K) { return refine(K).complex; }

// ---------------------------------------------------------------------------
// Tuple arithmetic

/// Pointwise sum of squares of the components.
inline VertexFunction sum_of_squares(const FunctionTuple& t)
{
    std::vector<double> out(t.vertex_count(), 0.0);
    for (const auto& c : t.components())
        for (std::size_t v = 0; v < out.size(); ++v)
            out[v] += c[v] * c[v];
    return VertexFunction(t.complex(), std::move(out));
}

/// sup-norm distance between two functions on the same complex.
inline double sup_distance(const VertexFunction& a, const VertexFunction& b)
{
    require(a.size() == b.size(), "functions have different vertex counts");
    double d = 0.0;
    for (std::size_t v = 0; v < a.size(); ++v)
        d = std::max(d, std::abs(a[v] - b[v]));
    return d;
}

/// Sum over components of the sup-norm distance.
inline double tuple_distance(const FunctionTuple& a, const FunctionTuple& b)
{
    require(a.size() == b.size(), "tuples have different lengths");
    require(same_domain(a.complex(), b.complex()), "tuples live on different complexes");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d += sup_distance(a[i], b[i]);
    return d;
}

// ---------------------------------------------------------------------------
// Region split

/// Partition of the vertices at threshold t: outer U = {f > t}, inner
/// A = {f <= t}, interface S = inner vertices sharing a simplex with U.
struct RegionSplit {
    ComplexPtr complex;
    double threshold = 0.0;
    std::vector<int> outer;
    std::vector<int> inner;
    std::vector<int> interface;
    std::vector<char> is_inner;
    std::vector<char> is_interface;
    /// Maximal simplices of the subcomplex spanned by A.
    std::vector<Simplex> inner_simplices;

    int inner_dimension() const
    {
        int d = -1;
        for (const auto& s : inner_simplices)
            d = std::max(d, static_cast<int>(s.size()) - 1);
        return d;
    }
};

inline RegionSplit region_split(const ComplexPtr& K, const VertexFunction& f, double t)
{
    require(same_domain(K, f.complex()), "function does not live on the complex");
    require(t > 0.0, "threshold must be positive");
    const std::size_t n = K->vertex_count();
    RegionSplit split;
    split.complex = K;
    split.threshold = t;
    split.is_inner.assign(n, 0);
    split.is_interface.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        if (f[v] > t)
            split.outer.push_back(static_cast<int>(v));
        else {
            split.inner.push_back(static_cast<int>(v));
            split.is_inner[v] = 1;
        }
    }

    std::vector<Simplex> candidates;
    for (const auto& s : K->maximal_simplices()) {
        Simplex part;
        bool touches_outer = false;
        for (int v : s) {
            if (split.is_inner[v])
                part.push_back(v);
            else
                touches_outer = true;
        }
        if (touches_outer)
            for (int v : part)
                split.is_interface[v] = 1;
        if (!part.empty())
            candidates.push_back(std::move(part));
    }
    split.inner_simplices = SimplicialComplex::keep_maximal(std::move(candidates));
    for (std::size_t v = 0; v < n; ++v)
        if (split.is_interface[v])
            split.interface.push_back(static_cast<int>(v));
    return split;
}

} // namespace sqopen
