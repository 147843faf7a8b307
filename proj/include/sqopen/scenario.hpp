#pragma once

// Batch experiments: JSON scenario in, JSON report (plus optional CSV table)
// out. Trials are independent, seeded with seed + trial index, and may run on
// several threads; records are stored by trial index so the report does not
// depend on the thread count.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sqopen/complex_io.hpp"
#include "sqopen/decompose.hpp"
#include "sqopen/expression.hpp"
#include "sqopen/matops.hpp"
#include "sqopen/obstruction.hpp"
#include "sqopen/random.hpp"
#include "sqopen/space.hpp"
#include "sqopen/zerodim.hpp"

namespace sqopen::cli {

using nlohmann::json;

/// Malformed or unsupported scenario (exit status 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    int jobs = 1;
    std::optional<std::int64_t> seed{};
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct ScenarioResult {
    json report;
    CsvTable table;
    bool all_pass = false;
};

namespace detail {

inline std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string short_number(double x)
{
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return x < 0 ? "(" + os.str() + ")" : os.str();
}

inline std::string digest(const std::vector<std::vector<double>>& arrays)
{
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& a : arrays)
        for (double x : a) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &x, sizeof(double));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ull;
            }
        }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

inline const json& need(const json& j, const char* key)
{
    if (!j.contains(key))
        throw ConfigError(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs < 1 ? 1 : jobs, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

inline ComplexPtr build_space(const json& spec)
{
    if (spec.contains("file"))
        return load_complex(spec.at("file").get<std::string>());
    const auto kind = parse_space_kind(need(spec, "kind").get<std::string>());
    ComplexPtr K = build_standard_complex(kind, need(spec, "resolution").get<int>());
    const int subdivisions = get_or(spec, "subdivisions", 0);
    for (int i = 0; i < subdivisions; ++i)
        K = subdivide(*K);
    return K;
}

inline Eigen::MatrixXd to_matrix(const json& j)
{
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty())
        throw ConfigError("empty matrix");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw ConfigError("ragged matrix");
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
}

inline json from_matrix(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Random smooth expression in the available coordinates, scaled by a
/// log-uniform amplitude so that both small and large tuples occur.
inline std::string sample_expression(Rng& rng, int coord_dim, double amplitude)
{
    static constexpr const char* names[] = {"x", "y", "z"};
    const int d = std::min(coord_dim, 3);
    std::string linear = short_number(rng.uniform(-1.0, 1.0));
    std::string phase = short_number(rng.uniform(-3.0, 3.0));
    for (int i = 0; i < d; ++i) {
        linear += " + " + short_number(rng.uniform(-1.0, 1.0)) + "*" + names[i];
        phase += " + " + short_number(rng.uniform(-3.0, 3.0)) + "*" + names[i];
    }
    const std::string wave = short_number(rng.uniform(-0.5, 0.5)) + "*sin(" + phase + ")";
    return short_number(amplitude) + "*(" + linear + " + " + wave + ")";
}

inline VertexFunction evaluate(const ComplexPtr& K, const Expression& e)
{
    return VertexFunction::sample(K, [&](std::span<const double> c) { return e(c); });
}

struct TupleSpec {
    std::vector<std::string> sources;
    FunctionTuple tuple;
};

inline TupleSpec make_tuple(const ComplexPtr& K, const json& scenario, Rng& rng)
{
    std::vector<std::string> sources;
    if (scenario.contains("tuple")) {
        sources = scenario.at("tuple").get<std::vector<std::string>>();
    } else {
        const int m = need(scenario, "m").get<int>();
        if (m < 1)
            throw ConfigError("m must be at least 1");
        const int coord_dim = K->has_coords() ? static_cast<int>(K->coords(0).size()) : 0;
        const double amplitude = std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
        for (int i = 0; i < m; ++i)
            sources.push_back(sample_expression(rng, coord_dim, amplitude));
    }
    if (sources.empty())
        throw ConfigError("tuple needs at least one expression");
    std::vector<VertexFunction> comps;
    for (const auto& s : sources) {
        Expression e = [&] {
            try {
                return parse_expression(s);
            } catch (const Error& err) {
                throw ConfigError("expression '" + s + "': " + err.what());
            }
        }();
        comps.push_back(evaluate(K, e));
    }
    return {std::move(sources), FunctionTuple(std::move(comps))};
}

inline VertexFunction make_target(const ComplexPtr& K, const std::string& source)
{
    try {
        return evaluate(K, parse_expression(source));
    } catch (const Error& err) {
        throw ConfigError("expression '" + source + "': " + err.what());
    }
}

inline std::vector<std::vector<double>> tuple_values(const FunctionTuple& t)
{
    std::vector<std::vector<double>> out;
    for (const auto& c : t.components())
        out.push_back(c.values());
    return out;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeTrial {
    json record;
    bool pass = false;
};

inline DecomposeTrial decompose_trial(const ComplexPtr& K, const json& scenario, std::uint64_t seed,
                                      double delta_scale_override = -1.0)
{
    Rng rng(seed);
    const double eps = get_or(scenario, "eps", 0.3);
    TupleSpec spec = make_tuple(K, scenario, rng);
    const FunctionTuple& f = spec.tuple;
    const DeltaBudget budget = paper_delta(eps, f.max_sup_norm());
    const VertexFunction f_sq = sum_of_squares(f);

    VertexFunction g = [&] {
        if (scenario.contains("g") && delta_scale_override < 0.0)
            return make_target(K, scenario.at("g").get<std::string>());
        const double scale =
            delta_scale_override >= 0.0 ? delta_scale_override : get_or(scenario, "delta_fraction", 0.9) * budget.delta;
        std::vector<double> vals = f_sq.values();
        for (double& x : vals)
            x = std::max(0.0, x + scale * rng.uniform(-1.0, 1.0));
        return VertexFunction(K, std::move(vals));
    }();

    DecomposeTrial out;
    json& rec = out.record;
    rec["seed"] = seed;
    rec["tuple"] = spec.sources;
    auto inputs = tuple_values(f);
    inputs.push_back(g.values());
    rec["digest"] = digest(inputs);
    rec["delta"] = budget.delta;
    rec["m_bound"] = budget.m_bound;
    try {
        const DecompositionReport report = decompose(K, f, g, eps, seed);
        const double residual_bound = 1e-9 * (1.0 + g.sup_norm());
        const bool residual_ok = report.residual <= residual_bound;
        const bool guarantee = report.within_budget();
        const bool distance_ok = !guarantee || report.max_component_distance() < eps;
        bool certificate_ok = true;
        if (report.extension) {
            certificate_ok = verify_certificate(report.extension->certificate,
                                                [&](int v) { return report.extension->field_at(v); });
            double min_margin = std::numeric_limits<double>::infinity();
            for (const auto& w : report.extension->certificate.witnesses)
                min_margin = std::min(min_margin, w.margin);
            rec["certificate"] = {{"simplices", report.extension->certificate.witnesses.size()},
                                  {"min_margin", min_margin},
                                  {"jitter_rounds", report.extension->jitter_rounds},
                                  {"verified", certificate_ok}};
        }
        rec["residual"] = report.residual;
        rec["g_sup_norm"] = g.sup_norm();
        rec["component_distances"] = report.component_distances;
        rec["max_component_distance"] = report.max_component_distance();
        rec["tuple_distance"] = report.tuple_distance;
        rec["input_gap"] = report.input_gap;
        rec["guarantee_applies"] = guarantee;
        rec["regions"] = {{"outer", report.outer_count},
                          {"inner", report.inner_count},
                          {"interface", report.interface_count}};
        out.pass = residual_ok && distance_ok && certificate_ok;
        rec["outcome"] = out.pass ? "pass" : "fail";
    } catch (const Error& e) {
        rec["outcome"] = "error";
        rec["error"] = std::string(to_string(e.code()));
        rec["message"] = e.what();
    }
    return out;
}

inline ScenarioResult run_decompose(const json& scenario, std::uint64_t seed, int trials, int jobs)
{
    const ComplexPtr K = build_space(need(scenario, "space"));
    std::vector<DecomposeTrial> results(trials);
    parallel_for(trials, jobs, [&](std::size_t t) { results[t] = decompose_trial(K, scenario, seed + t); });

    ScenarioResult out;
    out.table.header = {"trial", "outcome", "residual", "max_component_distance", "tuple_distance",
                        "input_gap", "delta", "outer", "inner", "interface"};
    json records = json::array();
    std::size_t passes = 0;
    double max_residual = 0.0;
    double min_distance = std::numeric_limits<double>::infinity();
    double max_distance = 0.0;
    for (int t = 0; t < trials; ++t) {
        json rec{{"trial", t}};
        rec.update(results[t].record);
        passes += results[t].pass;
        if (rec.contains("residual")) {
            max_residual = std::max(max_residual, rec["residual"].get<double>());
            min_distance = std::min(min_distance, rec["max_component_distance"].get<double>());
            max_distance = std::max(max_distance, rec["max_component_distance"].get<double>());
            out.table.rows.push_back({std::to_string(t), rec["outcome"], fmt(rec["residual"]),
                                      fmt(rec["max_component_distance"]), fmt(rec["tuple_distance"]),
                                      fmt(rec["input_gap"]), fmt(rec["delta"]),
                                      std::to_string(rec["regions"]["outer"].get<std::size_t>()),
                                      std::to_string(rec["regions"]["inner"].get<std::size_t>()),
                                      std::to_string(rec["regions"]["interface"].get<std::size_t>())});
        } else {
            out.table.rows.push_back({std::to_string(t), rec["outcome"], "", "", "", "", fmt(rec["delta"]), "", "", ""});
        }
        records.push_back(std::move(rec));
    }
    out.report["space"] = {{"vertices", K->vertex_count()},
                           {"dimension", K->dimension()},
                           {"maximal_simplices", K->maximal_simplices().size()}};
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", trials},
                                {"pass_count", passes},
                                {"max_residual", max_residual},
                                {"min_distance", trials > 0 && std::isfinite(min_distance) ? min_distance : 0.0},
                                {"max_distance", max_distance}};
    out.all_pass = passes == static_cast<std::size_t>(trials);
    return out;
}

// ---------------------------------------------------------------------------
// openness-modulus

inline ScenarioResult run_openness_modulus(const json& scenario, std::uint64_t seed, int trials, int jobs)
{
    const ComplexPtr K = build_space(need(scenario, "space"));
    const double eps = get_or(scenario, "eps", 0.3);
    const json grid = get_or(scenario, "delta_grid", json{{"min", 1e-7}, {"max", 1e-1}, {"count", 13}});
    const double lo = get_or(grid, "min", 1e-7);
    const double hi = get_or(grid, "max", 1e-1);
    const int count = get_or(grid, "count", 13);
    if (!(lo > 0.0 && hi >= lo && count >= 1))
        throw ConfigError("delta_grid needs 0 < min <= max and count >= 1");

    // One fixed tuple for the whole curve, drawn from the scenario seed.
    Rng tuple_rng(seed);
    const TupleSpec spec = make_tuple(K, scenario, tuple_rng);
    json fixed = scenario;
    fixed["tuple"] = spec.sources;
    const double paper = paper_delta(eps, spec.tuple.max_sup_norm()).delta;

    std::vector<double> deltas(count);
    for (int j = 0; j < count; ++j)
        deltas[j] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1));

    const std::size_t total = static_cast<std::size_t>(count) * trials;
    std::vector<DecomposeTrial> results(total);
    parallel_for(total, jobs, [&](std::size_t idx) {
        const std::size_t j = idx / trials;
        // Strictly inside the delta-ball.
        results[idx] = decompose_trial(K, fixed, seed + idx, 0.999 * deltas[j]);
    });

    ScenarioResult out;
    out.table.header = {"delta", "max_component_distance", "max_tuple_distance", "smoothed", "within_paper_delta"};
    json records = json::array();
    json curve = json::array();
    bool ok = true;
    double running = 0.0;
    for (int j = 0; j < count; ++j) {
        double max_comp = 0.0;
        double max_tuple = 0.0;
        for (int t = 0; t < trials; ++t) {
            const std::size_t idx = static_cast<std::size_t>(j) * trials + t;
            json rec = results[idx].record;
            rec["trial"] = idx;
            rec["delta_index"] = j;
            const bool errored = rec["outcome"] == "error";
            const bool residual_ok = !errored && rec["residual"].get<double>() <= 1e-9 * (1.0 + rec["input_gap"].get<double>() + 10.0);
            if (!errored) {
                max_comp = std::max(max_comp, rec["max_component_distance"].get<double>());
                max_tuple = std::max(max_tuple, rec["tuple_distance"].get<double>());
            }
            ok &= residual_ok;
            rec["outcome"] = errored ? "error" : residual_ok ? "pass" : "fail";
            records.push_back(std::move(rec));
        }
        running = std::max(running, max_comp);
        const bool inside = deltas[j] <= paper;
        if (inside && !(running < eps))
            ok = false;
        curve.push_back({{"delta", deltas[j]},
                         {"max_component_distance", max_comp},
                         {"max_tuple_distance", max_tuple},
                         {"smoothed", running},
                         {"within_paper_delta", inside}});
        out.table.rows.push_back({fmt(deltas[j]), fmt(max_comp), fmt(max_tuple), fmt(running), inside ? "1" : "0"});
    }
    out.report["tuple"] = spec.sources;
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", total}, {"paper_delta", paper}, {"curve", std::move(curve)}};
    out.all_pass = ok;
    return out;
}

// ---------------------------------------------------------------------------
// obstruction

inline ScenarioResult run_obstruction(const json& scenario, std::uint64_t seed, int trials, int /*jobs*/)
{
    const std::string mode = need(scenario, "mode").get<std::string>();
    if (mode != "sign" && mode != "winding")
        throw ConfigError("obstruction mode must be 'sign' or 'winding'");
    const ComplexPtr K = build_space(need(scenario, "space"));
    const double eps = get_or(scenario, "eps", 0.3);
    const bool expect = get_or(scenario, "expect_certificate", true);
    const VertexFunction g = make_target(K, need(scenario, "g").get<std::string>());

    ScenarioResult out;
    json records = json::array();
    bool ok = true;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed + t);
        const TupleSpec spec = make_tuple(K, scenario, rng);
        json rec{{"trial", t}, {"seed", seed + t}, {"tuple", spec.sources}};
        std::optional<ObstructionCertificate> cert;
        try {
            if (mode == "sign") {
                if (spec.tuple.size() != 1)
                    throw ConfigError("sign obstruction takes one function");
                cert = sign_obstruction(spec.tuple[0].values(), g.values());
            } else {
                cert = certify_nonopenness(K, spec.tuple, g);
            }
        } catch (const Error& e) {
            rec["outcome"] = "error";
            rec["error"] = std::string(to_string(e.code()));
            rec["message"] = e.what();
            ok = false;
            records.push_back(std::move(rec));
            continue;
        }
        bool pass = cert.has_value() == expect;
        if (cert) {
            json c{{"kind", mode}, {"lower_bound", cert->lower_bound}};
            if (cert->sign)
                c["evidence"] = {{"distance_plus", cert->sign->distance_plus},
                                 {"distance_minus", cert->sign->distance_minus}};
            if (cert->winding)
                c["evidence"] = {{"cycle_length", cert->winding->cycle.size()},
                                 {"winding", cert->winding->winding},
                                 {"margin", cert->winding->margin},
                                 {"max_step", cert->winding->max_step},
                                 {"component_lower_bound", cert->winding->component_lower_bound}};
            rec["certificate"] = std::move(c);

            // Cross-check: decompose must refuse or stay at least the bound away.
            json cross;
            try {
                const auto report = decompose(K, spec.tuple, g, eps, seed + t);
                const double bound = cert->winding ? cert->winding->component_lower_bound : cert->lower_bound;
                cross = {{"outcome", "decomposed"}, {"tuple_distance", report.tuple_distance}, {"bound", bound}};
                const bool consistent = report.tuple_distance >= bound;
                cross["consistent"] = consistent;
                pass &= consistent;
            } catch (const Error& e) {
                cross = {{"outcome", "error"}, {"error", std::string(to_string(e.code()))}, {"consistent", true}};
            }
            rec["cross_check"] = std::move(cross);
        }
        rec["outcome"] = pass ? "pass" : "fail";
        ok &= pass;
        records.push_back(std::move(rec));
    }
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", trials}};
    out.all_pass = ok;
    return out;
}

// ---------------------------------------------------------------------------
// zerodim

inline ScenarioResult run_zerodim(const json& scenario, std::uint64_t seed, int trials, int jobs)
{
    const int k_max = get_or(scenario, "k", 8);
    if (k_max < 1 || k_max > 20)
        throw ConfigError("k must be in 1..20");
    std::vector<json> results(trials);
    std::vector<char> passed(trials, 0);
    parallel_for(trials, jobs, [&](std::size_t t) {
        Rng rng(seed + t);
        const std::size_t k = 1 + rng.below(k_max);
        std::vector<double> f(k), g(k);
        bool has_zero = false;
        for (std::size_t v = 0; v < k; ++v) {
            f[v] = rng.uniform() < 0.1 ? 0.0 : rng.uniform(-2.0, 2.0);
            has_zero |= f[v] == 0.0;
            g[v] = std::max(0.0, f[v] * f[v] + rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-6.0, 0.0)));
        }
        const auto h = sqrt_near(f, g);
        double dist = 0.0;
        double gap = 0.0;
        for (std::size_t v = 0; v < k; ++v) {
            dist = std::max(dist, std::abs(h[v] - f[v]));
            gap = std::max(gap, std::abs(g[v] - f[v] * f[v]));
        }
        const bool modulus_ok = dist <= std::sqrt(gap);
        const auto best = brute_force_best({f}, g);
        const bool oracle_ok = dist >= best.distance && (has_zero || dist == best.distance);
        passed[t] = modulus_ok && oracle_ok;
        results[t] = {{"trial", t},
                      {"seed", seed + t},
                      {"k", k},
                      {"digest", digest({f, g})},
                      {"distance", dist},
                      {"modulus_bound", std::sqrt(gap)},
                      {"brute_force_distance", best.distance},
                      {"f_has_zero", has_zero},
                      {"outcome", passed[t] ? "pass" : "fail"}};
    });

    ScenarioResult out;
    std::size_t passes = 0;
    out.table.header = {"trial", "k", "distance", "modulus_bound", "brute_force_distance", "outcome"};
    for (int t = 0; t < trials; ++t) {
        passes += passed[t];
        const json& r = results[t];
        out.table.rows.push_back({std::to_string(t), std::to_string(r["k"].get<std::size_t>()), fmt(r["distance"]),
                                  fmt(r["modulus_bound"]), fmt(r["brute_force_distance"]), r["outcome"]});
    }
    out.report["trials"] = results;
    json aggregates{{"trials", trials}, {"pass_count", passes}};
    if (scenario.contains("U") && scenario.contains("g_values")) {
        const auto g = scenario.at("g_values").get<std::vector<double>>();
        const DiscreteSpace X(static_cast<int>(g.size()));
        const auto U = X.subset(scenario.at("U").get<std::vector<int>>());
        aggregates["clopen_sqrt"] = clopen_sqrt(X, U, g);
    }
    out.report["aggregates"] = std::move(aggregates);
    out.all_pass = passes == static_cast<std::size_t>(trials);
    return out;
}

// ---------------------------------------------------------------------------
// matrix kinds

inline SymmetricMatrix random_pd(Rng& rng, int k)
{
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            a(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd b = a * a.transpose();
    b.diagonal().array() += 0.1;
    return SymmetricMatrix(b);
}

inline ScenarioResult run_matrix_roots(const json& scenario, std::uint64_t seed, int trials, int /*jobs*/)
{
    ScenarioResult out;
    json records = json::array();
    std::size_t passes = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed + t);
        const SymmetricMatrix B = scenario.contains("matrix") ? SymmetricMatrix(to_matrix(scenario.at("matrix")))
                                                              : random_pd(rng, get_or(scenario, "size", 2));
        json rec{{"trial", t}, {"seed", seed + t}, {"matrix", from_matrix(B.matrix())}};
        try {
            const auto e = enumerate_sqrts(B, DegeneratePolicy::PsdRootOnly);
            double worst = 0.0;
            int psd = 0;
            json roots = json::array();
            for (const auto& r : e.roots) {
                worst = std::max(worst, op_norm(r.matrix.matrix() * r.matrix.matrix() - B.matrix()) / B.norm());
                psd += r.matrix.spectrum().eigenvalues().minCoeff() >= -1e-12;
                roots.push_back({{"signs", r.signs}, {"root", from_matrix(r.matrix.matrix())}});
            }
            const bool complete = e.degenerate || e.roots.size() == (std::size_t{1} << e.eigenvalues.size());
            const bool pass = worst <= 1e-9 && psd == 1 && complete;
            rec["roots"] = std::move(roots);
            rec["degenerate"] = e.degenerate;
            rec["max_relative_residual"] = worst;
            rec["outcome"] = pass ? "pass" : "fail";
            passes += pass;
        } catch (const Error& err) {
            rec["outcome"] = "error";
            rec["error"] = std::string(to_string(err.code()));
            rec["message"] = err.what();
        }
        records.push_back(std::move(rec));
    }
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", trials}, {"pass_count", passes}};
    out.all_pass = passes == static_cast<std::size_t>(trials);
    return out;
}

inline std::vector<double> sweep_values(const json& scenario, const char* list_key, const char* range_key,
                                        std::vector<double> fallback)
{
    if (scenario.contains(list_key))
        return scenario.at(list_key).get<std::vector<double>>();
    if (!scenario.contains(range_key))
        return fallback;
    const json& r = scenario.at(range_key);
    const double from = need(r, "from").get<double>();
    const double to = need(r, "to").get<double>();
    const double step = get_or(r, "step", 1.0);
    if (!(step > 0.0) || to < from)
        throw ConfigError(std::string(range_key) + " needs from <= to and step > 0");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = from + i * step;
        if (v > to + 1e-9 * step)
            break;
        out.push_back(v);
    }
    return out;
}

inline ScenarioResult run_matrix_counterexample(const json& scenario, std::uint64_t seed, int trials, int /*jobs*/)
{
    std::vector<double> rs = sweep_values(scenario, "r_values", "r_sweep", {});
    if (rs.empty())
        for (int i = 1; i <= 19; ++i)
            rs.push_back(0.05 * i);

    ScenarioResult out;
    out.table.header = {"r", "min_distance", "argmin_signs", "d_pp", "d_mp", "d_pm", "d_mm", "max_form_error"};
    json table = json::array();
    bool ok = true;
    for (double r : rs) {
        const CounterexampleReport rep = counterexample_report(r);
        double form = 0.0;
        json roots = json::array();
        std::vector<std::string> row{fmt(r), fmt(rep.min_distance)};
        std::string signs;
        for (int s : rep.roots[rep.argmin].signs)
            signs += s > 0 ? '+' : '-';
        row.push_back(signs);
        for (const auto& root : rep.roots) {
            form = std::max(form, root.form_error);
            roots.push_back({{"signs", root.signs}, {"a", root.a}, {"s", root.s}, {"distance", root.distance}});
            row.push_back(fmt(root.distance));
        }
        row.push_back(fmt(form));
        out.table.rows.push_back(std::move(row));
        ok &= rep.min_distance >= 1.0 - 1e-9 && form <= 1e-9;
        table.push_back({{"r", r}, {"min_distance", rep.min_distance}, {"max_form_error", form}, {"roots", roots}});
    }
    json records = json::array();
    for (int t = 0; t < trials; ++t)
        records.push_back({{"trial", t}, {"seed", seed + t}, {"table", table}, {"outcome", ok ? "pass" : "fail"}});
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", trials}, {"points", rs.size()}, {"all_at_least_one", ok}};
    out.all_pass = ok;
    return out;
}

inline ScenarioResult run_symmetry_probe(const json& scenario, std::uint64_t seed, int trials, int /*jobs*/)
{
    const Eigen::MatrixXd q = scenario.contains("q") ? to_matrix(scenario.at("q"))
                                                     : Eigen::MatrixXd::Constant(2, 2, 0.5);
    std::vector<double> ns = sweep_values(scenario, "n_values", "n_sweep", {});
    if (ns.empty())
        for (int n = 1; n <= 100; ++n)
            ns.push_back(n);

    ScenarioResult out;
    out.table.header = {"n", "min_distance", "roots", "degenerate"};
    json table = json::array();
    bool ok = true;
    bool commutes = false;
    for (double nd : ns) {
        const int n = static_cast<int>(std::lround(nd));
        const SymmetryProbeReport rep = symmetry_probe(SymmetricMatrix(q), n);
        commutes = rep.commutes;
        if (!rep.commutes)
            ok &= rep.min_distance >= 1.0 - 1e-9;
        table.push_back({{"n", n}, {"min_distance", rep.min_distance}, {"distances", rep.distances},
                         {"degenerate", rep.degenerate}, {"symmetry_is_root", rep.symmetry_is_root}});
        out.table.rows.push_back({std::to_string(n), fmt(rep.min_distance), std::to_string(rep.roots.size()),
                                  rep.degenerate ? "1" : "0"});
    }
    json records = json::array();
    for (int t = 0; t < trials; ++t)
        records.push_back({{"trial", t}, {"seed", seed + t}, {"table", table}, {"outcome", ok ? "pass" : "fail"}});
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", trials}, {"q_commutes_with_s", commutes}, {"bound_holds", ok}};
    out.all_pass = ok;
    return out;
}

inline ScenarioResult run_sos_solve(const json& scenario, std::uint64_t seed, int trials, int /*jobs*/)
{
    std::vector<Eigen::MatrixXd> x;
    for (const auto& m : need(scenario, "x"))
        x.push_back(to_matrix(m));
    const Eigen::MatrixXd b = to_matrix(need(scenario, "b"));

    ScenarioResult out;
    json records = json::array();
    std::size_t passes = 0;
    for (int t = 0; t < trials; ++t) {
        SosOptions opts;
        opts.max_iter = get_or(scenario, "max_iter", 200);
        opts.tol = get_or(scenario, "tol", 1e-8);
        opts.seed = seed + t;
        json rec{{"trial", t}, {"seed", seed + t}};
        try {
            const SosResult r = solve_sum_of_squares(x, b, opts);
            json ys = json::array();
            for (const auto& y : r.y)
                ys.push_back(from_matrix(y));
            rec["converged"] = r.converged;
            rec["residual"] = r.residual;
            rec["distance"] = r.distance;
            rec["iterations"] = r.iterations;
            rec["y"] = std::move(ys);
            rec["message"] = r.message;
            rec["outcome"] = r.converged ? "pass" : "fail";
            passes += r.converged;
        } catch (const Error& err) {
            rec["outcome"] = "error";
            rec["error"] = std::string(to_string(err.code()));
            rec["message"] = err.what();
        }
        records.push_back(std::move(rec));
    }
    out.report["trials"] = std::move(records);
    out.report["aggregates"] = {{"trials", trials}, {"pass_count", passes}};
    out.all_pass = passes == static_cast<std::size_t>(trials);
    return out;
}

} // namespace detail

/// Runs one scenario in memory. Throws ConfigError for malformed input.
inline ScenarioResult run_scenario(json scenario, const RunOptions& options = {})
{
    if (!scenario.is_object())
        throw ConfigError("scenario must be a JSON object");
    if (options.seed)
        scenario["seed"] = *options.seed;
    const std::string kind = detail::need(scenario, "kind").get<std::string>();
    const auto seed = static_cast<std::uint64_t>(detail::get_or<std::int64_t>(scenario, "seed", 0));
    const int trials = detail::get_or(scenario, "trials", 1);
    if (trials < 1)
        throw ConfigError("trials must be at least 1");

    using Runner = ScenarioResult (*)(const json&, std::uint64_t, int, int);
    static const std::map<std::string, Runner> runners{
        {"decompose", detail::run_decompose},
        {"openness-modulus", detail::run_openness_modulus},
        {"obstruction", detail::run_obstruction},
        {"zerodim", detail::run_zerodim},
        {"matrix-roots", detail::run_matrix_roots},
        {"matrix-counterexample", detail::run_matrix_counterexample},
        {"symmetry-probe", detail::run_symmetry_probe},
        {"sos-solve", detail::run_sos_solve},
    };
    auto it = runners.find(kind);
    if (it == runners.end())
        throw ConfigError("unknown scenario kind '" + kind + "'");

    const auto start = std::chrono::steady_clock::now();
    ScenarioResult result = [&] {
        try {
            return it->second(scenario, seed, trials, options.jobs);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed scenario: ") + e.what());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidArgument)
                throw ConfigError(e.what());
            throw;
        }
    }();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json report{{"scenario", scenario}};
    report.update(result.report);
    report["all_pass"] = result.all_pass;
    report["wall_time_s"] = seconds;
    result.report = std::move(report);
    return result;
}

inline void write_csv(const CsvTable& table, std::ostream& out)
{
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows)
        line(row);
}

/// Built-in scenarios for `sqopen demo <name>`.
inline const std::map<std::string, json>& demo_scenarios()
{
    static const std::map<std::string, json> demos{
        {"decompose-interval",
         {{"name", "decompose-interval"}, {"kind", "decompose"}, {"space", {{"kind", "interval"}, {"resolution", 64}}},
          {"m", 2}, {"eps", 0.3}, {"trials", 100}, {"seed", 1}}},
        {"decompose-circle",
         {{"name", "decompose-circle"}, {"kind", "decompose"}, {"space", {{"kind", "circle"}, {"resolution", 64}}},
          {"m", 2}, {"eps", 0.3}, {"trials", 100}, {"seed", 2}}},
        {"decompose-disk",
         {{"name", "decompose-disk"}, {"kind", "decompose"}, {"space", {{"kind", "disk"}, {"resolution", 18}}},
          {"m", 3}, {"eps", 0.3}, {"trials", 100}, {"seed", 3}}},
        {"openness-modulus",
         {{"name", "openness-modulus"}, {"kind", "openness-modulus"},
          {"space", {{"kind", "interval"}, {"resolution", 64}}}, {"tuple", {"x", "0.5*x^2 - 0.1"}}, {"eps", 0.3},
          {"trials", 10}, {"seed", 4}, {"delta_grid", {{"min", 1e-7}, {"max", 1e-1}, {"count", 13}}}}},
        {"obstruction-sign",
         {{"name", "obstruction-sign"}, {"kind", "obstruction"}, {"mode", "sign"},
          {"space", {{"kind", "interval"}, {"resolution", 64}}}, {"tuple", {"x"}}, {"g", "x^2 + 0.01"}}},
        {"obstruction-winding",
         {{"name", "obstruction-winding"}, {"kind", "obstruction"}, {"mode", "winding"},
          {"space", {{"kind", "disk"}, {"resolution", 12}}}, {"tuple", {"x", "y"}}, {"g", "x^2 + y^2 + 0.01"}}},
        {"zerodim",
         {{"name", "zerodim"}, {"kind", "zerodim"}, {"k", 8}, {"trials", 1000}, {"seed", 5},
          {"U", {1, 2}}, {"g_values", {4.0, 1.0, 9.0, 0.25}}}},
        {"matrix-roots",
         {{"name", "matrix-roots"}, {"kind", "matrix-roots"}, {"matrix", {{1.0, 0.6}, {0.6, 1.0}}}}},
        {"matrix-counterexample",
         {{"name", "matrix-counterexample"}, {"kind", "matrix-counterexample"},
          {"r_sweep", {{"from", 0.05}, {"to", 0.95}, {"step", 0.05}}}}},
        {"symmetry-probe",
         {{"name", "symmetry-probe"}, {"kind", "symmetry-probe"}, {"q", {{0.5, 0.5}, {0.5, 0.5}}},
          {"n_sweep", {{"from", 1}, {"to", 100}, {"step", 1}}}}},
        {"sos-probe",
         {{"name", "sos-probe"}, {"kind", "sos-solve"}, {"x", {{{1.0, 0.0}, {0.0, -1.0}}, {{0.0, 0.0}, {0.0, 0.0}}}},
          {"b", {{1.05, 0.05}, {0.05, 1.05}}}, {"seed", 6}}},
    };
    return demos;
}

} // namespace sqopen::cli
