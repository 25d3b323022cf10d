#pragma once
// Experiment runner: seeded replications over algorithm grids, summary
// statistics and CSV/Markdown rendering.

#include "blpinner/datagen.hpp"
#include "blpinner/dynamic_blp.hpp"
#include "blpinner/rcnl.hpp"
#include "blpinner/static_rcl.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace blp::bench {

enum class Suite { static_j25, static_j250, static_2types, rcnl, large_hetero, dynamic_pf, dynamic_ivs, stepsize_sweep };

inline constexpr Suite all_suites[] = {Suite::static_j25,   Suite::static_j250, Suite::static_2types,
                                       Suite::rcnl,         Suite::large_hetero, Suite::dynamic_pf,
                                       Suite::dynamic_ivs,  Suite::stepsize_sweep};

inline std::string_view to_string(Suite s) {
    switch (s) {
        case Suite::static_j25: return "static_j25";
        case Suite::static_j250: return "static_j250";
        case Suite::static_2types: return "static_2types";
        case Suite::rcnl: return "rcnl";
        case Suite::large_hetero: return "large_hetero";
        case Suite::dynamic_pf: return "dynamic_pf";
        case Suite::dynamic_ivs: return "dynamic_ivs";
        case Suite::stepsize_sweep: return "stepsize_sweep";
    }
    return "?";
}

inline Suite parse_suite(std::string_view s) {
    for (Suite x : all_suites)
        if (to_string(x) == s) return x;
    throw std::invalid_argument("unknown suite: " + std::string(s));
}

// mapping: delta | V | IV | kalouptsidi_mixed | kalouptsidi_tilde | joint | nested
struct AlgorithmSpec {
    std::string mapping = "delta";
    accel::Method method = accel::Method::plain;
    accel::StepRule step_rule = accel::StepRule::S3;
    double gamma = 1.0;
    std::optional<bool> blocks;  // unset: per-period blocks for dynamic PF spectral/SQUAREM

    bool uses_gamma() const { return mapping.rfind("kalouptsidi", 0) != 0; }

    std::string label() const {
        std::string s = mapping;
        if (uses_gamma()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "-(%g)", gamma);
            s += buf;
        }
        if (method != accel::Method::plain) {
            s += "+";
            s += accel::to_string(method);
        }
        if (method == accel::Method::spectral || method == accel::Method::squarem) {
            s += "(";
            s += accel::to_string(step_rule);
            s += ")";
        }
        if (blocks && !*blocks) s += "[scalar]";
        return s;
    }
};

struct ExperimentConfig {
    Suite suite = Suite::static_j25;
    std::vector<AlgorithmSpec> algorithms;
    int replications = 1;
    std::uint64_t seed = 1;
    double tolerance = 1e-13;
    long max_evaluations = 1000;
    int anderson_memory = 5;
    std::string out_dir = ".";
    int threads = 1;
    // instance size; 0 keeps the suite default
    Index J = 0, I = 0, T = 0;
    double rho = 0.5;
    Index nests = 3;

    void validate() const {
        if (replications < 1) throw std::invalid_argument("ExperimentConfig: replications >= 1");
        if (algorithms.empty()) throw std::invalid_argument("ExperimentConfig: empty algorithm list");
        if (!(tolerance > 0.0) || max_evaluations < 1) throw std::invalid_argument("ExperimentConfig: bad stopping rule");
        if (threads < 1) throw std::invalid_argument("ExperimentConfig: threads >= 1");
    }
};

struct Record {
    std::string suite;
    int replication = 0;
    std::string algorithm;
    long evaluations = 0;
    bool converged = false;
    std::string termination;
    double dist = std::numeric_limits<double>::quiet_NaN();
    double wall_ms = 0.0;
    // in memory only
    double bellman_residual = std::numeric_limits<double>::quiet_NaN();
    Vector delta;  // flattened solution
};

namespace detail {

inline std::vector<AlgorithmSpec> grid(const std::vector<std::string>& mappings, const std::vector<double>& gammas,
                                       const std::vector<accel::Method>& methods) {
    std::vector<AlgorithmSpec> out;
    for (const auto& m : mappings)
        for (double g : gammas)
            for (auto me : methods) out.push_back(AlgorithmSpec{m, me, accel::StepRule::S3, g, std::nullopt});
    return out;
}

inline const std::vector<accel::Method> all_methods{accel::Method::plain, accel::Method::anderson,
                                                    accel::Method::spectral, accel::Method::squarem};

}  // namespace detail

// Suite defaults: 50 static / 20 dynamic replications,
// tolerance 1e-13 static and 1e-12 dynamic, caps 1000/2000/3000.
inline ExperimentConfig default_config(Suite s) {
    ExperimentConfig c;
    c.suite = s;
    switch (s) {
        case Suite::static_j25:
        case Suite::static_j250:
            c.replications = 50;
            c.algorithms = detail::grid({"delta", "V"}, {0.0, 1.0}, detail::all_methods);
            break;
        case Suite::static_2types:
            c.replications = 50;
            c.algorithms = detail::grid({"delta", "V"}, {0.0, 1.0}, {accel::Method::plain});
            c.algorithms.push_back(AlgorithmSpec{"kalouptsidi_mixed", accel::Method::plain});
            c.algorithms.push_back(AlgorithmSpec{"kalouptsidi_tilde", accel::Method::plain});
            break;
        case Suite::rcnl:
            c.replications = 50;
            c.algorithms = detail::grid({"delta", "IV"}, {0.0, 1.0}, detail::all_methods);
            break;
        case Suite::large_hetero:
            c.replications = 1;
            c.max_evaluations = 2000;
            c.algorithms = detail::grid({"delta", "V"}, {0.0, 1.0}, {accel::Method::plain, accel::Method::spectral});
            break;
        case Suite::dynamic_pf:
            c.replications = 20;
            c.tolerance = 1e-12;
            c.max_evaluations = 3000;
            c.algorithms = detail::grid({"V"}, {0.0, 1.0}, detail::all_methods);
            for (auto& a : detail::grid({"joint"}, {0.0, 1.0}, {accel::Method::plain, accel::Method::anderson}))
                c.algorithms.push_back(a);
            break;
        case Suite::dynamic_ivs:
            c.replications = 20;
            c.tolerance = 1e-12;
            c.max_evaluations = 3000;
            c.algorithms = detail::grid({"V"}, {0.0, 1.0}, detail::all_methods);
            for (auto& a : detail::grid({"joint"}, {0.0, 1.0}, {accel::Method::plain, accel::Method::anderson}))
                c.algorithms.push_back(a);
            break;
        case Suite::stepsize_sweep:
            c.replications = 50;
            for (const char* m : {"delta", "V"})
                for (auto me : {accel::Method::spectral, accel::Method::squarem})
                    for (auto r : {accel::StepRule::S1, accel::StepRule::S2, accel::StepRule::S3})
                        c.algorithms.push_back(AlgorithmSpec{m, me, r, 1.0, std::nullopt});
            break;
    }
    return c;
}

namespace detail {

inline accel::AccelConfig accel_config(const ExperimentConfig& c, const AlgorithmSpec& a, bool blocks_default) {
    accel::AccelConfig ac;
    ac.method = a.method;
    ac.tolerance = c.tolerance;
    ac.max_evaluations = c.max_evaluations;
    ac.anderson_memory = c.anderson_memory;
    ac.step_rule = a.step_rule;
    ac.use_blocks = a.blocks.value_or(blocks_default) &&
                    (a.method == accel::Method::spectral || a.method == accel::Method::squarem);
    ac.record_history = false;
    return ac;
}

inline Record make_record(const ExperimentConfig& c, int rep, const AlgorithmSpec& a, const accel::SolveOutcome& o,
                          double dist, Vector delta) {
    Record r;
    r.suite = std::string(to_string(c.suite));
    r.replication = rep;
    r.algorithm = a.label();
    r.evaluations = o.evaluations;
    r.converged = o.converged;
    r.termination = std::string(accel::to_string(o.termination));
    r.dist = dist;
    r.delta = std::move(delta);
    return r;
}

inline bool is_static(Suite s) {
    return s == Suite::static_j25 || s == Suite::static_j250 || s == Suite::static_2types ||
           s == Suite::stepsize_sweep || s == Suite::large_hetero;
}

inline StaticDgpParams static_params(const ExperimentConfig& c) {
    StaticDgpParams p;
    if (c.suite == Suite::static_j250 || c.suite == Suite::stepsize_sweep) p.J = 250;
    if (c.suite == Suite::static_2types) {
        p.J = 250;
        p.I = 2;
    }
    if (c.J > 0) p.J = c.J;
    if (c.I > 0) p.I = c.I;
    return p;
}

inline void check_binary_gamma(const AlgorithmSpec& a) {
    if (a.uses_gamma() && a.gamma != 0.0 && a.gamma != 1.0)
        throw std::invalid_argument("gamma must be 0 or 1 for static mapping " + a.mapping);
}

inline Mapping static_mapping(const AlgorithmSpec& a) {
    check_binary_gamma(a);
    if (a.mapping == "delta") return a.gamma == 0.0 ? Mapping::delta0 : Mapping::delta1;
    if (a.mapping == "V") return a.gamma == 0.0 ? Mapping::V0 : Mapping::V1;
    if (a.mapping == "kalouptsidi_mixed") return Mapping::kalouptsidi_mixed;
    if (a.mapping == "kalouptsidi_tilde") return Mapping::kalouptsidi_tilde;
    throw std::invalid_argument("static suites do not support mapping " + a.mapping);
}

template <class F>
Record timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Record r = f();
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// All algorithms of one replication, in configuration order.
inline std::vector<Record> run_replication(const ExperimentConfig& c, int rep) {
    std::vector<Record> out;
    const auto seed = c.seed;
    const auto idx = static_cast<std::uint64_t>(rep);
    if (is_static(c.suite)) {
        StaticMarket mkt;
        if (c.suite == Suite::large_hetero) {
            mkt = large_heterogeneity_market();
        } else {
            const StaticInstance inst = gen_static_market(static_params(c), seed, idx);
            SeededRng rng(seed, idx, 1000);
            mkt = candidate_market(inst, draw_theta(inst.true_sd, rng));
        }
        for (const auto& a : c.algorithms)
            out.push_back(timed([&] {
                const InnerSolution s = solve_inner(mkt, static_mapping(a), accel_config(c, a, false));
                return make_record(c, rep, a, s.outcome, s.dist, s.delta);
            }));
    } else if (c.suite == Suite::rcnl) {
        StaticDgpParams p;
        if (c.I > 0) p.I = c.I;
        const Index per_nest = c.J > 0 ? std::max<Index>(1, c.J / c.nests) : 25;
        const NestedInstance inst = gen_nested_market(p, c.nests, per_nest, c.rho, seed, idx);
        SeededRng rng(seed, idx, 1000);
        const NestedMarket mkt = candidate_market(inst, draw_theta(inst.true_sd, rng));
        for (const auto& a : c.algorithms)
            out.push_back(timed([&] {
                check_binary_gamma(a);
                NestedMapping m;
                if (a.mapping == "delta") m = a.gamma == 0.0 ? NestedMapping::delta0 : NestedMapping::delta1;
                else if (a.mapping == "IV") m = a.gamma == 0.0 ? NestedMapping::IV0 : NestedMapping::IV1;
                else throw std::invalid_argument("rcnl suite does not support mapping " + a.mapping);
                const InnerSolution s = rcnl_solve(mkt, m, accel_config(c, a, false));
                return make_record(c, rep, a, s.outcome, s.dist, s.delta);
            }));
    } else {
        DynamicDgpParams p;
        if (c.suite == Suite::dynamic_ivs) p.T = 25;
        if (c.J > 0) p.J = c.J;
        if (c.I > 0) p.I = c.I;
        if (c.T > 0) p.T = c.T;
        const DynamicInstance inst = gen_dynamic_market(p, seed, idx);
        SeededRng rng(seed, idx, 1000);
        const DurableMarket mkt = candidate_market(inst, draw_theta(inst.true_sd, rng));
        const bool pf = c.suite == Suite::dynamic_pf;
        for (const auto& a : c.algorithms)
            out.push_back(timed([&] {
                DynamicOptions o;
                o.gamma = a.gamma;
                const accel::AccelConfig ac = accel_config(c, a, pf);
                DynamicResult res;
                if (a.mapping == "V") {
                    res = pf ? pf_solve(mkt, o, ac) : static_cast<DynamicResult>(ivs_solve(mkt, o, IvsGrid{}, ac));
                } else if (a.mapping == "joint") {
                    res = pf ? traditional_joint_solve(mkt, o, ac)
                             : static_cast<DynamicResult>(ivs_joint_solve(mkt, o, IvsGrid{}, ac));
                } else if (a.mapping == "nested" && pf) {
                    accel::AccelConfig inner = ac;
                    inner.method = accel::Method::plain;
                    res = traditional_nested_solve(mkt, o, inner, ac);
                } else {
                    throw std::invalid_argument("dynamic suites do not support mapping " + a.mapping);
                }
                Record r = make_record(c, rep, a, res.outcome, res.dist,
                                       Eigen::Map<const Vector>(res.solution.delta.data(), res.solution.delta.size()));
                r.bellman_residual = res.bellman_residual;
                return r;
            }));
    }
    return out;
}

}  // namespace detail

// One record per replication x algorithm, ordered by (replication,
// algorithm position) whatever the thread count.
inline std::vector<Record> run_suite(const ExperimentConfig& c) {
    c.validate();
    std::vector<std::vector<Record>> per_rep(static_cast<std::size_t>(c.replications));
    const int nthreads = std::min(c.threads, c.replications);
    if (nthreads <= 1) {
        for (int r = 0; r < c.replications; ++r) per_rep[r] = detail::run_replication(c, r);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nthreads));
        for (int k = 0; k < nthreads; ++k)
            pool.emplace_back([&, k] {
                try {
                    for (int r = k; r < c.replications; r += nthreads) per_rep[r] = detail::run_replication(c, r);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    std::vector<Record> out;
    for (auto& v : per_rep)
        for (auto& r : v) out.push_back(std::move(r));
    return out;
}

// ---- summary ----

struct SummaryRow {
    std::string algorithm;
    int runs = 0;
    double mean_evaluations = 0.0;
    double min_evaluations = 0.0, p25_evaluations = 0.0, median_evaluations = 0.0, p75_evaluations = 0.0,
           max_evaluations = 0.0;
    double converged_pct = 0.0;
    double mean_log10_dist = 0.0;  // NaN when some DIST is not finite
    double dist_ok_pct = 0.0;      // DIST < 1e-12
    double mean_wall_ms = 0.0;
};

// Nearest rank: the ceil(p n)-th smallest value, p = 0 giving the minimum.
inline double nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("nearest_rank: empty");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

inline constexpr double dist_threshold = 1e-12;
inline constexpr double dist_floor = 1e-18;

// Rows sorted by algorithm label.
inline std::vector<SummaryRow> summarize(const std::vector<Record>& records) {
    std::map<std::string, std::vector<const Record*>> groups;
    for (const auto& r : records) groups[r.algorithm].push_back(&r);
    std::vector<SummaryRow> rows;
    for (const auto& [label, recs] : groups) {
        SummaryRow row;
        row.algorithm = label;
        row.runs = static_cast<int>(recs.size());
        std::vector<double> ev;
        double conv = 0, ok = 0, logd = 0, wall = 0;
        bool finite = true;
        for (const Record* r : recs) {
            ev.push_back(static_cast<double>(r->evaluations));
            conv += r->converged;
            ok += std::isfinite(r->dist) && r->dist < dist_threshold;
            if (std::isfinite(r->dist)) logd += std::log10(std::max(r->dist, dist_floor));
            else finite = false;
            wall += r->wall_ms;
        }
        const double n = static_cast<double>(recs.size());
        double sum = 0;
        for (double e : ev) sum += e;
        row.mean_evaluations = sum / n;
        row.min_evaluations = nearest_rank(ev, 0.0);
        row.p25_evaluations = nearest_rank(ev, 0.25);
        row.median_evaluations = nearest_rank(ev, 0.5);
        row.p75_evaluations = nearest_rank(ev, 0.75);
        row.max_evaluations = nearest_rank(ev, 1.0);
        row.converged_pct = 100.0 * conv / n;
        row.dist_ok_pct = 100.0 * ok / n;
        row.mean_log10_dist = finite ? logd / n : std::numeric_limits<double>::quiet_NaN();
        row.mean_wall_ms = wall / n;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline const SummaryRow* find_row(const std::vector<SummaryRow>& rows, const std::string& label) {
    for (const auto& r : rows)
        if (r.algorithm == label) return &r;
    return nullptr;
}

// ---- rendering ----

enum class Format { csv, markdown };

inline Format parse_format(std::string_view s) {
    if (s == "csv") return Format::csv;
    if (s == "md" || s == "markdown") return Format::markdown;
    throw std::invalid_argument("unknown format: " + std::string(s));
}

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols{
        "algorithm",  "runs",       "mean_evals",    "min_evals",       "p25_evals",   "median_evals",
        "p75_evals",  "max_evals",  "converged_pct", "mean_log10_dist", "dist_ok_pct", "mean_wall_ms"};
    return cols;
}

namespace detail {

inline std::string fmt(double v, int decimals) {
    if (!std::isfinite(v)) return "NaN";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::vector<std::string> cells(const SummaryRow& r) {
    return {r.algorithm,
            std::to_string(r.runs),
            fmt(r.mean_evaluations, 2),
            fmt(r.min_evaluations, 2),
            fmt(r.p25_evaluations, 2),
            fmt(r.median_evaluations, 2),
            fmt(r.p75_evaluations, 2),
            fmt(r.max_evaluations, 2),
            fmt(r.converged_pct, 0),
            fmt(r.mean_log10_dist, 1),
            fmt(r.dist_ok_pct, 0),
            fmt(r.mean_wall_ms, 2)};
}

}  // namespace detail

inline std::string render(const std::vector<SummaryRow>& rows, Format f) {
    std::ostringstream os;
    const auto& cols = summary_columns();
    auto line = [&](const std::vector<std::string>& v) {
        if (f == Format::csv) {
            for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
        } else {
            os << "|";
            for (const auto& s : v) os << " " << s << " |";
        }
        os << "\n";
    };
    line(cols);
    if (f == Format::markdown) {
        os << "|";
        for (std::size_t k = 0; k < cols.size(); ++k) os << (k == 0 ? " --- |" : " ---: |");
        os << "\n";
    }
    for (const auto& r : rows) line(detail::cells(r));
    return os.str();
}

// ---- record CSV ----

inline constexpr const char* records_header = "suite,replication,algorithm,evaluations,converged,termination,dist,wall_ms";

inline std::string records_to_csv(const std::vector<Record>& recs) {
    std::ostringstream os;
    os << records_header << "\n";
    char buf[64];
    for (const auto& r : recs) {
        os << r.suite << "," << r.replication << "," << r.algorithm << "," << r.evaluations << ","
           << (r.converged ? 1 : 0) << "," << r.termination << ",";
        if (std::isfinite(r.dist)) {
            std::snprintf(buf, sizeof buf, "%.17g", r.dist);
            os << buf;
        } else {
            os << "NaN";
        }
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        os << "," << buf << "\n";
    }
    return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s) {
    if (s == "NaN" || s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

inline std::vector<Record> records_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("records csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != records_header) throw std::invalid_argument("records csv: unexpected header");
    std::vector<Record> out;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw std::invalid_argument("records csv: expected 8 fields: " + line);
        Record r;
        r.suite = f[0];
        r.replication = std::stoi(f[1]);
        r.algorithm = f[2];
        r.evaluations = std::stol(f[3]);
        r.converged = f[4] == "1" || f[4] == "true";
        r.termination = f[5];
        r.dist = parse_double(f[6]);
        r.wall_ms = parse_double(f[7]);
        out.push_back(std::move(r));
    }
    return out;
}

// ---- config JSON ----

inline nlohmann::json to_json(const AlgorithmSpec& a) {
    nlohmann::json j{{"mapping", a.mapping},
                     {"method", accel::to_string(a.method)},
                     {"step_rule", accel::to_string(a.step_rule)},
                     {"gamma", a.gamma}};
    if (a.blocks) j["blocks"] = *a.blocks;
    return j;
}

inline AlgorithmSpec algorithm_from_json(const nlohmann::json& j) {
    AlgorithmSpec a;
    a.mapping = j.value("mapping", a.mapping);
    a.method = accel::parse_method(j.value("method", std::string("plain")));
    a.step_rule = accel::parse_step_rule(j.value("step_rule", std::string("S3")));
    a.gamma = j.value("gamma", a.gamma);
    if (j.contains("blocks")) a.blocks = j.at("blocks").get<bool>();
    return a;
}

// Fields absent from the document keep the suite defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j, std::optional<Suite> suite = std::nullopt) {
    Suite s = suite ? *suite : parse_suite(j.at("suite").get<std::string>());
    if (suite && j.contains("suite") && parse_suite(j.at("suite").get<std::string>()) != *suite)
        throw std::invalid_argument("config suite disagrees with --suite");
    ExperimentConfig c = default_config(s);
    if (j.contains("algorithms")) {
        c.algorithms.clear();
        for (const auto& a : j.at("algorithms")) c.algorithms.push_back(algorithm_from_json(a));
    }
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
    c.anderson_memory = j.value("anderson_memory", c.anderson_memory);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.threads = j.value("threads", c.threads);
    c.J = j.value("J", c.J);
    c.I = j.value("I", c.I);
    c.T = j.value("T", c.T);
    c.rho = j.value("rho", c.rho);
    c.nests = j.value("nests", c.nests);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json algs = nlohmann::json::array();
    for (const auto& a : c.algorithms) algs.push_back(to_json(a));
    return {{"suite", to_string(c.suite)},   {"algorithms", algs},     {"replications", c.replications},
            {"seed", c.seed},                {"tolerance", c.tolerance}, {"max_evaluations", c.max_evaluations},
            {"anderson_memory", c.anderson_memory}, {"out_dir", c.out_dir}, {"threads", c.threads},
            {"J", c.J}, {"I", c.I}, {"T", c.T}, {"rho", c.rho}, {"nests", c.nests}};
}

}  // namespace blp::bench
