// lerwlab: batch experiment runner for the LERW toolkit.
//
//   lerwlab <kind> --config <file> [--seed N] [--trials-scale X] [--out DIR]
//                  [--threads N] [--dump-paths]
//   lerwlab list-experiments
//   lerwlab validate --config <file>
//
// Exit codes: 0 ok, 1 runtime failure, 2 invalid config, 3 runtime budget
// exceeded, 4 paper-invariant assertion failure.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "lerw/coupling.hpp"
#include "lerw/lattice.hpp"
#include "lerw/statistics.hpp"
#include "lerw/suite.hpp"
#include "lerw/walk.hpp"

using json = nlohmann::json;
using namespace lerw;

namespace {

// Configuration problems get their own type so the exit-code mapping can
// distinguish them from paper-invariant failures raised mid-computation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kKinds = {
    "sample-lerw", "growth-xi", "quasi-loops", "isotropy",  "nonintersect", "escape",
    "beurling",    "coupling",  "interp",      "ust",       "certify",      "oracle-suite"};

// ---------- config parsing ------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || item.key() == a;
        if (!ok) throw ConfigError(ctx + ": unknown key '" + item.key() + "'");
    }
}

mpq_class get_rational(const json& j, const std::string& ctx) {
    try {
        if (j.is_number_integer()) return mpq_class(j.get<long>());
        if (j.is_string()) {
            mpq_class q(j.get<std::string>());
            q.canonicalize();
            return q;
        }
    } catch (const std::invalid_argument&) {
    }
    throw ConfigError(ctx + ": expected an integer or a 'p/q' rational string");
}

Vec get_vec(const json& j, int dim, const std::string& ctx) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(ctx + ": expected an array of " + std::to_string(dim) + " numbers");
    Vec p = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) p[i] = j[static_cast<std::size_t>(i)].get<double>();
    return p;
}

IVec get_ivec(const json& j, int dim, const std::string& ctx) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(ctx + ": expected an array of " + std::to_string(dim) + " integers");
    IVec p = IVec::zero(dim);
    for (int i = 0; i < dim; ++i) p[i] = j[static_cast<std::size_t>(i)].get<std::int64_t>();
    return p;
}

std::vector<double> get_doubles(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) throw ConfigError(ctx + ": expected a nonempty array");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(x.get<double>());
    return out;
}

struct GraphSpec {
    WeightedGraph g;
    std::optional<StitchConfig> stitch;
    json resolved;
};

GraphSpec build_graph(const json& j, const std::string& ctx) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError(ctx + ": missing graph type");
    std::string type = j.at("type").get<std::string>();
    if (type == "grid") {
        check_keys(j, {"type", "dim", "spacing", "weight", "lo", "hi"}, ctx);
        int dim = j.value("dim", 3);
        if (dim < 1 || dim > kMaxDim) throw ConfigError(ctx + ": dim out of range");
        mpq_class spacing = j.contains("spacing") ? get_rational(j["spacing"], ctx) : mpq_class(1);
        mpq_class weight = j.contains("weight") ? get_rational(j["weight"], ctx) : mpq_class(1);
        if (!j.contains("lo") || !j.contains("hi")) throw ConfigError(ctx + ": grid needs lo/hi");
        IVec lo = get_ivec(j["lo"], dim, ctx), hi = get_ivec(j["hi"], dim, ctx);
        json res = {{"type", "grid"},       {"dim", dim},
                    {"spacing", spacing.get_str()}, {"weight", weight.get_str()},
                    {"lo", j["lo"]},        {"hi", j["hi"]}};
        return {grid(dim, spacing, weight, lo, hi), std::nullopt, res};
    }
    if (type == "stitched") {
        check_keys(j, {"type", "pair", "L", "M", "xi", "xi_seed", "margin", "alpha"}, ctx);
        StitchConfig cfg;
        std::string pair = j.value("pair", std::string("z3_2z3"));
        if (pair == "z3_2z3")
            cfg.pair = LatticePair::z3_2z3;
        else if (pair == "z2_2z2")
            cfg.pair = LatticePair::z2_2z2;
        else if (pair == "z3_3z3")
            cfg.pair = LatticePair::z3_3z3;
        else
            throw ConfigError(ctx + ": unknown lattice pair '" + pair + "'");
        cfg.L = j.value("L", 8);
        cfg.M = j.value("M", 1);
        cfg.margin = j.value("margin", 0);
        if (j.contains("alpha")) cfg.alpha = get_rational(j["alpha"], ctx);
        std::uint64_t xi_seed = j.value("xi_seed", 0);
        json xi_echo;
        if (!j.contains("xi") || (j["xi"].is_string() && j["xi"] == "all1")) {
            cfg.xi = StitchConfig::xi_all(cfg.M, cfg.dim(), 1);
            xi_echo = "all1";
        } else if (j["xi"].is_string() && j["xi"] == "all2") {
            cfg.xi = StitchConfig::xi_all(cfg.M, cfg.dim(), 2);
            xi_echo = "all2";
        } else if (j["xi"].is_string() && j["xi"] == "random") {
            cfg.xi = StitchConfig::xi_random(cfg.M, cfg.dim(), xi_seed);
            xi_echo = "random";
        } else if (j["xi"].is_array()) {
            for (const auto& x : j["xi"]) cfg.xi.push_back(x.get<int>());
            xi_echo = j["xi"];
        } else {
            throw ConfigError(ctx + ": xi must be all1|all2|random or an explicit array");
        }
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
        json res = {{"type", "stitched"}, {"pair", pair},
                    {"L", cfg.L},         {"M", cfg.M},
                    {"xi", xi_echo},      {"xi_seed", xi_seed},
                    {"margin", cfg.margin}, {"alpha", cfg.alpha.get_str()}};
        return {stitched(cfg), cfg, res};
    }
    if (type == "rotated") {
        check_keys(j, {"type", "lo", "hi"}, ctx);
        if (!j.contains("lo") || !j.contains("hi"))
            throw ConfigError(ctx + ": rotated needs lo/hi");
        IVec lo = get_ivec(j["lo"], 3, ctx), hi = get_ivec(j["hi"], 3, ctx);
        json res = {{"type", "rotated"}, {"lo", j["lo"]}, {"hi", j["hi"]}};
        return {rotated_lattice(lo, hi), std::nullopt, res};
    }
    throw ConfigError(ctx + ": unknown graph type '" + type + "'");
}

VertexId vertex_near(const WeightedGraph& g, const json& j, const std::string& ctx) {
    return g.nearest_vertex(get_vec(j, g.dim(), ctx));
}

// ---------- output writers ------------------------------------------------

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct CsvRow {
    std::string param;
    double est = 0;
    double se = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "parameter,estimate,stderr,trials,seed\n";
    for (const auto& r : rows)
        f << r.param << ',' << num(r.est) << ',' << num(r.se) << ',' << r.trials << ','
          << r.seed << '\n';
}

std::vector<CsvRow> exponent_rows(const ExponentEstimate& e) {
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < e.radii.size(); ++i)
        rows.push_back({num(e.radii[i]), e.stat[i], e.se[i], e.trials, e.seed});
    return rows;
}

json exponent_summary(const ExponentEstimate& e) {
    return {{"exponent", e.exponent},
            {"exponent_se", e.exponent_se},
            {"trials", e.trials},
            {"seed", e.seed},
            {"cap_exhausted", e.cap_exhausted}};
}

// ---------- worker pool ---------------------------------------------------

// Runs fn(t) for t in [0, trials) on `threads` workers. Each trial must be
// independent (per-trial RngStream); callers store results by index so the
// reduction order is fixed regardless of scheduling.
template <class F>
void parallel_trials(std::uint64_t trials, int threads, F&& fn) {
    if (threads < 1) threads = 1;
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto work = [&] {
        try {
            for (;;) {
                std::uint64_t t = next.fetch_add(1);
                if (t >= trials) break;
                fn(t);
            }
        } catch (...) {
            std::scoped_lock lock(err_mutex);
            if (!err) err = std::current_exception();
            next.store(trials);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// ---------- experiment context --------------------------------------------

struct RunContext {
    std::filesystem::path outdir;
    std::uint64_t seed = 1;
    std::uint64_t trials = 1000;
    bool dump_paths = false;
    int threads = 1;
};

const char* stop_name(StopReason r) {
    switch (r) {
        case StopReason::hit_absorbing: return "hit_absorbing";
        case StopReason::exited_radius: return "exited_radius";
        case StopReason::step_cap: return "step_cap";
        default: return "frontier_error";
    }
}

json run_sample_lerw(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"start", "r"}, "params");
    if (!p.contains("r")) throw ConfigError("params: sample-lerw needs r");
    double r = p.at("r").get<double>();
    VertexId start = p.contains("start") ? vertex_near(gs.g, p["start"], "params.start")
                                         : gs.g.nearest_vertex(Vec::zero(gs.g.dim()));
    StopSpec stop;
    stop.radii.push_back({gs.g.pos(start), r});
    stop.step_cap = default_step_cap(r);

    std::vector<double> len(ctx.trials);
    std::vector<PathSeq> le(ctx.trials);
    std::vector<StopReason> why(ctx.trials);
    parallel_trials(ctx.trials, ctx.threads, [&](std::uint64_t t) {
        RngStream rng(ctx.seed, t);
        auto out = run_until(gs.g, start, stop, rng);
        if (out.reason == StopReason::frontier_error)
            throw std::runtime_error("sample-lerw: walk reached the graph frontier");
        le[t] = loop_erase(out.path);
        len[t] = static_cast<double>(le[t].len());
        why[t] = out.reason;
    });

    double mean = 0, var = 0;
    for (double x : len) mean += x;
    mean /= static_cast<double>(ctx.trials);
    for (double x : len) var += (x - mean) * (x - mean);
    double se = ctx.trials > 1
                    ? std::sqrt(var / static_cast<double>(ctx.trials - 1) /
                                static_cast<double>(ctx.trials))
                    : 0;
    write_csv(ctx.outdir / "lengths.csv", {{num(r), mean, se, ctx.trials, ctx.seed}});

    if (ctx.dump_paths) {
        std::ofstream f(ctx.outdir / "paths.ndjson", std::ios::binary);
        for (std::uint64_t t = 0; t < ctx.trials; ++t) {
            json line = {{"trial", t}, {"path", le[t].v}, {"stop", stop_name(why[t])}};
            f << line.dump() << '\n';
        }
    }
    return {{"r", r}, {"mean_length", mean}, {"se", se}};
}

json run_growth(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"start", "radii"}, "params");
    if (!p.contains("radii")) throw ConfigError("params: growth-xi needs radii");
    VertexId start = p.contains("start") ? vertex_near(gs.g, p["start"], "params.start")
                                         : gs.g.nearest_vertex(Vec::zero(gs.g.dim()));
    auto est = growth_exponent(gs.g, start, get_doubles(p["radii"], "params.radii"), ctx.trials,
                               ctx.seed);
    write_csv(ctx.outdir / "growth.csv", exponent_rows(est));
    return exponent_summary(est);
}

json run_quasi_loops(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"start", "eps", "delta_hat", "radii"}, "params");
    if (!p.contains("radii")) throw ConfigError("params: quasi-loops needs radii");
    VertexId start = p.contains("start") ? vertex_near(gs.g, p["start"], "params.start")
                                         : gs.g.nearest_vertex(Vec::zero(gs.g.dim()));
    double eps = p.value("eps", 0.4);
    double delta_hat = p.value("delta_hat", 0.1);
    auto est = quasi_loop_decay(gs.g, start, eps, delta_hat,
                                get_doubles(p["radii"], "params.radii"), ctx.trials, ctx.seed);
    write_csv(ctx.outdir / "quasi_loops.csv", exponent_rows(est));
    json s = exponent_summary(est);
    s["eps"] = eps;
    s["delta_hat"] = delta_hat;
    return s;
}

json run_isotropy(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"center", "radii", "cells", "mode"}, "params");
    if (!p.contains("radii")) throw ConfigError("params: isotropy needs radii");
    VertexId center = p.contains("center") ? vertex_near(gs.g, p["center"], "params.center")
                                           : gs.g.nearest_vertex(Vec::zero(gs.g.dim()));
    int cells = p.value("cells", 8);
    std::string mode = p.value("mode", std::string("exact"));
    if (mode != "exact" && mode != "mc") throw ConfigError("params.mode: expected exact|mc");
    auto radii = get_doubles(p["radii"], "params.radii");

    std::vector<CsvRow> rows;
    std::vector<double> devs;
    for (double r : radii) {
        auto rep = isotropy_check(gs.g, center, r, cells, mode == "exact", ctx.trials, ctx.seed);
        double se = mode == "mc" ? 0.5 / std::sqrt(static_cast<double>(ctx.trials)) : 0;
        rows.push_back({num(r), rep.max_deviation, se, rep.trials, rep.seed});
        devs.push_back(rep.max_deviation);
    }
    write_csv(ctx.outdir / "isotropy.csv", rows);
    json s = {{"cells", cells}, {"mode", mode}, {"max_deviation", devs}};
    if (radii.size() >= 3) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < radii.size(); ++i)
            if (devs[i] > 0) {
                lx.push_back(std::log(radii[i]));
                ly.push_back(std::log(devs[i]));
            }
        if (lx.size() >= 3) {
            auto fit = fit_line(lx, ly);
            s["alpha"] = -fit.slope;
            s["K"] = std::exp(fit.intercept);
        }
    }
    return s;
}

json run_nonintersect(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"v1", "v2", "radii"}, "params");
    if (!p.contains("v1") || !p.contains("v2") || !p.contains("radii"))
        throw ConfigError("params: nonintersect needs v1, v2, radii");
    auto est = nonintersection_scaling(gs.g, vertex_near(gs.g, p["v1"], "params.v1"),
                                       vertex_near(gs.g, p["v2"], "params.v2"),
                                       get_doubles(p["radii"], "params.radii"), ctx.trials,
                                       ctx.seed);
    write_csv(ctx.outdir / "nonintersect.csv", exponent_rows(est));
    return exponent_summary(est);
}

json run_escape(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"v", "normal", "offset", "radii", "slab"}, "params");
    if (!p.contains("v") || !p.contains("normal") || !p.contains("radii"))
        throw ConfigError("params: escape needs v, normal, radii");
    HalfSpaceSpec H(get_vec(p["normal"], gs.g.dim(), "params.normal"), p.value("offset", 0.0));
    bool slab = p.value("slab", false);
    auto est = escape_probability(gs.g, vertex_near(gs.g, p["v"], "params.v"), H,
                                  get_doubles(p["radii"], "params.radii"), ctx.trials, ctx.seed,
                                  slab);
    write_csv(ctx.outdir / "escape.csv", exponent_rows(est));
    json s = exponent_summary(est);
    s["slab"] = slab;
    return s;
}

json run_beurling(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"v", "r", "target"}, "params");
    if (!p.contains("v") || !p.contains("r") || !p.contains("target"))
        throw ConfigError("params: beurling needs v, r, target");
    std::vector<VertexId> ids;
    for (const auto& q : p["target"]) {
        auto id = gs.g.vertex_at(get_vec(q, gs.g.dim(), "params.target"));
        if (!id) throw ConfigError("params.target: no vertex at the given position");
        ids.push_back(*id);
    }
    double r = p.at("r").get<double>();
    auto est = beurling_hit(gs.g, vertex_near(gs.g, p["v"], "params.v"), VertexSet(ids), r,
                            ctx.trials, ctx.seed);
    write_csv(ctx.outdir / "beurling.csv", {{num(r), est.p, est.se, est.trials, est.seed}});
    return {{"r", r}, {"hit_probability", est.p}, {"se", est.se}};
}

json run_coupling(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"start", "alpha", "K", "levels", "inner", "inner_trials", "inner_seed",
                   "lambdas", "scale"},
               "params");
    CouplingConfig cfg;
    cfg.alpha = p.value("alpha", 1.0);
    cfg.K = p.value("K", 1.0);
    cfg.levels = p.value("levels", 2);
    std::string inner = p.value("inner", std::string("exact"));
    if (inner != "exact" && inner != "mc") throw ConfigError("params.inner: expected exact|mc");
    cfg.inner = inner == "exact" ? InnerMode::exact : InnerMode::mc;
    cfg.inner_trials = p.value("inner_trials", cfg.inner_trials);
    cfg.inner_seed = p.value("inner_seed", cfg.inner_seed);
    std::vector<double> lambdas =
        p.contains("lambdas") ? get_doubles(p["lambdas"], "params.lambdas")
                              : std::vector<double>{2, 4, 6, 8};
    double scale = p.value("scale", 0.0);
    VertexId start = p.contains("start") ? vertex_near(gs.g, p["start"], "params.start")
                                         : gs.g.nearest_vertex(Vec::zero(gs.g.dim()));

    auto tab = coupling_tail(gs.g, start, cfg, lambdas, ctx.trials, ctx.seed, scale);
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < tab.lambda.size(); ++i)
        rows.push_back({num(tab.lambda[i]), tab.freq[i], tab.se[i], tab.trials, tab.seed});
    write_csv(ctx.outdir / "coupling_tail.csv", rows);

    if (ctx.dump_paths) {
        std::ofstream f(ctx.outdir / "skeletons.ndjson", std::ios::binary);
        CouplingSampler sampler(gs.g, cfg);
        std::uint64_t n = std::min<std::uint64_t>(ctx.trials, 10);
        for (std::uint64_t t = 0; t < n; ++t) {
            RngStream rng(ctx.seed, t);
            auto sk = sampler.sample(start, rng);
            for (std::size_t i = 0; i < sk.levels.size(); ++i) {
                const auto& lvl = sk.levels[i];
                json wp = json::array(), bp = json::array();
                Vec w = gs.g.pos(lvl.walk_exit);
                for (int k = 0; k < gs.g.dim(); ++k) {
                    wp.push_back(w[k]);
                    bp.push_back(lvl.bm_exit[k]);
                }
                json line = {{"trial", t},        {"level", i + 1}, {"r", lvl.r},
                             {"D", lvl.D},        {"cell", lvl.cell}, {"X", lvl.accepted},
                             {"walk_exit", wp},   {"bm_exit", bp}};
                f << line.dump() << '\n';
            }
        }
    }
    return {{"scale", tab.scale}, {"log_corr", tab.log_corr}, {"freq", tab.freq}};
}

json run_interp(const GraphSpec& ga, const GraphSpec& gb, const json& p, const RunContext& ctx) {
    check_keys(p, {"start", "scales", "margin_coef", "margin_pow"}, "params");
    if (!p.contains("scales")) throw ConfigError("params: interp needs scales");
    Vec start = p.contains("start") ? get_vec(p["start"], ga.g.dim(), "params.start")
                                    : Vec::zero(ga.g.dim());
    auto rep = interpolation_consistency(ga.g, gb.g, start,
                                         get_doubles(p["scales"], "params.scales"), ctx.trials,
                                         ctx.seed, p.value("margin_coef", 4.0),
                                         p.value("margin_pow", 0.75));
    std::vector<CsvRow> rows;
    json raw = json::array();
    for (const auto& row : rep.rows) {
        rows.push_back({num(row.s) + "_fwd", row.deficit_fwd, row.se, rep.trials, rep.seed});
        rows.push_back({num(row.s) + "_bwd", row.deficit_bwd, row.se, rep.trials, rep.seed});
        raw.push_back({{"s", row.s},
                       {"pA_E", row.pA_E},
                       {"pA_Efat", row.pA_Efat},
                       {"pB_E", row.pB_E},
                       {"pB_Efat", row.pB_Efat}});
    }
    write_csv(ctx.outdir / "interp.csv", rows);
    return {{"margin_coef", rep.margin_coef}, {"margin_pow", rep.margin_pow}, {"rows", raw}};
}

json run_ust(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"root"}, "params");
    if (!p.contains("root")) throw ConfigError("params: ust needs root");
    std::vector<VertexId> roots;
    for (const auto& q : p["root"]) roots.push_back(vertex_near(gs.g, q, "params.root"));
    RngStream rng(ctx.seed, 0);
    auto parent = wilson_ust(gs.g, VertexSet(roots), rng);

    std::uint64_t edges = 0, max_depth = 0;
    for (std::size_t v = 0; v < parent.size(); ++v) {
        if (parent[v] != kNoVertex) ++edges;
        std::uint64_t d = 0;
        for (VertexId u = static_cast<VertexId>(v); parent[u] != kNoVertex; u = parent[u]) ++d;
        max_depth = std::max(max_depth, d);
    }
    write_csv(ctx.outdir / "ust.csv",
              {{"vertices", static_cast<double>(parent.size()), 0, 1, ctx.seed},
               {"tree_edges", static_cast<double>(edges), 0, 1, ctx.seed},
               {"max_depth", static_cast<double>(max_depth), 0, 1, ctx.seed}});
    if (ctx.dump_paths) {
        std::ofstream f(ctx.outdir / "ust.ndjson", std::ios::binary);
        for (std::size_t v = 0; v < parent.size(); ++v) {
            json line = {{"v", v}, {"parent", parent[v] == kNoVertex ? -1 : static_cast<std::int64_t>(parent[v])}};
            f << line.dump() << '\n';
        }
    }
    return {{"vertices", parent.size()}, {"tree_edges", edges}, {"max_depth", max_depth}};
}

json run_certify(const GraphSpec& gs, const json& p, const RunContext& ctx) {
    check_keys(p, {"max_samples"}, "params");
    std::uint64_t max_samples = p.value("max_samples", 10'000);
    auto rep = certify_lattice(gs.g, gs.stitch ? &*gs.stitch : nullptr, max_samples, ctx.seed);
    static const char* names[4] = {"interior1", "interior2", "face", "edge_or_corner"};
    std::vector<CsvRow> rows;
    for (int c = 0; c < 4; ++c)
        rows.push_back({names[c], static_cast<double>(rep.by_class[c].count), 0, rep.sampled,
                        ctx.seed});
    write_csv(ctx.outdir / "certify.csv", rows);
    bool zero_mean = rep.all_zero_mean();
    bool iso = rep.class_i_isotropic();
    if (!zero_mean || !iso)
        throw std::logic_error("certify: lattice violates the exact moment certificates");
    return {{"sampled", rep.sampled},
            {"skipped_frontier", rep.skipped_frontier},
            {"all_zero_mean", zero_mean},
            {"class_i_isotropic", iso}};
}

json run_oracle_suite(const json& p, const RunContext& ctx) {
    check_keys(p, {}, "params");
    auto checks = oracle_suite(ctx.trials, ctx.seed);
    std::vector<CsvRow> rows;
    bool all = true;
    json s = json::object();
    for (const auto& c : checks) {
        rows.push_back({c.name, static_cast<double>(c.passed), 0, c.instances, ctx.seed});
        s[c.name] = {{"passed", c.passed}, {"instances", c.instances}};
        all = all && c.passed == c.instances;
    }
    write_csv(ctx.outdir / "oracle_suite.csv", rows);
    if (!all) throw std::logic_error("oracle-suite: an exact lemma check failed");
    s["all_passed"] = all;
    return s;
}

// ---------- driver ----------------------------------------------------------

int run_main(int argc, char** argv) {
    CLI::App app{"lerwlab: LERW experiment runner"};
    std::string kind, config_path, out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    double trials_scale = 1.0;
    bool dump_paths = false;
    int threads = 1;
    app.add_option("kind", kind, "experiment kind, or list-experiments / validate")->required();
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed_override, "master seed override")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--trials-scale", trials_scale, "multiplier on all trial counts");
    app.add_option("--out", out_override, "output directory override");
    app.add_flag("--dump-paths", dump_paths, "write NDJSON path/skeleton dumps");
    app.add_option("--threads", threads, "worker pool size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (kind == "list-experiments") {
        for (const auto& k : kKinds) std::cout << k << '\n';
        return 0;
    }
    if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end() && kind != "validate") {
        std::cerr << "unknown experiment kind '" << kind << "'\n";
        return 2;
    }
    if (config_path.empty()) {
        std::cerr << "--config is required\n";
        return 2;
    }

    json cfg;
    {
        std::ifstream f(config_path);
        if (!f) {
            std::cerr << "cannot read config file " << config_path << '\n';
            return 2;
        }
        try {
            cfg = json::parse(f);
        } catch (const json::exception& e) {
            std::cerr << "config parse error: " << e.what() << '\n';
            return 2;
        }
    }

    check_keys(cfg, {"kind", "graph", "graph_b", "seed", "trials", "out", "budget_seconds",
                     "params"},
               "config");
    if (!cfg.contains("kind")) throw ConfigError("config: missing kind");
    std::string cfg_kind = cfg.at("kind").get<std::string>();
    if (std::find(kKinds.begin(), kKinds.end(), cfg_kind) == kKinds.end())
        throw ConfigError("config: unknown kind '" + cfg_kind + "'");
    if (kind != "validate" && kind != cfg_kind)
        throw ConfigError("config kind '" + cfg_kind + "' does not match the requested kind");

    RunContext ctx;
    ctx.seed = seed_given ? seed_override : cfg.value("seed", 1);
    double raw_trials = static_cast<double>(cfg.value("trials", 1000));
    ctx.trials = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(raw_trials * trials_scale)));
    ctx.dump_paths = dump_paths;
    ctx.threads = threads;
    std::string outdir = !out_override.empty() ? out_override
                                               : cfg.value("out", std::string("out"));
    ctx.outdir = outdir;
    double budget = cfg.value("budget_seconds", 0.0);
    json params = cfg.value("params", json::object());
    if (!cfg.contains("graph")) throw ConfigError("config: missing graph");

    auto ga = build_graph(cfg.at("graph"), "graph");
    std::optional<GraphSpec> gb;
    if (cfg_kind == "interp") {
        if (!cfg.contains("graph_b")) throw ConfigError("config: interp needs graph_b");
        gb = build_graph(cfg.at("graph_b"), "graph_b");
    } else if (cfg.contains("graph_b")) {
        throw ConfigError("config: graph_b is only valid for kind interp");
    }

    json resolved = {{"kind", cfg_kind},      {"graph", ga.resolved}, {"seed", ctx.seed},
                     {"trials", ctx.trials},  {"out", outdir},        {"budget_seconds", budget},
                     {"params", params}};
    if (gb) resolved["graph_b"] = gb->resolved;

    if (kind == "validate") {
        std::cout << "config valid\n" << resolved.dump(2) << '\n';
        return 0;
    }

    std::filesystem::create_directories(ctx.outdir);
    auto t0 = std::chrono::steady_clock::now();
    json results;
    if (cfg_kind == "sample-lerw") results = run_sample_lerw(ga, params, ctx);
    else if (cfg_kind == "growth-xi") results = run_growth(ga, params, ctx);
    else if (cfg_kind == "quasi-loops") results = run_quasi_loops(ga, params, ctx);
    else if (cfg_kind == "isotropy") results = run_isotropy(ga, params, ctx);
    else if (cfg_kind == "nonintersect") results = run_nonintersect(ga, params, ctx);
    else if (cfg_kind == "escape") results = run_escape(ga, params, ctx);
    else if (cfg_kind == "beurling") results = run_beurling(ga, params, ctx);
    else if (cfg_kind == "coupling") results = run_coupling(ga, params, ctx);
    else if (cfg_kind == "interp") results = run_interp(ga, *gb, params, ctx);
    else if (cfg_kind == "ust") results = run_ust(ga, params, ctx);
    else if (cfg_kind == "certify") results = run_certify(ga, params, ctx);
    else results = run_oracle_suite(params, ctx);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json summary = {{"kind", cfg_kind},
                    {"resolved_config", resolved},
                    {"results", results},
                    {"elapsed_seconds", elapsed}};
    {
        std::ofstream f(ctx.outdir / "summary.json", std::ios::binary);
        f << summary.dump(2) << '\n';
    }
    std::cout << summary.dump(2) << '\n';

    if (budget > 0 && elapsed > budget) {
        std::cerr << "runtime budget exceeded: " << elapsed << "s > " << budget << "s\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "paper invariant violated: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
