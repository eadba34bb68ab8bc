// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Criterion 16 shells out to the lerwlab binary whose path
// is argv[1] (default "./lerwlab").

#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lerw/coupling.hpp"
#include "lerw/lattice.hpp"
#include "lerw/statistics.hpp"
#include "lerw/suite.hpp"
#include "lerw/walk.hpp"

using namespace lerw;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%2d] %s  %s  (%s)\n", idx, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

WeightedGraph grid_box(int dim, std::int64_t h) {
    IVec lo = IVec::zero(dim), hi = IVec::zero(dim);
    for (int i = 0; i < dim; ++i) {
        lo[i] = -h;
        hi[i] = h;
    }
    return grid(dim, 1, 1, lo, hi);
}

VertexId origin(const WeightedGraph& g) { return *g.vertex_at(Vec::zero(g.dim())); }

StitchConfig layered_z3_2z3(int L, int M, const mpq_class& alpha, int margin = 0) {
    StitchConfig cfg;
    cfg.pair = LatticePair::z3_2z3;
    cfg.L = L;
    cfg.M = M;
    cfg.alpha = alpha;
    cfg.margin = margin;
    cfg.xi = StitchConfig::xi_all(M, 3, 1);
    std::size_t per_row = static_cast<std::size_t>(M) * static_cast<std::size_t>(M);
    for (std::size_t i = 0; i < cfg.xi.size(); ++i)
        if (i / per_row >= static_cast<std::size_t>((M + 1) / 2)) cfg.xi[i] = 2;
    return cfg;
}

// 3x3 unit grid without frontier marks, id = 3x + y.
WeightedGraph grid3x3() {
    WeightedGraph::Builder b(2);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            b.add_vertex(Vec{static_cast<double>(x), static_cast<double>(y)});
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            if (x + 1 < 3) b.add_edge(3 * x + y, 3 * (x + 1) + y, 1);
            if (y + 1 < 3) b.add_edge(3 * x + y, 3 * x + y + 1, 1);
        }
    return std::move(b).build();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    std::string lerwlab = argc > 1 ? argv[1] : "./lerwlab";

    // --- 1 & 2: growth exponent ------------------------------------------------
    {
        auto t0 = std::chrono::steady_clock::now();
        auto g3 = grid_box(3, 134);
        auto est3 = growth_exponent(g3, origin(g3), {16, 32, 64, 128}, 10'000, 2026);
        double el = seconds_since(t0);
        auto g1 = grid_box(1, 134);
        auto est1 = growth_exponent(g1, origin(g1), {16, 32, 64, 128}, 10'000, 2026);
        bool ok1 = est3.exponent >= 1.57 && est3.exponent <= 1.67 && el <= 600 &&
                   std::abs(est1.exponent - 1.0) <= 0.001;
        report(1, ok1, "growth exponent on Z^3 and Z",
               fmt("xi3=%.4f in [1.57,1.67], xi1=%.6f, %.1fs", est3.exponent, est1.exponent, el));
        report(2, est3.exponent > 1.0 && est3.exponent <= 5.0 / 3.0,
               "Z^3 exponent inside (1, 5/3]", fmt("xi3=%.4f", est3.exponent));
    }

    // --- 3: Monte Carlo vs exact LERW law --------------------------------------
    {
        auto g = grid3x3();
        VertexId center = 4;  // (1,1)
        VertexSet corners({0, 2, 6, 8});
        auto exact = exact_lerw_law(g, center, corners);
        std::map<std::vector<VertexId>, double> want;
        for (std::size_t i = 0; i < exact.paths.size(); ++i)
            want[exact.paths[i]] += exact.prob[i].get_d();
        const std::uint64_t N = 100'000;
        std::map<std::vector<VertexId>, double> got;
        StopSpec stop;
        stop.absorbing = corners;
        for (std::uint64_t t = 0; t < N; ++t) {
            RngStream rng(3, t);
            auto out = run_until(g, center, stop, rng);
            got[loop_erase(out.path).v] += 1.0 / static_cast<double>(N);
        }
        double tv = 0;
        for (const auto& [p, q] : want) tv += std::abs(q - (got.count(p) ? got[p] : 0.0));
        for (const auto& [p, q] : got)
            if (!want.count(p)) tv += q;
        tv /= 2;
        report(3, tv <= 0.02, "MC LERW law vs exact on 3x3 grid", fmt("TV=%.4f at 1e5", tv));
    }

    // --- 4..7: exact lemma suite ------------------------------------------------
    {
        auto checks = oracle_suite(50, 2026);
        std::map<std::string, const SuiteCheck*> by;
        for (const auto& c : checks) by[c.name] = &c;
        auto all = [&](std::initializer_list<const char*> names) {
            bool ok = true;
            for (const char* n : names) ok = ok && by.at(n)->passed == by.at(n)->instances;
            return ok;
        };
        report(4, all({"condLE_sym"}), "Lemma condLE_sym exact reversal symmetry",
               fmt("%llu/50 instances", (unsigned long long)by["condLE_sym"]->passed));
        report(5, all({"omer"}), "Lemma omer exact visit-count independence",
               fmt("%llu/50 instances", (unsigned long long)by["omer"]->passed));
        report(6, all({"symT", "green_sym"}), "eq. symT and Green symmetry, exact",
               fmt("symT %llu/50, green %llu/50", (unsigned long long)by["symT"]->passed,
                   (unsigned long long)by["green_sym"]->passed));
        report(7, all({"bpp_sandwich"}), "BPP capacity sandwich, gap 1e-8",
               fmt("%llu/50 instances", (unsigned long long)by["bpp_sandwich"]->passed));
    }

    // --- 8: lattice moment certificates -----------------------------------------
    {
        auto t0 = std::chrono::steady_clock::now();
        auto cfg = layered_z3_2z3(32, 2, mpq_class(1, 2));  // 64^3 box
        auto g = stitched(cfg);
        auto rep = certify_lattice(g, &cfg, 10'000, 2026);
        bool stitched_ok = rep.all_zero_mean() && rep.class_i_isotropic() && rep.sampled > 0;
        double el = seconds_since(t0);

        auto gz = grid_box(3, 3);
        auto cz = moment_certificate(gz, origin(gz));
        auto gr = rotated_lattice(IVec{-12, -12, -12}, IVec{12, 12, 12});
        auto cr = moment_certificate(gr, gr.nearest_vertex(Vec::zero(3)));
        bool pure_ok = cz.zero_mean() && cz.isotropic_second() && cz.zero_third() &&
                       cr.zero_mean() && cr.isotropic_second() && cr.zero_third();
        report(8, stitched_ok && pure_ok && el <= 60, "exact lattice moment certificates",
               fmt("64^3 stitched sample %llu vertices, %.1fs; pure lattices exact",
                   (unsigned long long)rep.sampled, el));
    }

    // --- 9: stitch consistency ----------------------------------------------------
    {
        StitchConfig cfg;
        cfg.pair = LatticePair::z3_2z3;
        cfg.L = 8;
        cfg.M = 2;
        cfg.alpha = mpq_class(1, 2);
        cfg.margin = 3;
        cfg.xi = StitchConfig::xi_all(2, 3, 1);
        auto fine = stitched(cfg);
        bool ok_fine = same_by_position(fine, grid(3, 1, 1, IVec{-3, -3, -3}, IVec{18, 18, 18}));
        cfg.xi = StitchConfig::xi_all(2, 3, 2);
        auto coarse = stitched(cfg);
        bool ok_coarse =
            same_by_position(coarse, grid(3, 2, 2, IVec{-1, -1, -1}, IVec{9, 9, 9}));

        StitchConfig c1, c2;
        c1.pair = c2.pair = LatticePair::z3_2z3;
        c1.L = c2.L = 8;
        c1.M = c2.M = 3;
        c1.alpha = c2.alpha = mpq_class(2, 3);
        c1.xi = StitchConfig::xi_random(3, 3, 11);
        c2.xi = StitchConfig::xi_random(3, 3, 12);
        std::size_t center = (1 * 3 + 1) * 3 + 1;
        c2.xi[center] = c1.xi[center] = 2;
        auto g1 = stitched(c1), g2 = stitched(c2);
        double a = 8 * (1 + 1.0 / 3), b = 8 * (1 + 2.0 / 3);
        bool ok_influ = c1.xi != c2.xi && agree_on_box(g1, g2, Vec{a, a, a}, Vec{b, b, b});
        report(9, ok_fine && ok_coarse && ok_influ, "stitch consistency and influence region",
               fmt("xi=1 fine %d, xi=2 coarse %d, inner agreement %d", ok_fine, ok_coarse,
                   ok_influ));
    }

    // --- 10: isotropy ---------------------------------------------------------------
    {
        auto g = grid_box(3, 44);
        VertexId o = origin(g);
        auto r20 = isotropy_check(g, o, 20, 8, true);
        auto r10 = isotropy_check(g, o, 10, 8, true);
        auto r40 = isotropy_check(g, o, 40, 8, true);
        auto g2 = grid_box(2, 10);
        auto quad = isotropy_check(g2, origin(g2), 7, 4, true);
        bool exact_quarters = true;
        for (double p : quad.cell_prob) exact_quarters = exact_quarters && p == 0.25;
        bool ok = r20.max_deviation <= 0.02 && r40.max_deviation <= r10.max_deviation &&
                  exact_quarters;
        report(10, ok, "isotropy deviations",
               fmt("r20=%.4f<=0.02, r40=%.4f<=r10=%.4f, Z^2 quadrants exact", r20.max_deviation,
                   r40.max_deviation, r10.max_deviation));
    }

    // --- 11: coupling -----------------------------------------------------------------
    {
        auto g = grid_box(3, 40);
        VertexId o = origin(g);
        CouplingConfig cfg;
        cfg.alpha = 1.0;
        cfg.levels = 2;

        // acceptance probabilities are asserted in [0,1] inside the sampler;
        // also witness them directly over a few thousand skeletons
        CouplingSampler sampler(g, cfg);
        bool probs_ok = true;
        auto cells = sphere_partition(3, cfg.simplex_count(2));
        std::vector<std::uint64_t> cnt(cells.size(), 0);
        const std::uint64_t N = 100'000;
        for (std::uint64_t t = 0; t < N; ++t) {
            RngStream rng(11, t);
            auto sk = sampler.sample(o, rng);
            for (const auto& lvl : sk.levels)
                probs_ok = probs_ok && lvl.accept_prob >= 0 && lvl.accept_prob <= 1;
            ++cnt[static_cast<std::size_t>(
                cell_of(cells, 3, sk.levels[1].bm_exit - sk.levels[0].bm_exit))];
        }
        double stat = 0;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            double e = cells[k].area * static_cast<double>(N);
            stat += (static_cast<double>(cnt[k]) - e) * (static_cast<double>(cnt[k]) - e) / e;
        }
        double pval =
            boost::math::gamma_q((static_cast<double>(cells.size()) - 1) / 2.0, stat / 2.0);

        auto tail = coupling_tail(g, o, cfg, {2, 4, 6, 8}, 10'000, 11);
        bool ok = probs_ok && pval >= 0.01 && tail.log_corr <= -0.9;
        report(11, ok, "coupling acceptance, uniform W-exit, RWclose tail",
               fmt("chi2 p=%.3f, tail corr=%.3f", pval, tail.log_corr));
    }

    // --- 12: quasi-loop decay ------------------------------------------------------
    {
        auto g = grid_box(3, 134);
        auto est = quasi_loop_decay(g, origin(g), 0.4, 0.1, {32, 64, 128}, 2000, 2026);
        bool ok = est.stat[0] > est.stat[1] && est.stat[1] > est.stat[2];
        report(12, ok, "quasi-loop counts strictly decreasing",
               fmt("QL=%.3f > %.3f > %.3f", est.stat[0], est.stat[1], est.stat[2]));
    }

    // --- 13: escape probability ------------------------------------------------------
    {
        // wide box: in slab mode the walk wanders laterally far beyond the radii
        auto g = grid_box(3, 600);
        VertexId v = *g.vertex_at(Vec{0, 0, 4});
        HalfSpaceSpec H(Vec{0, 0, 1}, 0);  // the half-space z <= 0
        auto ball = escape_probability(g, v, H, {16, 32, 64}, 20'000, 2026, false);
        bool band = true;
        for (double s : ball.stat) band = band && s >= 0.25 && s <= 4.0;
        auto slab = escape_probability(g, v, H, {16, 32, 64}, 20'000, 2026, true);
        bool exact_ok = true;
        for (std::size_t i = 0; i < slab.stat.size(); ++i)
            exact_ok = exact_ok && std::abs(slab.stat[i] - 1.0) <= 3 * slab.se[i];
        report(13, band && exact_ok, "escape probability band and slab closed form",
               fmt("ball stats %.2f/%.2f/%.2f in [0.25,4], slab within 3se", ball.stat[0],
                   ball.stat[1], ball.stat[2]));
    }

    // --- 14: non-intersection exponents ------------------------------------------------
    {
        // exact computation, so large radii are free; small ones bias the fit
        // (p = 1/(r+1)^2 gives slope -2 log(r+1)/log r, well off 2 below r ~ 16)
        auto g1 = grid_box(1, 260);
        auto e1 = nonintersection_scaling(g1, *g1.vertex_at(Vec{0}), *g1.vertex_at(Vec{1}),
                                          {16, 32, 64, 128, 256}, 10, 2026);
        double xi1 = -e1.exponent;
        auto g3 = grid_box(3, 40);
        auto e3 = nonintersection_scaling(g3, *g3.vertex_at(Vec{0, 0, 0}),
                                          *g3.vertex_at(Vec{1, 0, 0}), {8, 16, 32}, 20'000, 2026);
        double xi3 = -e3.exponent;
        bool ok = std::abs(xi1 - 2.0) <= 0.1 && xi3 + 1.645 * e3.exponent_se < 1.0;
        report(14, ok, "non-intersection exponents",
               fmt("xi1=%.4f (exact ruin), xi3=%.3f+1.645*%.3f<1", xi1, xi3, e3.exponent_se));
    }

    // --- 15: interpolation consistency ---------------------------------------------------
    {
        auto ga = grid(3, 1, 1, IVec{-10, -10, -10}, IVec{170, 170, 170});
        StitchConfig cfg;
        cfg.pair = LatticePair::z3_2z3;
        cfg.L = 32;
        cfg.M = 5;
        cfg.alpha = mpq_class(1, 2);
        cfg.xi = StitchConfig::xi_random(5, 3, 2026);
        auto gb = stitched(cfg);
        Vec start{80, 80, 80};
        auto rep = interpolation_consistency(ga, gb, start, {64, 128}, 2000, 2026);
        const auto& r64 = rep.rows[0];
        const auto& r128 = rep.rows[1];
        auto worst = [](const InterpRow& r) { return std::max(r.deficit_fwd, r.deficit_bwd); };
        bool ok = r64.deficit_fwd <= 3 * r64.se && r64.deficit_bwd <= 3 * r64.se &&
                  r128.deficit_fwd <= 3 * r128.se && r128.deficit_bwd <= 3 * r128.se &&
                  worst(r128) <= worst(r64);
        report(15, ok, "interpolation deficits vs stitched(random xi)",
               fmt("s=64 deficits %.4f/%.4f, s=128 %.4f/%.4f, se=%.4f", r64.deficit_fwd,
                   r64.deficit_bwd, r128.deficit_fwd, r128.deficit_bwd, r64.se));
    }

    // --- 16: byte-identical reruns via the CLI ------------------------------------------
    {
        std::string dir = "acceptance_tmp";
        std::string cfg_path = dir + "/growth.json";
        std::system(("mkdir -p " + dir).c_str());
        {
            std::ofstream f(cfg_path);
            f << R"({"kind": "growth-xi",
                     "graph": {"type": "grid", "dim": 3, "lo": [-24,-24,-24], "hi": [24,24,24]},
                     "seed": 5, "trials": 2000, "params": {"radii": [8, 12, 16]}})";
        }
        int rc1 = std::system(
            (lerwlab + " growth-xi --config " + cfg_path + " --out " + dir + "/a --threads 1 > /dev/null").c_str());
        int rc2 = std::system(
            (lerwlab + " growth-xi --config " + cfg_path + " --out " + dir + "/b --threads 8 > /dev/null").c_str());
        std::string a = slurp(dir + "/a/growth.csv"), b = slurp(dir + "/b/growth.csv");
        bool ok = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
        report(16, ok, "byte-identical CSV reruns across worker counts",
               fmt("%zu bytes%s", a.size(), ok ? ", identical" : ", MISMATCH"));
    }

    if (g_failures == 0) std::printf("all 16 acceptance criteria passed\n");
    return g_failures;
}
