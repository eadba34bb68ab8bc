#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "lerw/coupling.hpp"

using namespace lerw;

namespace {

WeightedGraph box3(std::int64_t h) {
    return WeightedGraph::implicit_grid(3, 1, 1, IVec{-h, -h, -h}, IVec{h, h, h});
}

VertexId origin(const WeightedGraph& g) { return *g.vertex_at(Vec::zero(g.dim())); }

double chi2_pvalue(double stat, int dof) {
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

}  // namespace

TEST_CASE("level radii and simplex counts") {
    CouplingConfig cfg;
    cfg.alpha = 1.0;
    cfg.levels = 3;
    CHECK(cfg.radius(1) == doctest::Approx(1).epsilon(1e-12));
    CHECK(cfg.radius(2) == doctest::Approx(16).epsilon(1e-12));
    CHECK(cfg.radius(3) == doctest::Approx(81).epsilon(1e-12));
    CHECK(cfg.simplex_count(1) == 5);
    CHECK(cfg.simplex_count(2) == 8);
    CHECK(cfg.simplex_count(3) == 13);

    cfg.alpha = 2.0;
    CHECK(cfg.radius(2) == doctest::Approx(4).epsilon(1e-12));
    CHECK(cfg.simplex_count(2) == 8);
}

TEST_CASE("skeleton structure and invariants") {
    auto g = box3(110);
    VertexId o = origin(g);
    CouplingConfig cfg;
    cfg.alpha = 1.0;
    cfg.levels = 3;
    cfg.inner_trials = 20'000;

    CouplingSampler sampler(g, cfg);
    Vec prev_bm = g.pos(o);
    VertexId prev_walk = o;
    for (std::uint64_t t = 0; t < 5; ++t) {
        RngStream rng(101, t);
        auto sk = sampler.sample(o, rng);
        REQUIRE(sk.levels.size() == 3);
        prev_bm = g.pos(o);
        prev_walk = o;
        for (int i = 0; i < 3; ++i) {
            const auto& lvl = sk.levels[static_cast<std::size_t>(i)];
            CHECK(lvl.r == doctest::Approx(std::pow(i + 1.0, 4.0)).epsilon(1e-12));
            CHECK(lvl.D == (i == 0 ? 5 : i == 1 ? 8 : 13));
            // walk exits just past the sphere (unit edges)
            double dr = dist(g.pos(lvl.walk_exit), g.pos(prev_walk));
            CHECK(dr >= lvl.r);
            CHECK(dr <= lvl.r + 1 + 1e-9);
            // Brownian exit exactly on the sphere of radius r_i
            CHECK(dist(lvl.bm_exit, prev_bm) == doctest::Approx(lvl.r).epsilon(1e-10));
            CHECK(lvl.eta > 0);
            CHECK(lvl.eta <= 1 + 1e-9);
            CHECK(lvl.accept_prob >= 0);
            CHECK(lvl.accept_prob <= 1);
            double total = 0;
            for (double p : lvl.p_cell) total += p;
            CHECK(std::abs(total - 1) < 1e-9);
            prev_bm = lvl.bm_exit;
            prev_walk = lvl.walk_exit;
        }
        // level 1 on the unit grid is a single step, solved exactly
        CHECK(sk.levels[0].inner_exact);
        CHECK(!sk.levels[2].inner_exact);
    }

    RngStream rng(1, 0);
    CouplingConfig bad = cfg;
    bad.alpha = 2.5;  // > d - 1
    CHECK_THROWS_AS(couple_skeleton(g, o, bad, rng), std::invalid_argument);
    bad = cfg;
    bad.levels = 0;
    CHECK_THROWS_AS(couple_skeleton(g, o, bad, rng), std::invalid_argument);
}

TEST_CASE("eta close to 1 at isotropic radii") {
    auto g = box3(40);
    VertexId o = origin(g);
    CouplingConfig cfg;
    cfg.alpha = 1.0;
    cfg.levels = 2;
    cfg.inner_trials = 40'000;
    RngStream rng(7, 0);
    auto sk = couple_skeleton(g, o, cfg, rng);
    // r_2 = 16, octants: Z^3 exit deviations are small there, eq. pidel_areadel
    CHECK(sk.levels[1].eta >= 1 - 8 * (sk.levels[1].inner_se + 1.0 / std::sqrt(16.0)));
    CHECK(sk.levels[1].eta > 0.7);
}

TEST_CASE("Brownian exit marginal is uniform") {
    auto g = box3(40);
    VertexId o = origin(g);
    CouplingConfig cfg;
    cfg.alpha = 1.0;
    cfg.levels = 2;

    CouplingSampler sampler(g, cfg);
    auto cells = sphere_partition(3, cfg.simplex_count(2));
    std::vector<std::uint64_t> cnt(cells.size(), 0);
    const std::uint64_t N = 20'000;
    std::uint64_t accepted = 0;
    for (std::uint64_t t = 0; t < N; ++t) {
        RngStream rng(303, t);
        auto sk = sampler.sample(o, rng);
        Vec dir = sk.levels[1].bm_exit - sk.levels[0].bm_exit;
        ++cnt[static_cast<std::size_t>(cell_of(cells, 3, dir))];
        if (sk.levels[1].accepted) ++accepted;
    }
    double stat = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        double e = cells[k].area * static_cast<double>(N);
        double d = static_cast<double>(cnt[k]) - e;
        stat += d * d / e;
    }
    double p = chi2_pvalue(stat, static_cast<int>(cells.size()) - 1);
    CHECK(p >= 0.01);
    // acceptance should dominate at an isotropic radius
    CHECK(static_cast<double>(accepted) / static_cast<double>(N) > 0.5);
}

TEST_CASE("closeness tail") {
    auto g = box3(40);
    VertexId o = origin(g);
    CouplingConfig cfg;
    cfg.alpha = 1.0;
    cfg.levels = 2;

    auto tab = coupling_tail(g, o, cfg, {0, 2, 4, 6, 8}, 4000, 99);
    REQUIRE(tab.freq.size() == 5);
    CHECK(tab.freq[0] == 1.0);  // lambda = 0
    for (std::size_t k = 1; k < tab.freq.size(); ++k) CHECK(tab.freq[k] <= tab.freq[k - 1]);
    CHECK(tab.scale == doctest::Approx(4.0).epsilon(1e-12));

    auto decay = coupling_tail(g, o, cfg, {2, 4, 6, 8}, 4000, 99);
    for (double f : decay.freq) CHECK(f > 0);  // thresholds must stay informative
    CHECK(decay.log_corr <= -0.9);
}
