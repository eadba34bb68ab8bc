#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lerw/lattice.hpp"
#include "lerw/oracle.hpp"
#include "lerw/rng.hpp"

using namespace lerw;

namespace {

WeightedGraph path_graph(int n) {
    WeightedGraph::Builder b(1);
    for (int i = 0; i < n; ++i) b.add_vertex(Vec{static_cast<double>(i)});
    for (int i = 0; i + 1 < n; ++i) b.add_edge(i, i + 1, 1);
    return std::move(b).build();
}

// Random connected graph with small rational weights.
WeightedGraph random_graph(RngStream& rng, int n) {
    WeightedGraph::Builder b(1);
    for (int i = 0; i < n; ++i) b.add_vertex(Vec{static_cast<double>(i)});
    auto rand_w = [&] {
        return mpq_class(1 + static_cast<long>(rng.next_below(4)),
                         1 + static_cast<long>(rng.next_below(3)));
    };
    for (int i = 1; i < n; ++i)
        b.add_edge(static_cast<VertexId>(rng.next_below(i)), i, rand_w());
    int extra = static_cast<int>(rng.next_below(n));
    for (int e = 0; e < extra; ++e) {
        auto u = static_cast<VertexId>(rng.next_below(n));
        auto v = static_cast<VertexId>(rng.next_below(n));
        if (u != v) b.add_edge(u, v, rand_w());
    }
    return std::move(b).build();
}

}  // namespace

TEST_CASE("harmonic_solve") {
    auto p = path_graph(4);
    std::unordered_map<VertexId, mpq_class> bd{{0, 0}, {3, 1}};
    auto f = harmonic_solve_exact(p, bd, VertexSet({1, 2}));
    CHECK(f[1] == mpq_class(1, 3));
    CHECK(f[2] == mpq_class(2, 3));

    std::unordered_map<VertexId, double> bdc{{0, 7.0}, {3, 7.0}};
    auto fc = harmonic_solve(p, bdc, VertexSet({1, 2}));
    CHECK(fc[1] == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(fc[2] == doctest::Approx(7.0).epsilon(1e-12));

    // maximum principle on a grid
    auto g = grid(2, 1, 1, IVec{0, 0}, IVec{4, 4});
    std::vector<VertexId> interior;
    for (std::uint64_t v = 0; v < g.size(); ++v)
        if (!g.is_frontier(static_cast<VertexId>(v))) interior.push_back(static_cast<VertexId>(v));
    VertexSet A(interior);
    std::unordered_map<VertexId, double> bd2;
    RngStream rng(3, 0);
    double mx = -1;
    for (VertexId u : g.external_boundary(A)) {
        bd2[u] = rng.next_double();
        mx = std::max(mx, bd2[u]);
    }
    auto sol = harmonic_solve(g, bd2, A);
    for (VertexId v : A) CHECK(sol[v] <= mx + 1e-12);

    // disconnected interior component must be rejected
    auto p2 = path_graph(2);
    std::unordered_map<VertexId, double> nobd;
    CHECK_THROWS(harmonic_solve(p2, nobd, VertexSet({0, 1})));
}

TEST_CASE("greens_function") {
    auto p = path_graph(4);
    auto G = greens_function(p, VertexSet({1, 2}), true);
    CHECK(G.value_exact(1, 1) == mpq_class(4, 3));
    CHECK(G.value_exact(1, 2) == mpq_class(2, 3));
    CHECK(G.value_exact(2, 2) == mpq_class(4, 3));
    CHECK(G.value_exact(0, 1) == 0);

    auto g = grid(3, 1, 1, IVec{-2, -2, -2}, IVec{2, 2, 2});
    VertexId s = *g.vertex_at(Vec{0, 0, 0});
    auto Gs = greens_function(g, VertexSet({s}), true);
    CHECK(Gs.value_exact(s, s) == 1);

    // symmetry on random weighted graphs
    RngStream rng(17, 0);
    for (int t = 0; t < 50; ++t) {
        int n = 5 + static_cast<int>(rng.next_below(10));
        auto rg = random_graph(rng, n);
        std::vector<VertexId> dom;
        for (int v = 0; v + 1 < n; ++v)
            if (rng.next_below(2)) dom.push_back(static_cast<VertexId>(v));
        if (dom.empty()) dom.push_back(0);
        VertexSet S(dom);
        auto Gr = greens_function(rg, S, true);
        for (VertexId v : S)
            for (VertexId w : S)
                CHECK(rg.total_weight_exact(v) * Gr.value_exact(v, w) ==
                      rg.total_weight_exact(w) * Gr.value_exact(w, v));
        for (VertexId v : S)
            for (VertexId w : S) CHECK(Gr.value_exact(v, w) >= 0);
    }
}

TEST_CASE("hitting_distribution") {
    auto p = path_graph(5);
    VertexSet ends({0, 4});
    auto h2 = hitting_distribution(p, 2, ends, true);
    CHECK(h2.prob_exact(0) == mpq_class(1, 2));
    auto h1 = hitting_distribution(p, 1, ends, true);
    CHECK(h1.prob_exact(0) == mpq_class(3, 4));
    mpq_class s = h1.prob_exact(0) + h1.prob_exact(4);
    CHECK(s == 1);

    // t >= 1: starting on an absorbing vertex forces a step
    auto h0 = hitting_distribution(p, 0, ends, true);
    CHECK(h0.prob_exact(0) == mpq_class(3, 4));
    CHECK(h0.prob_exact(4) == mpq_class(1, 4));

    // quarter symmetry on Z^2
    auto g = grid(2, 1, 1, IVec{-6, -6}, IVec{6, 6});
    VertexId o = *g.vertex_at(Vec{0, 0});
    auto ball = g.euclidean_ball(Vec{0, 0}, 3.5);
    auto bd = g.external_boundary(ball);
    auto hv = hitting_distribution(g, o, bd, true);
    mpq_class quad[4];
    for (VertexId w : bd) {
        Vec q = g.pos(w);
        int k = q[0] > 0 && q[1] >= 0   ? 0
                : q[0] <= 0 && q[1] > 0 ? 1
                : q[0] < 0 && q[1] <= 0 ? 2
                                        : 3;
        quad[k] += hv.prob_exact(w);
    }
    for (int k = 0; k < 4; ++k) CHECK(quad[k] == mpq_class(1, 4));
}

TEST_CASE("exact_lerw_law") {
    auto p = path_graph(4);
    auto law = exact_lerw_law(p, 0, VertexSet({3}));
    REQUIRE(law.paths.size() == 1);
    CHECK(law.paths[0] == std::vector<VertexId>{0, 1, 2, 3});
    CHECK(law.prob[0] == 1);

    WeightedGraph::Builder tb(1);
    for (int i = 0; i < 3; ++i) tb.add_vertex(Vec{static_cast<double>(i)});
    tb.add_edge(0, 1, 1);
    tb.add_edge(1, 2, 1);
    tb.add_edge(0, 2, 1);
    auto tri = std::move(tb).build();
    auto tl = exact_lerw_law(tri, 0, VertexSet({2}));
    REQUIRE(tl.paths.size() == 2);
    CHECK(tl.prob[tl.find({0, 2})] == mpq_class(2, 3));
    CHECK(tl.prob[tl.find({0, 1, 2})] == mpq_class(1, 3));
    CHECK(tl.total() == 1);

    auto g = grid(2, 1, 1, IVec{0, 0}, IVec{2, 2});
    VertexId c = *g.vertex_at(Vec{1, 1});
    std::vector<VertexId> corners = {*g.vertex_at(Vec{0, 0}), *g.vertex_at(Vec{2, 0}),
                                     *g.vertex_at(Vec{0, 2}), *g.vertex_at(Vec{2, 2})};
    auto gl = exact_lerw_law(g, c, VertexSet(corners));
    CHECK(gl.total() == 1);
    CHECK(gl.paths.size() > 4);

    CHECK_THROWS(exact_lerw_law(g, c, VertexSet(corners), 3));
}

TEST_CASE("martin_capacity") {
    auto g = grid(2, 1, 1, IVec{-5, -5}, IVec{5, 5});
    std::vector<VertexId> sink;
    for (std::uint64_t v = 0; v < g.size(); ++v)
        if (g.is_frontier(static_cast<VertexId>(v))) sink.push_back(static_cast<VertexId>(v));
    VertexId src = *g.vertex_at(Vec{0, 0});
    VertexId x = *g.vertex_at(Vec{2, 1});
    auto rep = martin_capacity(g, src, VertexSet(sink), VertexSet({x}));
    auto G = greens_function(g, [&] {
        std::vector<VertexId> dom;
        for (std::uint64_t v = 0; v < g.size(); ++v)
            if (!g.is_frontier(static_cast<VertexId>(v))) dom.push_back(static_cast<VertexId>(v));
        return VertexSet(dom);
    }(), false);
    CHECK(rep.capacity == doctest::Approx(G.value(src, x) / G.value(x, x)).epsilon(1e-6));
    CHECK(rep.hit_probability == doctest::Approx(rep.capacity).epsilon(1e-6));
    CHECK(rep.sandwich_ok);

    // two far-separated points
    VertexId y = *g.vertex_at(Vec{-3, -2});
    auto rep2 = martin_capacity(g, src, VertexSet(sink), VertexSet({x, y}));
    CHECK(rep2.sandwich_ok);
    CHECK(rep2.capacity <= 1.0 + 1e-9);
    double mu_sum = 0;
    for (double m : rep2.mu) mu_sum += m;
    CHECK(mu_sum == doctest::Approx(1.0).epsilon(1e-9));

    // random small instances
    RngStream rng(23, 0);
    int done = 0;
    while (done < 50) {
        int n = 6 + static_cast<int>(rng.next_below(10));
        auto rg = random_graph(rng, n);
        VertexSet snk({static_cast<VertexId>(n - 1)});
        VertexId v = 0;
        std::vector<VertexId> tgt;
        for (int u = 1; u + 1 < n; ++u)
            if (rng.next_below(3) == 0) tgt.push_back(static_cast<VertexId>(u));
        if (tgt.empty()) continue;
        auto r = martin_capacity(rg, v, snk, VertexSet(tgt), 1e-12);
        CHECK(r.sandwich_ok);
        ++done;
    }
}
