#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lerw/graph.hpp"
#include "lerw/rng.hpp"

using namespace lerw;

namespace {

WeightedGraph unit_grid(int dim, std::int64_t half) {
    IVec lo = IVec::zero(dim), hi = IVec::zero(dim);
    for (int i = 0; i < dim; ++i) {
        lo[i] = -half;
        hi[i] = half;
    }
    return WeightedGraph::implicit_grid(dim, 1, 1, lo, hi);
}

WeightedGraph path4() {
    WeightedGraph::Builder b(1);
    for (int i = 0; i < 4; ++i) b.add_vertex(Vec{static_cast<double>(i)});
    for (int i = 0; i < 3; ++i) b.add_edge(i, i + 1, 1);
    return std::move(b).build();
}

}  // namespace

TEST_CASE("total_weight") {
    auto g3 = unit_grid(3, 4);
    VertexId v = *g3.vertex_at(Vec{0, 0, 0});
    CHECK(g3.total_weight(v) == 6.0);
    CHECK(g3.total_weight_exact(v) == mpq_class(6));

    auto g2z3 = WeightedGraph::implicit_grid(3, 2, 2, IVec{-4, -4, -4}, IVec{4, 4, 4});
    VertexId w = *g2z3.vertex_at(Vec{0, 0, 0});
    CHECK(g2z3.total_weight(w) == 12.0);

    WeightedGraph::Builder b(2);
    VertexId s = b.add_vertex(Vec{0, 0});
    b.add_edge(s, s, 3);
    auto loop = std::move(b).build();
    CHECK(loop.total_weight(s) == 3.0);
    CHECK(loop.degree(s) == 1);
}

TEST_CASE("euclidean_ball") {
    auto g2 = unit_grid(2, 5);
    CHECK(g2.euclidean_ball(Vec{0, 0}, 1.2).size() == 5);
    CHECK(g2.euclidean_ball(Vec{0, 0}, 1.5).size() == 9);
    CHECK(g2.euclidean_ball(Vec{0, 0}, 0.0).empty());

    auto g3 = unit_grid(3, 5);
    // shells |x|^2 = 0,1,2,3,4 -> 1+6+12+8+6
    CHECK(g3.euclidean_ball(Vec{0, 0, 0}, 2.1).size() == 33);
    CHECK(g3.euclidean_ball(Vec{0, 0, 0}, 1.7).size() == 19);

    // strictness: vertices at exactly r are excluded
    CHECK(g2.euclidean_ball(Vec{0, 0}, 1.0).size() == 1);

    // monotone in r
    auto b1 = g3.euclidean_ball(Vec{0.3, -0.2, 0.1}, 2.0);
    auto b2 = g3.euclidean_ball(Vec{0.3, -0.2, 0.1}, 3.0);
    for (VertexId v : b1) CHECK(b2.contains(v));
}

TEST_CASE("external_boundary") {
    auto g2 = unit_grid(2, 3);
    VertexId o = *g2.vertex_at(Vec{0, 0});
    auto bd = g2.external_boundary(VertexSet({o}));
    CHECK(bd.size() == 4);
    CHECK(!bd.contains(o));

    auto p = path4();
    auto bd2 = p.external_boundary(VertexSet({0, 1}));
    CHECK(bd2 == VertexSet({2}));

    std::vector<VertexId> all;
    for (VertexId v = 0; v < 4; ++v) all.push_back(v);
    CHECK(p.external_boundary(VertexSet(all)).empty());
}

TEST_CASE("graph_metric") {
    auto g = WeightedGraph::implicit_grid(2, 1, 1, IVec{0, 0}, IVec{2, 2});
    VertexId a = *g.vertex_at(Vec{0, 0});
    VertexId b = *g.vertex_at(Vec{2, 2});
    CHECK(g.graph_metric(a, a) == 0);
    CHECK(g.graph_metric(a, *g.vertex_at(Vec{0, 1})) == 1);
    CHECK(g.graph_metric(a, b) == 4);

    WeightedGraph::Builder bb(1);
    bb.add_vertex(Vec{0.0});
    bb.add_vertex(Vec{1.0});
    auto disc = std::move(bb).build();
    CHECK(!disc.graph_metric(0, 1).has_value());

    // triangle inequality on sampled triples
    RngStream rng(7, 0);
    for (int t = 0; t < 30; ++t) {
        auto u = static_cast<VertexId>(rng.next_below(g.size()));
        auto v = static_cast<VertexId>(rng.next_below(g.size()));
        auto w = static_cast<VertexId>(rng.next_below(g.size()));
        CHECK(*g.graph_metric(u, w) <= *g.graph_metric(u, v) + *g.graph_metric(v, w));
    }
}

TEST_CASE("discrete_laplacian") {
    auto g3 = unit_grid(3, 4);
    VertexId v = *g3.vertex_at(Vec{1, -1, 0});
    CHECK(g3.discrete_laplacian([](VertexId) { return 5.0; }, v) == doctest::Approx(0.0).epsilon(1e-12));
    auto fx = [&](VertexId u) { return g3.pos(u)[0]; };
    CHECK(g3.discrete_laplacian(fx, v) == doctest::Approx(0.0).epsilon(1e-12));
    auto fx2 = [&](VertexId u) { double x = g3.pos(u)[0]; return x * x; };
    CHECK(g3.discrete_laplacian(fx2, v) == doctest::Approx(1.0 / 3.0));
    CHECK(g3.discrete_laplacian_exact([&](VertexId u) {
        double x = g3.pos(u)[0];
        return mpq_class(static_cast<long>(x * x));
    }, v) == mpq_class(1, 3));
}

TEST_CASE("nearest_vertex") {
    auto g2 = unit_grid(2, 3);
    VertexId on = g2.nearest_vertex(Vec{2, -1});
    CHECK(g2.pos(on) == Vec{2, -1});
    VertexId tie = g2.nearest_vertex(Vec{0.5, 0});
    CHECK(g2.pos(tie) == Vec{0, 0});

    auto g2z3 = WeightedGraph::implicit_grid(3, 2, 2, IVec{-2, -2, -2}, IVec{2, 2, 2});
    CHECK(g2z3.pos(g2z3.nearest_vertex(Vec{0.4, 0.4, 0.4})) == Vec{0, 0, 0});

    // explicit backend tie-break
    WeightedGraph::Builder b(2);
    VertexId p1 = b.add_vertex(Vec{1, 0});
    VertexId p0 = b.add_vertex(Vec{0, 0});
    b.add_edge(p0, p1, 1);
    auto g = std::move(b).build();
    CHECK(g.nearest_vertex(Vec{0.5, 0}) == p0);
}

TEST_CASE("weight symmetry and frontier") {
    WeightedGraph::Builder b(2);
    VertexId u = b.add_vertex(Vec{0, 0});
    VertexId v = b.add_vertex(Vec{1, 0});
    b.add_edge(u, v, mpq_class(2, 3));
    b.mark_frontier(v);
    auto g = std::move(b).build();
    CHECK(g.weight_exact(u, 0) == g.weight_exact(v, 0));
    CHECK(g.weight_exact(u, 0) == mpq_class(2, 3));
    CHECK(!g.is_frontier(u));
    CHECK(g.is_frontier(v));

    auto grid = unit_grid(2, 2);
    CHECK(grid.is_frontier(*grid.vertex_at(Vec{2, 0})));
    CHECK(!grid.is_frontier(*grid.vertex_at(Vec{1, 1})));
    CHECK(grid.degree(*grid.vertex_at(Vec{-2, -2})) == 2);
}

TEST_CASE("vertex_at and grid coords") {
    auto g = WeightedGraph::implicit_grid(3, 1, 1, IVec{-3, -3, -3}, IVec{3, 3, 3});
    CHECK(g.size() == 343);
    CHECK(!g.vertex_at(Vec{0.5, 0, 0}).has_value());
    CHECK(!g.vertex_at(Vec{4, 0, 0}).has_value());
    VertexId v = *g.vertex_at(Vec{-1, 2, 3});
    CHECK(g.pos(v) == Vec{-1, 2, 3});
    CHECK(g.grid_id(g.grid_coords(v)) == v);
}

TEST_CASE("half space") {
    HalfSpaceSpec h(Vec{0, 0, 1}, 2.0);
    CHECK(h.contains(Vec{5, 5, 2}));
    CHECK(!h.contains(Vec{0, 0, 2.5}));
    CHECK(h.plane_distance(Vec{0, 0, 5}) == doctest::Approx(3.0));
    CHECK_THROWS(HalfSpaceSpec(Vec{0, 0, 2}, 1.0));
}

TEST_CASE("rng streams reproducible and disjoint") {
    RngStream a(42, 0), b(42, 0), c(42, 1);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool differ = false;
    RngStream a2(42, 0);
    for (int i = 0; i < 100; ++i) differ |= (a2.next_u64() != c.next_u64());
    CHECK(differ);
    RngStream d(42, 7);
    double m = 0;
    for (int i = 0; i < 10000; ++i) m += d.next_double();
    CHECK(m / 10000 == doctest::Approx(0.5).epsilon(0.02));
}
