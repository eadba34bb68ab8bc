#include "lerw/suite.hpp"

#include <algorithm>
#include <map>

#include "lerw/oracle.hpp"
#include "lerw/walk.hpp"

namespace lerw {

namespace {

std::map<std::vector<VertexId>, mpq_class> as_map(const LerwLaw& law) {
    std::map<std::vector<VertexId>, mpq_class> m;
    for (std::size_t i = 0; i < law.paths.size(); ++i) m[law.paths[i]] += law.prob[i];
    return m;
}

bool laws_equal(const LerwLaw& a, const LerwLaw& b) { return as_map(a) == as_map(b); }

LerwLaw reversed_law(const LerwLaw& law) {
    LerwLaw out = law;
    for (auto& p : out.paths) std::reverse(p.begin(), p.end());
    return out;
}

}  // namespace

WeightedGraph random_suite_graph(RngStream& rng, int n) {
    WeightedGraph::Builder b(1);
    for (int i = 0; i < n; ++i) b.add_vertex(Vec{static_cast<double>(i)});
    auto rand_w = [&] {
        return mpq_class(1 + static_cast<long>(rng.next_below(4)),
                         1 + static_cast<long>(rng.next_below(3)));
    };
    // random spanning tree plus a few extra edges keeps the graph connected
    for (int i = 1; i < n; ++i)
        b.add_edge(static_cast<VertexId>(rng.next_below(static_cast<std::uint64_t>(i))),
                   static_cast<VertexId>(i), rand_w());
    int extra = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    for (int e = 0; e < extra; ++e) {
        auto u = static_cast<VertexId>(rng.next_below(static_cast<std::uint64_t>(n)));
        auto v = static_cast<VertexId>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (u != v) b.add_edge(u, v, rand_w());
    }
    return std::move(b).build();
}

std::vector<SuiteCheck> oracle_suite(std::uint64_t instances, std::uint64_t seed) {
    std::vector<SuiteCheck> out;

    {  // Lemma condLE_sym: forward law == reversal of the backward law
        SuiteCheck c{"condLE_sym", 0, instances};
        RngStream rng(seed, 1);
        for (std::uint64_t t = 0; t < instances;) {
            int n = 5 + static_cast<int>(rng.next_below(5));
            auto g = random_suite_graph(rng, n);
            auto b0 = static_cast<VertexId>(rng.next_below(static_cast<std::uint64_t>(n)));
            auto b1 = static_cast<VertexId>(rng.next_below(static_cast<std::uint64_t>(n)));
            if (b0 == b1) continue;
            std::vector<VertexId> bv{b0, b1};
            if (rng.next_below(2) == 0) {
                auto b2 = static_cast<VertexId>(rng.next_below(static_cast<std::uint64_t>(n)));
                if (b2 != b0 && b2 != b1) bv.push_back(b2);
            }
            VertexSet B(bv);
            if (hitting_distribution(g, b0, B, true).prob_exact(b1) == 0) continue;
            ++t;
            auto fwd = conditioned_lerw_law(g, b0, B, b1);
            auto bwd = conditioned_lerw_law(g, b1, B, b0);
            if (laws_equal(fwd, reversed_law(bwd)) && fwd.total() == 1) ++c.passed;
        }
        out.push_back(c);
    }

    {  // Lemma omer: LE(R[0,T_1]) and LE(R[0,T_2]) have the same law
        SuiteCheck c{"omer", 0, instances};
        RngStream rng(seed, 2);
        for (std::uint64_t t = 0; t < instances; ++t) {
            int n = 5 + static_cast<int>(rng.next_below(3));
            auto g = random_suite_graph(rng, n);
            auto w = static_cast<VertexId>(n - 1);
            auto t1 = lerw_law_nth_visit(g, 0, w, 1, VertexSet(), 20'000);
            auto t2 = lerw_law_nth_visit(g, 0, w, 2, VertexSet(), 20'000);
            if (laws_equal(t1, t2) && t1.total() == 1) ++c.passed;
        }
        out.push_back(c);
    }

    {  // eq. symT: w(v) P^v(R(T(A)) = w) == w(w) P^w(R(T(A)) = v)
        SuiteCheck c{"symT", 0, instances};
        RngStream rng(seed, 3);
        for (std::uint64_t t = 0; t < instances;) {
            int n = 5 + static_cast<int>(rng.next_below(8));
            auto g = random_suite_graph(rng, n);
            std::vector<VertexId> av;
            for (int v = 0; v < n; ++v)
                if (rng.next_below(3) == 0) av.push_back(static_cast<VertexId>(v));
            if (av.size() < 2) continue;
            ++t;
            VertexSet A(av);
            bool ok = true;
            for (VertexId v : A)
                for (VertexId w : A) {
                    auto hv = hitting_distribution(g, v, A, true);
                    auto hw = hitting_distribution(g, w, A, true);
                    ok = ok && g.total_weight_exact(v) * hv.prob_exact(w) ==
                                   g.total_weight_exact(w) * hw.prob_exact(v);
                }
            if (ok) ++c.passed;
        }
        out.push_back(c);
    }

    {  // Green symmetry: w(v) G(v,w;S) == w(w) G(w,v;S)
        SuiteCheck c{"green_sym", 0, instances};
        RngStream rng(seed, 4);
        for (std::uint64_t t = 0; t < instances;) {
            int n = 5 + static_cast<int>(rng.next_below(8));
            auto g = random_suite_graph(rng, n);
            std::vector<VertexId> sv;
            for (int v = 0; v + 1 < n; ++v)
                if (rng.next_below(2) == 0) sv.push_back(static_cast<VertexId>(v));
            if (sv.size() < 2) continue;
            ++t;
            VertexSet S(sv);
            auto G = greens_function(g, S, true);
            bool ok = true;
            for (VertexId v : S)
                for (VertexId w : S)
                    ok = ok && g.total_weight_exact(v) * G.value_exact(v, w) ==
                                   g.total_weight_exact(w) * G.value_exact(w, v);
            if (ok) ++c.passed;
        }
        out.push_back(c);
    }

    {  // BPP sandwich: cap(S)/2 <= P^v(hit S before the sink) <= cap(S)
        SuiteCheck c{"bpp_sandwich", 0, instances};
        RngStream rng(seed, 5);
        for (std::uint64_t t = 0; t < instances;) {
            int n = 6 + static_cast<int>(rng.next_below(10));
            auto g = random_suite_graph(rng, n);
            VertexSet sink({static_cast<VertexId>(n - 1)});
            std::vector<VertexId> tgt;
            for (int u = 1; u + 1 < n; ++u)
                if (rng.next_below(3) == 0) tgt.push_back(static_cast<VertexId>(u));
            if (tgt.empty()) continue;
            ++t;
            auto rep = martin_capacity(g, 0, sink, VertexSet(tgt), 1e-8);
            if (rep.sandwich_ok) ++c.passed;
        }
        out.push_back(c);
    }

    return out;
}

}  // namespace lerw
