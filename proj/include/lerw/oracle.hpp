#ifndef LERW_ORACLE_HPP
#define LERW_ORACLE_HPP

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lerw/graph.hpp"

namespace lerw {

// Dense rational linear solve A*X = B (A is n x n, B is n x m, row-major).
// Throws std::domain_error on a singular system.
std::vector<mpq_class> solve_rational(std::vector<mpq_class> A, std::vector<mpq_class> B,
                                      std::size_t n, std::size_t m);

constexpr std::size_t kDenseSolveLimit = 5000;
constexpr std::size_t kRationalSolveLimit = 200;

// Green's function G(v,w;S): expected visits to w strictly before exiting S,
// for the walk started at v (the visit at time 0 counts). Zero outside S.
struct GreenMatrix {
    std::vector<VertexId> domain;  // sorted
    std::vector<double> vals;      // |S| x |S| row-major
    std::vector<mpq_class> exact;  // filled in exact mode
    bool exact_mode = false;

    int index_of(VertexId v) const;
    double value(VertexId v, VertexId w) const;
    mpq_class value_exact(VertexId v, VertexId w) const;
};

GreenMatrix greens_function(const WeightedGraph& g, const VertexSet& S, bool exact);

// Harmonic extension: f with the given boundary values and discrete_laplacian
// zero on every vertex of A. Boundary must cover external_boundary(A).
std::unordered_map<VertexId, double> harmonic_solve(
    const WeightedGraph& g, const std::unordered_map<VertexId, double>& boundary,
    const VertexSet& A);
std::unordered_map<VertexId, mpq_class> harmonic_solve_exact(
    const WeightedGraph& g, const std::unordered_map<VertexId, mpq_class>& boundary,
    const VertexSet& A);

// Exit law with t >= 1 semantics: the walk takes at least one step even when
// it starts inside the absorbing set.
struct HitVector {
    VertexId start = 0;
    std::vector<VertexId> absorbing;  // sorted
    std::vector<double> p;
    std::vector<mpq_class> p_exact;
    bool exact_mode = false;

    double prob(VertexId w) const;
    mpq_class prob_exact(VertexId w) const;
};

HitVector hitting_distribution(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                               bool exact);

// Exact LERW outcome law: probability of each simple path from start into the
// absorbing set, via the Laplacian random walk recursion. Rational arithmetic.
struct LerwLaw {
    std::vector<std::vector<VertexId>> paths;
    std::vector<mpq_class> prob;
    std::uint64_t nodes_visited = 0;

    mpq_class total() const;
    int find(const std::vector<VertexId>& path) const;
};

LerwLaw exact_lerw_law(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                       std::uint64_t node_budget = 10'000'000);

// Martin capacity of S as seen from v, on the walk absorbed at `sink`.
struct CapacityReport {
    VertexId source = 0;
    std::vector<VertexId> target;  // sorted S
    double capacity = 0;
    std::vector<double> mu;        // optimal measure on target
    double hit_probability = 0;    // exact hitting prob of S before sink, from v
    double duality_gap = 0;
    bool sandwich_ok = false;      // 0.5*cap <= hit <= cap (with tolerance)
};

CapacityReport martin_capacity(const WeightedGraph& g, VertexId v, const VertexSet& sink,
                               const VertexSet& S, double gap_tol = 1e-10);

}  // namespace lerw

#endif
