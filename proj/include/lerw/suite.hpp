#ifndef LERW_SUITE_HPP
#define LERW_SUITE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lerw/graph.hpp"
#include "lerw/rng.hpp"

namespace lerw {

struct SuiteCheck {
    std::string name;
    std::uint64_t passed = 0;
    std::uint64_t instances = 0;
};

// Exact-lemma property suite on random small weighted graphs: reversal
// symmetry of the conditioned LERW (Lemma condLE_sym), visit-count
// independence (Lemma omer), time symmetry (eq. symT), Green's-function
// symmetry, and the Martin-capacity sandwich (BPP, gap tolerance 1e-8).
// All comparisons are in rational arithmetic except the capacity gap.
std::vector<SuiteCheck> oracle_suite(std::uint64_t instances, std::uint64_t seed);

// Shared generator for the suite's random connected weighted graphs.
WeightedGraph random_suite_graph(RngStream& rng, int n);

}  // namespace lerw

#endif
