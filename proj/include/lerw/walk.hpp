#ifndef LERW_WALK_HPP
#define LERW_WALK_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lerw/graph.hpp"
#include "lerw/oracle.hpp"
#include "lerw/rng.hpp"

namespace lerw {

// Path with per-step continuity flags; jump[i] set means the step from
// vertex i to i+1 is not along a graph edge (discontinuous path).
struct PathSeq {
    std::vector<VertexId> v;
    std::vector<bool> jump;  // size v.size()-1 when v nonempty

    std::size_t len() const { return v.empty() ? 0 : v.size() - 1; }
    bool empty() const { return v.empty(); }
    void push(VertexId x, bool is_jump = false) {
        if (!v.empty()) jump.push_back(is_jump);
        v.push_back(x);
    }
    PathSeq reversed() const;
};

struct StopSpec {
    VertexSet absorbing;
    struct RadiusStop {
        Vec center;
        double r;
    };
    std::vector<RadiusStop> radii;
    std::uint64_t step_cap = 0;   // 0 = no cap
    bool at_frontier = false;     // stop on frontier vertices instead of erroring

    bool any() const {
        return !absorbing.empty() || !radii.empty() || step_cap > 0 || at_frontier;
    }
};

enum class StopReason { hit_absorbing, exited_radius, step_cap, hit_frontier, frontier_error };

struct WalkOutcome {
    PathSeq path;
    StopReason reason = StopReason::step_cap;
    std::uint64_t hit_index = 0;
};

// Default cap for radius-r experiments.
inline std::uint64_t default_step_cap(double r) {
    return static_cast<std::uint64_t>(64.0 * r * r * std::log(r + 2.0)) + 64;
}

VertexId step(const WeightedGraph& g, VertexId v, RngStream& rng);
WalkOutcome run_until(const WeightedGraph& g, VertexId start, const StopSpec& stop, RngStream& rng);

PathSeq loop_erase(const PathSeq& path);
// LE of the concatenation, split into the pieces each part contributed.
std::vector<PathSeq> loop_erase_pieces(const std::vector<PathSeq>& pieces);
PathSeq concat(const std::vector<PathSeq>& pieces);

// Indices i (< t when given) with path[0..i] disjoint from path[i+1..end].
std::vector<std::pair<VertexId, std::uint64_t>> cut_points(
    const PathSeq& path, std::optional<std::uint64_t> t = std::nullopt);

// Walk stopped on `absorbing`, conditioned to end at `target` (exact Doob
// h-transform).
WalkOutcome conditioned_walk(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                             VertexId target, RngStream& rng);

// Rejection-sampling fallback; fills the acceptance statistics.
struct RejectionStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    double acceptance_rate() const {
        return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0;
    }
};
WalkOutcome conditioned_walk_rejection(const WeightedGraph& g, VertexId start,
                                       const VertexSet& absorbing, VertexId target,
                                       RngStream& rng, RejectionStats& stats);

// Exact next-vertex law of the Laplacian random walk with erased prefix gamma,
// forbidden set B, stopped on `absorbing`.
std::vector<std::pair<VertexId, mpq_class>> laplacian_walk_step(const WeightedGraph& g,
                                                                const PathSeq& gamma,
                                                                const VertexSet& B,
                                                                const VertexSet& absorbing);

// Wilson's algorithm: uniform spanning tree wired at `root` (parent map,
// kNoVertex at roots).
std::vector<VertexId> wilson_ust(const WeightedGraph& g, const VertexSet& root, RngStream& rng);

// --- exact lemma oracles (LE-prefix Markov chain, rational arithmetic) ------

// Law of LE(R[0,T(absorbing)]) with t >= 1 semantics, computed by absorption
// analysis of the loop-erased-prefix chain. Independent of exact_lerw_law.
LerwLaw lerw_law_prefix_chain(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                              std::size_t state_budget = 400);

// Law of LE(R[0,T_n]) where T_n is the n-th visit (t >= 1) to w; transitions
// into `forbidden` are killed and the law renormalized (Lemma omerB variant).
LerwLaw lerw_law_nth_visit(const WeightedGraph& g, VertexId start, VertexId w, int n,
                           const VertexSet& forbidden = VertexSet(),
                           std::size_t state_budget = 400);

// Exact law of LE of the conditioned walk (start on B, conditioned to end at
// target in B), via the h-transformed graph.
LerwLaw conditioned_lerw_law(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                             VertexId target);

}  // namespace lerw

#endif
