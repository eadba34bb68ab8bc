#ifndef LERW_COUPLING_HPP
#define LERW_COUPLING_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "lerw/sphere.hpp"
#include "lerw/statistics.hpp"
#include "lerw/walk.hpp"

namespace lerw {

// How the per-cell exit probabilities p_{i,cell} are obtained.  `exact`
// solves the hitting system when the open ball has at most
// kExactInnerLimit vertices and falls back to Monte Carlo above that;
// `mc` always samples.
enum class InnerMode { exact, mc };
constexpr std::size_t kExactInnerLimit = 5000;

struct CouplingConfig {
    double alpha = 1.0;  // isotropy exponent, in (0, d-1]
    double K = 1.0;      // isotropy constant (recorded, not used to sample)
    int levels = 1;
    InnerMode inner = InnerMode::exact;
    std::uint64_t inner_trials = 20'000;  // Monte Carlo fallback sample size
    std::uint64_t inner_seed = 7;         // seeds the inner estimation streams

    // Radius and simplex count of level i (1-based).
    double radius(int i) const;
    int simplex_count(int i) const;
};

struct CouplingLevel {
    double r = 0;              // r_i = i^{4/alpha}
    int D = 0;                 // floor(r_i^{alpha/2}) + 4
    VertexId walk_exit = 0;    // R(tau_i)
    int cell = 0;              // realized exit cell (A+/first-cell assignment)
    bool accepted = false;     // X_i
    double accept_prob = 0;    // eta_i |cell| / p_{i,cell}
    Vec bm_exit;               // W(sigma_i), on the sphere of radius r_i
    std::vector<double> p_cell;  // p_{i,cell} per partition cell
    double eta = 0;              // min over cells of p / area
    bool inner_exact = false;    // hitting solve vs Monte Carlo
    double inner_se = 0;         // worst-case binomial se of p_cell (mc only)
};

struct CouplingSkeleton {
    std::vector<CouplingLevel> levels;
};

// Samples coupled exit skeletons.  The per-cell exit laws are memoized:
// on a grid they are translation invariant, so one computation per level
// serves every trial (read-mostly cache, exclusive insert).
class CouplingSampler {
public:
    CouplingSampler(const WeightedGraph& g, CouplingConfig cfg);
    CouplingSkeleton sample(VertexId start, RngStream& rng);

private:
    struct InnerLaw {
        std::vector<double> p;
        bool exact = false;
        double se = 0;
    };
    const InnerLaw& exit_law(VertexId center, int level);

    const WeightedGraph& g_;
    CouplingConfig cfg_;
    std::map<std::pair<VertexId, int>, std::unique_ptr<InnerLaw>> cache_;
    std::shared_mutex mutex_;
};

CouplingSkeleton couple_skeleton(const WeightedGraph& g, VertexId start, const CouplingConfig& cfg,
                                 RngStream& rng);

// Exceedance frequencies of max_{j <= levels} |R(tau_j) - W(sigma_j)| over
// thresholds lambda * scale (scale <= 0 selects sqrt(r_levels), the typical
// one-level mismatch scale).
struct CouplingTail {
    std::vector<double> lambda;
    std::vector<double> freq;
    std::vector<double> se;
    double scale = 0;
    double log_corr = 0;  // correlation of (lambda, log freq) over freq > 0
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};
CouplingTail coupling_tail(const WeightedGraph& g, VertexId start, const CouplingConfig& cfg,
                           const std::vector<double>& lambdas, std::uint64_t trials,
                           std::uint64_t seed, double scale = 0);

}  // namespace lerw

#endif
