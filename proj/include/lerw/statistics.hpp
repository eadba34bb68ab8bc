#ifndef LERW_STATISTICS_HPP
#define LERW_STATISTICS_HPP

#include <cstdint>
#include <vector>

#include "lerw/sphere.hpp"
#include "lerw/walk.hpp"

namespace lerw {

// Unweighted least squares y ~ slope*x + intercept.
struct LineFit {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
    double corr = 0;  // Pearson correlation of (x, y)
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Log-log table of a per-radius statistic plus the fitted exponent
// (slope of log stat vs log r; decay exponents come out negative).
struct ExponentEstimate {
    std::vector<double> radii;
    std::vector<double> stat;
    std::vector<double> se;
    double exponent = 0;
    double exponent_se = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t cap_exhausted = 0;
};

struct ProbEstimate {
    double p = 0;
    double se = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

// --- quasi-loops --------------------------------------------------------------

// Number of grid centers v in (s/dim)*Z^dim witnessing an (s, r)-quasi-loop:
// two path points inside B(v, s) whose connecting subpath has diameter >= r.
// The grid is anchored at the origin.  `quasi_loop_count_naive` is the direct
// O(n^2) pairwise scan used as the correctness oracle for the bucketed
// implementation; both share the exact diameter predicate.
std::uint64_t quasi_loop_count(const std::vector<Vec>& pts, int dim, double s, double r);
std::uint64_t quasi_loop_count(const WeightedGraph& g, const PathSeq& path, double s, double r);
std::uint64_t quasi_loop_count_naive(const std::vector<Vec>& pts, int dim, double s, double r);

// Mean QL(r^{1-eps}, r^{1-delta_hat}, LE(R[0, T_r])) per radius; requires
// eps > delta_hat so that s < r', and >= 100 trials.
ExponentEstimate quasi_loop_decay(const WeightedGraph& g, VertexId start, double eps,
                                  double delta_hat, const std::vector<double>& radii,
                                  std::uint64_t trials, std::uint64_t seed);

// --- exponents ----------------------------------------------------------------

// Fit of log E[len LE(R[0, T_{v,r}])] vs log r.  Aborts if more than 1% of
// trials exhaust the step cap at any radius.
ExponentEstimate growth_exponent(const WeightedGraph& g, VertexId start,
                                 const std::vector<double>& radii, std::uint64_t trials,
                                 std::uint64_t seed);

// P(ranges of two independent walks, run to radius r from their starts, are
// disjoint), per radius, trial-coupled across radii so the table is monotone.
// On 1-D grids the probability is computed exactly (ruin products), no
// sampling.
ExponentEstimate nonintersection_scaling(const WeightedGraph& g, VertexId v1, VertexId v2,
                                         const std::vector<double>& radii, std::uint64_t trials,
                                         std::uint64_t seed);

// stat = p_hat * r / d(v, dH) per radius, p_hat the probability of reaching
// distance r before entering the half-space H.  With slab = true the success
// event is instead a normal displacement of r - d(v, dH) (the 1-D projection
// makes p = k/r exact for axis-aligned H on Z^d).
ExponentEstimate escape_probability(const WeightedGraph& g, VertexId v, const HalfSpaceSpec& H,
                                    const std::vector<double>& radii, std::uint64_t trials,
                                    std::uint64_t seed, bool slab = false);

// P(R[0, T_{v,4r}] hits A); A must be connected and cross the annulus
// between B(v, r) and B(v, 2r).
ProbEstimate beurling_hit(const WeightedGraph& g, VertexId v, const VertexSet& A, double r,
                          std::uint64_t trials, std::uint64_t seed);

// --- isotropy -----------------------------------------------------------------

struct IsotropyReport {
    VertexId center = 0;
    double r = 0;
    std::vector<SphereCell> cells;
    std::vector<double> cell_prob;  // p_{A*}, sums to 1
    std::vector<double> deviation;  // |p_{A*} - |A||
    double max_deviation = 0;
    bool exact = false;
    std::uint64_t trials = 0;  // mc mode only
    std::uint64_t seed = 0;
};

// Distribution of the first vertex at distance >= r from v over an
// equal-area partition of the stopping sphere.  exact mode solves the
// hitting system on the ball (rationally when small, conjugate gradient
// otherwise); mc mode samples `trials` walks.
IsotropyReport isotropy_check(const WeightedGraph& g, VertexId v, double r, int cells, bool exact,
                              std::uint64_t trials = 0, std::uint64_t seed = 0);

// Fit of max deviation ~ K * r^{-alpha} across radii (exact mode).
struct IsotropyFit {
    std::vector<double> radii;
    std::vector<double> dev;
    double K = 0;
    double alpha = 0;
};
IsotropyFit isotropy_fit(const WeightedGraph& g, VertexId v, const std::vector<double>& radii,
                         int cells);

// --- exit times ---------------------------------------------------------------

struct TailTable {
    std::vector<double> m;  // thresholds in units of r^2
    std::vector<double> p;  // P(exit time >= m * r^2)
    std::vector<double> se;
    double median_steps = 0;
    double log_corr = 0;  // correlation of (m, log p)
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};
TailTable exit_time_tail(const WeightedGraph& g, VertexId v, double r, std::uint64_t trials,
                         std::uint64_t seed);

// --- interpolation consistency --------------------------------------------------

struct InterpRow {
    double s = 0;
    double pA_E = 0, pA_Efat = 0;  // graph A: P(LE in slab), P(LE in fattened slab)
    double pB_E = 0, pB_Efat = 0;  // graph B
    double se = 0;                 // worst-case binomial standard error
    double deficit_fwd = 0;        // pA_E - pB_Efat (Theorem interp direction A -> B)
    double deficit_bwd = 0;        // pB_E - pA_Efat
};
struct InterpReport {
    std::vector<InterpRow> rows;
    double margin_coef = 4.0;   // fattening margin m(s) = coef * s^pow
    double margin_pow = 0.75;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

// E is the axis slab {|x_1 - start_1| <= s/4} inside the ball B(start, s/2);
// per scale s, the containment probabilities of LE(R[0, T_{s/2}]) in E and in
// E fattened by m(s), on both graphs, and the one-sided deficits.
InterpReport interpolation_consistency(const WeightedGraph& ga, const WeightedGraph& gb,
                                       const Vec& start, const std::vector<double>& scales,
                                       std::uint64_t trials, std::uint64_t seed,
                                       double margin_coef = 4.0, double margin_pow = 0.75);

// --- cut points -----------------------------------------------------------------

struct CutDensityReport {
    double r = 0;
    double mean_annulus = 0;  // cut points of R[0, T_{v,4r}] in B(v,2r) \ B(v,r)
    double se_annulus = 0;
    double mean_total = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};
CutDensityReport cut_point_density(const WeightedGraph& g, VertexId w, VertexId v, double r,
                                   std::uint64_t trials, std::uint64_t seed);

}  // namespace lerw

#endif
