#ifndef LERW_LATTICE_HPP
#define LERW_LATTICE_HPP

#include <cstdint>
#include <vector>

#include "lerw/graph.hpp"

namespace lerw {

enum class LatticePair { z3_2z3, z2_2z2, z3_3z3 };

// Stitched interpolation graph G(L, M, xi): an M^d arrangement of L-sided
// blocks, each filled with the fine or the coarse lattice of the pair, glued
// with the cross-weight tables.
struct StitchConfig {
    LatticePair pair = LatticePair::z3_2z3;
    int L = 8;
    int M = 1;
    std::vector<int> xi;  // row-major over {0..M-1}^d, entries in {1,2}
    int margin = 0;       // extension outside [0, LM)^d, majority-vote type
    mpq_class alpha = mpq_class(1, 9);

    int dim() const { return pair == LatticePair::z2_2z2 ? 2 : 3; }
    int coarse() const { return pair == LatticePair::z3_3z3 ? 3 : 2; }
    mpq_class coarse_weight() const {
        switch (pair) {
            case LatticePair::z3_2z3: return 2;
            case LatticePair::z2_2z2: return 1;
            default: return 3;
        }
    }
    // Block type at integer point p; majority vote (ties -> 1) outside.
    int type_at(const IVec& p) const;
    // Whether the infinite construction has a vertex at p.
    bool occupied(const IVec& p) const;
    void validate() const;

    static std::vector<int> xi_all(int M, int dim, int type);
    static std::vector<int> xi_random(int M, int dim, std::uint64_t seed);
};

WeightedGraph grid(int dim, const mpq_class& spacing, const mpq_class& edge_weight,
                   const IVec& lo, const IVec& hi);
WeightedGraph stitched(const StitchConfig& cfg);
// Lattice spanned by (4,3,0), (3,-4,0), (0,0,5); distance-5 edges of weight 5.
WeightedGraph rotated_lattice(const IVec& lo, const IVec& hi);

enum class VertexClass { interior1 = 0, interior2 = 1, face = 2, edge_or_corner = 3 };

// Exact one-step displacement moments at v, with the vertex's distance class
// relative to the stitch planes of cfg (no cfg: interior of a pure lattice).
struct MomentCertificate {
    VertexClass cls = VertexClass::interior1;
    int dim = 0;
    std::vector<mpq_class> mean;    // d entries
    std::vector<mpq_class> second;  // d*d row-major
    std::vector<mpq_class> third;   // d*d*d row-major

    bool zero_mean() const;
    bool zero_third() const;
    // Second-moment matrix is a scalar multiple of the identity.
    bool isotropic_second() const;
};

MomentCertificate moment_certificate(const WeightedGraph& g, VertexId v,
                                     const StitchConfig* cfg = nullptr);
VertexClass classify_vertex(const StitchConfig& cfg, const Vec& p);

struct ClassReport {
    std::uint64_t count = 0;
    mpq_class max_mean_abs = 0;
    mpq_class max_second_aniso = 0;  // off-diagonal or diagonal spread
    mpq_class max_third_abs = 0;
};

struct CertifyReport {
    ClassReport by_class[4];
    std::uint64_t sampled = 0;
    std::uint64_t skipped_frontier = 0;
    bool all_zero_mean() const;
    bool class_i_isotropic() const;
};

CertifyReport certify_lattice(const WeightedGraph& g, const StitchConfig* cfg,
                              std::uint64_t max_samples, std::uint64_t seed);

// Position-preserving graph equality with exact weights.
bool same_by_position(const WeightedGraph& a, const WeightedGraph& b);
// Equality of the restrictions to the closed box [lo, hi]: same vertices in
// the box, and identical neighborhoods (by target position and exact weight)
// at every vertex strictly inside by one interaction radius.
bool agree_on_box(const WeightedGraph& a, const WeightedGraph& b, const Vec& lo, const Vec& hi);

}  // namespace lerw

#endif
