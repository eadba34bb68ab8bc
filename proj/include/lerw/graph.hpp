#ifndef LERW_GRAPH_HPP
#define LERW_GRAPH_HPP

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lerw/vec.hpp"

namespace lerw {

using VertexId = std::uint32_t;
constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

// Sorted, deduplicated set of vertex ids.
class VertexSet {
public:
    VertexSet() = default;
    explicit VertexSet(std::vector<VertexId> ids);

    bool contains(VertexId v) const;
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::vector<VertexId>& ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    friend bool operator==(const VertexSet& a, const VertexSet& b) { return a.ids_ == b.ids_; }

private:
    std::vector<VertexId> ids_;
};

// The half-space {x : <x, normal> <= offset}.
struct HalfSpaceSpec {
    Vec normal;
    double offset = 0;

    HalfSpaceSpec(Vec n, double off);
    bool contains(const Vec& p) const { return normal.dot(p) <= offset; }
    // Distance from p to the bounding hyperplane.
    double plane_distance(const Vec& p) const { return std::abs(normal.dot(p) - offset); }
};

// Immutable weighted graph embedded in R^d with symmetric positive edge
// weights. Two storage backends:
//  - implicit grid (spacing * Z^d intersected with an integer box), no
//    per-vertex storage, used by the big Monte Carlo runs;
//  - explicit CSR adjacency with a palette of exact rational weights, used
//    by the constructed lattices and hand-built test graphs.
class WeightedGraph {
public:
    struct Neighbor {
        VertexId to;
        double w;
    };

    // --- constructors -----------------------------------------------------
    static WeightedGraph implicit_grid(int dim, const mpq_class& spacing, const mpq_class& weight,
                                       const IVec& lo, const IVec& hi);

    class Builder {
    public:
        explicit Builder(int dim) : dim_(dim) {}
        VertexId add_vertex(const Vec& pos);
        // Adds the undirected edge {u,v} (or a self-loop when u == v).
        void add_edge(VertexId u, VertexId v, const mpq_class& weight);
        void mark_frontier(VertexId v);
        WeightedGraph build() &&;

    private:
        friend class WeightedGraph;
        int dim_;
        std::vector<Vec> pos_;
        std::vector<std::vector<std::pair<VertexId, std::uint32_t>>> adj_;
        std::vector<mpq_class> palette_;
        std::unordered_map<std::string, std::uint32_t> palette_index_;
        std::vector<bool> frontier_;
    };

    // --- basic shape ------------------------------------------------------
    int dim() const { return dim_; }
    std::size_t size() const;
    Vec pos(VertexId v) const;
    bool is_grid() const { return grid_; }
    double grid_spacing() const { return grid_spacing_d_; }
    const mpq_class& grid_spacing_exact() const { return grid_spacing_q_; }
    const IVec& grid_lo() const { return lo_; }
    const IVec& grid_hi() const { return hi_; }

    // --- adjacency --------------------------------------------------------
    int degree(VertexId v) const;
    Neighbor neighbor(VertexId v, int k) const;
    mpq_class weight_exact(VertexId v, int k) const;
    // True when v's neighborhood is truncated by the finite box.
    bool is_frontier(VertexId v) const;

    // Metadata.
    int degree_bound() const { return degree_bound_; }
    double separation() const { return separation_; }
    double min_weight() const { return min_weight_; }
    double max_weight() const { return max_weight_; }

    // --- spec operations ----------------------------------------------------
    double total_weight(VertexId v) const;
    mpq_class total_weight_exact(VertexId v) const;
    VertexSet euclidean_ball(const Vec& center, double r) const;
    VertexSet external_boundary(const VertexSet& X) const;
    // Minimum hop count, or nullopt when disconnected.
    std::optional<std::uint64_t> graph_metric(VertexId v, VertexId w) const;
    double discrete_laplacian(const std::function<double(VertexId)>& f, VertexId v) const;
    mpq_class discrete_laplacian_exact(const std::function<mpq_class(VertexId)>& f, VertexId v) const;
    VertexId nearest_vertex(const Vec& p) const;

    // --- lattice helpers ----------------------------------------------------
    // Exact position lookup (grid arithmetic or hash map).
    std::optional<VertexId> vertex_at(const Vec& p) const;
    // Grid coordinate conversions (grid backend only).
    IVec grid_coords(VertexId v) const;
    VertexId grid_id(const IVec& c) const;
    bool grid_in_box(const IVec& c) const;

private:
    WeightedGraph() = default;
    void compute_metadata();

    int dim_ = 0;
    bool grid_ = false;

    // Grid backend.
    mpq_class grid_spacing_q_;
    mpq_class grid_weight_q_;
    double grid_spacing_d_ = 0;
    double grid_weight_d_ = 0;
    IVec lo_, hi_;
    std::array<std::uint64_t, kMaxDim> extent_{};
    std::array<std::uint64_t, kMaxDim> stride_{};
    std::uint64_t grid_size_ = 0;

    // Explicit backend (CSR with weight palette).
    std::vector<Vec> pos_;
    std::vector<std::uint64_t> offset_;
    std::vector<VertexId> target_;
    std::vector<std::uint32_t> widx_;
    std::vector<mpq_class> palette_;
    std::vector<double> palette_d_;
    std::vector<double> total_w_;
    std::vector<bool> frontier_;
    std::unordered_map<std::uint64_t, VertexId> pos_index_;

    int degree_bound_ = 0;
    double separation_ = 0;
    double min_weight_ = 0;
    double max_weight_ = 0;
};

// Hash of a position for exact lookup tables.
std::uint64_t hash_pos(const Vec& p, int dim);

}  // namespace lerw

#endif
