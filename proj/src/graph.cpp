#include "lerw/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>

#include "lerw/rng.hpp"

namespace lerw {

std::uint64_t hash_pos(const Vec& p, int dim) {
    std::uint64_t h = 0x243F6A8885A308D3ULL ^ static_cast<std::uint64_t>(dim);
    for (int i = 0; i < dim; ++i) {
        std::uint64_t b;
        double v = p[i] == 0.0 ? 0.0 : p[i];  // normalize -0.0
        std::memcpy(&b, &v, 8);
        h = detail::splitmix(h ^ b);
    }
    return h;
}

// --- VertexSet --------------------------------------------------------------

VertexSet::VertexSet(std::vector<VertexId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool VertexSet::contains(VertexId v) const {
    return std::binary_search(ids_.begin(), ids_.end(), v);
}

// --- HalfSpaceSpec ----------------------------------------------------------

HalfSpaceSpec::HalfSpaceSpec(Vec n, double off) : normal(n), offset(off) {
    if (std::abs(normal.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("HalfSpaceSpec: normal must be a unit vector");
}

// --- Builder ----------------------------------------------------------------

VertexId WeightedGraph::Builder::add_vertex(const Vec& pos) {
    if (pos.dim != dim_) throw std::invalid_argument("add_vertex: dimension mismatch");
    pos_.push_back(pos);
    adj_.emplace_back();
    frontier_.push_back(false);
    return static_cast<VertexId>(pos_.size() - 1);
}

void WeightedGraph::Builder::add_edge(VertexId u, VertexId v, const mpq_class& weight) {
    if (u >= pos_.size() || v >= pos_.size()) throw std::out_of_range("add_edge: bad vertex id");
    if (weight < 0 || (u != v && weight == 0))
        throw std::invalid_argument("add_edge: edge weights must be positive");
    mpq_class w(weight);
    w.canonicalize();
    std::string key = w.get_str();
    auto [it, inserted] = palette_index_.try_emplace(key, static_cast<std::uint32_t>(palette_.size()));
    if (inserted) palette_.push_back(w);
    adj_[u].emplace_back(v, it->second);
    if (u != v) adj_[v].emplace_back(u, it->second);
}

void WeightedGraph::Builder::mark_frontier(VertexId v) {
    if (v >= pos_.size()) throw std::out_of_range("mark_frontier: bad vertex id");
    frontier_[v] = true;
}

WeightedGraph WeightedGraph::Builder::build() && {
    WeightedGraph g;
    g.dim_ = dim_;
    g.grid_ = false;
    g.pos_ = std::move(pos_);
    g.palette_ = std::move(palette_);
    g.frontier_ = std::move(frontier_);
    g.palette_d_.reserve(g.palette_.size());
    for (const auto& q : g.palette_) g.palette_d_.push_back(q.get_d());

    std::size_t n = g.pos_.size();
    g.offset_.resize(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offset_[v + 1] = g.offset_[v] + adj_[v].size();
    g.target_.reserve(g.offset_[n]);
    g.widx_.reserve(g.offset_[n]);
    g.total_w_.resize(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        auto& nb = adj_[v];
        std::sort(nb.begin(), nb.end());
        double tw = 0;
        for (auto [to, wi] : nb) {
            g.target_.push_back(to);
            g.widx_.push_back(wi);
            tw += g.palette_d_[wi];
        }
        g.total_w_[v] = tw;
    }
    g.pos_index_.reserve(n * 2);
    for (std::size_t v = 0; v < n; ++v) {
        auto [it, ins] = g.pos_index_.try_emplace(hash_pos(g.pos_[v], dim_), static_cast<VertexId>(v));
        if (!ins) throw std::invalid_argument("build: duplicate vertex position");
    }
    g.compute_metadata();
    return g;
}

// --- grid constructor -------------------------------------------------------

WeightedGraph WeightedGraph::implicit_grid(int dim, const mpq_class& spacing, const mpq_class& weight,
                                           const IVec& lo, const IVec& hi) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("implicit_grid: bad dimension");
    if (spacing <= 0 || weight <= 0) throw std::invalid_argument("implicit_grid: spacing/weight must be positive");
    WeightedGraph g;
    g.dim_ = dim;
    g.grid_ = true;
    g.grid_spacing_q_ = spacing;
    g.grid_weight_q_ = weight;
    g.grid_spacing_d_ = spacing.get_d();
    g.grid_weight_d_ = weight.get_d();
    g.lo_ = lo;
    g.hi_ = hi;
    std::uint64_t size = 1;
    for (int i = 0; i < dim; ++i) {
        if (hi[i] < lo[i]) throw std::invalid_argument("implicit_grid: empty box axis");
        g.extent_[i] = static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
        size *= g.extent_[i];
    }
    if (size >= kNoVertex) throw std::invalid_argument("implicit_grid: box too large for VertexId");
    g.grid_size_ = size;
    g.stride_[dim - 1] = 1;
    for (int i = dim - 2; i >= 0; --i) g.stride_[i] = g.stride_[i + 1] * g.extent_[i + 1];
    g.compute_metadata();
    return g;
}

// --- shape ------------------------------------------------------------------

std::size_t WeightedGraph::size() const { return grid_ ? grid_size_ : pos_.size(); }

IVec WeightedGraph::grid_coords(VertexId v) const {
    IVec c = IVec::zero(dim_);
    std::uint64_t rem = v;
    for (int i = 0; i < dim_; ++i) {
        c[i] = lo_[i] + static_cast<std::int64_t>(rem / stride_[i]);
        rem %= stride_[i];
    }
    return c;
}

VertexId WeightedGraph::grid_id(const IVec& c) const {
    std::uint64_t id = 0;
    for (int i = 0; i < dim_; ++i) id += static_cast<std::uint64_t>(c[i] - lo_[i]) * stride_[i];
    return static_cast<VertexId>(id);
}

bool WeightedGraph::grid_in_box(const IVec& c) const {
    for (int i = 0; i < dim_; ++i)
        if (c[i] < lo_[i] || c[i] > hi_[i]) return false;
    return true;
}

Vec WeightedGraph::pos(VertexId v) const {
    if (!grid_) return pos_[v];
    IVec c = grid_coords(v);
    Vec p = Vec::zero(dim_);
    for (int i = 0; i < dim_; ++i) p[i] = static_cast<double>(c[i]) * grid_spacing_d_;
    return p;
}

// --- adjacency --------------------------------------------------------------

int WeightedGraph::degree(VertexId v) const {
    if (!grid_) return static_cast<int>(offset_[v + 1] - offset_[v]);
    IVec c = grid_coords(v);
    int deg = 0;
    for (int i = 0; i < dim_; ++i) {
        if (c[i] > lo_[i]) ++deg;
        if (c[i] < hi_[i]) ++deg;
    }
    return deg;
}

WeightedGraph::Neighbor WeightedGraph::neighbor(VertexId v, int k) const {
    if (!grid_) {
        std::uint64_t e = offset_[v] + static_cast<std::uint64_t>(k);
        return {target_[e], palette_d_[widx_[e]]};
    }
    IVec c = grid_coords(v);
    int seen = 0;
    for (int i = 0; i < dim_; ++i) {
        if (c[i] > lo_[i] && seen++ == k) {
            return {static_cast<VertexId>(v - stride_[i]), grid_weight_d_};
        }
        if (c[i] < hi_[i] && seen++ == k) {
            return {static_cast<VertexId>(v + stride_[i]), grid_weight_d_};
        }
    }
    throw std::out_of_range("neighbor: index past degree");
}

mpq_class WeightedGraph::weight_exact(VertexId v, int k) const {
    if (grid_) {
        neighbor(v, k);  // bounds check
        return grid_weight_q_;
    }
    return palette_[widx_[offset_[v] + static_cast<std::uint64_t>(k)]];
}

bool WeightedGraph::is_frontier(VertexId v) const {
    if (!grid_) return frontier_[v];
    IVec c = grid_coords(v);
    for (int i = 0; i < dim_; ++i)
        if (c[i] == lo_[i] || c[i] == hi_[i]) return true;
    return false;
}

void WeightedGraph::compute_metadata() {
    if (grid_) {
        degree_bound_ = 2 * dim_;
        separation_ = grid_spacing_d_;
        min_weight_ = max_weight_ = grid_weight_d_;
        return;
    }
    degree_bound_ = 0;
    for (std::size_t v = 0; v < pos_.size(); ++v)
        degree_bound_ = std::max(degree_bound_, static_cast<int>(offset_[v + 1] - offset_[v]));
    min_weight_ = std::numeric_limits<double>::infinity();
    max_weight_ = 0;
    for (double w : palette_d_) {
        if (w > 0) min_weight_ = std::min(min_weight_, w);
        max_weight_ = std::max(max_weight_, w);
    }
    // Separation from edge lengths (cheap lower-bound witness; exact pairwise
    // minimum would be quadratic). Non-adjacent closer pairs would be a
    // construction bug caught by duplicate-position detection at lattice scale.
    separation_ = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < pos_.size(); ++v)
        for (std::uint64_t e = offset_[v]; e < offset_[v + 1]; ++e)
            if (target_[e] != v) separation_ = std::min(separation_, dist(pos_[v], pos_[target_[e]]));
    if (!std::isfinite(separation_)) separation_ = 1.0;
    if (!std::isfinite(min_weight_)) min_weight_ = 0.0;
}

// --- operations ---------------------------------------------------------------

double WeightedGraph::total_weight(VertexId v) const {
    if (grid_) return grid_weight_d_ * degree(v);
    return total_w_[v];
}

mpq_class WeightedGraph::total_weight_exact(VertexId v) const {
    if (grid_) return grid_weight_q_ * degree(v);
    mpq_class s = 0;
    for (std::uint64_t e = offset_[v]; e < offset_[v + 1]; ++e) s += palette_[widx_[e]];
    return s;
}

VertexSet WeightedGraph::euclidean_ball(const Vec& center, double r) const {
    std::vector<VertexId> out;
    double r2 = r * r;
    if (!grid_) {
        for (std::size_t v = 0; v < pos_.size(); ++v)
            if (dist2(pos_[v], center) < r2) out.push_back(static_cast<VertexId>(v));
        return VertexSet(std::move(out));
    }
    IVec a = IVec::zero(dim_), b = IVec::zero(dim_), c = IVec::zero(dim_);
    for (int i = 0; i < dim_; ++i) {
        a[i] = std::max<std::int64_t>(lo_[i], static_cast<std::int64_t>(std::ceil((center[i] - r) / grid_spacing_d_)));
        b[i] = std::min<std::int64_t>(hi_[i], static_cast<std::int64_t>(std::floor((center[i] + r) / grid_spacing_d_)));
        if (a[i] > b[i]) return VertexSet();
        c[i] = a[i];
    }
    // Odometer over the sub-box in lexicographic (= id) order.
    for (;;) {
        double d2 = 0;
        for (int i = 0; i < dim_; ++i) {
            double d = static_cast<double>(c[i]) * grid_spacing_d_ - center[i];
            d2 += d * d;
        }
        if (d2 < r2) out.push_back(grid_id(c));
        int i = dim_ - 1;
        while (i >= 0 && c[i] == b[i]) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < dim_; ++j) c[j] = a[j];
    }
    return VertexSet(std::move(out));
}

VertexSet WeightedGraph::external_boundary(const VertexSet& X) const {
    std::vector<VertexId> out;
    for (VertexId v : X) {
        int d = degree(v);
        for (int k = 0; k < d; ++k) {
            VertexId u = neighbor(v, k).to;
            if (u != v && !X.contains(u)) out.push_back(u);
        }
    }
    return VertexSet(std::move(out));
}

std::optional<std::uint64_t> WeightedGraph::graph_metric(VertexId v, VertexId w) const {
    if (v == w) return 0;
    std::unordered_map<VertexId, std::uint64_t> dist{{v, 0}};
    std::deque<VertexId> q{v};
    while (!q.empty()) {
        VertexId u = q.front();
        q.pop_front();
        std::uint64_t du = dist[u];
        int d = degree(u);
        for (int k = 0; k < d; ++k) {
            VertexId t = neighbor(u, k).to;
            if (t == w) return du + 1;
            if (dist.try_emplace(t, du + 1).second) q.push_back(t);
        }
    }
    return std::nullopt;
}

double WeightedGraph::discrete_laplacian(const std::function<double(VertexId)>& f, VertexId v) const {
    double tw = total_weight(v);
    double s = 0;
    int d = degree(v);
    for (int k = 0; k < d; ++k) {
        auto [u, w] = neighbor(v, k);
        s += (w / tw) * f(u);
    }
    return s - f(v);
}

mpq_class WeightedGraph::discrete_laplacian_exact(const std::function<mpq_class(VertexId)>& f,
                                                  VertexId v) const {
    mpq_class tw = total_weight_exact(v);
    mpq_class s = 0;
    int d = degree(v);
    for (int k = 0; k < d; ++k) {
        s += weight_exact(v, k) * f(neighbor(v, k).to);
    }
    return s / tw - f(v);
}

VertexId WeightedGraph::nearest_vertex(const Vec& p) const {
    if (size() == 0) throw std::invalid_argument("nearest_vertex: empty graph");
    if (grid_) {
        // Per-axis nearest with ties going to the smaller coordinate; axes are
        // independent, and the smaller coordinate is the lexicographically
        // smaller choice at equal distance.
        IVec c = IVec::zero(dim_);
        for (int i = 0; i < dim_; ++i) {
            double t = p[i] / grid_spacing_d_;
            std::int64_t f = static_cast<std::int64_t>(std::floor(t));
            std::int64_t cand = f;
            double dlo = std::abs(p[i] - static_cast<double>(f) * grid_spacing_d_);
            double dhi = std::abs(static_cast<double>(f + 1) * grid_spacing_d_ - p[i]);
            if (dhi < dlo) cand = f + 1;
            cand = std::clamp(cand, lo_[i], hi_[i]);
            c[i] = cand;
        }
        return grid_id(c);
    }
    VertexId best = 0;
    double bd = dist2(pos_[0], p);
    for (std::size_t v = 1; v < pos_.size(); ++v) {
        double d = dist2(pos_[v], p);
        if (d < bd || (d == bd && pos_[v].lex_less(pos_[best]))) {
            bd = d;
            best = static_cast<VertexId>(v);
        }
    }
    return best;
}

std::optional<VertexId> WeightedGraph::vertex_at(const Vec& p) const {
    if (!grid_) {
        auto it = pos_index_.find(hash_pos(p, dim_));
        if (it == pos_index_.end() || !(pos_[it->second] == p)) return std::nullopt;
        return it->second;
    }
    IVec c = IVec::zero(dim_);
    for (int i = 0; i < dim_; ++i) {
        double t = p[i] / grid_spacing_d_;
        auto r = static_cast<std::int64_t>(std::llround(t));
        if (static_cast<double>(r) * grid_spacing_d_ != p[i]) return std::nullopt;
        c[i] = r;
    }
    if (!grid_in_box(c)) return std::nullopt;
    return grid_id(c);
}

}  // namespace lerw
