#include "lerw/statistics.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "lerw/oracle.hpp"

namespace lerw {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("fit_line: degenerate x");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - (f.intercept + f.slope * x[i]);
        rss += e * e;
    }
    f.slope_se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0;
    f.corr = syy > 0 ? sxy / std::sqrt(sxx * syy) : 0;
    return f;
}

// --- quasi-loops --------------------------------------------------------------

namespace {

// Exact predicate diam(pts[i..j]) >= r for a fixed threshold r; the naive
// and bucketed counters share one instance so they agree bit for bit.
// diam(pts[i..j]) is nondecreasing in j and nonincreasing in i, so
// thresh_[i] = min{j : diam(pts[i..j]) >= r} is nondecreasing in i and a
// single two-pointer sweep computes it.  The sweep keeps the invariant
// diam(pts[i..j-1]) < r, so only pairs involving the new endpoint j can
// reach r, and those are found by a farthest-point search pruned with
// sparse-table range bounding boxes.  Queries are then O(1) lookups.
class DiamOracle {
public:
    DiamOracle(const std::vector<Vec>& pts, int dim, double r) : pts_(pts), dim_(dim) {
        std::size_t n = pts.size();
        thresh_.assign(n, kNone);
        if (n < 2) return;
        levels_ = 1;
        while ((std::size_t{1} << levels_) <= n) ++levels_;
        lo_.assign(levels_, {});
        hi_.assign(levels_, {});
        lo_[0] = hi_[0] = pts;
        for (int l = 1; l < levels_; ++l) {
            std::size_t len = std::size_t{1} << l;
            lo_[l].resize(n - len + 1);
            hi_[l].resize(n - len + 1);
            for (std::size_t k = 0; k + len <= n; ++k) {
                lo_[l][k] = lo_[l - 1][k];
                hi_[l][k] = hi_[l - 1][k];
                for (int a = 0; a < dim_; ++a) {
                    lo_[l][k][a] = std::min(lo_[l][k][a], lo_[l - 1][k + len / 2][a]);
                    hi_[l][k][a] = std::max(hi_[l][k][a], hi_[l - 1][k + len / 2][a]);
                }
            }
        }

        std::size_t j = 1, witness = kNone;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (j <= i) j = i + 1;
            if (witness != kNone && witness >= i) {
                thresh_[i] = j;  // the witness pair (witness, j) still lies in [i, j]
                continue;
            }
            while (j < n) {
                witness = far_from(j, i, j - 1, r);
                if (witness != kNone) {
                    thresh_[i] = j;
                    break;
                }
                ++j;
            }
            if (j == n) break;  // diam(pts[i..n-1]) < r, hence the same for all later i
        }
    }

    bool at_least(std::size_t i, std::size_t j) const {
        return thresh_[i] != kNone && j >= thresh_[i];
    }

private:
    static constexpr std::size_t kNone = SIZE_MAX;

    // Index k in [lo, hi] with dist(pts[k], pts[q]) >= r, or kNone.
    std::size_t far_from(std::size_t q, std::size_t lo, std::size_t hi, double r) const {
        int l = 0;
        while ((std::size_t{2} << l) <= hi - lo + 1) ++l;
        std::size_t k2 = hi + 1 - (std::size_t{1} << l);
        double ub2 = 0;
        for (int a = 0; a < dim_; ++a) {
            double blo = std::min(lo_[l][lo][a], lo_[l][k2][a]);
            double bhi = std::max(hi_[l][lo][a], hi_[l][k2][a]);
            double e = std::max(bhi - pts_[q][a], pts_[q][a] - blo);
            ub2 += e * e;
        }
        if (ub2 < r * r) return kNone;
        if (lo == hi) return dist2(pts_[lo], pts_[q]) >= r * r ? lo : kNone;
        std::size_t mid = lo + (hi - lo) / 2;
        std::size_t k = far_from(q, lo, mid, r);
        return k != kNone ? k : far_from(q, mid + 1, hi, r);
    }

    const std::vector<Vec>& pts_;
    int dim_;
    int levels_ = 0;
    std::vector<std::size_t> thresh_;
    std::vector<std::vector<Vec>> lo_, hi_;
};

using GridKey = std::array<std::int64_t, kMaxDim>;

// Grid centers of (s/dim)*Z^dim whose open s-ball contains both p and q.
void mark_centers(const Vec& p, const Vec& q, int dim, double s,
                  std::set<GridKey>& out) {
    double h = s / dim;
    GridKey klo{}, khi{};
    for (int a = 0; a < dim; ++a) {
        double lo = std::max(p[a], q[a]) - s;
        double hi = std::min(p[a], q[a]) + s;
        klo[a] = static_cast<std::int64_t>(std::ceil(lo / h));
        khi[a] = static_cast<std::int64_t>(std::floor(hi / h));
        if (klo[a] > khi[a]) return;
    }
    GridKey k = klo;
    for (;;) {
        Vec c = Vec::zero(dim);
        for (int a = 0; a < dim; ++a) c[a] = static_cast<double>(k[a]) * h;
        if (dist2(c, p) < s * s && dist2(c, q) < s * s) out.insert(k);
        int a = dim - 1;
        while (a >= 0 && k[a] == khi[a]) --a;
        if (a < 0) break;
        ++k[a];
        for (int b = a + 1; b < dim; ++b) k[b] = klo[b];
    }
}

std::vector<Vec> path_points(const WeightedGraph& g, const PathSeq& path) {
    std::vector<Vec> pts;
    pts.reserve(path.v.size());
    for (VertexId v : path.v) pts.push_back(g.pos(v));
    return pts;
}

}  // namespace

std::uint64_t quasi_loop_count_naive(const std::vector<Vec>& pts, int dim, double s, double r) {
    if (s <= 0 || r <= 0) throw std::invalid_argument("quasi_loop_count: s, r must be positive");
    std::set<GridKey> centers;
    DiamOracle diam(pts, dim, r);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (dist2(pts[i], pts[j]) < 4 * s * s && diam.at_least(i, j))
                mark_centers(pts[i], pts[j], dim, s, centers);
    return centers.size();
}

std::uint64_t quasi_loop_count(const std::vector<Vec>& pts, int dim, double s, double r) {
    if (s <= 0 || r <= 0) throw std::invalid_argument("quasi_loop_count: s, r must be positive");
    // spatial hash with cell size 2s: any pair within 2s lies in adjacent cells
    std::map<GridKey, std::vector<std::size_t>> buckets;
    double cs = 2 * s;
    auto key_of = [&](const Vec& p) {
        GridKey k{};
        for (int a = 0; a < dim; ++a) k[a] = static_cast<std::int64_t>(std::floor(p[a] / cs));
        return k;
    };
    std::set<GridKey> centers;
    DiamOracle diam(pts, dim, r);
    for (std::size_t j = 0; j < pts.size(); ++j) {
        GridKey kj = key_of(pts[j]);
        GridKey nb = kj;
        std::array<int, kMaxDim> off{};
        off.fill(-1);
        for (;;) {
            for (int a = 0; a < dim; ++a) nb[a] = kj[a] + off[a];
            auto it = buckets.find(nb);
            if (it != buckets.end())
                for (std::size_t i : it->second)
                    if (dist2(pts[i], pts[j]) < 4 * s * s && diam.at_least(i, j))
                        mark_centers(pts[i], pts[j], dim, s, centers);
            int a = dim - 1;
            while (a >= 0 && off[a] == 1) --a;
            if (a < 0) break;
            ++off[a];
            for (int b = a + 1; b < dim; ++b) off[b] = -1;
        }
        buckets[kj].push_back(j);
    }
    return centers.size();
}

std::uint64_t quasi_loop_count(const WeightedGraph& g, const PathSeq& path, double s, double r) {
    return quasi_loop_count(path_points(g, path), g.dim(), s, r);
}

// --- common walk driver ---------------------------------------------------------

namespace {

WalkOutcome radius_walk(const WeightedGraph& g, VertexId start, const Vec& center, double r,
                        RngStream& rng) {
    StopSpec stop;
    stop.radii.push_back({center, r});
    stop.step_cap = default_step_cap(r);
    auto out = run_until(g, start, stop, rng);
    if (out.reason == StopReason::frontier_error)
        throw std::runtime_error("statistics: walk reached the graph frontier; enlarge the box");
    return out;
}

}  // namespace

ExponentEstimate quasi_loop_decay(const WeightedGraph& g, VertexId start, double eps,
                                  double delta_hat, const std::vector<double>& radii,
                                  std::uint64_t trials, std::uint64_t seed) {
    if (trials < 100) throw std::invalid_argument("quasi_loop_decay: need >= 100 trials");
    if (!(eps > delta_hat))
        throw std::invalid_argument("quasi_loop_decay: need eps > delta_hat so that s < r'");
    ExponentEstimate est;
    est.radii = radii;
    est.trials = trials;
    est.seed = seed;
    // One walk per trial, stopped at the domain boundary T(dD); the radii only
    // set the quasi-loop parameters (s, r') evaluated on that same erased path.
    StopSpec stop;
    stop.at_frontier = true;
    stop.step_cap = default_step_cap(4 * *std::max_element(radii.begin(), radii.end()));
    std::vector<double> sum(radii.size(), 0), sum2(radii.size(), 0);
    std::uint64_t n = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        auto out = run_until(g, start, stop, rng);
        if (out.reason != StopReason::hit_frontier) {
            ++est.cap_exhausted;
            continue;
        }
        auto le = loop_erase(out.path);
        auto pts = path_points(g, le);
        for (std::size_t k = 0; k < radii.size(); ++k) {
            double s = std::pow(radii[k], 1 - eps);
            double rp = std::pow(radii[k], 1 - delta_hat);
            double q = static_cast<double>(quasi_loop_count(pts, g.dim(), s, rp));
            sum[k] += q;
            sum2[k] += q * q;
        }
        ++n;
    }
    for (std::size_t k = 0; k < radii.size(); ++k) {
        double mean = n ? sum[k] / static_cast<double>(n) : 0;
        est.stat.push_back(mean);
        est.se.push_back(n > 1 ? std::sqrt(std::max(0.0, sum2[k] / n - mean * mean) / (n - 1))
                               : 0);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (est.stat[i] > 0) {
            lx.push_back(std::log(radii[i]));
            ly.push_back(std::log(est.stat[i]));
        }
    if (lx.size() >= 3) {
        auto f = fit_line(lx, ly);
        est.exponent = f.slope;
        est.exponent_se = f.slope_se;
    } else {
        est.exponent = std::nan("");
    }
    return est;
}

ExponentEstimate growth_exponent(const WeightedGraph& g, VertexId start,
                                 const std::vector<double>& radii, std::uint64_t trials,
                                 std::uint64_t seed) {
    if (radii.size() < 3) throw std::invalid_argument("growth_exponent: need >= 3 radii");
    if (trials < 1000) throw std::invalid_argument("growth_exponent: need >= 1000 trials");
    for (double r : radii)
        if (r < 8) throw std::invalid_argument("growth_exponent: radii must be >= 8");
    ExponentEstimate est;
    est.radii = radii;
    est.trials = trials;
    est.seed = seed;
    Vec c = g.pos(start);
    std::uint64_t stream = 0;
    for (double r : radii) {
        double sum = 0, sum2 = 0;
        std::uint64_t n = 0, capped = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            RngStream rng(seed, stream++);
            auto out = radius_walk(g, start, c, r, rng);
            if (out.reason != StopReason::exited_radius) {
                ++capped;
                continue;
            }
            double len = static_cast<double>(loop_erase(out.path).len());
            sum += len;
            sum2 += len * len;
            ++n;
        }
        est.cap_exhausted += capped;
        if (capped * 100 > trials)
            throw std::runtime_error("growth_exponent: step-cap exhaustion rate above 1%");
        double mean = sum / static_cast<double>(n);
        est.stat.push_back(mean);
        est.se.push_back(std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1)));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(est.stat[i]));
    }
    auto f = fit_line(lx, ly);
    est.exponent = f.slope;
    est.exponent_se = f.slope_se;
    return est;
}

// --- non-intersection ------------------------------------------------------------

namespace {

// Exact disjointness probability of the ranges of two walks on a 1-D grid,
// run to lattice displacement nr from starts a gap of `gap` sites apart:
// the ranges are intervals, so they are disjoint iff walk 1 exits downward
// with running maximum below the running minimum of walk 2, which exits
// upward; summing gambler's-ruin factors over the split point gives the law.
double disjoint_prob_1d(std::int64_t nr, std::int64_t gap) {
    double p = 0;
    for (std::int64_t m = 1; m <= gap; ++m) {
        double pa = static_cast<double>(m) / static_cast<double>(nr + m) -
                    static_cast<double>(m - 1) / static_cast<double>(nr + m - 1);
        double pb = static_cast<double>(gap + 1 - m) / static_cast<double>(nr + gap + 1 - m);
        p += pa * pb;
    }
    return p;
}

}  // namespace

ExponentEstimate nonintersection_scaling(const WeightedGraph& g, VertexId v1, VertexId v2,
                                         const std::vector<double>& radii, std::uint64_t trials,
                                         std::uint64_t seed) {
    if (v1 == v2)
        throw std::domain_error("nonintersection_scaling: coinciding starts have probability 0");
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end());
    double gap = dist(g.pos(v1), g.pos(v2));
    for (double r : rs)
        if (!(r > 2 * gap))
            throw std::invalid_argument("nonintersection_scaling: need r > 2|v1 - v2|");
    ExponentEstimate est;
    est.radii = rs;
    est.seed = seed;

    if (g.is_grid() && g.dim() == 1) {
        // exact interval computation, no sampling
        double a = g.grid_spacing();
        auto lat = [&](double x) { return static_cast<std::int64_t>(std::ceil(x / a - 1e-12)); };
        std::int64_t lgap = lat(gap);
        for (double r : rs) {
            est.stat.push_back(disjoint_prob_1d(lat(r), lgap));
            est.se.push_back(0);
        }
        est.trials = 0;
    } else {
        est.trials = trials;
        double rmax = rs.back();
        std::vector<std::uint64_t> disjoint(rs.size(), 0), valid(rs.size(), 0);
        for (std::uint64_t t = 0; t < trials; ++t) {
            RngStream rng(seed, t);
            auto w1 = radius_walk(g, v1, g.pos(v1), rmax, rng);
            auto w2 = radius_walk(g, v2, g.pos(v2), rmax, rng);
            // first index at distance >= r from the own start, per radius
            auto exits = [&](const WalkOutcome& w, VertexId s) {
                std::vector<std::size_t> idx(rs.size(), SIZE_MAX);
                std::size_t k = 0;
                for (std::size_t i = 0; i < w.path.v.size() && k < rs.size(); ++i) {
                    double d = dist(g.pos(w.path.v[i]), g.pos(s));
                    while (k < rs.size() && d >= rs[k]) idx[k++] = i;
                }
                return idx;
            };
            auto i1 = exits(w1, v1), i2 = exits(w2, v2);
            std::unordered_set<VertexId> s1, s2;
            bool hit = false;
            std::size_t p1 = 0, p2 = 0;
            for (std::size_t k = 0; k < rs.size(); ++k) {
                if (i1[k] == SIZE_MAX || i2[k] == SIZE_MAX) break;  // cap: larger radii excluded
                for (; p1 <= i1[k]; ++p1) {
                    if (s2.count(w1.path.v[p1])) hit = true;
                    s1.insert(w1.path.v[p1]);
                }
                for (; p2 <= i2[k]; ++p2) {
                    if (s1.count(w2.path.v[p2])) hit = true;
                    s2.insert(w2.path.v[p2]);
                }
                ++valid[k];
                if (!hit) ++disjoint[k];
            }
        }
        for (std::size_t k = 0; k < rs.size(); ++k) {
            double n = static_cast<double>(valid[k]);
            est.cap_exhausted += trials - valid[k];
            double p = n ? static_cast<double>(disjoint[k]) / n : 0;
            est.stat.push_back(p);
            est.se.push_back(n ? std::sqrt(p * (1 - p) / n) : 0);
        }
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rs.size(); ++i)
        if (est.stat[i] > 0) {
            lx.push_back(std::log(rs[i]));
            ly.push_back(std::log(est.stat[i]));
        }
    if (lx.size() >= 3) {
        auto f = fit_line(lx, ly);
        est.exponent = f.slope;
        est.exponent_se = f.slope_se;
    } else {
        est.exponent = std::nan("");
    }
    return est;
}

// --- escape ---------------------------------------------------------------------

ExponentEstimate escape_probability(const WeightedGraph& g, VertexId v, const HalfSpaceSpec& H,
                                    const std::vector<double>& radii, std::uint64_t trials,
                                    std::uint64_t seed, bool slab) {
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end());
    Vec c = g.pos(v);
    double k = c.dot(H.normal) - H.offset;  // distance to the hyperplane
    if (k < 1) throw std::invalid_argument("escape_probability: need d(v, dH) >= 1");
    for (double r : rs)
        if (!(r > 2 * k)) throw std::invalid_argument("escape_probability: need r > 2 d(v, dH)");
    ExponentEstimate est;
    est.radii = rs;
    est.trials = trials;
    est.seed = seed;
    double rmax = rs.back();

    std::vector<std::uint64_t> success(rs.size(), 0), valid(rs.size(), 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        // single coupled walk per trial, stopped at H or the outermost goal
        PathSeq path;
        path.push(v);
        std::size_t hit_h = SIZE_MAX;
        std::vector<std::size_t> win(rs.size(), SIZE_MAX);
        std::size_t kk = 0;
        std::uint64_t cap = default_step_cap(rmax);
        VertexId cur = v;
        for (std::uint64_t step_i = 1; step_i <= cap && hit_h == SIZE_MAX && kk < rs.size();
             ++step_i) {
            if (g.is_frontier(cur))
                throw std::runtime_error("escape_probability: reached the graph frontier");
            cur = step(g, cur, rng);
            Vec p = g.pos(cur);
            if (p.dot(H.normal) - H.offset <= 0) {
                hit_h = step_i;
                break;
            }
            double prog = slab ? p.dot(H.normal) - c.dot(H.normal) : dist(p, c);
            while (kk < rs.size() && prog >= (slab ? rs[kk] - k : rs[kk])) win[kk++] = step_i;
        }
        if (hit_h == SIZE_MAX && kk < rs.size()) {
            est.cap_exhausted += 1;
            for (std::size_t i = 0; i < kk; ++i) {
                ++valid[i];
                ++success[i];
            }
            continue;
        }
        for (std::size_t i = 0; i < rs.size(); ++i) {
            ++valid[i];
            if (win[i] != SIZE_MAX) ++success[i];
        }
    }
    for (std::size_t i = 0; i < rs.size(); ++i) {
        double p = static_cast<double>(success[i]) / static_cast<double>(valid[i]);
        est.stat.push_back(p * rs[i] / k);
        est.se.push_back(std::sqrt(p * (1 - p) / static_cast<double>(valid[i])) * rs[i] / k);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rs.size(); ++i)
        if (est.stat[i] > 0) {
            lx.push_back(std::log(rs[i]));
            ly.push_back(std::log(est.stat[i]));
        }
    if (lx.size() >= 3) {
        auto f = fit_line(lx, ly);
        est.exponent = f.slope;
        est.exponent_se = f.slope_se;
    }
    return est;
}

// --- Beurling -------------------------------------------------------------------

ProbEstimate beurling_hit(const WeightedGraph& g, VertexId v, const VertexSet& A, double r,
                          std::uint64_t trials, std::uint64_t seed) {
    if (A.empty()) throw std::invalid_argument("beurling_hit: empty target set");
    Vec c = g.pos(v);
    // connectivity of A within the induced subgraph
    {
        std::unordered_set<VertexId> seen{*A.begin()};
        std::vector<VertexId> q{*A.begin()};
        while (!q.empty()) {
            VertexId u = q.back();
            q.pop_back();
            for (int k = 0; k < g.degree(u); ++k) {
                VertexId x = g.neighbor(u, k).to;
                if (A.contains(x) && seen.insert(x).second) q.push_back(x);
            }
        }
        if (seen.size() != A.size())
            throw std::invalid_argument("beurling_hit: A is not connected");
    }
    bool inner = false, outer = false;
    for (VertexId a : A) {
        double d = dist(g.pos(a), c);
        inner = inner || d < r;
        outer = outer || d >= 2 * r;
    }
    if (!inner || !outer)
        throw std::invalid_argument("beurling_hit: A must cross the annulus B(v,r) .. B(v,2r)");

    StopSpec stop;
    stop.absorbing = A;
    stop.radii.push_back({c, 4 * r});
    stop.step_cap = default_step_cap(4 * r);
    std::uint64_t hits = 0, valid = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        auto out = run_until(g, v, stop, rng);
        if (out.reason == StopReason::frontier_error)
            throw std::runtime_error("beurling_hit: reached the graph frontier");
        if (out.reason == StopReason::step_cap) continue;
        ++valid;
        if (out.reason == StopReason::hit_absorbing) ++hits;
    }
    ProbEstimate e;
    e.trials = valid;
    e.seed = seed;
    e.p = valid ? static_cast<double>(hits) / static_cast<double>(valid) : 0;
    e.se = valid ? std::sqrt(e.p * (1 - e.p) / static_cast<double>(valid)) : 0;
    return e;
}

// --- isotropy -------------------------------------------------------------------

IsotropyReport isotropy_check(const WeightedGraph& g, VertexId v, double r, int ncells, bool exact,
                              std::uint64_t trials, std::uint64_t seed) {
    IsotropyReport rep;
    rep.center = v;
    rep.r = r;
    rep.exact = exact;
    rep.cells = sphere_partition(g.dim(), ncells);
    rep.cell_prob.assign(rep.cells.size(), 0);
    Vec c = g.pos(v);

    if (!exact) {
        rep.trials = trials;
        rep.seed = seed;
        std::vector<std::uint64_t> cnt(rep.cells.size(), 0);
        for (std::uint64_t t = 0; t < trials; ++t) {
            RngStream rng(seed, t);
            auto out = radius_walk(g, v, c, r, rng);
            if (out.reason != StopReason::exited_radius)
                throw std::runtime_error("isotropy_check: step cap exhausted");
            ++cnt[cell_of(rep.cells, g.dim(), g.pos(out.path.v.back()) - c)];
        }
        for (std::size_t i = 0; i < cnt.size(); ++i)
            rep.cell_prob[i] = static_cast<double>(cnt[i]) / static_cast<double>(trials);
    } else {
        // interior = open ball; absorbing = everything at distance >= r
        std::vector<VertexId> interior;
        std::unordered_map<VertexId, int> index;
        for (std::uint64_t u = 0; u < g.size(); ++u) {
            auto uid = static_cast<VertexId>(u);
            if (dist(g.pos(uid), c) < r) {
                if (g.is_frontier(uid))
                    throw std::invalid_argument("isotropy_check: ball reaches the graph frontier");
                index.emplace(uid, static_cast<int>(interior.size()));
                interior.push_back(uid);
            }
        }
        std::size_t n = interior.size();
        if (index.find(v) == index.end()) throw std::invalid_argument("isotropy_check: bad center");
        std::size_t m = rep.cells.size();
        if (static_cast<std::size_t>(ncells) > n)
            throw std::invalid_argument("isotropy_check: stopping sphere smaller than cell count");

        if (n <= kRationalSolveLimit) {
            // exact rational solve of (D - W) f = boundary flux, one RHS per cell
            std::vector<mpq_class> A(n * n, 0), B(n * m, 0);
            for (std::size_t i = 0; i < n; ++i) {
                VertexId u = interior[i];
                A[i * n + i] = g.total_weight_exact(u);
                for (int k = 0; k < g.degree(u); ++k) {
                    VertexId x = g.neighbor(u, k).to;
                    auto it = index.find(x);
                    if (it != index.end())
                        A[i * n + it->second] -= g.weight_exact(u, k);
                    else
                        B[i * m + cell_of(rep.cells, g.dim(), g.pos(x) - c)] +=
                            g.weight_exact(u, k);
                }
            }
            auto X = solve_rational(std::move(A), std::move(B), n, m);
            int iv = index.at(v);
            for (std::size_t j = 0; j < m; ++j)
                rep.cell_prob[j] = mpq_class(X[static_cast<std::size_t>(iv) * m + j]).get_d();
        } else {
            Eigen::SparseMatrix<double> L(static_cast<int>(n), static_cast<int>(n));
            std::vector<Eigen::Triplet<double>> tr;
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<int>(n), static_cast<int>(m));
            for (std::size_t i = 0; i < n; ++i) {
                VertexId u = interior[i];
                tr.emplace_back(static_cast<int>(i), static_cast<int>(i), g.total_weight(u));
                for (int k = 0; k < g.degree(u); ++k) {
                    auto nb = g.neighbor(u, k);
                    auto it = index.find(nb.to);
                    if (it != index.end())
                        tr.emplace_back(static_cast<int>(i), it->second, -nb.w);
                    else
                        B(static_cast<int>(i), cell_of(rep.cells, g.dim(), g.pos(nb.to) - c)) +=
                            nb.w;
                }
            }
            L.setFromTriplets(tr.begin(), tr.end());
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(1e-13);
            cg.compute(L);
            int iv = index.at(v);
            double total = 0;
            for (std::size_t j = 0; j < m; ++j) {
                Eigen::VectorXd f = cg.solve(B.col(static_cast<int>(j)));
                rep.cell_prob[j] = f(iv);
                total += f(iv);
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw std::runtime_error("isotropy_check: hitting probabilities do not sum to 1");
            for (auto& p : rep.cell_prob) p /= total;
        }
    }
    for (std::size_t i = 0; i < rep.cells.size(); ++i) {
        rep.deviation.push_back(std::abs(rep.cell_prob[i] - rep.cells[i].area));
        rep.max_deviation = std::max(rep.max_deviation, rep.deviation.back());
    }
    return rep;
}

IsotropyFit isotropy_fit(const WeightedGraph& g, VertexId v, const std::vector<double>& radii,
                         int cells) {
    IsotropyFit fit;
    fit.radii = radii;
    for (double r : radii) fit.dev.push_back(isotropy_check(g, v, r, cells, true).max_deviation);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (fit.dev[i] > 0) {
            lx.push_back(std::log(radii[i]));
            ly.push_back(std::log(fit.dev[i]));
        }
    if (lx.size() >= 2) {
        auto f = fit_line(lx, ly);
        fit.alpha = -f.slope;
        fit.K = std::exp(f.intercept);
    }
    return fit;
}

// --- exit time tail -------------------------------------------------------------

TailTable exit_time_tail(const WeightedGraph& g, VertexId v, double r, std::uint64_t trials,
                         std::uint64_t seed) {
    if (r < 4) throw std::invalid_argument("exit_time_tail: need r >= 4");
    TailTable tab;
    tab.trials = trials;
    tab.seed = seed;
    Vec c = g.pos(v);
    std::vector<double> taus;
    taus.reserve(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        StopSpec stop;
        stop.radii.push_back({c, r});
        stop.step_cap = static_cast<std::uint64_t>(1e9);
        auto out = run_until(g, v, stop, rng);
        if (out.reason != StopReason::exited_radius)
            throw std::runtime_error("exit_time_tail: walk did not exit");
        taus.push_back(static_cast<double>(out.hit_index));
    }
    std::vector<double> sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    tab.median_steps = sorted[sorted.size() / 2];
    std::vector<double> lx, ly;
    for (int m = 1; m <= 8; ++m) {
        double thr = m * r * r;
        std::uint64_t cnt = 0;
        for (double tau : taus)
            if (tau >= thr) ++cnt;
        double p = static_cast<double>(cnt) / static_cast<double>(trials);
        tab.m.push_back(static_cast<double>(m));
        tab.p.push_back(p);
        tab.se.push_back(std::sqrt(p * (1 - p) / static_cast<double>(trials)));
        if (p > 0) {
            lx.push_back(static_cast<double>(m));
            ly.push_back(std::log(p));
        }
    }
    if (lx.size() >= 3) tab.log_corr = fit_line(lx, ly).corr;
    return tab;
}

// --- interpolation consistency ----------------------------------------------------

InterpReport interpolation_consistency(const WeightedGraph& ga, const WeightedGraph& gb,
                                       const Vec& start, const std::vector<double>& scales,
                                       std::uint64_t trials, std::uint64_t seed,
                                       double margin_coef, double margin_pow) {
    InterpReport rep;
    rep.trials = trials;
    rep.seed = seed;
    rep.margin_coef = margin_coef;
    rep.margin_pow = margin_pow;
    std::uint64_t stream = 0;
    for (double s : scales) {
        double margin = margin_coef * std::pow(s, margin_pow);
        auto containment = [&](const WeightedGraph& g) {
            VertexId a = g.nearest_vertex(start);
            Vec c = g.pos(a);
            std::uint64_t in_e = 0, in_fat = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                RngStream rng(seed, stream + t);
                auto out = radius_walk(g, a, c, s / 2, rng);
                if (out.reason != StopReason::exited_radius)
                    throw std::runtime_error("interpolation_consistency: step cap exhausted");
                auto le = loop_erase(out.path);
                bool e = true, fat = true;
                for (VertexId u : le.v) {
                    double d = std::abs(g.pos(u)[0] - c[0]);
                    if (d > s / 4) e = false;
                    if (d > s / 4 + margin) {
                        fat = false;
                        break;
                    }
                }
                in_e += e;
                in_fat += fat;
            }
            return std::pair<double, double>{
                static_cast<double>(in_e) / static_cast<double>(trials),
                static_cast<double>(in_fat) / static_cast<double>(trials)};
        };
        auto [pa_e, pa_fat] = containment(ga);
        stream += trials;
        auto [pb_e, pb_fat] = containment(gb);
        stream += trials;
        InterpRow row;
        row.s = s;
        row.pA_E = pa_e;
        row.pA_Efat = pa_fat;
        row.pB_E = pb_e;
        row.pB_Efat = pb_fat;
        auto se_of = [&](double p) { return std::sqrt(p * (1 - p) / static_cast<double>(trials)); };
        row.se = std::max(std::max(se_of(pa_e), se_of(pb_e)), std::max(se_of(pa_fat), se_of(pb_fat)));
        row.deficit_fwd = std::max(0.0, pa_e - pb_fat);
        row.deficit_bwd = std::max(0.0, pb_e - pa_fat);
        rep.rows.push_back(row);
    }
    return rep;
}

// --- cut point density -------------------------------------------------------------

CutDensityReport cut_point_density(const WeightedGraph& g, VertexId w, VertexId v, double r,
                                   std::uint64_t trials, std::uint64_t seed) {
    Vec c = g.pos(v);
    if (!(dist(g.pos(w), c) <= r / 2))
        throw std::invalid_argument("cut_point_density: need w in B(v, r/2)");
    CutDensityReport rep;
    rep.r = r;
    rep.trials = trials;
    rep.seed = seed;
    double sum = 0, sum2 = 0, total = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        auto out = radius_walk(g, w, c, 4 * r, rng);
        if (out.reason != StopReason::exited_radius)
            throw std::runtime_error("cut_point_density: step cap exhausted");
        auto cuts = cut_points(out.path);
        double cnt = 0;
        for (auto& [u, i] : cuts) {
            double d = dist(g.pos(u), c);
            if (d >= r && d < 2 * r) cnt += 1;
        }
        sum += cnt;
        sum2 += cnt * cnt;
        total += static_cast<double>(cuts.size());
    }
    rep.mean_annulus = sum / static_cast<double>(trials);
    rep.se_annulus = trials > 1 ? std::sqrt(std::max(0.0, sum2 / trials -
                                                              rep.mean_annulus * rep.mean_annulus) /
                                            static_cast<double>(trials - 1))
                                : 0;
    rep.mean_total = total / static_cast<double>(trials);
    return rep;
}

}  // namespace lerw
