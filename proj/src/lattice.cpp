#include "lerw/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "lerw/rng.hpp"

namespace lerw {

// --- StitchConfig -----------------------------------------------------------

int StitchConfig::type_at(const IVec& p) const {
    int d = dim();
    bool inside = true;
    for (int i = 0; i < d; ++i)
        if (p[i] < 0 || p[i] >= static_cast<std::int64_t>(L) * M) inside = false;
    if (!inside) {
        std::int64_t twos = 0;
        for (int x : xi) twos += (x == 2);
        return 2 * twos > static_cast<std::int64_t>(xi.size()) ? 2 : 1;
    }
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * M + static_cast<std::size_t>(p[i] / L);
    return xi[idx];
}

bool StitchConfig::occupied(const IVec& p) const {
    if (type_at(p) == 1) return true;
    int c = coarse();
    for (int i = 0; i < dim(); ++i) {
        std::int64_t m = p[i] % c;
        if (m < 0) m += c;
        if (m != 0) return false;
    }
    return true;
}

void StitchConfig::validate() const {
    if (L <= 6) throw std::invalid_argument("StitchConfig: L must exceed 6");
    if (M < 1) throw std::invalid_argument("StitchConfig: M must be >= 1");
    if (margin < 0) throw std::invalid_argument("StitchConfig: margin must be >= 0");
    std::size_t want = 1;
    for (int i = 0; i < dim(); ++i) want *= static_cast<std::size_t>(M);
    if (xi.size() != want) throw std::invalid_argument("StitchConfig: xi has wrong shape");
    for (int x : xi)
        if (x != 1 && x != 2) throw std::invalid_argument("StitchConfig: xi entries must be 1 or 2");
    // M <= L^alpha with alpha = p/q <=> M^q <= L^p, checked in integers.
    mpz_class mq, lp;
    mpz_pow_ui(mq.get_mpz_t(), mpz_class(M).get_mpz_t(), alpha.get_den().get_ui());
    mpz_pow_ui(lp.get_mpz_t(), mpz_class(L).get_mpz_t(), alpha.get_num().get_ui());
    if (mq > lp) throw std::invalid_argument("StitchConfig: M exceeds L^alpha");
}

std::vector<int> StitchConfig::xi_all(int M, int dim, int type) {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(M);
    return std::vector<int>(n, type);
}

std::vector<int> StitchConfig::xi_random(int M, int dim, std::uint64_t seed) {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(M);
    RngStream rng(seed, 0);
    std::vector<int> xi(n);
    for (auto& x : xi) x = 1 + static_cast<int>(rng.next_below(2));
    return xi;
}

// --- constructors -------------------------------------------------------------

WeightedGraph grid(int dim, const mpq_class& spacing, const mpq_class& edge_weight,
                   const IVec& lo, const IVec& hi) {
    return WeightedGraph::implicit_grid(dim, spacing, edge_weight, lo, hi);
}

namespace {

// In-plane cross-weight table: offsets perpendicular to the anchor direction
// with their weight factors (the 1/|w-x| prefactor is applied by the caller).
struct CrossEntry {
    std::int64_t da, db;  // offsets along the two axes != anchor axis (2nd unused in 2-D)
    mpq_class factor;
};

std::vector<CrossEntry> cross_table(LatticePair pair) {
    std::vector<CrossEntry> t;
    t.push_back({0, 0, 1});
    switch (pair) {
        case LatticePair::z3_2z3:
            for (auto [a, b] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                t.push_back({a, b, mpq_class(1, 2)});
            for (auto [a, b] : {std::pair{1, 1}, {1, -1}, {-1, 1}, {-1, -1}})
                t.push_back({a, b, mpq_class(1, 4)});
            break;
        case LatticePair::z2_2z2:
            t.push_back({1, 0, mpq_class(1, 2)});
            t.push_back({-1, 0, mpq_class(1, 2)});
            break;
        case LatticePair::z3_3z3:
            for (std::int64_t a = -2; a <= 2; ++a)
                for (std::int64_t b = -2; b <= 2; ++b) {
                    std::int64_t n2 = a * a + b * b;
                    if (n2 == 1 || n2 == 2) t.push_back({a, b, mpq_class(2, 3)});
                    if (n2 == 4 || n2 == 8) t.push_back({a, b, mpq_class(1, 3)});
                }
            break;
    }
    return t;
}

}  // namespace

WeightedGraph stitched(const StitchConfig& cfg) {
    cfg.validate();
    int d = cfg.dim();
    int c = cfg.coarse();
    std::int64_t dlo = -cfg.margin;
    std::int64_t dhi = static_cast<std::int64_t>(cfg.L) * cfg.M - 1 + cfg.margin;
    std::int64_t ext = dhi - dlo + 1;

    auto in_domain = [&](const IVec& p) {
        for (int i = 0; i < d; ++i)
            if (p[i] < dlo || p[i] > dhi) return false;
        return true;
    };
    auto lindex = [&](const IVec& p) {
        std::uint64_t idx = 0;
        for (int i = 0; i < d; ++i) idx = idx * static_cast<std::uint64_t>(ext) +
                                          static_cast<std::uint64_t>(p[i] - dlo);
        return idx;
    };

    std::uint64_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= static_cast<std::uint64_t>(ext);
    std::vector<VertexId> id_of(cells, kNoVertex);

    WeightedGraph::Builder b(d);
    std::vector<IVec> vpos;
    // Vertices, in lexicographic order.
    IVec p = IVec::zero(d);
    for (int i = 0; i < d; ++i) p[i] = dlo;
    for (;;) {
        if (cfg.occupied(p)) {
            Vec q = Vec::zero(d);
            for (int i = 0; i < d; ++i) q[i] = static_cast<double>(p[i]);
            id_of[lindex(p)] = b.add_vertex(q);
            vpos.push_back(p);
        }
        int i = d - 1;
        while (i >= 0 && p[i] == dhi) --i;
        if (i < 0) break;
        ++p[i];
        for (int j = i + 1; j < d; ++j) p[j] = dlo;
    }

    auto vertex_of = [&](const IVec& q) -> VertexId {
        if (!in_domain(q)) return kNoVertex;
        return id_of[lindex(q)];
    };

    // Accumulate edges (cross edges touching a common pair are summed).
    std::map<std::pair<VertexId, VertexId>, mpq_class> edges;
    auto put = [&](VertexId u, VertexId v, const mpq_class& w) {
        if (u > v) std::swap(u, v);
        edges[{u, v}] += w;
    };

    auto table = cross_table(cfg.pair);
    mpq_class cw = cfg.coarse_weight();

    for (std::size_t vi = 0; vi < vpos.size(); ++vi) {
        const IVec& v = vpos[vi];
        int t = cfg.type_at(v);
        if (t == 1) {
            for (int j = 0; j < d; ++j) {
                IVec q = v;
                ++q[j];
                VertexId u = vertex_of(q);
                if (u != kNoVertex && cfg.type_at(q) == 1) put(static_cast<VertexId>(vi), u, 1);
            }
            continue;
        }
        // Type 2: coarse edges in the + directions.
        for (int j = 0; j < d; ++j) {
            IVec q = v;
            q[j] += c;
            VertexId u = vertex_of(q);
            if (u != kNoVertex && cfg.type_at(q) == 2) put(static_cast<VertexId>(vi), u, cw);
        }
        // Cross edges: one bundle per missing coarse direction.
        for (int j = 0; j < d; ++j) {
            for (int s : {1, -1}) {
                IVec q = v;
                q[j] += s * c;
                if (!in_domain(q) || cfg.type_at(q) != 1) continue;
                int k = 0;
                IVec x = v;
                for (int step = 1; step <= c; ++step) {
                    x[j] = v[j] + s * step;
                    if (in_domain(x) && cfg.type_at(x) == 1) {
                        k = step;
                        break;
                    }
                }
                if (k == 0) continue;
                int a0 = (j + 1) % d, a1 = (j + 2) % d;  // in-plane axes (a1 unused in 2-D)
                for (const auto& e : table) {
                    IVec u = x;
                    u[a0] += e.da;
                    if (d == 3) u[a1] += e.db;
                    else if (e.db != 0) continue;
                    VertexId uv = vertex_of(u);
                    if (uv != kNoVertex && cfg.type_at(u) == 1)
                        put(static_cast<VertexId>(vi), uv, e.factor / k);
                }
            }
        }
    }

    for (const auto& [key, w] : edges) b.add_edge(key.first, key.second, w);

    // Frontier: interaction radius is the coarse spacing.
    for (std::size_t vi = 0; vi < vpos.size(); ++vi)
        for (int i = 0; i < d; ++i)
            if (vpos[vi][i] - dlo < c || dhi - vpos[vi][i] < c) {
                b.mark_frontier(static_cast<VertexId>(vi));
                break;
            }

    return std::move(b).build();
}

WeightedGraph rotated_lattice(const IVec& lo, const IVec& hi) {
    const std::int64_t B[3][3] = {{4, 3, 0}, {3, -4, 0}, {0, 0, 5}};
    // Orthogonality and equal norm, as the construction requires.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            std::int64_t dot = 0;
            for (int k = 0; k < 3; ++k) dot += B[i][k] * B[j][k];
            if (dot != (i == j ? 25 : 0)) throw std::logic_error("rotated_lattice: bad basis");
        }
    std::int64_t mx = 0;
    for (int i = 0; i < 3; ++i) mx = std::max({mx, std::abs(lo[i]), std::abs(hi[i])});
    std::int64_t R = (7 * mx) / 25 + 2;

    WeightedGraph::Builder bld(3);
    std::map<std::array<std::int64_t, 3>, VertexId> at;
    std::vector<std::array<std::int64_t, 3>> pts;
    for (std::int64_t a = -R; a <= R; ++a)
        for (std::int64_t b = -R; b <= R; ++b) {
            std::int64_t x = 4 * a + 3 * b, y = 3 * a - 4 * b;
            if (x < lo[0] || x > hi[0] || y < lo[1] || y > hi[1]) continue;
            std::int64_t c0 = lo[2] >= 0 ? (lo[2] + 4) / 5 : -((-lo[2]) / 5);
            for (std::int64_t cc = c0; 5 * cc <= hi[2]; ++cc)
                pts.push_back({x, y, 5 * cc});
        }
    std::sort(pts.begin(), pts.end());
    for (const auto& q : pts)
        at[q] = bld.add_vertex(Vec{static_cast<double>(q[0]), static_cast<double>(q[1]),
                                   static_cast<double>(q[2])});
    for (const auto& q : pts) {
        VertexId v = at[q];
        bool frontier = false;
        for (int i = 0; i < 3; ++i)
            for (int s : {1, -1}) {
                std::array<std::int64_t, 3> n = {q[0] + s * B[i][0], q[1] + s * B[i][1],
                                                 q[2] + s * B[i][2]};
                auto it = at.find(n);
                if (it == at.end()) {
                    frontier = true;
                } else if (s == 1) {
                    bld.add_edge(v, it->second, 5);
                }
            }
        if (frontier) bld.mark_frontier(v);
    }
    return std::move(bld).build();
}

// --- certificates -------------------------------------------------------------

bool MomentCertificate::zero_mean() const {
    for (const auto& m : mean)
        if (m != 0) return false;
    return true;
}

bool MomentCertificate::zero_third() const {
    for (const auto& t : third)
        if (t != 0) return false;
    return true;
}

bool MomentCertificate::isotropic_second() const {
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            if (i != j && second[i * dim + j] != 0) return false;
            if (i == j && second[i * dim + j] != second[0]) return false;
        }
    return true;
}

VertexClass classify_vertex(const StitchConfig& cfg, const Vec& p) {
    int d = cfg.dim();
    double side = static_cast<double>(cfg.L) * cfg.M;
    auto clampdist = [&](double x) { return std::max({0.0, -x, x - side}); };
    // Distance to the codimension-1 pieces {x_i = Ln} x [0, side]^(d-1)
    // and the codimension-2 pieces where two coordinates are pinned.
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i)
        for (int n = 0; n <= cfg.M; ++n) {
            double dx = p[i] - static_cast<double>(cfg.L) * n;
            double rest2 = 0;
            for (int j = 0; j < d; ++j)
                if (j != i) {
                    double cj = clampdist(p[j]);
                    rest2 += cj * cj;
                }
            d1 = std::min(d1, std::sqrt(dx * dx + rest2));
            for (int j = i + 1; j < d; ++j)
                for (int m = 0; m <= cfg.M; ++m) {
                    double dy = p[j] - static_cast<double>(cfg.L) * m;
                    double rest = 0;
                    for (int k = 0; k < d; ++k)
                        if (k != i && k != j) {
                            double ck = clampdist(p[k]);
                            rest += ck * ck;
                        }
                    d2 = std::min(d2, std::sqrt(dx * dx + dy * dy + rest));
                }
        }
    if (d2 <= 2) return VertexClass::edge_or_corner;
    if (d1 <= 2) return VertexClass::face;
    IVec ip = IVec::zero(d);
    for (int i = 0; i < d; ++i) ip[i] = static_cast<std::int64_t>(std::llround(p[i]));
    return cfg.type_at(ip) == 2 ? VertexClass::interior2 : VertexClass::interior1;
}

MomentCertificate moment_certificate(const WeightedGraph& g, VertexId v, const StitchConfig* cfg) {
    if (g.is_frontier(v))
        throw std::invalid_argument("moment_certificate: vertex has truncated neighborhood");
    int d = g.dim();
    MomentCertificate cert;
    cert.dim = d;
    cert.cls = cfg ? classify_vertex(*cfg, g.pos(v)) : VertexClass::interior1;
    cert.mean.assign(d, 0);
    cert.second.assign(static_cast<std::size_t>(d) * d, 0);
    cert.third.assign(static_cast<std::size_t>(d) * d * d, 0);

    mpq_class tw = g.total_weight_exact(v);
    Vec pv = g.pos(v);
    int deg = g.degree(v);
    for (int k = 0; k < deg; ++k) {
        VertexId u = g.neighbor(v, k).to;
        mpq_class w = g.weight_exact(v, k) / tw;
        Vec pu = g.pos(u);
        std::array<mpq_class, kMaxDim> dx;
        for (int i = 0; i < d; ++i) dx[i] = mpq_class(pu[i]) - mpq_class(pv[i]);
        for (int i = 0; i < d; ++i) {
            cert.mean[i] += w * dx[i];
            for (int j = 0; j < d; ++j) {
                cert.second[i * d + j] += w * dx[i] * dx[j];
                for (int l = 0; l < d; ++l)
                    cert.third[(i * d + j) * d + l] += w * dx[i] * dx[j] * dx[l];
            }
        }
    }
    return cert;
}

bool CertifyReport::all_zero_mean() const {
    for (const auto& c : by_class)
        if (c.max_mean_abs != 0) return false;
    return true;
}

bool CertifyReport::class_i_isotropic() const {
    return by_class[0].max_second_aniso == 0 && by_class[0].max_third_abs == 0 &&
           by_class[1].max_second_aniso == 0 && by_class[1].max_third_abs == 0;
}

CertifyReport certify_lattice(const WeightedGraph& g, const StitchConfig* cfg,
                              std::uint64_t max_samples, std::uint64_t seed) {
    CertifyReport rep;
    std::vector<VertexId> picks;
    std::uint64_t n = g.size();
    if (n <= max_samples) {
        picks.reserve(n);
        for (std::uint64_t v = 0; v < n; ++v) picks.push_back(static_cast<VertexId>(v));
    } else {
        RngStream rng(seed, 0);
        picks.reserve(max_samples);
        for (std::uint64_t i = 0; i < max_samples; ++i)
            picks.push_back(static_cast<VertexId>(rng.next_below(n)));
    }
    for (VertexId v : picks) {
        if (g.is_frontier(v)) {
            ++rep.skipped_frontier;
            continue;
        }
        auto cert = moment_certificate(g, v, cfg);
        auto& cr = rep.by_class[static_cast<int>(cert.cls)];
        ++cr.count;
        ++rep.sampled;
        for (const auto& m : cert.mean) {
            mpq_class a(abs(m));
            if (a > cr.max_mean_abs) cr.max_mean_abs = a;
        }
        int d = cert.dim;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                mpq_class dev = i == j ? cert.second[i * d + j] - cert.second[0]
                                       : cert.second[i * d + j];
                mpq_class a(abs(dev));
                if (a > cr.max_second_aniso) cr.max_second_aniso = a;
            }
        for (const auto& t : cert.third) {
            mpq_class a(abs(t));
            if (a > cr.max_third_abs) cr.max_third_abs = a;
        }
    }
    return rep;
}

// --- structural comparison ------------------------------------------------------

namespace {

std::vector<std::pair<std::array<double, kMaxDim>, mpq_class>> neighborhood(
    const WeightedGraph& g, VertexId v) {
    std::vector<std::pair<std::array<double, kMaxDim>, mpq_class>> out;
    int deg = g.degree(v);
    for (int k = 0; k < deg; ++k) {
        Vec p = g.pos(g.neighbor(v, k).to);
        out.emplace_back(p.x, g.weight_exact(v, k));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

}  // namespace

bool same_by_position(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.size() != b.size() || a.dim() != b.dim()) return false;
    for (std::uint64_t v = 0; v < a.size(); ++v) {
        auto w = b.vertex_at(a.pos(static_cast<VertexId>(v)));
        if (!w) return false;
        if (neighborhood(a, static_cast<VertexId>(v)) != neighborhood(b, *w)) return false;
    }
    return true;
}

bool agree_on_box(const WeightedGraph& a, const WeightedGraph& b, const Vec& lo, const Vec& hi) {
    auto inside = [&](const Vec& p) {
        for (int i = 0; i < p.dim; ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    };
    std::uint64_t count_a = 0, count_b = 0;
    for (std::uint64_t v = 0; v < a.size(); ++v) {
        Vec p = a.pos(static_cast<VertexId>(v));
        if (!inside(p)) continue;
        ++count_a;
        auto w = b.vertex_at(p);
        if (!w) return false;
        if (neighborhood(a, static_cast<VertexId>(v)) != neighborhood(b, *w)) return false;
    }
    for (std::uint64_t v = 0; v < b.size(); ++v)
        if (inside(b.pos(static_cast<VertexId>(v)))) ++count_b;
    return count_a == count_b;
}

}  // namespace lerw
