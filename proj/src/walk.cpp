#include "lerw/walk.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace lerw {

PathSeq PathSeq::reversed() const {
    PathSeq r;
    r.v.assign(v.rbegin(), v.rend());
    r.jump.assign(jump.rbegin(), jump.rend());
    return r;
}

VertexId step(const WeightedGraph& g, VertexId v, RngStream& rng) {
    int d = g.degree(v);
    if (d == 0) throw std::domain_error("step: isolated vertex");
    if (g.is_grid()) return g.neighbor(v, static_cast<int>(rng.next_below(d))).to;
    double u = rng.next_double() * g.total_weight(v);
    double acc = 0;
    for (int k = 0; k < d; ++k) {
        auto nb = g.neighbor(v, k);
        acc += nb.w;
        if (u < acc) return nb.to;
    }
    return g.neighbor(v, d - 1).to;
}

WalkOutcome run_until(const WeightedGraph& g, VertexId start, const StopSpec& stop,
                      RngStream& rng) {
    if (!stop.any()) throw std::invalid_argument("run_until: no stop condition");
    WalkOutcome out;
    out.path.push(start);
    if (g.is_frontier(start)) {
        out.reason = stop.at_frontier ? StopReason::hit_frontier : StopReason::frontier_error;
        out.hit_index = 0;
        return out;
    }
    VertexId cur = start;
    for (std::uint64_t t = 1;; ++t) {
        if (stop.step_cap && t > stop.step_cap) {
            out.reason = StopReason::step_cap;
            out.hit_index = out.path.v.size() - 1;
            return out;
        }
        cur = step(g, cur, rng);
        out.path.push(cur);
        if (stop.absorbing.contains(cur)) {
            out.reason = StopReason::hit_absorbing;
            out.hit_index = t;
            return out;
        }
        bool exited = false;
        for (const auto& rs : stop.radii)
            if (dist(g.pos(cur), rs.center) >= rs.r) {
                exited = true;
                break;
            }
        if (exited) {
            out.reason = StopReason::exited_radius;
            out.hit_index = t;
            return out;
        }
        if (g.is_frontier(cur)) {
            out.reason = stop.at_frontier ? StopReason::hit_frontier : StopReason::frontier_error;
            out.hit_index = t;
            return out;
        }
    }
}

PathSeq loop_erase(const PathSeq& path) {
    if (path.empty()) return {};
    std::unordered_map<VertexId, std::size_t> last;
    last.reserve(path.v.size() * 2);
    for (std::size_t i = 0; i < path.v.size(); ++i) last[path.v[i]] = i;
    PathSeq out;
    out.push(path.v[0]);
    std::size_t cur = 0;
    for (;;) {
        std::size_t j = last[path.v[cur]];
        if (j + 1 >= path.v.size()) break;
        // the continuity flag of the emitted step is that of the step j -> j+1
        cur = j + 1;
        out.push(path.v[cur], path.jump[j]);
    }
    return out;
}

std::vector<std::pair<VertexId, std::uint64_t>> cut_points(const PathSeq& path,
                                                           std::optional<std::uint64_t> t) {
    std::vector<std::pair<VertexId, std::uint64_t>> out;
    if (path.empty()) return out;
    std::unordered_map<VertexId, std::size_t> last;
    last.reserve(path.v.size() * 2);
    for (std::size_t i = 0; i < path.v.size(); ++i) last[path.v[i]] = i;
    std::size_t runmax = 0;
    for (std::size_t i = 0; i < path.v.size(); ++i) {
        runmax = std::max(runmax, last[path.v[i]]);
        if (runmax == i && (!t || i < *t)) out.emplace_back(path.v[i], i);
    }
    return out;
}

PathSeq concat(const std::vector<PathSeq>& pieces) {
    PathSeq whole;
    for (const auto& p : pieces) {
        for (std::size_t i = 0; i < p.v.size(); ++i)
            whole.push(p.v[i], i == 0 ? !whole.empty() : static_cast<bool>(p.jump[i - 1]));
    }
    return whole;
}

std::vector<PathSeq> loop_erase_pieces(const std::vector<PathSeq>& pieces) {
    PathSeq whole = concat(pieces);
    std::vector<std::size_t> cum;  // cumulative vertex counts
    std::size_t n = 0;
    for (const auto& p : pieces) {
        n += p.v.size();
        cum.push_back(n);
    }
    // LE with last-occurrence indices of each emitted vertex
    std::vector<std::size_t> jidx;
    PathSeq le;
    if (!whole.empty()) {
        std::unordered_map<VertexId, std::size_t> last;
        for (std::size_t i = 0; i < whole.v.size(); ++i) last[whole.v[i]] = i;
        std::size_t cur = 0;
        for (;;) {
            le.push(whole.v[cur], cur > 0 && whole.jump[cur - 1]);
            std::size_t j = last[whole.v[cur]];
            jidx.push_back(j);
            if (j + 1 >= whole.v.size()) break;
            cur = j + 1;
        }
        // continuity flags of LE steps come from the original steps j -> j+1
        for (std::size_t i = 0; i + 1 < le.v.size(); ++i) le.jump[i] = whole.jump[jidx[i]];
    }
    std::vector<PathSeq> out(pieces.size());
    std::size_t t_prev = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        std::size_t t_i;
        if (i + 1 == pieces.size()) {
            t_i = le.v.size();
        } else {
            t_i = t_prev;
            while (t_i < le.v.size() && jidx[t_i] < cum[i]) ++t_i;
        }
        PathSeq piece;
        for (std::size_t k = t_prev; k < t_i; ++k)
            piece.push(le.v[k], k > t_prev && le.jump[k - 1]);
        out[i] = std::move(piece);
        t_prev = t_i;
    }
    return out;
}

namespace {

// Exact hitting-of-target harmonic function on the complement of `absorbing`.
std::unordered_map<VertexId, mpq_class> target_harmonic(const WeightedGraph& g,
                                                        const VertexSet& absorbing,
                                                        VertexId target) {
    std::vector<VertexId> interior;
    for (std::uint64_t v = 0; v < g.size(); ++v)
        if (!absorbing.contains(static_cast<VertexId>(v)))
            interior.push_back(static_cast<VertexId>(v));
    std::unordered_map<VertexId, mpq_class> bd;
    for (VertexId b : absorbing) bd[b] = (b == target) ? 1 : 0;
    return harmonic_solve_exact(g, bd, VertexSet(interior));
}

}  // namespace

WalkOutcome conditioned_walk(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                             VertexId target, RngStream& rng) {
    if (!absorbing.contains(target))
        throw std::invalid_argument("conditioned_walk: target not absorbing");
    auto h = target_harmonic(g, absorbing, target);
    std::unordered_map<VertexId, double> hd;
    hd.reserve(h.size() * 2);
    for (const auto& [v, q] : h) hd[v] = q.get_d();

    WalkOutcome out;
    out.path.push(start);
    VertexId cur = start;
    for (std::uint64_t t = 1;; ++t) {
        int d = g.degree(cur);
        double norm = 0;
        for (int k = 0; k < d; ++k) {
            auto nb = g.neighbor(cur, k);
            norm += nb.w * hd.at(nb.to);
        }
        if (norm <= 0) throw std::domain_error("conditioned_walk: zero-probability conditioning");
        double u = rng.next_double() * norm;
        double acc = 0;
        VertexId nxt = kNoVertex;
        for (int k = 0; k < d; ++k) {
            auto nb = g.neighbor(cur, k);
            acc += nb.w * hd.at(nb.to);
            if (u < acc) {
                nxt = nb.to;
                break;
            }
        }
        if (nxt == kNoVertex) nxt = g.neighbor(cur, d - 1).to;
        out.path.push(nxt);
        if (absorbing.contains(nxt)) {
            out.reason = StopReason::hit_absorbing;
            out.hit_index = t;
            return out;
        }
        cur = nxt;
    }
}

WalkOutcome conditioned_walk_rejection(const WeightedGraph& g, VertexId start,
                                       const VertexSet& absorbing, VertexId target,
                                       RngStream& rng, RejectionStats& stats) {
    StopSpec stop;
    stop.absorbing = absorbing;
    for (;;) {
        ++stats.proposals;
        auto out = run_until(g, start, stop, rng);
        if (out.reason == StopReason::hit_absorbing && out.path.v.back() == target) {
            ++stats.accepted;
            return out;
        }
        if (stats.proposals > 1'000'000)
            throw std::domain_error("conditioned_walk_rejection: acceptance too low");
    }
}

std::vector<std::pair<VertexId, mpq_class>> laplacian_walk_step(const WeightedGraph& g,
                                                                const PathSeq& gamma,
                                                                const VertexSet& B,
                                                                const VertexSet& absorbing) {
    if (gamma.empty()) throw std::invalid_argument("laplacian_walk_step: empty prefix");
    VertexId tip = gamma.v.back();
    std::vector<VertexId> blocked = gamma.v;
    for (VertexId b : B) blocked.push_back(b);
    VertexSet blockedSet(blocked);
    std::vector<VertexId> interior;
    for (std::uint64_t v = 0; v < g.size(); ++v) {
        auto vid = static_cast<VertexId>(v);
        if (!blockedSet.contains(vid) && !absorbing.contains(vid)) interior.push_back(vid);
    }
    std::unordered_map<VertexId, mpq_class> bd;
    for (std::uint64_t v = 0; v < g.size(); ++v) {
        auto vid = static_cast<VertexId>(v);
        if (absorbing.contains(vid))
            bd[vid] = 1;
        else if (blockedSet.contains(vid))
            bd[vid] = 0;
    }
    auto h = harmonic_solve_exact(g, bd, VertexSet(interior));

    mpq_class tw = g.total_weight_exact(tip);
    mpq_class norm = 0;
    int d = g.degree(tip);
    std::vector<std::pair<VertexId, mpq_class>> out;
    for (int k = 0; k < d; ++k) {
        VertexId x = g.neighbor(tip, k).to;
        mpq_class hx = absorbing.contains(x) ? mpq_class(1) : h.at(x);
        if (hx == 0) continue;
        mpq_class p = g.weight_exact(tip, k) / tw * hx;
        norm += p;
        bool merged = false;
        for (auto& [vid, q] : out)
            if (vid == x) {
                q += p;
                merged = true;
            }
        if (!merged) out.emplace_back(x, p);
    }
    if (norm == 0) throw std::domain_error("laplacian_walk_step: trapped tip");
    for (auto& [vid, q] : out) q /= norm;
    return out;
}

std::vector<VertexId> wilson_ust(const WeightedGraph& g, const VertexSet& root, RngStream& rng) {
    if (root.empty()) throw std::invalid_argument("wilson_ust: empty root");
    std::size_t n = g.size();
    std::vector<bool> in_tree(n, false);
    std::vector<VertexId> parent(n, kNoVertex);
    for (VertexId r : root) in_tree[r] = true;
    // connectivity check
    {
        std::vector<bool> seen(n, false);
        std::deque<VertexId> q(root.begin(), root.end());
        for (VertexId r : root) seen[r] = true;
        std::size_t cnt = 0;
        while (!q.empty()) {
            VertexId u = q.front();
            q.pop_front();
            ++cnt;
            int d = g.degree(u);
            for (int k = 0; k < d; ++k) {
                VertexId t = g.neighbor(u, k).to;
                if (!seen[t]) {
                    seen[t] = true;
                    q.push_back(t);
                }
            }
        }
        if (cnt != n) throw std::invalid_argument("wilson_ust: graph not connected to root");
    }
    std::vector<VertexId> nxt(n, kNoVertex);
    for (std::size_t v = 0; v < n; ++v) {
        if (in_tree[v]) continue;
        VertexId u = static_cast<VertexId>(v);
        while (!in_tree[u]) {
            nxt[u] = step(g, u, rng);
            u = nxt[u];
        }
        u = static_cast<VertexId>(v);
        while (!in_tree[u]) {
            in_tree[u] = true;
            parent[u] = nxt[u];
            u = nxt[u];
        }
    }
    return parent;
}

// --- LE-prefix Markov chain oracles ------------------------------------------

namespace {

std::vector<VertexId> le_step(const std::vector<VertexId>& prefix, VertexId x) {
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i] == x) return std::vector<VertexId>(prefix.begin(), prefix.begin() + i + 1);
    auto out = prefix;
    out.push_back(x);
    return out;
}

struct PrefixChain {
    using State = std::pair<std::vector<VertexId>, int>;  // (prefix, visit count)
    std::map<State, int> index;
    std::vector<State> states;
    // transitions: (from, to, prob); absorptions: (from, final path, prob)
    std::vector<std::tuple<int, int, mpq_class>> trans;
    std::map<std::vector<VertexId>, mpq_class> mass;  // filled after solve
    std::vector<std::map<std::vector<VertexId>, mpq_class>> absorb;

    int state_id(const State& s, std::deque<int>& todo) {
        auto it = index.find(s);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(states.size());
        index.emplace(s, id);
        states.push_back(s);
        absorb.emplace_back();
        todo.push_back(id);
        return id;
    }
};

LerwLaw prefix_chain_law(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                         VertexId visit_w, int n_visits, const VertexSet& forbidden,
                         std::size_t state_budget) {
    const bool visit_mode = n_visits > 0;
    PrefixChain pc;
    std::deque<int> todo;
    pc.state_id({{start}, 0}, todo);
    while (!todo.empty()) {
        int si = todo.front();
        todo.pop_front();
        auto [prefix, count] = pc.states[si];
        VertexId v = prefix.back();
        mpq_class tw = g.total_weight_exact(v);
        int d = g.degree(v);
        for (int k = 0; k < d; ++k) {
            VertexId x = g.neighbor(v, k).to;
            mpq_class p = g.weight_exact(v, k) / tw;
            if (forbidden.contains(x)) continue;  // killed mass
            auto np = le_step(prefix, x);
            if (visit_mode) {
                int nc = count + (x == visit_w ? 1 : 0);
                if (x == visit_w && nc == n_visits) {
                    pc.absorb[si][np] += p;
                } else {
                    int ti = pc.state_id({np, nc}, todo);
                    pc.trans.emplace_back(si, ti, p);
                }
            } else {
                if (absorbing.contains(x)) {
                    pc.absorb[si][np] += p;
                } else {
                    int ti = pc.state_id({np, 0}, todo);
                    pc.trans.emplace_back(si, ti, p);
                }
            }
            if (pc.states.size() > state_budget)
                throw std::length_error("prefix chain: state budget exceeded");
        }
    }
    // expected visits z solve: (I - Q^T) z = e_0
    std::size_t n = pc.states.size();
    std::vector<mpq_class> A(n * n, 0), b(n, 0);
    for (std::size_t i = 0; i < n; ++i) A[i * n + i] = 1;
    for (const auto& [from, to, p] : pc.trans) A[static_cast<std::size_t>(to) * n + from] -= p;
    b[0] = 1;
    auto z = solve_rational(std::move(A), std::move(b), n, 1);

    std::map<std::vector<VertexId>, mpq_class> mass;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [path, p] : pc.absorb[i]) mass[path] += z[i] * p;

    mpq_class total = 0;
    for (const auto& [path, m] : mass) total += m;
    LerwLaw law;
    for (auto& [path, m] : mass) {
        law.paths.push_back(path);
        law.prob.push_back(forbidden.empty() ? m : mpq_class(m / total));
    }
    law.nodes_visited = n;
    return law;
}

}  // namespace

LerwLaw lerw_law_prefix_chain(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                              std::size_t state_budget) {
    return prefix_chain_law(g, start, absorbing, kNoVertex, 0, VertexSet(), state_budget);
}

LerwLaw lerw_law_nth_visit(const WeightedGraph& g, VertexId start, VertexId w, int n,
                           const VertexSet& forbidden, std::size_t state_budget) {
    if (n < 1) throw std::invalid_argument("lerw_law_nth_visit: n must be >= 1");
    return prefix_chain_law(g, start, VertexSet(), w, n, forbidden, state_budget);
}

LerwLaw conditioned_lerw_law(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                             VertexId target) {
    auto h = target_harmonic(g, absorbing, target);
    // transformed graph on {h > 0}
    std::vector<VertexId> keep;
    std::unordered_map<VertexId, VertexId> to_new;
    WeightedGraph::Builder b(g.dim());
    for (std::uint64_t v = 0; v < g.size(); ++v) {
        auto vid = static_cast<VertexId>(v);
        if (h.at(vid) > 0) {
            to_new[vid] = b.add_vertex(g.pos(vid));
            keep.push_back(vid);
        }
    }
    for (VertexId vid : keep) {
        int d = g.degree(vid);
        for (int k = 0; k < d; ++k) {
            VertexId u = g.neighbor(vid, k).to;
            if (u <= vid) continue;  // one direction; self-loops kept below
            auto it = to_new.find(u);
            if (it == to_new.end()) continue;
            b.add_edge(to_new[vid], it->second, g.weight_exact(vid, k) * h.at(vid) * h.at(u));
        }
        // self-loops
        for (int k = 0; k < d; ++k)
            if (g.neighbor(vid, k).to == vid)
                b.add_edge(to_new[vid], to_new[vid], g.weight_exact(vid, k) * h.at(vid) * h.at(vid));
    }
    auto gt = std::move(b).build();
    VertexId new_target = to_new.at(target);

    auto remap = [&](LerwLaw lw, bool prepend_start) {
        LerwLaw out;
        for (std::size_t i = 0; i < lw.paths.size(); ++i) {
            std::vector<VertexId> p;
            if (prepend_start) p.push_back(start);
            for (VertexId nv : lw.paths[i]) p.push_back(keep[nv]);
            out.paths.push_back(std::move(p));
            out.prob.push_back(lw.prob[i]);
        }
        return out;
    };

    if (!absorbing.contains(start)) {
        if (!(h.at(start) > 0))
            throw std::domain_error("conditioned_lerw_law: zero-probability conditioning");
        return remap(exact_lerw_law(gt, to_new.at(start), VertexSet({new_target})), false);
    }
    // start inside the absorbing set: explicit first step
    mpq_class tw = g.total_weight_exact(start), norm = 0;
    int d = g.degree(start);
    std::map<std::vector<VertexId>, mpq_class> mass;
    for (int k = 0; k < d; ++k) {
        VertexId u = g.neighbor(start, k).to;
        mpq_class hu = u == target ? mpq_class(1) : (absorbing.contains(u) ? mpq_class(0) : h.at(u));
        if (hu == 0) continue;
        norm += g.weight_exact(start, k) / tw * hu;
    }
    if (norm == 0) throw std::domain_error("conditioned_lerw_law: zero-probability conditioning");
    for (int k = 0; k < d; ++k) {
        VertexId u = g.neighbor(start, k).to;
        mpq_class hu = u == target ? mpq_class(1) : (absorbing.contains(u) ? mpq_class(0) : h.at(u));
        if (hu == 0) continue;
        mpq_class q = g.weight_exact(start, k) / tw * hu / norm;
        if (u == target) {
            mass[{start, target}] += q;
            continue;
        }
        auto sub = remap(exact_lerw_law(gt, to_new.at(u), VertexSet({new_target})), true);
        for (std::size_t i = 0; i < sub.paths.size(); ++i) mass[sub.paths[i]] += q * sub.prob[i];
    }
    LerwLaw law;
    for (auto& [p, q] : mass) {
        law.paths.push_back(p);
        law.prob.push_back(q);
    }
    return law;
}

}  // namespace lerw
