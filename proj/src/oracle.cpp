#include "lerw/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace lerw {

std::vector<mpq_class> solve_rational(std::vector<mpq_class> A, std::vector<mpq_class> B,
                                      std::size_t n, std::size_t m) {
    // Gaussian elimination with partial (first nonzero) pivoting.
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && A[piv * n + col] == 0) ++piv;
        if (piv == n) throw std::domain_error("solve_rational: singular system");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[piv * n + j], A[col * n + j]);
            for (std::size_t j = 0; j < m; ++j) std::swap(B[piv * m + j], B[col * m + j]);
        }
        mpq_class inv = 1 / A[col * n + col];
        for (std::size_t j = col; j < n; ++j) A[col * n + j] *= inv;
        for (std::size_t j = 0; j < m; ++j) B[col * m + j] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || A[r * n + col] == 0) continue;
            mpq_class f = A[r * n + col];
            for (std::size_t j = col; j < n; ++j) A[r * n + j] -= f * A[col * n + j];
            for (std::size_t j = 0; j < m; ++j) B[r * m + j] -= f * B[col * m + j];
        }
    }
    return B;
}

namespace {

// Every vertex of `S` must reach a vertex outside `S`, else the killed walk
// never exits and the Green system is singular.
void check_exits(const WeightedGraph& g, const VertexSet& S) {
    std::unordered_map<VertexId, bool> reach;  // reaches the outside
    for (VertexId v : S) {
        if (reach.count(v)) continue;
        // BFS inside S from v
        std::vector<VertexId> comp{v};
        std::unordered_map<VertexId, bool> seen{{v, true}};
        std::deque<VertexId> q{v};
        bool exits = false;
        while (!q.empty()) {
            VertexId u = q.front();
            q.pop_front();
            int d = g.degree(u);
            for (int k = 0; k < d; ++k) {
                VertexId t = g.neighbor(u, k).to;
                if (!S.contains(t)) {
                    exits = true;
                    continue;
                }
                if (!seen.count(t)) {
                    seen[t] = true;
                    comp.push_back(t);
                    q.push_back(t);
                }
            }
        }
        if (!exits) throw std::domain_error("domain component never exits (absorbing-free)");
        for (VertexId u : comp) reach[u] = true;
    }
}

std::unordered_map<VertexId, int> index_map(const std::vector<VertexId>& ids) {
    std::unordered_map<VertexId, int> m;
    m.reserve(ids.size() * 2);
    for (std::size_t i = 0; i < ids.size(); ++i) m[ids[i]] = static_cast<int>(i);
    return m;
}

}  // namespace

int GreenMatrix::index_of(VertexId v) const {
    auto it = std::lower_bound(domain.begin(), domain.end(), v);
    if (it == domain.end() || *it != v) return -1;
    return static_cast<int>(it - domain.begin());
}

double GreenMatrix::value(VertexId v, VertexId w) const {
    int i = index_of(v), j = index_of(w);
    if (i < 0 || j < 0) return 0;
    return vals[static_cast<std::size_t>(i) * domain.size() + j];
}

mpq_class GreenMatrix::value_exact(VertexId v, VertexId w) const {
    int i = index_of(v), j = index_of(w);
    if (i < 0 || j < 0) return 0;
    return exact[static_cast<std::size_t>(i) * domain.size() + j];
}

GreenMatrix greens_function(const WeightedGraph& g, const VertexSet& S, bool exact) {
    std::size_t n = S.size();
    if (n > (exact ? kRationalSolveLimit : kDenseSolveLimit))
        throw std::length_error("greens_function: domain exceeds dense solve limit");
    check_exits(g, S);
    GreenMatrix gm;
    gm.domain = S.ids();
    gm.exact_mode = exact;
    auto idx = index_map(gm.domain);
    if (exact) {
        std::vector<mpq_class> A(n * n, 0), B(n * n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            A[i * n + i] = 1;
            B[i * n + i] = 1;
            VertexId v = gm.domain[i];
            mpq_class tw = g.total_weight_exact(v);
            int d = g.degree(v);
            for (int k = 0; k < d; ++k) {
                VertexId u = g.neighbor(v, k).to;
                auto it = idx.find(u);
                if (it != idx.end()) A[i * n + it->second] -= g.weight_exact(v, k) / tw;
            }
        }
        gm.exact = solve_rational(std::move(A), std::move(B), n, n);
        gm.vals.resize(n * n);
        for (std::size_t i = 0; i < n * n; ++i) gm.vals[i] = gm.exact[i].get_d();
    } else {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<long>(n), static_cast<long>(n));
        for (std::size_t i = 0; i < n; ++i) {
            VertexId v = gm.domain[i];
            double tw = g.total_weight(v);
            int d = g.degree(v);
            for (int k = 0; k < d; ++k) {
                auto [u, w] = g.neighbor(v, k);
                auto it = idx.find(u);
                if (it != idx.end()) A(static_cast<long>(i), it->second) -= w / tw;
            }
        }
        Eigen::MatrixXd G = A.partialPivLu().solve(
            Eigen::MatrixXd::Identity(static_cast<long>(n), static_cast<long>(n)));
        gm.vals.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                gm.vals[i * n + j] = G(static_cast<long>(i), static_cast<long>(j));
    }
    return gm;
}

namespace {

template <class T, class WeightFn, class TotalFn>
std::unordered_map<VertexId, T> harmonic_impl(const WeightedGraph& g,
                                              const std::unordered_map<VertexId, T>& boundary,
                                              const VertexSet& A, WeightFn wf, TotalFn tf,
                                              bool exact) {
    for (VertexId u : g.external_boundary(A))
        if (!boundary.count(u))
            throw std::invalid_argument("harmonic_solve: missing boundary value");
    for (VertexId v : A) {
        // reachability of a boundary vertex, per component
        // (cheap: A is small in oracle usage)
        std::unordered_map<VertexId, bool> seen{{v, true}};
        std::deque<VertexId> q{v};
        bool touches = false;
        while (!q.empty() && !touches) {
            VertexId u = q.front();
            q.pop_front();
            int d = g.degree(u);
            for (int k = 0; k < d; ++k) {
                VertexId t = g.neighbor(u, k).to;
                if (!A.contains(t)) {
                    touches = true;
                    break;
                }
                if (!seen.count(t)) {
                    seen[t] = true;
                    q.push_back(t);
                }
            }
        }
        if (!touches) throw std::domain_error("harmonic_solve: component not touching boundary");
    }

    std::size_t n = A.size();
    auto idx = index_map(A.ids());
    std::vector<T> M(n * n, T(0)), rhs(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        M[i * n + i] = T(1);
        VertexId v = A.ids()[i];
        T tw = tf(v);
        int d = g.degree(v);
        for (int k = 0; k < d; ++k) {
            VertexId u = g.neighbor(v, k).to;
            T p = wf(v, k) / tw;
            auto it = idx.find(u);
            if (it != idx.end())
                M[i * n + it->second] -= p;
            else
                rhs[i] += p * boundary.at(u);
        }
    }
    std::vector<T> sol;
    if (exact) {
        if constexpr (std::is_same_v<T, mpq_class>) {
            sol = solve_rational(std::move(M), std::move(rhs), n, 1);
        }
    } else {
        if constexpr (std::is_same_v<T, double>) {
            Eigen::MatrixXd EM(static_cast<long>(n), static_cast<long>(n));
            Eigen::VectorXd Er(static_cast<long>(n));
            for (std::size_t i = 0; i < n; ++i) {
                Er(static_cast<long>(i)) = rhs[i];
                for (std::size_t j = 0; j < n; ++j)
                    EM(static_cast<long>(i), static_cast<long>(j)) = M[i * n + j];
            }
            Eigen::VectorXd s = EM.partialPivLu().solve(Er);
            sol.resize(n);
            for (std::size_t i = 0; i < n; ++i) sol[i] = s(static_cast<long>(i));
        }
    }
    std::unordered_map<VertexId, T> out = boundary;
    for (std::size_t i = 0; i < n; ++i) out[A.ids()[i]] = sol[i];
    return out;
}

}  // namespace

std::unordered_map<VertexId, double> harmonic_solve(
    const WeightedGraph& g, const std::unordered_map<VertexId, double>& boundary,
    const VertexSet& A) {
    if (A.size() > kDenseSolveLimit) throw std::length_error("harmonic_solve: domain too large");
    return harmonic_impl<double>(
        g, boundary, A, [&](VertexId v, int k) { return g.neighbor(v, k).w; },
        [&](VertexId v) { return g.total_weight(v); }, false);
}

std::unordered_map<VertexId, mpq_class> harmonic_solve_exact(
    const WeightedGraph& g, const std::unordered_map<VertexId, mpq_class>& boundary,
    const VertexSet& A) {
    if (A.size() > kRationalSolveLimit)
        throw std::length_error("harmonic_solve_exact: domain too large");
    return harmonic_impl<mpq_class>(
        g, boundary, A, [&](VertexId v, int k) { return g.weight_exact(v, k); },
        [&](VertexId v) { return g.total_weight_exact(v); }, true);
}

double HitVector::prob(VertexId w) const {
    auto it = std::lower_bound(absorbing.begin(), absorbing.end(), w);
    if (it == absorbing.end() || *it != w) return 0;
    return p[static_cast<std::size_t>(it - absorbing.begin())];
}

mpq_class HitVector::prob_exact(VertexId w) const {
    auto it = std::lower_bound(absorbing.begin(), absorbing.end(), w);
    if (it == absorbing.end() || *it != w) return 0;
    return p_exact[static_cast<std::size_t>(it - absorbing.begin())];
}

HitVector hitting_distribution(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                               bool exact) {
    if (absorbing.empty()) throw std::invalid_argument("hitting_distribution: empty absorbing set");
    std::vector<VertexId> interior;
    for (std::uint64_t v = 0; v < g.size(); ++v)
        if (!absorbing.contains(static_cast<VertexId>(v))) interior.push_back(static_cast<VertexId>(v));
    std::size_t n = interior.size(), m = absorbing.size();
    if (n > (exact ? kRationalSolveLimit : kDenseSolveLimit))
        throw std::length_error("hitting_distribution: interior exceeds solve limit");
    if (n > 0) check_exits(g, VertexSet(interior));
    auto iidx = index_map(interior);
    auto aids = absorbing.ids();
    auto aidx = index_map(aids);

    HitVector hv;
    hv.start = start;
    hv.absorbing = aids;
    hv.exact_mode = exact;

    auto run = [&](auto wf, auto tf, auto zero) {
        using T = decltype(zero);
        std::vector<T> A(n * n, T(0)), B(n * m, T(0));
        for (std::size_t i = 0; i < n; ++i) {
            A[i * n + i] = T(1);
            VertexId v = interior[i];
            T tw = tf(v);
            int d = g.degree(v);
            for (int k = 0; k < d; ++k) {
                VertexId u = g.neighbor(v, k).to;
                T pr = wf(v, k) / tw;
                auto it = iidx.find(u);
                if (it != iidx.end())
                    A[i * n + it->second] -= pr;
                else
                    B[i * m + aidx.at(u)] += pr;
            }
        }
        std::vector<T> H;
        if (n > 0) {
            if constexpr (std::is_same_v<T, mpq_class>) {
                H = solve_rational(std::move(A), std::move(B), n, m);
            } else {
                Eigen::MatrixXd EA(static_cast<long>(n), static_cast<long>(n));
                Eigen::MatrixXd EB(static_cast<long>(n), static_cast<long>(m));
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        EA(static_cast<long>(i), static_cast<long>(j)) = A[i * n + j];
                    for (std::size_t j = 0; j < m; ++j)
                        EB(static_cast<long>(i), static_cast<long>(j)) = B[i * m + j];
                }
                Eigen::MatrixXd EH = EA.partialPivLu().solve(EB);
                H.resize(n * m);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < m; ++j)
                        H[i * m + j] = EH(static_cast<long>(i), static_cast<long>(j));
            }
        }
        std::vector<T> out(m, T(0));
        auto hrow = [&](VertexId u, std::size_t j) -> T {
            auto it = iidx.find(u);
            if (it != iidx.end()) return H[static_cast<std::size_t>(it->second) * m + j];
            return T(aidx.at(u) == static_cast<int>(j) ? 1 : 0);
        };
        if (!absorbing.contains(start)) {
            auto it = iidx.find(start);
            for (std::size_t j = 0; j < m; ++j) out[j] = H[static_cast<std::size_t>(it->second) * m + j];
        } else {
            // forced first step
            T tw = tf(start);
            int d = g.degree(start);
            for (int k = 0; k < d; ++k) {
                VertexId u = g.neighbor(start, k).to;
                T pr = wf(start, k) / tw;
                for (std::size_t j = 0; j < m; ++j) out[j] += pr * hrow(u, j);
            }
        }
        return out;
    };

    if (exact) {
        hv.p_exact = run([&](VertexId v, int k) { return g.weight_exact(v, k); },
                         [&](VertexId v) { return g.total_weight_exact(v); }, mpq_class(0));
        hv.p.reserve(m);
        for (const auto& q : hv.p_exact) hv.p.push_back(q.get_d());
    } else {
        hv.p = run([&](VertexId v, int k) { return static_cast<double>(g.neighbor(v, k).w); },
                   [&](VertexId v) { return g.total_weight(v); }, 0.0);
    }
    return hv;
}

mpq_class LerwLaw::total() const {
    mpq_class s = 0;
    for (const auto& q : prob) s += q;
    return s;
}

int LerwLaw::find(const std::vector<VertexId>& path) const {
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (paths[i] == path) return static_cast<int>(i);
    return -1;
}

namespace {

struct LerwRec {
    const WeightedGraph& g;
    const VertexSet& absorbing;
    std::uint64_t budget;
    LerwLaw law;
    std::vector<VertexId> prefix;
    std::vector<bool> forbidden;

    // h(x) = P^x(T_B < T_prefix), immediate semantics at x.
    mpq_class hvalue(VertexId x, const std::unordered_map<VertexId, mpq_class>& hmap) const {
        if (absorbing.contains(x)) return 1;
        if (forbidden[x]) return 0;
        return hmap.at(x);
    }

    void run(VertexId v, const mpq_class& acc) {
        if (++law.nodes_visited > budget)
            throw std::length_error("exact_lerw_law: node budget exceeded");
        // Dirichlet solve on V \ (prefix u B)
        std::vector<VertexId> interior;
        for (std::uint64_t u = 0; u < g.size(); ++u)
            if (!forbidden[u] && !absorbing.contains(static_cast<VertexId>(u)))
                interior.push_back(static_cast<VertexId>(u));
        std::unordered_map<VertexId, mpq_class> hmap;
        if (!interior.empty()) {
            std::size_t n = interior.size();
            auto idx = index_map(interior);
            std::vector<mpq_class> A(n * n, 0), rhs(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                A[i * n + i] = 1;
                VertexId u = interior[i];
                mpq_class tw = g.total_weight_exact(u);
                int d = g.degree(u);
                for (int k = 0; k < d; ++k) {
                    VertexId t = g.neighbor(u, k).to;
                    mpq_class pr = g.weight_exact(u, k) / tw;
                    auto it = idx.find(t);
                    if (it != idx.end())
                        A[i * n + it->second] -= pr;
                    else if (absorbing.contains(t))
                        rhs[i] += pr;
                }
            }
            auto sol = solve_rational(std::move(A), std::move(rhs), n, 1);
            for (std::size_t i = 0; i < n; ++i) hmap[interior[i]] = sol[i];
        }
        mpq_class tw = g.total_weight_exact(v);
        mpq_class norm = 0;
        int d = g.degree(v);
        for (int k = 0; k < d; ++k)
            norm += g.weight_exact(v, k) / tw * hvalue(g.neighbor(v, k).to, hmap);
        if (norm == 0) return;  // walk conditioned on a null event; no mass
        for (int k = 0; k < d; ++k) {
            VertexId x = g.neighbor(v, k).to;
            mpq_class h = hvalue(x, hmap);
            if (h == 0) continue;
            mpq_class pstep = (g.weight_exact(v, k) / tw) * h / norm;
            prefix.push_back(x);
            if (absorbing.contains(x)) {
                law.paths.push_back(prefix);
                law.prob.push_back(acc * pstep);
            } else {
                forbidden[x] = true;
                run(x, acc * pstep);
                forbidden[x] = false;
            }
            prefix.pop_back();
        }
    }
};

}  // namespace

LerwLaw exact_lerw_law(const WeightedGraph& g, VertexId start, const VertexSet& absorbing,
                       std::uint64_t node_budget) {
    if (g.size() > kRationalSolveLimit)
        throw std::length_error("exact_lerw_law: graph exceeds rational solve limit");
    LerwRec rec{g, absorbing, node_budget, {}, {}, std::vector<bool>(g.size(), false)};
    rec.prefix.push_back(start);
    rec.forbidden[start] = true;
    rec.run(start, 1);
    return std::move(rec.law);
}

namespace {

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& x) {
    std::vector<double> u = x;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, theta = 0;
    int rho = -1;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) {
            rho = static_cast<int>(i);
            theta = t;
        }
    }
    (void)rho;
    for (auto& xi : x) xi = std::max(0.0, xi - theta);
}

}  // namespace

CapacityReport martin_capacity(const WeightedGraph& g, VertexId v, const VertexSet& sink,
                               const VertexSet& S, double gap_tol) {
    if (S.empty()) throw std::invalid_argument("martin_capacity: empty target");
    if (S.contains(v) || sink.contains(v))
        throw std::invalid_argument("martin_capacity: source must lie outside S and sink");
    std::vector<VertexId> dom;
    for (std::uint64_t u = 0; u < g.size(); ++u)
        if (!sink.contains(static_cast<VertexId>(u))) dom.push_back(static_cast<VertexId>(u));
    auto G = greens_function(g, VertexSet(dom), dom.size() <= kRationalSolveLimit);

    std::size_t m = S.size();
    CapacityReport rep;
    rep.source = v;
    rep.target = S.ids();

    Eigen::MatrixXd A(static_cast<long>(m), static_cast<long>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double denom_i = G.value(v, rep.target[i]);
            double denom_j = G.value(v, rep.target[j]);
            if (denom_i <= 0 || denom_j <= 0)
                throw std::domain_error("martin_capacity: infinite kernel entry");
            double kij = G.value(rep.target[i], rep.target[j]) / denom_j;
            double kji = G.value(rep.target[j], rep.target[i]) / denom_i;
            A(static_cast<long>(i), static_cast<long>(j)) = 0.5 * (kij + kji);
        }

    std::vector<double> mu(m, 1.0 / static_cast<double>(m));
    double L = 0;
    for (long i = 0; i < static_cast<long>(m); ++i) L = std::max(L, A.row(i).cwiseAbs().sum());
    double eta = 1.0 / (2 * L);
    Eigen::Map<Eigen::VectorXd> muv(mu.data(), static_cast<long>(m));
    double energy = 0;
    for (int iter = 0; iter < 500000; ++iter) {
        Eigen::VectorXd Am = A * muv;
        energy = muv.dot(Am);
        double fw_gap = 2 * (energy - Am.minCoeff());
        rep.duality_gap = fw_gap;
        if (fw_gap <= gap_tol) break;
        Eigen::VectorXd next = muv - 2 * eta * Am;
        std::vector<double> nx(next.data(), next.data() + m);
        project_simplex(nx);
        for (std::size_t i = 0; i < m; ++i) mu[i] = nx[i];
    }
    rep.mu = mu;
    rep.capacity = 1.0 / energy;

    // exact hitting probability of S before the sink
    std::vector<VertexId> absorb = S.ids();
    for (VertexId s : sink) absorb.push_back(s);
    auto hv = hitting_distribution(g, v, VertexSet(absorb),
                                   g.size() <= kRationalSolveLimit);
    double hit = 0;
    for (VertexId s : S) hit += hv.prob(s);
    rep.hit_probability = hit;
    // the QP solves the capacity to within ~gap_tol, so the sandwich slack
    // must scale with the requested tolerance
    double slack = gap_tol + 1e-9;
    rep.sandwich_ok = hit <= rep.capacity + slack && 2 * hit >= rep.capacity - slack;
    return rep;
}

}  // namespace lerw
