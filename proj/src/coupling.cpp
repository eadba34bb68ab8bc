#include "lerw/coupling.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace lerw {

double CouplingConfig::radius(int i) const { return std::pow(static_cast<double>(i), 4.0 / alpha); }

int CouplingConfig::simplex_count(int i) const {
    return static_cast<int>(std::floor(std::pow(radius(i), alpha / 2.0))) + 4;
}

CouplingSampler::CouplingSampler(const WeightedGraph& g, CouplingConfig cfg)
    : g_(g), cfg_(std::move(cfg)) {
    if (!(cfg_.alpha > 0 && cfg_.alpha <= g.dim() - 1))
        throw std::invalid_argument("coupling: alpha must lie in (0, d-1]");
    if (cfg_.K <= 0) throw std::invalid_argument("coupling: K must be positive");
    if (cfg_.levels < 1) throw std::invalid_argument("coupling: levels must be >= 1");
}

const CouplingSampler::InnerLaw& CouplingSampler::exit_law(VertexId center, int level) {
    // On a grid every interior ball of a given radius has the same exit law,
    // so one entry per level serves all trials and all centers.
    std::pair<VertexId, int> key{g_.is_grid() ? kNoVertex : center, level};
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }

    double r = cfg_.radius(level);
    int D = cfg_.simplex_count(level);
    auto law = std::make_unique<InnerLaw>();
    std::size_t ball = cfg_.inner == InnerMode::exact
                           ? g_.euclidean_ball(g_.pos(center), r).size()
                           : kExactInnerLimit + 1;
    if (ball == 1) {
        // the ball is the center alone: the exit law is the one-step law
        auto cells = sphere_partition(g_.dim(), D);
        law->p.assign(cells.size(), 0);
        Vec c = g_.pos(center);
        double tw = g_.total_weight(center);
        for (int k = 0; k < g_.degree(center); ++k) {
            auto nb = g_.neighbor(center, k);
            law->p[static_cast<std::size_t>(cell_of(cells, g_.dim(), g_.pos(nb.to) - c))] +=
                nb.w / tw;
        }
        law->exact = true;
    } else if (ball <= kExactInnerLimit && ball >= static_cast<std::size_t>(D)) {
        auto rep = isotropy_check(g_, center, r, D, true);
        law->p = rep.cell_prob;
        law->exact = true;
    } else {
        std::uint64_t seed =
            detail::splitmix(cfg_.inner_seed ^ (static_cast<std::uint64_t>(level) << 32 | center));
        auto rep = isotropy_check(g_, center, r, D, false, cfg_.inner_trials, seed);
        law->p = rep.cell_prob;
        law->se = 0.5 / std::sqrt(static_cast<double>(cfg_.inner_trials));
    }

    std::unique_lock lock(mutex_);
    auto res = cache_.emplace(key, std::move(law));
    return *res.first->second;
}

CouplingSkeleton CouplingSampler::sample(VertexId start, RngStream& rng) {
    CouplingSkeleton sk;
    int d = g_.dim();
    VertexId walk_pos = start;
    Vec bm_pos = g_.pos(start);

    for (int i = 1; i <= cfg_.levels; ++i) {
        CouplingLevel lvl;
        lvl.r = cfg_.radius(i);
        lvl.D = cfg_.simplex_count(i);
        Vec center = g_.pos(walk_pos);

        StopSpec stop;
        stop.radii.push_back({center, lvl.r});
        stop.step_cap = default_step_cap(lvl.r);
        auto out = run_until(g_, walk_pos, stop, rng);
        if (out.reason == StopReason::frontier_error)
            throw std::runtime_error("couple_skeleton: walk reached the graph frontier");
        if (out.reason != StopReason::exited_radius)
            throw std::runtime_error("couple_skeleton: step cap exhausted");
        lvl.walk_exit = out.path.v.back();

        const InnerLaw& law = exit_law(walk_pos, i);
        lvl.p_cell = law.p;
        lvl.inner_exact = law.exact;
        lvl.inner_se = law.se;

        auto cells = sphere_partition(d, lvl.D);
        lvl.eta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cells.size(); ++k)
            lvl.eta = std::min(lvl.eta, law.p[k] / cells[k].area);

        Vec dR = g_.pos(lvl.walk_exit) - center;
        lvl.cell = cell_of(cells, d, dR);
        double p = law.p[static_cast<std::size_t>(lvl.cell)];
        if (p <= 0)
            throw std::runtime_error(
                "couple_skeleton: zero exit probability for the realized cell");
        lvl.accept_prob = lvl.eta * cells[static_cast<std::size_t>(lvl.cell)].area / p;
        if (!(lvl.accept_prob >= 0 && lvl.accept_prob <= 1 + 1e-12))
            throw std::logic_error("couple_skeleton: acceptance probability outside [0,1]");
        lvl.accept_prob = std::min(lvl.accept_prob, 1.0);
        lvl.accepted = rng.bernoulli(lvl.accept_prob);

        Vec dir = lvl.accepted ? sample_in_cell(cells[static_cast<std::size_t>(lvl.cell)], d, rng)
                               : sample_sphere(d, rng);
        lvl.bm_exit = bm_pos + lvl.r * dir;

        if (lvl.accepted) {
            // one-level closeness: both exits point into the same cell
            double bound = lvl.r * cells[static_cast<std::size_t>(lvl.cell)].diam +
                           (dR.norm() - lvl.r) + 1e-9;
            if (dist(dR, lvl.r * dir) > bound)
                throw std::logic_error("couple_skeleton: accepted level exceeds closeness bound");
        }

        walk_pos = lvl.walk_exit;
        bm_pos = lvl.bm_exit;
        sk.levels.push_back(std::move(lvl));
    }
    return sk;
}

CouplingSkeleton couple_skeleton(const WeightedGraph& g, VertexId start, const CouplingConfig& cfg,
                                 RngStream& rng) {
    CouplingSampler sampler(g, cfg);
    return sampler.sample(start, rng);
}

CouplingTail coupling_tail(const WeightedGraph& g, VertexId start, const CouplingConfig& cfg,
                           const std::vector<double>& lambdas, std::uint64_t trials,
                           std::uint64_t seed, double scale) {
    if (trials == 0) throw std::invalid_argument("coupling_tail: trials must be positive");
    CouplingTail tab;
    tab.lambda = lambdas;
    tab.scale = scale > 0 ? scale : std::sqrt(cfg.radius(cfg.levels));
    tab.trials = trials;
    tab.seed = seed;

    CouplingSampler sampler(g, cfg);
    std::vector<std::uint64_t> exceed(lambdas.size(), 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        auto sk = sampler.sample(start, rng);
        double worst = 0;
        for (const auto& lvl : sk.levels)
            worst = std::max(worst, dist(g.pos(lvl.walk_exit), lvl.bm_exit));
        for (std::size_t k = 0; k < lambdas.size(); ++k)
            if (worst >= lambdas[k] * tab.scale) ++exceed[k];
    }

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        double p = static_cast<double>(exceed[k]) / static_cast<double>(trials);
        tab.freq.push_back(p);
        tab.se.push_back(std::sqrt(p * (1 - p) / static_cast<double>(trials)));
        if (p > 0) {
            lx.push_back(lambdas[k]);
            ly.push_back(std::log(p));
        }
    }
    tab.log_corr = lx.size() >= 3 ? fit_line(lx, ly).corr
                                  : std::numeric_limits<double>::quiet_NaN();
    return tab;
}

}  // namespace lerw
