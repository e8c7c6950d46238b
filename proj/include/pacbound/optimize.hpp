#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacbound/bounds.hpp"

namespace pacbound {

// Hyperparameter grids, mirroring the experimental setup:
//   alpha in {i/step : 0 <= i <= step},
//   sigma^2 in {sigma0^2 / 2^j : 1 <= j <= J}, J = floor(log2 m).
struct GridSpec {
    std::vector<double> alpha_grid;
    std::vector<double> sigma2_grid;
    std::vector<double> t_grid;  // optional, empty when unused

    static std::vector<double> alpha_candidates(unsigned step) {
        if (step == 0) throw std::invalid_argument("GridSpec: step = 0");
        std::vector<double> a(step + 1);
        for (unsigned i = 0; i <= step; ++i) a[i] = static_cast<double>(i) / step;
        return a;
    }

    static std::vector<double> sigma2_candidates(double sigma0_sq, std::size_t m) {
        if (!(sigma0_sq > 0.0)) throw std::invalid_argument("GridSpec: sigma0^2 <= 0");
        const std::size_t J =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::log2(
                                          static_cast<double>(std::max<std::size_t>(m, 2))))));
        std::vector<double> s(J);
        double v = sigma0_sq;
        for (std::size_t j = 0; j < J; ++j) {
            v /= 2.0;
            s[j] = v;
        }
        return s;
    }

    static GridSpec experiment_default(unsigned step, double sigma0_sq, std::size_t m) {
        GridSpec g;
        g.alpha_grid = alpha_candidates(step);
        g.sigma2_grid = sigma2_candidates(sigma0_sq, m);
        return g;
    }
};

struct GridPoint {
    double alpha = 0.5;
    double sigma2 = 1.0;
    std::optional<double> t;
};

struct EvaluatedPoint {
    GridPoint params;
    BoundReport report;
};

struct OptimResult {
    BoundReport best_report;
    std::map<std::string, double> best_params;
    std::vector<EvaluatedPoint> full_table;  // every feasible grid point
    std::size_t excluded = 0;                // grid points that errored
};

struct no_feasible_point_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Deterministic tie-break: smaller total wins, then smaller alpha, then
// smaller sigma^2, then smaller t.
inline bool better(const EvaluatedPoint& a, const EvaluatedPoint& b) {
    if (a.report.total != b.report.total) return a.report.total < b.report.total;
    if (a.params.alpha != b.params.alpha) return a.params.alpha < b.params.alpha;
    if (a.params.sigma2 != b.params.sigma2) return a.params.sigma2 < b.params.sigma2;
    return a.params.t.value_or(0.0) < b.params.t.value_or(0.0);
}

}  // namespace detail

// Exhaustive minimization of bound_fn over the grid. Points whose evaluation
// throws are excluded; if every point errors, no_feasible_point_error.
inline OptimResult minimize_bound(const std::function<BoundReport(const GridPoint&)>& bound_fn,
                                  const GridSpec& grid) {
    if (grid.alpha_grid.empty() || grid.sigma2_grid.empty())
        throw std::invalid_argument("minimize_bound: empty grid");

    std::vector<double> alphas = grid.alpha_grid;
    std::vector<double> sigmas = grid.sigma2_grid;
    std::vector<double> ts = grid.t_grid;
    std::sort(alphas.begin(), alphas.end());
    std::sort(sigmas.begin(), sigmas.end());
    std::sort(ts.begin(), ts.end());

    OptimResult res;
    bool have_best = false;
    EvaluatedPoint best;

    auto consider = [&](const GridPoint& p) {
        BoundReport r;
        try {
            r = bound_fn(p);
        } catch (const std::exception&) {
            ++res.excluded;
            return;
        }
        EvaluatedPoint ev{p, std::move(r)};
        if (!have_best || detail::better(ev, best)) {
            best = ev;
            have_best = true;
        }
        res.full_table.push_back(std::move(ev));
    };

    for (double a : alphas)
        for (double s : sigmas) {
            if (ts.empty()) {
                consider({a, s, std::nullopt});
            } else {
                for (double t : ts) consider({a, s, t});
            }
        }

    if (!have_best) throw no_feasible_point_error("minimize_bound: all grid points errored");
    res.best_report = best.report;
    res.best_params = {{"alpha", best.params.alpha}, {"sigma2", best.params.sigma2}};
    if (best.params.t) res.best_params["t"] = *best.params.t;
    return res;
}

// Two-step optimization as done in the bounded-case experiments: stage 1
// fixes alpha = 1/2 and picks the posterior variance minimizing the bound;
// stage 2 freezes the resulting KL and closes alpha with optimal_alpha
// (K1 = KL + ln(1/delta)).
inline OptimResult two_stage_optimize(
    const std::function<BoundReport(double alpha, double sigma2)>& bound_fn,
    const std::function<double(double sigma2)>& kl_fn, const std::vector<double>& sigma2_grid,
    double C, double delta, std::size_t m) {
    if (sigma2_grid.empty()) throw std::invalid_argument("two_stage_optimize: empty grid");

    GridSpec stage1;
    stage1.alpha_grid = {0.5};
    stage1.sigma2_grid = sigma2_grid;
    OptimResult s1 = minimize_bound(
        [&](const GridPoint& p) { return bound_fn(p.alpha, p.sigma2); }, stage1);

    const double sigma2 = s1.best_params.at("sigma2");
    const double K1 = kl_fn(sigma2) + std::log(1.0 / delta);
    const double alpha = optimal_alpha(K1, C, m);

    OptimResult res;
    res.best_report = bound_fn(alpha, sigma2);
    res.best_params = {{"alpha", alpha}, {"sigma2", sigma2}};
    res.full_table = std::move(s1.full_table);
    res.full_table.push_back({GridPoint{alpha, sigma2, std::nullopt}, res.best_report});
    res.excluded = s1.excluded;
    return res;
}

}  // namespace pacbound
