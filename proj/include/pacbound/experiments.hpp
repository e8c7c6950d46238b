#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pacbound/bounds.hpp"
#include "pacbound/core.hpp"
#include "pacbound/gaussian.hpp"
#include "pacbound/optimize.hpp"
#include "pacbound/rng.hpp"

namespace pacbound {

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

struct LinRegConfig {
    std::size_t d = 10;
    double c = 10.0;        // half-side of the hypercube containing h*
    double e = 10.0;        // half-side of the hypercube containing x
    double gen_std = 5.0;   // std of the truncated generator
    double delta = 0.05;
    double t0 = 0.5;
    unsigned step = 8;
    std::uint64_t seed = 42;
    std::size_t n_mc = 10000;   // posterior draws for the empirical term
    std::size_t n_post = 200;   // posterior draws for the true-risk estimate
    std::size_t n_data = 5000;  // fresh data points per posterior draw

    // Envelope parameters are derived, never free.
    double B() const { return e * std::sqrt(static_cast<double>(d)); }
    double C() const { return std::sqrt(c * static_cast<double>(d) * e); }
};

struct LogRegConfig {
    std::size_t d = 10;
    double lambda = 0.01;
    double delta = 0.05;
    double sigma0_sq = 0.5;
    unsigned step = 8;
    std::uint64_t seed = 42;
    std::size_t n_mc = 10000;
    std::size_t n_post = 200;
    std::size_t n_data = 5000;
    bool normalize = true;
};

struct CurvePoint {
    std::size_t m = 0;
    double bound_total = 0.0;
    std::map<std::string, double> bound_terms;
    double chosen_alpha = 0.5;
    double chosen_sigma2 = 0.0;
    McEstimate emp_risk_mc;
    McEstimate true_risk_mc;
};

// ---------------------------------------------------------------------------
// Synthetic data and fitters
// ---------------------------------------------------------------------------

// h* and the x_i come from truncated Gaussians; y = sqrt(<h*,x>) clamped at 0
// (the inner product is negative about half the time and the square root is
// undefined there; the clamp keeps |y| <= sqrt(cde)).
inline std::pair<Dataset, Predictor> gen_linreg_data(const LinRegConfig& cfg, std::size_t m,
                                                     RngStream& rng) {
    Predictor h_star{sample_truncated(cfg.gen_std, cfg.c, cfg.d, rng)};
    Dataset data;
    data.points.resize(m);
    const double B = cfg.B();
    const double C = cfg.C();
    for (auto& z : data.points) {
        z.x = sample_truncated(cfg.gen_std, cfg.e, cfg.d, rng);
        z.y = std::sqrt(std::max(dot(h_star.coords, z.x), 0.0));
        if (norm(z.x) > B * (1.0 + 1e-12) || z.y > C * (1.0 + 1e-12))
            throw std::logic_error("gen_linreg_data: envelope derivation violated");
    }
    return {std::move(data), std::move(h_star)};
}

namespace detail {

// Solves A x = b for symmetric positive definite A via Cholesky.
inline Vec cholesky_solve(std::vector<Vec> A, Vec b) {
    const std::size_t n = b.size();
    // factor A = L L^T in place (lower triangle)
    for (std::size_t j = 0; j < n; ++j) {
        double diag = A[j][j];
        for (std::size_t k = 0; k < j; ++k) diag -= A[j][k] * A[j][k];
        if (!(diag > 0.0)) throw std::runtime_error("cholesky_solve: matrix not SPD");
        A[j][j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = A[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= A[i][k] * A[j][k];
            A[i][j] = s / A[j][j];
        }
    }
    // forward substitution L y = b
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= A[i][k] * b[k];
        b[i] /= A[i][i];
    }
    // back substitution L^T x = y
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= A[k][i] * b[k];
        b[i] /= A[i][i];
    }
    return b;
}

}  // namespace detail

// Ordinary least squares via normal equations with a 1e-8 ridge jitter.
inline Predictor fit_linreg(const Dataset& data) {
    if (data.m() < 1) throw std::invalid_argument("fit_linreg: empty dataset");
    const std::size_t d = data.points.front().x.size();
    std::vector<Vec> A(d, Vec(d, 0.0));
    Vec b(d, 0.0);
    for (const auto& z : data.points) {
        if (z.x.size() != d) throw std::invalid_argument("fit_linreg: inconsistent dimensions");
        for (std::size_t i = 0; i < d; ++i) {
            b[i] += z.x[i] * z.y;
            for (std::size_t j = 0; j <= i; ++j) A[i][j] += z.x[i] * z.x[j];
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        A[i][i] += 1e-8;
        for (std::size_t j = i + 1; j < d; ++j) A[i][j] = A[j][i];
    }
    return Predictor{detail::cholesky_solve(std::move(A), std::move(b))};
}

// First digits of pi, used as the ground-truth classifier direction.
inline constexpr std::array<double, 10> kPiDigits = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3};

inline std::pair<Dataset, Predictor> gen_logistic_data(const LogRegConfig& cfg, std::size_t m,
                                                       RngStream& rng) {
    if (cfg.d > kPiDigits.size())
        throw std::invalid_argument("gen_logistic_data: d > 10 needs a longer digit table");
    Predictor h_star;
    h_star.coords.assign(kPiDigits.begin(), kPiDigits.begin() + static_cast<long>(cfg.d));
    Dataset data;
    data.points.resize(m);
    for (auto& z : data.points) {
        z.x.resize(cfg.d);
        for (auto& v : z.x) v = rng.normal();
        z.y = dot(h_star.coords, z.x) > 0.0 ? 1.0 : 0.0;
    }
    return {std::move(data), std::move(h_star)};
}

struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Regularised logistic regression by gradient descent with backtracking
// (halving from step 1.0), stopping at gradient norm <= 1e-6.
inline Predictor fit_logistic(const Dataset& data, double lambda, std::size_t max_iters = 10000,
                              double tol = 1e-6) {
    if (!(lambda > 0.0)) throw std::invalid_argument("fit_logistic: lambda <= 0");
    if (data.m() == 0) throw std::invalid_argument("fit_logistic: empty dataset");
    const std::size_t d = data.points.front().x.size();
    const double m = static_cast<double>(data.m());

    auto objective = [&](const Vec& h) {
        double val = 0.5 * lambda * dot(h, h);
        for (const auto& z : data.points) {
            const double w = dot(h, z.x);
            // log(phi) and log(1-phi) in a numerically stable form
            const double log_phi = -std::log1p(std::exp(-w));
            const double log_one_minus = -w - std::log1p(std::exp(-w));
            val -= (z.y * log_phi + (1.0 - z.y) * log_one_minus) / m;
        }
        return val;
    };
    auto gradient = [&](const Vec& h) {
        Vec g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = lambda * h[i];
        for (const auto& z : data.points) {
            const double phi = 1.0 / (1.0 + std::exp(-dot(h, z.x)));
            const double coef = (phi - z.y) / m;
            for (std::size_t i = 0; i < d; ++i) g[i] += coef * z.x[i];
        }
        return g;
    };

    Vec h(d, 0.0);
    double fval = objective(h);
    double step = 1.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        const Vec g = gradient(h);
        const double gnorm2 = dot(g, g);
        if (std::sqrt(gnorm2) <= tol) return Predictor{std::move(h)};

        // Armijo backtracking, with mild step growth after a clean accept.
        double eta = step;
        Vec trial(d);
        while (true) {
            for (std::size_t i = 0; i < d; ++i) trial[i] = h[i] - eta * g[i];
            const double ftrial = objective(trial);
            if (ftrial <= fval - 1e-4 * eta * gnorm2) {
                h = trial;
                fval = ftrial;
                step = std::min(eta * 2.0, 1.0);
                break;
            }
            eta *= 0.5;
            if (eta < 1e-18)
                throw convergence_error("fit_logistic: line search failed, |grad| = " +
                                        std::to_string(std::sqrt(gnorm2)));
        }
    }
    const Vec g = gradient(h);
    throw convergence_error("fit_logistic: no convergence, final |grad| = " +
                            std::to_string(std::sqrt(dot(g, g))));
}

// h / ||h||. For the 0-1 threshold loss this preserves every prediction while
// shrinking the KL mean-shift term.
inline Predictor normalize_trick(const Predictor& h) {
    const double n = h.norm();
    if (!(n > 0.0)) throw std::invalid_argument("normalize_trick: zero vector");
    Predictor out = h;
    for (auto& v : out.coords) v /= n;
    return out;
}

// ---------------------------------------------------------------------------
// Posterior-expected empirical risk with common random numbers
// ---------------------------------------------------------------------------

namespace detail {

// Estimates E_{h ~ N(hhat, s2 I)}[R_m(h)] for a whole list of variances at
// once, sharing the standard-normal draws across variances. One pass over the
// draws: per draw the projections <u, x_i> are formed once and reused.
inline std::vector<McEstimate> posterior_empirical_risks(const LossSpec& spec,
                                                         const Predictor& hhat,
                                                         const Dataset& data,
                                                         const std::vector<double>& sigma2s,
                                                         std::size_t n_mc, std::uint64_t seed) {
    if (n_mc < 2) throw std::invalid_argument("posterior_empirical_risks: n_mc < 2");
    const std::size_t m = data.m();
    const std::size_t d = hhat.dim();
    const std::size_t ns = sigma2s.size();

    // a_i: the part of the loss argument that does not depend on the draw
    Vec a(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double p = dot(hhat.coords, data.points[i].x);
        a[i] = spec.kind == LossKind::AbsoluteLinear ? p - data.points[i].y : p;
    }
    std::vector<double> sds(ns);
    for (std::size_t s = 0; s < ns; ++s) sds[s] = std::sqrt(sigma2s[s]);

    RngStream rng(seed);
    Vec u(d), g(m);
    std::vector<double> sum(ns, 0.0), sumsq(ns, 0.0);
    for (std::size_t k = 0; k < n_mc; ++k) {
        for (auto& v : u) v = rng.normal();
        for (std::size_t i = 0; i < m; ++i) g[i] = dot(u, data.points[i].x);
        for (std::size_t s = 0; s < ns; ++s) {
            double risk = 0.0;
            if (spec.kind == LossKind::AbsoluteLinear) {
                for (std::size_t i = 0; i < m; ++i) risk += std::abs(a[i] + sds[s] * g[i]);
            } else {
                for (std::size_t i = 0; i < m; ++i) {
                    const double pred = a[i] + sds[s] * g[i] > 0.0 ? 1.0 : 0.0;
                    risk += std::abs(pred - data.points[i].y);
                }
            }
            risk /= static_cast<double>(m);
            sum[s] += risk;
            sumsq[s] += risk * risk;
        }
    }
    std::vector<McEstimate> out(ns);
    const double nn = static_cast<double>(n_mc);
    for (std::size_t s = 0; s < ns; ++s) {
        const double mean = sum[s] / nn;
        const double var = std::max(0.0, (sumsq[s] - nn * mean * mean) / (nn - 1.0));
        out[s] = {mean, std::sqrt(var / nn), n_mc, seed};
    }
    return out;
}

}  // namespace detail

// MC estimate of E_{h~Q}[R(h)]: n_post posterior draws, each scored on n_data
// fresh points from the generator. The reported std error is the spread of
// the per-draw risks, which covers both MC layers.
inline McEstimate posterior_true_risk(const LossSpec& spec, const IsotropicGaussian& posterior,
                                      const DataPointSampler& sampler, std::size_t n_post,
                                      std::size_t n_data, RngStream& rng) {
    if (n_post < 2) throw std::invalid_argument("posterior_true_risk: n_post < 2");
    const double sd = std::sqrt(posterior.variance);
    Predictor h;
    h.coords.resize(posterior.dim());
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t j = 0; j < n_post; ++j) {
        for (std::size_t i = 0; i < posterior.dim(); ++i)
            h.coords[i] = posterior.mean[i] + sd * rng.normal();
        double r = 0.0;
        for (std::size_t k = 0; k < n_data; ++k) r += loss(spec, h, sampler(rng));
        r /= static_cast<double>(n_data);
        sum += r;
        sumsq += r * r;
    }
    const double nn = static_cast<double>(n_post);
    const double mean = sum / nn;
    const double var = std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn), n_post, rng.seed()};
}

// ---------------------------------------------------------------------------
// Linear-regression experiment
// ---------------------------------------------------------------------------

struct LinRegBoundChoice {
    BoundReport report;
    double alpha = 0.5;
    double sigma2 = 0.0;
    McEstimate emp;
    IsotropicGaussian posterior;
};

// Joint grid over alpha in {i/step} and sigma^2 in {sigma0^2(alpha)/2^j};
// prior N(0, sigma0^2(alpha) I) with sigma0^2(alpha) = t0 m^(1-2a)/B^2.
// Deterministic tie-break: smallest total, then alpha, then sigma^2.
inline LinRegBoundChoice optimize_linreg_bound(const LinRegConfig& cfg, const Dataset& data,
                                               const Predictor& hhat, std::uint64_t emp_seed) {
    const std::size_t m = data.m();
    const double B = cfg.B();
    const double C = cfg.C();
    const auto alphas = GridSpec::alpha_candidates(cfg.step);
    const std::size_t J = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(m))));

    struct Pair {
        double alpha, sigma2, sigma0_sq;
    };
    std::vector<Pair> pairs;
    std::vector<double> sigma2s;
    for (double a : alphas) {
        const double s0 = cfg.t0 * std::pow(static_cast<double>(m), 1.0 - 2.0 * a) / (B * B);
        double s2 = s0;
        for (std::size_t j = 1; j <= J; ++j) {
            s2 /= 2.0;
            pairs.push_back({a, s2, s0});
            sigma2s.push_back(s2);
        }
    }

    LossSpec spec{LossKind::AbsoluteLinear, B, C};
    const auto emps =
        detail::posterior_empirical_risks(spec, hhat, data, sigma2s, cfg.n_mc, emp_seed);

    bool have_best = false;
    LinRegBoundChoice best;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& pr = pairs[p];
        IsotropicGaussian prior = IsotropicGaussian::centered(cfg.d, pr.sigma0_sq);
        IsotropicGaussian posterior(hhat.coords, pr.sigma2);
        BoundInputs in{m, pr.alpha, cfg.delta, kl_isotropic(posterior, prior)};
        GaussianPriorConfig gp{cfg.t0, pr.alpha, B};
        BoundReport r = gaussian_regression_bound(in, gp, C, cfg.d, emps[p]);
        const bool wins = !have_best || r.total < best.report.total ||
                          (r.total == best.report.total &&
                           (pr.alpha < best.alpha ||
                            (pr.alpha == best.alpha && pr.sigma2 < best.sigma2)));
        if (wins) {
            best = {std::move(r), pr.alpha, pr.sigma2, emps[p], std::move(posterior)};
            have_best = true;
        }
    }
    return best;
}

inline DataPointSampler linreg_sampler(const LinRegConfig& cfg, Predictor h_star) {
    return [cfg, h_star = std::move(h_star)](RngStream& rng) {
        DataPoint z;
        z.x = sample_truncated(cfg.gen_std, cfg.e, cfg.d, rng);
        z.y = std::sqrt(std::max(dot(h_star.coords, z.x), 0.0));
        return z;
    };
}

inline std::vector<CurvePoint> run_linreg_experiment(const LinRegConfig& cfg,
                                                     const std::vector<std::size_t>& m_values) {
    if (cfg.d < 6) throw std::invalid_argument("run_linreg_experiment: d < 6");
    std::vector<CurvePoint> curve;
    curve.reserve(m_values.size());
    for (std::size_t m : m_values) {
        RngStream rng(derive_seed(cfg.seed, m, 0));
        auto [data, h_star] = gen_linreg_data(cfg, m, rng);
        const Predictor hhat = fit_linreg(data);
        const auto choice = optimize_linreg_bound(cfg, data, hhat, derive_seed(cfg.seed, m, 1));

        LossSpec spec{LossKind::AbsoluteLinear, cfg.B(), cfg.C()};
        RngStream risk_rng(derive_seed(cfg.seed, m, 2));
        const McEstimate true_risk =
            posterior_true_risk(spec, choice.posterior, linreg_sampler(cfg, h_star), cfg.n_post,
                                cfg.n_data, risk_rng);

        CurvePoint pt;
        pt.m = m;
        pt.bound_total = choice.report.total;
        pt.bound_terms = choice.report.terms;
        pt.chosen_alpha = choice.alpha;
        pt.chosen_sigma2 = choice.sigma2;
        pt.emp_risk_mc = choice.emp;
        pt.true_risk_mc = true_risk;
        curve.push_back(std::move(pt));
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Logistic (bounded-case) experiments
// ---------------------------------------------------------------------------

enum class LogisticMode { AlphaComparison, InformedPrior };

struct LogisticCurves {
    std::vector<CurvePoint> baseline;   // alpha = 1/2 (AlphaComparison) or naive prior (InformedPrior)
    std::vector<CurvePoint> optimized;  // optimized alpha / informed-prior split bound
};

inline DataPointSampler logistic_sampler(const LogRegConfig& cfg, Predictor h_star) {
    return [cfg, h_star = std::move(h_star)](RngStream& rng) {
        DataPoint z;
        z.x.resize(cfg.d);
        for (auto& v : z.x) v = rng.normal();
        z.y = dot(h_star.coords, z.x) > 0.0 ? 1.0 : 0.0;
        return z;
    };
}

inline LogisticCurves run_logistic_experiment(const LogRegConfig& cfg,
                                              const std::vector<std::size_t>& m_values,
                                              LogisticMode mode) {
    LogisticCurves out;
    const LossSpec spec{LossKind::ZeroOneLogisticThreshold, 0.0, 1.0};
    const double C = 1.0;

    for (std::size_t m : m_values) {
        RngStream rng(derive_seed(cfg.seed, m, 0));
        auto [data, h_star] = gen_logistic_data(cfg, m, rng);
        Predictor hhat = fit_logistic(data, cfg.lambda);
        if (cfg.normalize) hhat = normalize_trick(hhat);

        const auto sigma2s = GridSpec::sigma2_candidates(cfg.sigma0_sq, m);
        const auto emps = detail::posterior_empirical_risks(spec, hhat, data, sigma2s, cfg.n_mc,
                                                            derive_seed(cfg.seed, m, 1));
        auto emp_of = [&](double sigma2) -> const McEstimate& {
            for (std::size_t s = 0; s < sigma2s.size(); ++s)
                if (sigma2s[s] == sigma2) return emps[s];
            throw std::logic_error("run_logistic_experiment: sigma2 not on grid");
        };

        const IsotropicGaussian naive_prior = IsotropicGaussian::centered(cfg.d, cfg.sigma0_sq);
        auto naive_kl = [&](double sigma2) {
            return kl_isotropic(IsotropicGaussian(hhat.coords, sigma2), naive_prior);
        };
        auto prop1 = [&](double alpha, double sigma2) {
            BoundInputs in{m, alpha, cfg.delta, naive_kl(sigma2)};
            BoundReport r = bounded_case_bound(in, C, emp_of(sigma2).value);
            r.hyperparams["sigma2"] = sigma2;
            r.std_errors["empirical-term"] = emp_of(sigma2).std_error;
            return r;
        };

        auto fill_point = [&](const BoundReport& r, double alpha, double sigma2) {
            CurvePoint pt;
            pt.m = m;
            pt.bound_total = r.total;
            pt.bound_terms = r.terms;
            pt.chosen_alpha = alpha;
            pt.chosen_sigma2 = sigma2;
            pt.emp_risk_mc = emp_of(sigma2);
            RngStream risk_rng(derive_seed(cfg.seed, m, 3));
            pt.true_risk_mc = posterior_true_risk(spec, IsotropicGaussian(hhat.coords, sigma2),
                                                  logistic_sampler(cfg, h_star), cfg.n_post,
                                                  cfg.n_data, risk_rng);
            return pt;
        };

        if (mode == LogisticMode::AlphaComparison) {
            GridSpec half_grid;
            half_grid.alpha_grid = {0.5};
            half_grid.sigma2_grid = sigma2s;
            const OptimResult at_half = minimize_bound(
                [&](const GridPoint& p) { return prop1(p.alpha, p.sigma2); }, half_grid);
            out.baseline.push_back(
                fill_point(at_half.best_report, 0.5, at_half.best_params.at("sigma2")));

            const OptimResult staged =
                two_stage_optimize(prop1, naive_kl, sigma2s, C, cfg.delta, m);
            out.optimized.push_back(fill_point(staged.best_report, staged.best_params.at("alpha"),
                                               staged.best_params.at("sigma2")));
        } else {
            if (m % 2 != 0) throw std::invalid_argument("run_logistic_experiment: odd m");
            // Naive-prior curve: bounded-case bound with two-stage optimized alpha.
            const OptimResult naive =
                two_stage_optimize(prop1, naive_kl, sigma2s, C, cfg.delta, m);
            out.baseline.push_back(fill_point(naive.best_report, naive.best_params.at("alpha"),
                                              naive.best_params.at("sigma2")));

            // Informed priors: P1 fit on S_{>m/2}, P2 fit on S_{<=m/2}.
            auto [lo, hi] = data.split(m / 2);
            Predictor h2 = fit_logistic(lo, cfg.lambda);
            Predictor h1 = fit_logistic(hi, cfg.lambda);
            if (cfg.normalize) {
                h1 = normalize_trick(h1);
                h2 = normalize_trick(h2);
            }
            const IsotropicGaussian p1(h1.coords, cfg.sigma0_sq);
            const IsotropicGaussian p2(h2.coords, cfg.sigma0_sq);
            auto kl1 = [&](double s2) {
                return kl_isotropic(IsotropicGaussian(hhat.coords, s2), p1);
            };
            auto kl2 = [&](double s2) {
                return kl_isotropic(IsotropicGaussian(hhat.coords, s2), p2);
            };
            auto prop3 = [&](double a1, double a2, double sigma2) {
                BoundInputs in1{m, a1, cfg.delta, kl1(sigma2)};
                BoundInputs in2{m, a2, cfg.delta, kl2(sigma2)};
                BoundReport r = split_prior_bound(in1, in2, C, emp_of(sigma2).value);
                r.hyperparams["sigma2"] = sigma2;
                r.std_errors["empirical-term"] = emp_of(sigma2).std_error;
                return r;
            };

            // Stage 1: alpha1 = alpha2 = 1/2, pick sigma^2.
            GridSpec stage1;
            stage1.alpha_grid = {0.5};
            stage1.sigma2_grid = sigma2s;
            const OptimResult s1 = minimize_bound(
                [&](const GridPoint& p) { return prop3(0.5, 0.5, p.sigma2); }, stage1);
            const double sigma2 = s1.best_params.at("sigma2");
            // Stage 2: per-half optimal alpha at the frozen KLs (half size m/2,
            // confidence delta/2).
            const double a1 =
                optimal_alpha(kl1(sigma2) + std::log(2.0 / cfg.delta), C, m / 2);
            const double a2 =
                optimal_alpha(kl2(sigma2) + std::log(2.0 / cfg.delta), C, m / 2);
            const BoundReport informed = prop3(a1, a2, sigma2);
            out.optimized.push_back(fill_point(informed, a1, sigma2));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coverage verification
// ---------------------------------------------------------------------------

struct CoverageTrial {
    double bound_total = 0.0;
    McEstimate posterior_risk;  // estimate of E_{h~Q}[R(h)] with std error
};

// Resamples the learning problem `trials` times and counts how often the
// estimated posterior risk exceeds the bound by more than 3 combined std
// errors. Per-trial streams are derived from the master stream's seed.
inline double verify_bound_coverage(const std::function<CoverageTrial(RngStream&)>& bound_builder,
                                    std::size_t trials, RngStream& rng) {
    if (trials < 50) throw std::invalid_argument("verify_bound_coverage: trials < 50");
    const std::uint64_t base = rng.next_u64();
    std::size_t violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream trial_rng(derive_seed(base, t, 0));
        const CoverageTrial ct = bound_builder(trial_rng);
        if (ct.posterior_risk.value > ct.bound_total + 3.0 * ct.posterior_risk.std_error)
            ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(trials);
}

// Canned coverage trial for the linear-regression bound: fresh data, OLS fit,
// grid-optimized bound, fresh-sample posterior risk. `bound_offset` shifts
// the reported bound (negative offsets build the corrupted negative control).
inline std::function<CoverageTrial(RngStream&)> linreg_coverage_builder(const LinRegConfig& cfg,
                                                                        std::size_t m,
                                                                        double bound_offset = 0.0) {
    return [cfg, m, bound_offset](RngStream& rng) {
        auto [data, h_star] = gen_linreg_data(cfg, m, rng);
        const Predictor hhat = fit_linreg(data);
        const auto choice = optimize_linreg_bound(cfg, data, hhat, rng.next_u64());
        LossSpec spec{LossKind::AbsoluteLinear, cfg.B(), cfg.C()};
        RngStream risk_rng(rng.next_u64());
        const McEstimate risk =
            posterior_true_risk(spec, choice.posterior, linreg_sampler(cfg, h_star), cfg.n_post,
                                cfg.n_data, risk_rng);
        return CoverageTrial{choice.report.total + bound_offset, risk};
    };
}

}  // namespace pacbound
