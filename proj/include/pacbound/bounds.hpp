#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacbound/core.hpp"
#include "pacbound/gaussian.hpp"

namespace pacbound {

struct divergent_moment_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Largest exponent exp() can take without overflowing a double.
inline constexpr double kMaxExpArg = 709.0;

struct BoundInputs {
    std::size_t m = 1;
    double alpha = 0.5;
    double delta = 0.05;
    double kl = 0.0;  // KL(Q||P), nats

    void validate() const {
        if (m < 1) throw std::invalid_argument("BoundInputs: m < 1");
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("BoundInputs: delta outside (0,1)");
        if (kl < 0.0) throw std::invalid_argument("BoundInputs: negative KL");
    }
};

// Itemized bound value. `total` is always the exact floating sum of `terms`;
// `std_errors` holds the MC standard error of any estimated term.
struct BoundReport {
    double total = 0.0;
    std::map<std::string, double> terms;
    std::map<std::string, double> hyperparams;
    std::map<std::string, double> std_errors;

    static BoundReport from_terms(std::map<std::string, double> t,
                                  std::map<std::string, double> hp = {},
                                  std::map<std::string, double> se = {}) {
        BoundReport r;
        r.terms = std::move(t);
        r.hyperparams = std::move(hp);
        r.std_errors = std::move(se);
        r.total = 0.0;
        for (const auto& [k, v] : r.terms) r.total += v;
        return r;
    }
};

enum class SofteningKind {
    Clip,     // psi(x) = x on [0,1], 1 beyond
    SqrtTail  // psi(x) = x on [0,1], 2*sqrt(x)-1 beyond
};

struct SofteningFn {
    SofteningKind kind = SofteningKind::Clip;
};

inline double psi_apply(const SofteningFn& psi, double x) {
    if (x < 0.0) throw std::invalid_argument("psi_apply: x < 0");
    if (x <= 1.0) return x;
    switch (psi.kind) {
        case SofteningKind::Clip:
            return 1.0;
        case SofteningKind::SqrtTail:
            return 2.0 * std::sqrt(x) - 1.0;
    }
    throw std::logic_error("psi_apply: unknown kind");
}

// Prior scale configuration for the Gaussian linear-regression bound:
// sigma^2 = t * m^(1-2a) / B^2 with 0 < t < 1; f(t) = (1-t)/t.
struct GaussianPriorConfig {
    double t = 0.5;
    double alpha = 0.5;
    double B = 1.0;

    void validate() const {
        if (!(t > 0.0 && t < 1.0))
            throw std::invalid_argument("GaussianPriorConfig: t outside (0,1)");
        if (!(B > 0.0)) throw std::invalid_argument("GaussianPriorConfig: B <= 0");
    }

    double f_t() const { return (1.0 - t) / t; }

    double sigma2(std::size_t m) const {
        return t * std::pow(static_cast<double>(m), 1.0 - 2.0 * alpha) / (B * B);
    }
};

// Caller-supplied upper bound on sup_Q E_Q[K^3 1{K >= s}]; the sup over all
// posteriors is not computable from a single Q.
struct StrongMomentConfig {
    double m3s = 0.0;
    double s = 1.0;

    void validate() const {
        if (m3s < 0.0) throw std::invalid_argument("StrongMomentConfig: m3s < 0");
        if (!(s > 0.0)) throw std::invalid_argument("StrongMomentConfig: s <= 0");
    }
};

// ---------------------------------------------------------------------------
// Bounded case
// ---------------------------------------------------------------------------

// emp + (KL + ln(1/d))/m^a + C^2/(2 m^(1-a)), for losses bounded by C.
inline BoundReport bounded_case_bound(const BoundInputs& in, double C, double emp_risk) {
    in.validate();
    if (!(C > 0.0)) throw std::invalid_argument("bounded_case_bound: C <= 0");
    const double m = static_cast<double>(in.m);
    return BoundReport::from_terms(
        {{"empirical-term", emp_risk},
         {"kl-term", (in.kl + std::log(1.0 / in.delta)) / std::pow(m, in.alpha)},
         {"moment-term", C * C / (2.0 * std::pow(m, 1.0 - in.alpha))}},
        {{"alpha", in.alpha}});
}

// Minimizer of the bound's alpha-dependent terms K1/m^a + C^2/(2 m^(1-a)):
//   a0 = 1/2 + ln(2 K1 / C^2) / (2 ln m).
inline double optimal_alpha(double K1, double C, std::size_t m) {
    if (m < 2) throw std::invalid_argument("optimal_alpha: m < 2");
    if (!(K1 > 0.0)) throw std::invalid_argument("optimal_alpha: K1 <= 0");
    if (!(C > 0.0)) throw std::invalid_argument("optimal_alpha: C <= 0");
    return 0.5 + std::log(2.0 * K1 / (C * C)) / (2.0 * std::log(static_cast<double>(m)));
}

// Informed-split bound: each half of size m/2 at confidence delta/2, with its
// own prior (hence its own KL) and its own alpha.
inline BoundReport split_prior_bound(const BoundInputs& in1, const BoundInputs& in2, double C,
                                     double emp_risk_full) {
    in1.validate();
    in2.validate();
    if (!(C > 0.0)) throw std::invalid_argument("split_prior_bound: C <= 0");
    if (in1.m != in2.m) throw std::invalid_argument("split_prior_bound: mismatched m");
    if (in1.m % 2 != 0) throw std::invalid_argument("split_prior_bound: odd m");
    if (in1.delta != in2.delta) throw std::invalid_argument("split_prior_bound: mismatched delta");

    const double half = static_cast<double>(in1.m) / 2.0;
    const double log2d = std::log(2.0 / in1.delta);
    const double kl_term = 0.5 * (in1.kl + log2d) / std::pow(half, in1.alpha) +
                           0.5 * (in2.kl + log2d) / std::pow(half, in2.alpha);
    const double moment_term = 0.5 * C * C / (2.0 * std::pow(half, 1.0 - in1.alpha)) +
                               0.5 * C * C / (2.0 * std::pow(half, 1.0 - in2.alpha));
    return BoundReport::from_terms({{"empirical-term", emp_risk_full},
                                    {"kl-term", kl_term},
                                    {"moment-term", moment_term}},
                                   {{"alpha1", in1.alpha}, {"alpha2", in2.alpha}});
}

// ---------------------------------------------------------------------------
// Exponential moments
// ---------------------------------------------------------------------------

// E_S[e^(m^a Delta(h))] <= exp(K^2 / (2 m^(1-2a))) for a HYPE(K) loss.
inline double hype_exp_moment_bound(double K_h, std::size_t m, double alpha) {
    if (!(K_h > 0.0)) throw std::invalid_argument("hype_exp_moment_bound: K <= 0");
    const double exponent =
        K_h * K_h / (2.0 * std::pow(static_cast<double>(m), 1.0 - 2.0 * alpha));
    if (exponent > kMaxExpArg)
        throw std::overflow_error("hype_exp_moment_bound: exponent " + std::to_string(exponent) +
                                  " overflows");
    return std::exp(exponent);
}

// log of the mean of exp(exponents), computed stably. Throws if any single
// exponent would overflow exp() -- the divergence heuristic used by the
// MC-backed moment terms.
inline double log_mean_exp_checked(const std::vector<double>& exponents,
                                   const char* who) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double e : exponents) {
        if (e > kMaxExpArg)
            throw divergent_moment_error(std::string(who) + ": integrand exponent " +
                                         std::to_string(e) + " overflows, moment diverging");
        mx = std::max(mx, e);
    }
    double acc = 0.0;
    for (double e : exponents) acc += std::exp(e - mx);
    return mx + std::log(acc / static_cast<double>(exponents.size()));
}

// HYPE PAC-Bayes bound: emp + (KL + ln(1/d))/m^a + (1/m^a) ln E_P[exp(K^2/(2 m^(1-2a)))],
// the prior moment estimated by Monte Carlo.
inline BoundReport self_bounding_pac_bayes_bound(const BoundInputs& in,
                                                 const IsotropicGaussian& prior,
                                                 const LossSpec& spec, const McEstimate& emp_term,
                                                 std::size_t n_mc, RngStream& rng) {
    in.validate();
    const double m = static_cast<double>(in.m);
    const double m_pow = std::pow(m, 1.0 - 2.0 * in.alpha);

    // Analytic admissibility window for the affine envelope (Gaussian prior):
    // sigma_P^2 < m^(1-2a)/B^2, otherwise the prior moment is infinite.
    if (spec.kind == LossKind::AbsoluteLinear && spec.B > 0.0) {
        if (!(prior.variance < m_pow / (spec.B * spec.B)))
            throw divergent_moment_error(
                "self_bounding_pac_bayes_bound: prior variance outside admissibility window");
    }

    RngStream local(rng.next_u64());
    std::vector<double> exponents;
    exponents.reserve(n_mc);
    const double sd = std::sqrt(prior.variance);
    Predictor h;
    h.coords.resize(prior.dim());
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < n_mc; ++k) {
        for (std::size_t i = 0; i < prior.dim(); ++i)
            h.coords[i] = prior.mean[i] + sd * local.normal();
        const double K = envelope(spec, h);
        exponents.push_back(K * K / (2.0 * m_pow));
    }
    const double log_moment = log_mean_exp_checked(exponents, "self_bounding_pac_bayes_bound");
    // std error of the moment estimate, relative (delta method on the log)
    for (double e : exponents) {
        const double v = std::exp(e - log_moment);  // value / mean
        sum += v;
        sumsq += v * v;
    }
    const double nn = static_cast<double>(n_mc);
    const double rel_var = std::max(0.0, (sumsq - sum * sum / nn) / (nn - 1.0));
    const double rel_se = std::sqrt(rel_var / nn);

    const double m_alpha = std::pow(m, in.alpha);
    return BoundReport::from_terms(
        {{"empirical-term", emp_term.value},
         {"kl-term", (in.kl + std::log(1.0 / in.delta)) / m_alpha},
         {"moment-term", log_moment / m_alpha}},
        {{"alpha", in.alpha}, {"sigma2", prior.variance}},
        {{"empirical-term", emp_term.std_error}, {"moment-term", rel_se / m_alpha}});
}

// ---------------------------------------------------------------------------
// Softened bounds
// ---------------------------------------------------------------------------

// Empirical psi-risk (s/m) sum_i psi(l(h,z_i)/s).
inline double psi_empirical_risk(const LossSpec& spec, const SofteningFn& psi, double s,
                                 const Predictor& h, const Dataset& data) {
    if (!(s > 0.0)) throw std::invalid_argument("psi_empirical_risk: s <= 0");
    if (data.m() == 0) throw std::invalid_argument("psi_empirical_risk: empty dataset");
    double total = 0.0;
    for (const auto& z : data.points) total += psi_apply(psi, loss(spec, h, z) / s);
    return s * total / static_cast<double>(data.m());
}

// MC estimate of the truncation gap E_{h~Q}[K(h) 1{K(h) >= s}].
inline McEstimate truncation_gap_mc(const IsotropicGaussian& q, const LossSpec& spec, double s,
                                    std::size_t n, RngStream& rng) {
    return mc_expect(
        q,
        [&](const Predictor& h) {
            const double K = envelope(spec, h);
            return K >= s ? K : 0.0;
        },
        n, rng);
}

namespace detail {

// Shared tail of the two softened bounds: empirical psi-risk under Q, the KL
// term, and the softened prior moment term.
struct SoftenedPieces {
    McEstimate emp;
    double kl_term = 0.0;
    double moment_term = 0.0;
    double moment_se = 0.0;
};

inline SoftenedPieces softened_pieces(const BoundInputs& in, const IsotropicGaussian& prior,
                                      const IsotropicGaussian& posterior, const LossSpec& spec,
                                      const SofteningFn& psi, double s, const Dataset& data,
                                      std::size_t n_mc, RngStream& rng) {
    in.validate();
    if (!(s > 0.0)) throw std::invalid_argument("softened_bound: s <= 0");
    const double m = static_cast<double>(in.m);
    const double m_alpha = std::pow(m, in.alpha);
    const double m_pow = std::pow(m, 1.0 - 2.0 * in.alpha);

    SoftenedPieces p;
    {
        RngStream emp_rng(rng.next_u64());
        p.emp = mc_expect(
            posterior,
            [&](const Predictor& h) { return psi_empirical_risk(spec, psi, s, h, data); }, n_mc,
            emp_rng);
    }
    p.kl_term = (in.kl + std::log(1.0 / in.delta)) / m_alpha;
    {
        RngStream prior_rng(rng.next_u64());
        const double sd = std::sqrt(prior.variance);
        Predictor h;
        h.coords.resize(prior.dim());
        std::vector<double> exponents;
        exponents.reserve(n_mc);
        for (std::size_t k = 0; k < n_mc; ++k) {
            for (std::size_t i = 0; i < prior.dim(); ++i)
                h.coords[i] = prior.mean[i] + sd * prior_rng.normal();
            const double r = psi_apply(psi, envelope(spec, h) / s);
            exponents.push_back(s * s * r * r / (2.0 * m_pow));
        }
        const double log_moment = log_mean_exp_checked(exponents, "softened_bound");
        double sum = 0.0, sumsq = 0.0;
        for (double e : exponents) {
            const double v = std::exp(e - log_moment);
            sum += v;
            sumsq += v * v;
        }
        const double nn = static_cast<double>(n_mc);
        const double rel_var = std::max(0.0, (sumsq - sum * sum / nn) / (nn - 1.0));
        p.moment_term = log_moment / m_alpha;
        p.moment_se = std::sqrt(rel_var / nn) / m_alpha;
    }
    return p;
}

}  // namespace detail

// Softened bound with a truncation gap estimated under the posterior.
inline BoundReport softened_bound(const BoundInputs& in, const IsotropicGaussian& prior,
                                  const IsotropicGaussian& posterior, const LossSpec& spec,
                                  const SofteningFn& psi, double s, const Dataset& data,
                                  std::size_t n_mc, RngStream& rng) {
    const auto p = detail::softened_pieces(in, prior, posterior, spec, psi, s, data, n_mc, rng);
    RngStream gap_rng(rng.next_u64());
    const McEstimate gap = truncation_gap_mc(posterior, spec, s, n_mc, gap_rng);
    return BoundReport::from_terms(
        {{"empirical-term", p.emp.value},
         {"truncation-term", gap.value},
         {"kl-term", p.kl_term},
         {"moment-term", p.moment_term}},
        {{"alpha", in.alpha}, {"s", s}},
        {{"empirical-term", p.emp.std_error},
         {"truncation-term", gap.std_error},
         {"moment-term", p.moment_se}});
}

// Variant under the uniform third-moment assumption: the truncation gap is
// replaced by the deterministic M_{3,s}/s^2.
inline BoundReport strong_softened_bound(const BoundInputs& in, const StrongMomentConfig& cfg,
                                         const IsotropicGaussian& prior,
                                         const IsotropicGaussian& posterior, const LossSpec& spec,
                                         const SofteningFn& psi, const Dataset& data,
                                         std::size_t n_mc, RngStream& rng) {
    cfg.validate();
    const auto p =
        detail::softened_pieces(in, prior, posterior, spec, psi, cfg.s, data, n_mc, rng);
    return BoundReport::from_terms(
        {{"empirical-term", p.emp.value},
         {"truncation-term", cfg.m3s / (cfg.s * cfg.s)},
         {"kl-term", p.kl_term},
         {"moment-term", p.moment_term}},
        {{"alpha", in.alpha}, {"s", cfg.s}},
        {{"empirical-term", p.emp.std_error}, {"moment-term", p.moment_se}});
}

// Lower estimate of M_{3,s} from the actual posterior: E_Q[K^3 1{K >= s}].
inline McEstimate third_moment_tail_mc(const IsotropicGaussian& q, const LossSpec& spec, double s,
                                       std::size_t n, RngStream& rng) {
    return mc_expect(
        q,
        [&](const Predictor& h) {
            const double K = envelope(spec, h);
            return K >= s ? K * K * K : 0.0;
        },
        n, rng);
}

// ---------------------------------------------------------------------------
// Gaussian linear-regression bound
// ---------------------------------------------------------------------------

// ln of the closed-form bound on xi = E_P[exp(K(h)^2 / (2 m^(1-2a)))] for the
// affine envelope K(h) = B||h|| + C and prior variance t m^(1-2a)/B^2:
//   xi <= 2 exp(C^2 (1+f) / (2 m^(1-2a) f)) (1-t)^(-N/2) (1 + C/sqrt(2 f m^(1-2a)))^(N-1).
inline double xi_closed_form_log_bound(const GaussianPriorConfig& cfg, double C, std::size_t N,
                                       std::size_t m, double alpha) {
    cfg.validate();
    if (C < 0.0) throw std::invalid_argument("xi_closed_form_bound: C < 0");
    if (N < 6) throw std::invalid_argument("xi_closed_form_bound: dimension too small (N < 6)");
    const double f = cfg.f_t();
    const double m_pow = std::pow(static_cast<double>(m), 1.0 - 2.0 * alpha);
    const double nd = static_cast<double>(N);
    return std::log(2.0) + C * C * (1.0 + f) / (2.0 * m_pow * f) -
           0.5 * nd * std::log(1.0 - cfg.t) +
           (nd - 1.0) * std::log1p(C / std::sqrt(2.0 * f * m_pow));
}

inline double xi_closed_form_bound(const GaussianPriorConfig& cfg, double C, std::size_t N,
                                   std::size_t m, double alpha) {
    return std::exp(xi_closed_form_log_bound(cfg, C, N, m, alpha));
}

// Fully closed-form linear-regression bound (Gaussian prior N(0, t m^(1-2a)/B^2 I_N),
// affine envelope):
//   emp + (KL + ln(2/d))/m^a + (C^2 / (2 m^(1-a)))(1 + 1/f(t))
//       + (N/m^a)(ln(1 + C/sqrt(2 f(t) m^(1-2a))) + ln(1/sqrt(1-t))).
inline BoundReport gaussian_regression_bound(const BoundInputs& in,
                                             const GaussianPriorConfig& cfg, double C,
                                             std::size_t N, const McEstimate& emp_term) {
    in.validate();
    cfg.validate();
    if (C < 0.0) throw std::invalid_argument("gaussian_regression_bound: C < 0");
    if (N < 6)
        throw std::invalid_argument("gaussian_regression_bound: dimension too small (N < 6)");
    const double m = static_cast<double>(in.m);
    const double m_alpha = std::pow(m, in.alpha);
    const double m_pow = std::pow(m, 1.0 - 2.0 * in.alpha);
    const double f = cfg.f_t();
    const double nd = static_cast<double>(N);

    const double kl_term = (in.kl + std::log(2.0 / in.delta)) / m_alpha;
    const double c2_term = C * C / (2.0 * std::pow(m, 1.0 - in.alpha)) * (1.0 + 1.0 / f);
    const double envelope_term =
        nd / m_alpha *
        (std::log1p(C / std::sqrt(2.0 * f * m_pow)) + std::log(1.0 / std::sqrt(1.0 - cfg.t)));

    return BoundReport::from_terms(
        {{"empirical-term", emp_term.value},
         {"kl-term", kl_term},
         {"moment-term", c2_term},
         {"envelope-term", envelope_term}},
        {{"alpha", in.alpha}, {"t", cfg.t}, {"sigma2", cfg.sigma2(in.m)}},
        {{"empirical-term", emp_term.std_error}});
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

struct TailBoundValue {
    double value = 0.0;
    bool vacuous = false;  // denominator < 0: the bound is meaningless, returned as-is
};

// Naive tail-integral control of E_S[e^(m^a Delta(h)^2)]:
//   1 + 2/(1 - m^(1-a)/(2 K^2)) * [exp(m^a K^2 - m/2) - 1].
inline TailBoundValue naive_tail_bound(double K_h, std::size_t m, double alpha) {
    if (!(K_h > 0.0)) throw std::invalid_argument("naive_tail_bound: K <= 0");
    const double md = static_cast<double>(m);
    const double denom = 1.0 - std::pow(md, 1.0 - alpha) / (2.0 * K_h * K_h);
    if (denom == 0.0)
        throw std::domain_error("naive_tail_bound: singular input, m^(1-a) = 2 K^2");
    const double bracket = std::expm1(std::pow(md, alpha) * K_h * K_h - md / 2.0);
    return {1.0 + 2.0 / denom * bracket, denom < 0.0};
}

// Sub-gamma baseline: emp + (KL + ln(1/d))/m + s^2/(2(1-c)).
inline BoundReport germain_subgamma_bound(const BoundInputs& in, double s2, double c,
                                          double emp_risk) {
    in.validate();
    if (s2 < 0.0) throw std::invalid_argument("germain_subgamma_bound: s2 < 0");
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("germain_subgamma_bound: c outside [0,1)");
    const double m = static_cast<double>(in.m);
    return BoundReport::from_terms({{"empirical-term", emp_risk},
                                    {"kl-term", (in.kl + std::log(1.0 / in.delta)) / m},
                                    {"moment-term", s2 / (2.0 * (1.0 - c))}},
                                   {{"s2", s2}, {"c", c}});
}

}  // namespace pacbound
