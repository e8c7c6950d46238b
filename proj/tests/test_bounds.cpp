#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pacbound/bounds.hpp"
#include "pacbound/gaussian.hpp"
#include "pacbound/rng.hpp"

using namespace pacbound;

namespace {

// alpha-dependent part of the bounded-case bound, used as the optimality oracle
double alpha_objective(double alpha, double K1, double C, std::size_t m) {
    const double md = static_cast<double>(m);
    return K1 / std::pow(md, alpha) + C * C / (2.0 * std::pow(md, 1.0 - alpha));
}

// brute-force resampling estimate of E_S[exp(m^a Delta(h))] for a fixed h:
// Delta = R(h) - R_m(h), datasets drawn i.i.d. Bernoulli-style from `sampler`.
double resampled_exp_moment(const LossSpec& spec, const Predictor& h,
                            const DataPointSampler& sampler, double true_risk, std::size_t m,
                            double alpha, std::size_t n_resamples, RngStream& rng) {
    const double scale = std::pow(static_cast<double>(m), alpha);
    double acc = 0.0;
    for (std::size_t r = 0; r < n_resamples; ++r) {
        double emp = 0.0;
        for (std::size_t i = 0; i < m; ++i) emp += loss(spec, h, sampler(rng));
        emp /= static_cast<double>(m);
        acc += std::exp(scale * (true_risk - emp));
    }
    return acc / static_cast<double>(n_resamples);
}

}  // namespace

TEST_CASE("bounded_case_bound: arithmetic and structure") {
    // emp 0.1, m=100, a=1/2, delta=e^-1, kl=0, C=1:
    // total = 0.1 + (0+1)/10 + 1/20 = 0.25
    BoundInputs in{100, 0.5, std::exp(-1.0), 0.0};
    auto r = bounded_case_bound(in, 1.0, 0.1);
    CHECK_THAT(r.total, Catch::Matchers::WithinRel(0.25, 1e-12));
    CHECK_THAT(r.terms.at("kl-term"), Catch::Matchers::WithinRel(0.1, 1e-12));
    CHECK_THAT(r.terms.at("moment-term"), Catch::Matchers::WithinRel(0.05, 1e-12));

    // total is the exact floating sum of the itemized terms
    double sum = 0.0;
    for (const auto& [k, v] : r.terms) sum += v;
    CHECK(r.total == sum);

    // a = 1, delta -> 1: kl-term vanishes, only emp + C^2/2 survives
    BoundInputs collapse{100, 1.0, 1.0 - 1e-12, 0.0};
    auto rc = bounded_case_bound(collapse, 1.0, 0.15);
    CHECK_THAT(rc.total, Catch::Matchers::WithinAbs(0.65, 1e-10));

    CHECK_THROWS_AS(bounded_case_bound(BoundInputs{100, 0.5, 1.5, 0.0}, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(bounded_case_bound(BoundInputs{100, 0.5, 0.05, -1.0}, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(bounded_case_bound(in, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("optimal_alpha: closed form and grid optimality") {
    // 2 K1 = C^2 -> the log vanishes, a0 = 1/2
    CHECK(optimal_alpha(0.5, 1.0, 100) == 0.5);
    // m=100, K1=50, C=1: a0 = 1/2 + ln(100)/(2 ln 100) = 1
    CHECK_THAT(optimal_alpha(50.0, 1.0, 100), Catch::Matchers::WithinRel(1.0, 1e-12));

    RngStream rng(5);
    for (int t = 0; t < 100; ++t) {
        const double K1 = std::exp(-2.0 + 7.0 * rng.uniform());
        const double C = std::exp(-2.0 + 4.0 * rng.uniform());
        const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 99998);
        const double a0 = optimal_alpha(K1, C, m);
        const double at_opt = alpha_objective(a0, K1, C, m);
        for (int i = 0; i <= 1000; ++i) {
            const double a = -1.0 + 3.0 * i / 1000.0;
            CHECK(at_opt <= alpha_objective(a, K1, C, m) * (1.0 + 1e-12));
        }
    }

    CHECK_THROWS_AS(optimal_alpha(1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(optimal_alpha(0.0, 1.0, 100), std::invalid_argument);
}

TEST_CASE("split_prior_bound: reconstruction from bounded-case halves") {
    const double C = 1.0, delta = 0.05, emp = 0.2;
    BoundInputs in1{200, 0.6, delta, 1.3};
    BoundInputs in2{200, 0.4, delta, 0.2};
    auto r = split_prior_bound(in1, in2, C, emp);

    // each half is a bounded-case bound at m/2 and delta/2
    BoundInputs h1{100, 0.6, delta / 2.0, 1.3};
    BoundInputs h2{100, 0.4, delta / 2.0, 0.2};
    auto b1 = bounded_case_bound(h1, C, emp);
    auto b2 = bounded_case_bound(h2, C, emp);
    const double expected = emp + 0.5 * (b1.total - emp) + 0.5 * (b2.total - emp);
    CHECK_THAT(r.total, Catch::Matchers::WithinRel(expected, 1e-12));

    // symmetric halves collapse to a single bounded-case bound at m/2, delta/2
    auto sym = split_prior_bound(in1, in1, C, emp);
    CHECK_THAT(sym.total, Catch::Matchers::WithinRel(b1.total, 1e-12));

    CHECK_THROWS_AS(split_prior_bound(BoundInputs{201, 0.5, delta, 0.0},
                                      BoundInputs{201, 0.5, delta, 0.0}, C, emp),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_prior_bound(in1, BoundInputs{100, 0.5, delta, 0.0}, C, emp),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_prior_bound(in1, BoundInputs{200, 0.5, 0.01, 0.0}, C, emp),
                    std::invalid_argument);
}

TEST_CASE("hype_exp_moment_bound: limits and overflow") {
    // K -> 0: bound -> 1
    CHECK_THAT(hype_exp_moment_bound(1e-8, 100, 0.25), Catch::Matchers::WithinRel(1.0, 1e-10));
    // a = 1/2 removes the m dependence: exp(K^2/2)
    CHECK(hype_exp_moment_bound(2.0, 10, 0.5) == hype_exp_moment_bound(2.0, 100000, 0.5));
    CHECK_THAT(hype_exp_moment_bound(2.0, 17, 0.5),
               Catch::Matchers::WithinRel(std::exp(2.0), 1e-12));
    CHECK_THROWS_AS(hype_exp_moment_bound(100.0, 100, 0.5), std::overflow_error);
    CHECK_THROWS_AS(hype_exp_moment_bound(0.0, 100, 0.5), std::invalid_argument);
}

TEST_CASE("hype_exp_moment_bound: dominates a resampled moment") {
    // small fixed predictor, data from a box so the envelope holds
    LossSpec spec{LossKind::AbsoluteLinear, 1.0, 1.0};
    Predictor h{{0.4, -0.7}};
    DataPointSampler sampler = [](RngStream& rng) {
        DataPoint z;
        const double r = rng.uniform();
        double n1 = rng.normal(), n2 = rng.normal();
        const double nm = std::max(std::sqrt(n1 * n1 + n2 * n2), 1e-12);
        z.x = {r * n1 / nm, r * n2 / nm};
        z.y = 2.0 * rng.uniform() - 1.0;
        return z;
    };
    RngStream ref_rng(90);
    const double true_risk = true_risk_mc(spec, h, sampler, 200000, ref_rng).estimate;
    const double K = envelope(spec, h);
    RngStream rng(91);
    for (double alpha : {0.25, 0.5}) {
        const double moment =
            resampled_exp_moment(spec, h, sampler, true_risk, 30, alpha, 2000, rng);
        CHECK(moment <= hype_exp_moment_bound(K, 30, alpha) * 1.05);
    }
}

TEST_CASE("log_mean_exp_checked: stability and divergence heuristic") {
    CHECK_THAT(log_mean_exp_checked({0.0, 0.0, 0.0}, "t"), Catch::Matchers::WithinAbs(0.0, 1e-14));
    // values that would overflow exp() individually if shifted naively
    CHECK_THAT(log_mean_exp_checked({700.0, 700.0 + std::log(3.0)}, "t"),
               Catch::Matchers::WithinRel(700.0 + std::log(2.0), 1e-12));
    CHECK_THROWS_AS(log_mean_exp_checked({1.0, 710.0}, "t"), divergent_moment_error);
}

TEST_CASE("self_bounding_pac_bayes_bound: constant envelope recovers the bounded case") {
    // 0-1 loss: K == C exactly, so the MC moment term is deterministic
    const double C = 0.8;
    LossSpec spec{LossKind::ZeroOneLogisticThreshold, 0.0, C};
    BoundInputs in{400, 0.5, 0.05, 0.7};
    auto prior = IsotropicGaussian::centered(3, 1.0);
    RngStream rng(101);
    McEstimate emp{0.3, 0.01, 1000, 0};
    auto r = self_bounding_pac_bayes_bound(in, prior, spec, emp, 500, rng);
    auto expected = bounded_case_bound(in, C, 0.3);
    CHECK_THAT(r.total, Catch::Matchers::WithinRel(expected.total, 1e-12));
    CHECK(r.std_errors.at("moment-term") == 0.0);
}

TEST_CASE("self_bounding_pac_bayes_bound: admissibility window") {
    LossSpec spec{LossKind::AbsoluteLinear, 2.0, 1.0};
    // m=100, a=1/2: admissible iff sigma_P^2 < 1/B^2 = 0.25
    BoundInputs in{100, 0.5, 0.05, 0.0};
    McEstimate emp{0.1, 0.0, 10, 0};
    RngStream rng(102);
    CHECK_THROWS_AS(self_bounding_pac_bayes_bound(in, IsotropicGaussian::centered(2, 0.3), spec,
                                                  emp, 100, rng),
                    divergent_moment_error);
    RngStream rng2(103);
    auto ok = self_bounding_pac_bayes_bound(in, IsotropicGaussian::centered(2, 0.1), spec, emp,
                                            5000, rng2);
    CHECK(ok.total > emp.value);
    CHECK(ok.terms.at("moment-term") > 0.0);
}

TEST_CASE("self_bounding_pac_bayes_bound: MC moment below the closed-form xi bound") {
    const std::size_t N = 8, m = 400;
    const double alpha = 0.5, t = 0.5, B = 1.5, C = 2.0;
    GaussianPriorConfig gp{t, alpha, B};
    LossSpec spec{LossKind::AbsoluteLinear, B, C};
    BoundInputs in{m, alpha, 0.05, 0.0};
    auto prior = IsotropicGaussian::centered(N, gp.sigma2(m));
    McEstimate emp{0.0, 0.0, 10, 0};
    RngStream rng(104);
    auto r = self_bounding_pac_bayes_bound(in, prior, spec, emp, 50000, rng);
    const double xi_log = xi_closed_form_log_bound(gp, C, N, m, alpha);
    const double m_alpha = std::pow(static_cast<double>(m), alpha);
    CHECK(r.terms.at("moment-term") <=
          xi_log / m_alpha + 4.0 * r.std_errors.at("moment-term"));
}

TEST_CASE("psi_apply: axioms and closed values") {
    for (SofteningKind kind : {SofteningKind::Clip, SofteningKind::SqrtTail}) {
        SofteningFn psi{kind};
        CHECK(psi_apply(psi, 0.5) == 0.5);
        CHECK(psi_apply(psi, 1.0) == 1.0);
        CHECK_THROWS_AS(psi_apply(psi, -0.1), std::invalid_argument);
        // nondecreasing, psi(x) <= x, identity on [0,1]
        double prev = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = 100.0 * i / 1000.0;
            const double v = psi_apply(psi, x);
            CHECK(v >= prev);
            CHECK(v <= x + 1e-15);
            if (x <= 1.0) CHECK(v == x);
            prev = v;
        }
    }
    CHECK(psi_apply(SofteningFn{SofteningKind::Clip}, 7.0) == 1.0);
    CHECK(psi_apply(SofteningFn{SofteningKind::SqrtTail}, 4.0) == 3.0);
}

TEST_CASE("psi_empirical_risk") {
    LossSpec spec{LossKind::AbsoluteLinear, 1.0, 10.0};
    Predictor h{{1.0}};
    Dataset data;
    data.points = {{{0.0}, -1.0}, {{0.0}, -4.0}};  // losses 1 and 4
    SofteningFn clip{SofteningKind::Clip};

    // s=2: psi(0.5)=0.5, psi(2)=1 -> (2/2)(0.5+1) = 1.5
    CHECK_THAT(psi_empirical_risk(spec, clip, 2.0, h, data),
               Catch::Matchers::WithinRel(1.5, 1e-14));
    // s above all losses: identity region, equals the plain empirical risk
    CHECK_THAT(psi_empirical_risk(spec, clip, 100.0, h, data),
               Catch::Matchers::WithinRel(empirical_risk(spec, h, data), 1e-14));
    CHECK_THROWS_AS(psi_empirical_risk(spec, clip, 0.0, h, data), std::invalid_argument);
    CHECK_THROWS_AS(psi_empirical_risk(spec, clip, 1.0, h, Dataset{}), std::invalid_argument);

    // psi-risk never exceeds the raw empirical risk (psi(x) <= x)
    RngStream rng(7);
    for (int t = 0; t < 200; ++t) {
        Dataset d2;
        d2.points = {{{rng.normal()}, rng.normal()}, {{rng.normal()}, rng.normal()}};
        Predictor hr{{2.0 * rng.normal()}};
        const double s = 0.1 + 3.0 * rng.uniform();
        for (SofteningKind kind : {SofteningKind::Clip, SofteningKind::SqrtTail}) {
            CHECK(psi_empirical_risk(spec, SofteningFn{kind}, s, hr, d2) <=
                  empirical_risk(spec, hr, d2) + 1e-12);
        }
    }
}

TEST_CASE("truncation_gap_mc") {
    LossSpec spec{LossKind::AbsoluteLinear, 1.0, 1.0};
    auto q = IsotropicGaussian::centered(2, 1.0);
    RngStream rng(110);
    // s far above any plausible envelope: gap 0
    auto zero = truncation_gap_mc(q, spec, 1e6, 5000, rng);
    CHECK(zero.value == 0.0);

    // s = 0 is disallowed implicitly by >= semantics? s below min K: gap = E[K]
    RngStream rng2(111);
    auto all = truncation_gap_mc(q, spec, 1e-9, 200000, rng2);
    // E[K] = B E||h|| + C; for d=2 standard normal E||h|| = sqrt(pi/2)
    const double expected = std::sqrt(3.14159265358979323846 / 2.0) + 1.0;
    CHECK(std::abs(all.value - expected) <= 4.0 * all.std_error);

    // constant envelope: exact step behaviour
    LossSpec zo{LossKind::ZeroOneLogisticThreshold, 0.0, 0.7};
    RngStream rng3(112);
    CHECK_THAT(truncation_gap_mc(q, zo, 0.7, 100, rng3).value,
               Catch::Matchers::WithinRel(0.7, 1e-12));
    RngStream rng4(113);
    CHECK(truncation_gap_mc(q, zo, 0.71, 100, rng4).value == 0.0);
}

TEST_CASE("softened_bound: constant envelope matches the unsoftened bound") {
    // constant K = C < s: truncation gap 0, psi is the identity on every loss,
    // the moment term collapses to C^2/(2 m^(1-2a))/m^a.
    const double C = 0.9, s = 1.5;
    LossSpec spec{LossKind::ZeroOneLogisticThreshold, 0.0, C};
    BoundInputs in{256, 0.5, 0.05, 0.4};
    auto prior = IsotropicGaussian::centered(2, 1.0);
    auto posterior = IsotropicGaussian({0.3, -0.2}, 0.5);
    Dataset data;
    RngStream drng(120);
    for (int i = 0; i < 20; ++i)
        data.points.push_back({{drng.normal(), drng.normal()}, drng.uniform() < 0.5 ? 0.0 : 1.0});

    RngStream rng(121);
    auto soft = softened_bound(in, prior, posterior, spec, SofteningFn{SofteningKind::Clip}, s,
                               data, 2000, rng);
    CHECK(soft.terms.at("truncation-term") == 0.0);
    auto plain = bounded_case_bound(in, C, 0.0);
    CHECK_THAT(soft.terms.at("kl-term"),
               Catch::Matchers::WithinRel(plain.terms.at("kl-term"), 1e-12));
    CHECK_THAT(soft.terms.at("moment-term"),
               Catch::Matchers::WithinRel(plain.terms.at("moment-term"), 1e-12));
    // psi-risk equals the empirical risk here; its posterior mean is a plain MC
    // estimate of E_Q[R_m]
    CHECK(soft.terms.at("empirical-term") >= 0.0);
    CHECK(soft.terms.at("empirical-term") <= C);

    // Clip keeps the moment term below the hard cap s^2/(2 m^(1-a)) for any prior
    LossSpec affine{LossKind::AbsoluteLinear, 1.0, 1.0};
    RngStream rng2(122);
    auto capped = softened_bound(in, IsotropicGaussian::centered(2, 4.0), posterior, affine,
                                 SofteningFn{SofteningKind::Clip}, s, data, 2000, rng2);
    const double cap = s * s / (2.0 * std::pow(256.0, 0.5));
    CHECK(capped.terms.at("moment-term") <= cap * (1.0 + 1e-12));
}

TEST_CASE("strong_softened_bound: truncation replacement and decay") {
    const double C = 0.9;
    LossSpec spec{LossKind::ZeroOneLogisticThreshold, 0.0, C};
    auto prior = IsotropicGaussian::centered(2, 1.0);
    auto posterior = IsotropicGaussian({0.1, 0.1}, 0.5);
    Dataset data;
    RngStream drng(130);
    for (int i = 0; i < 10; ++i)
        data.points.push_back({{drng.normal(), drng.normal()}, 1.0});

    // M3s = 0 -> truncation term exactly 0
    RngStream rng(131);
    auto r0 = strong_softened_bound(BoundInputs{100, 0.5, 0.05, 0.0}, StrongMomentConfig{0.0, 2.0},
                                    prior, posterior, spec, SofteningFn{SofteningKind::Clip}, data,
                                    500, rng);
    CHECK(r0.terms.at("truncation-term") == 0.0);

    // with s^2 = sqrt(m), a = 1/2, fixed M3s and KL: the kl and truncation
    // terms decay exactly like 1/sqrt(m); the moment term does too when the
    // envelope sits in psi's identity region (K < s).
    const double m3s = 0.4, kl = 1.2;
    double prev_scaled_kl = -1.0, prev_scaled_tr = -1.0, prev_scaled_mom = -1.0;
    for (std::size_t m : {256, 1024, 4096}) {
        const double s = std::pow(static_cast<double>(m), 0.25);  // s^2 = sqrt(m)
        RngStream r(132);
        auto rep = strong_softened_bound(BoundInputs{m, 0.5, 0.05, kl},
                                         StrongMomentConfig{m3s, s}, prior, posterior, spec,
                                         SofteningFn{SofteningKind::Clip}, data, 500, r);
        const double root_m = std::sqrt(static_cast<double>(m));
        const double sk = rep.terms.at("kl-term") * root_m;
        const double st = rep.terms.at("truncation-term") * root_m;
        const double sm = rep.terms.at("moment-term") * root_m;
        if (prev_scaled_kl >= 0.0) {
            CHECK_THAT(sk, Catch::Matchers::WithinRel(prev_scaled_kl, 1e-12));
            CHECK_THAT(st, Catch::Matchers::WithinRel(prev_scaled_tr, 1e-12));
            CHECK_THAT(sm, Catch::Matchers::WithinRel(prev_scaled_mom, 1e-12));
        }
        prev_scaled_kl = sk;
        prev_scaled_tr = st;
        prev_scaled_mom = sm;
    }

    // M3s/s^2 dominates the actual truncation gap when s <= C (constant K):
    // gap = C, replacement = C^3/s^2 >= C.
    RngStream rng2(133);
    auto gap = truncation_gap_mc(posterior, spec, 0.8, 100, rng2);
    const double replacement = (C * C * C) / (0.8 * 0.8);
    CHECK(replacement >= gap.value);

    CHECK_THROWS_AS((StrongMomentConfig{-1.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((StrongMomentConfig{1.0, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("third_moment_tail_mc: constant envelope") {
    LossSpec zo{LossKind::ZeroOneLogisticThreshold, 0.0, 2.0};
    auto q = IsotropicGaussian::centered(2, 1.0);
    RngStream rng(140);
    CHECK(third_moment_tail_mc(q, zo, 1.5, 100, rng).value == 8.0);
    RngStream rng2(141);
    CHECK(third_moment_tail_mc(q, zo, 2.5, 100, rng2).value == 0.0);
}

TEST_CASE("xi_closed_form_bound: closed values and domain") {
    // C = 0: bound is exactly 2 (1-t)^(-N/2)
    GaussianPriorConfig cfg{0.5, 0.5, 1.0};
    CHECK_THAT(xi_closed_form_bound(cfg, 0.0, 8, 100, 0.5),
               Catch::Matchers::WithinRel(2.0 * std::pow(0.5, -4.0), 1e-12));

    // monotone increasing in t (larger prior variance, heavier tail)
    double prev = 0.0;
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double v = xi_closed_form_bound(GaussianPriorConfig{t, 0.5, 1.0}, 1.0, 8, 100, 0.5);
        CHECK(v > prev);
        prev = v;
    }
    // monotone increasing in C
    CHECK(xi_closed_form_bound(cfg, 2.0, 8, 100, 0.5) > xi_closed_form_bound(cfg, 1.0, 8, 100, 0.5));

    CHECK_THROWS_WITH(xi_closed_form_bound(cfg, 1.0, 5, 100, 0.5),
                      Catch::Matchers::ContainsSubstring("dimension too small"));
    CHECK_THROWS_AS(xi_closed_form_bound(GaussianPriorConfig{1.0, 0.5, 1.0}, 1.0, 8, 100, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(xi_closed_form_bound(cfg, -1.0, 8, 100, 0.5), std::invalid_argument);
}

TEST_CASE("xi_closed_form_bound: dominates a direct MC estimate of xi") {
    const std::size_t N = 6, m = 100;
    const double alpha = 0.5, t = 0.5, B = 1.0, C = 1.0;
    GaussianPriorConfig cfg{t, alpha, B};
    auto prior = IsotropicGaussian::centered(N, cfg.sigma2(m));
    const double m_pow = std::pow(static_cast<double>(m), 1.0 - 2.0 * alpha);
    RngStream rng(150);
    auto xi_mc = mc_expect(
        prior,
        [&](const Predictor& h) {
            const double K = B * h.norm() + C;
            return std::exp(K * K / (2.0 * m_pow));
        },
        100000, rng);
    CHECK(xi_mc.value <= xi_closed_form_bound(cfg, C, N, m, alpha) + 4.0 * xi_mc.std_error);
}

TEST_CASE("gaussian_regression_bound: structure and limits") {
    McEstimate emp{0.2, 0.01, 100, 0};
    GaussianPriorConfig cfg{0.5, 0.5, 2.0};
    BoundInputs in{400, 0.5, 0.05, 1.0};
    auto r = gaussian_regression_bound(in, cfg, 3.0, 10, emp);
    double sum = 0.0;
    for (const auto& [k, v] : r.terms) sum += v;
    CHECK(r.total == sum);
    CHECK(r.hyperparams.at("t") == 0.5);
    CHECK_THAT(r.hyperparams.at("sigma2"), Catch::Matchers::WithinRel(cfg.sigma2(400), 1e-12));

    // C = 0: the moment term vanishes, the envelope term keeps only the
    // -ln sqrt(1-t) part
    auto r0 = gaussian_regression_bound(in, cfg, 0.0, 10, emp);
    CHECK(r0.terms.at("moment-term") == 0.0);
    CHECK_THAT(r0.terms.at("envelope-term"),
               Catch::Matchers::WithinRel(10.0 / 20.0 * std::log(1.0 / std::sqrt(0.5)), 1e-12));

    // kl-term carries ln(2/delta), not ln(1/delta)
    CHECK_THAT(r.terms.at("kl-term"),
               Catch::Matchers::WithinRel((1.0 + std::log(2.0 / 0.05)) / 20.0, 1e-12));

    CHECK_THROWS_AS(gaussian_regression_bound(in, cfg, 1.0, 5, emp), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_regression_bound(in, GaussianPriorConfig{0.0, 0.5, 1.0}, 1.0, 10, emp),
                    std::invalid_argument);
    CHECK_THROWS_AS(gaussian_regression_bound(in, cfg, -1.0, 10, emp), std::invalid_argument);
}

TEST_CASE("gaussian_regression_bound: reconstruction from the xi closed form") {
    // total = emp + (KL + ln(1/d))/m^a + (1/m^a) ln[xi_bound * (1 + C/sqrt(2 f m^(1-2a)))]
    RngStream rng(160);
    for (int i = 0; i < 50; ++i) {
        const std::size_t m = 50 + static_cast<std::size_t>(rng.uniform() * 2000);
        const double alpha = 0.25 + 0.5 * rng.uniform();
        const double t = 0.1 + 0.8 * rng.uniform();
        const double B = 0.5 + 2.0 * rng.uniform();
        const double C = 3.0 * rng.uniform();
        const std::size_t N = 6 + static_cast<std::size_t>(rng.uniform() * 45);
        const double kl = 5.0 * rng.uniform();
        const double delta = 0.01 + 0.2 * rng.uniform();
        McEstimate emp{rng.uniform(), 0.0, 10, 0};

        GaussianPriorConfig cfg{t, alpha, B};
        BoundInputs in{m, alpha, delta, kl};
        const auto r = gaussian_regression_bound(in, cfg, C, N, emp);

        const double m_alpha = std::pow(static_cast<double>(m), alpha);
        const double m_pow = std::pow(static_cast<double>(m), 1.0 - 2.0 * alpha);
        const double f = (1.0 - t) / t;
        const double xi_log = xi_closed_form_log_bound(cfg, C, N, m, alpha);
        const double rebuilt =
            emp.value + (kl + std::log(1.0 / delta)) / m_alpha +
            (xi_log + std::log1p(C / std::sqrt(2.0 * f * m_pow))) / m_alpha;
        CHECK_THAT(r.total, Catch::Matchers::WithinRel(rebuilt, 1e-9));
    }
}

TEST_CASE("naive_tail_bound") {
    // hand arithmetic: K=3, m=100, a=1/2 -> denom = 1 - 10/18 = 4/9,
    // bracket = e^40 - 1, value = 1 + 4.5 (e^40 - 1)
    auto hand = naive_tail_bound(3.0, 100, 0.5);
    CHECK_THAT(hand.value,
               Catch::Matchers::WithinRel(1.0 + 4.5 * std::expm1(40.0), 1e-12));
    CHECK(hand.vacuous == false);

    // denominator < 0 flags vacuity (m^(1-a) > 2 K^2)
    auto vac = naive_tail_bound(1.0, 100, 0.5);
    CHECK(vac.vacuous);

    // in the non-vacuous regime the naive bound dwarfs the HYPE moment bound
    for (double K2 : {6.0, 8.0, 10.0}) {
        const double K = std::sqrt(K2);
        auto nb = naive_tail_bound(K, 100, 0.5);
        CHECK(nb.vacuous == false);
        CHECK(nb.value >= 10.0 * hype_exp_moment_bound(K, 100, 0.5));
    }

    CHECK_THROWS_AS(naive_tail_bound(0.0, 100, 0.5), std::invalid_argument);
    // exact singularity: m^(1-a) = 2 K^2 (K=1, m=2, a=0)
    CHECK_THROWS_AS(naive_tail_bound(1.0, 2, 0.0), std::domain_error);
}

TEST_CASE("germain_subgamma_bound") {
    // kl=0, delta=e^-1, m=100, s2=1, c=0: total = emp + 1/100 + 1/2
    BoundInputs in{100, 0.5, std::exp(-1.0), 0.0};
    auto r = germain_subgamma_bound(in, 1.0, 0.0, 0.1);
    CHECK_THAT(r.total, Catch::Matchers::WithinRel(0.61, 1e-12));

    // s2 = C^2, c = 0 matches the bounded case at alpha = 1
    BoundInputs in2{256, 1.0, 0.05, 2.0};
    const double C = 1.3;
    auto sg = germain_subgamma_bound(in2, C * C, 0.0, 0.25);
    auto bc = bounded_case_bound(in2, C, 0.25);
    CHECK_THAT(sg.total, Catch::Matchers::WithinRel(bc.total, 1e-12));

    // c -> 1 blows the variance term up
    CHECK(germain_subgamma_bound(in, 1.0, 1.0 - 1e-9, 0.0).total > 1e8);
    CHECK_THROWS_AS(germain_subgamma_bound(in, 1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(germain_subgamma_bound(in, -1.0, 0.0, 0.0), std::invalid_argument);
}
