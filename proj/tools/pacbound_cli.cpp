// Command-line front end: runs the synthetic experiments, the verification
// suites, and writes CSV curves plus JSON manifests.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacbound/pacbound.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pacbound;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Locale-independent formatting: always dot decimal separator.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

std::vector<std::size_t> parse_m_values(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const long long v = std::stoll(tok);
        if (v < 1) throw CLI::ValidationError("--m-values", "sample sizes must be >= 1");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw CLI::ValidationError("--m-values", "no sample sizes given");
    return out;
}

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    std::uint64_t seed, const std::string& started) {
    json manifest = {{"command", command},
                     {"config", config},
                     {"seed", seed},
                     {"tool_version", kToolVersion},
                     {"started", started},
                     {"finished", now_iso8601()}};
    std::ofstream f(path);
    f << manifest.dump(2) << "\n";
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PACBOUND_SEED")) return std::strtoull(env, nullptr, 10);
    return 42;
}

// ---------------------------------------------------------------------------
// linreg
// ---------------------------------------------------------------------------

int run_linreg(const LinRegConfig& cfg, const std::vector<std::size_t>& m_values,
               const fs::path& out_dir) {
    const std::string started = now_iso8601();
    const auto curve = run_linreg_experiment(cfg, m_values);

    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "linreg_curve.csv");
    csv << "m,bound_total,term_empirical,term_kl,term_c2,term_envelope,alpha,sigma2,"
           "emp_risk,emp_risk_se,true_risk,true_risk_se\n";
    for (const auto& pt : curve) {
        csv << pt.m << ',' << fmt(pt.bound_total) << ','
            << fmt(pt.bound_terms.at("empirical-term")) << ','
            << fmt(pt.bound_terms.at("kl-term")) << ',' << fmt(pt.bound_terms.at("moment-term"))
            << ',' << fmt(pt.bound_terms.at("envelope-term")) << ',' << fmt(pt.chosen_alpha)
            << ',' << fmt(pt.chosen_sigma2) << ',' << fmt(pt.emp_risk_mc.value) << ','
            << fmt(pt.emp_risk_mc.std_error) << ',' << fmt(pt.true_risk_mc.value) << ','
            << fmt(pt.true_risk_mc.std_error) << '\n';
    }

    json config = {{"d", cfg.d},         {"c", cfg.c},         {"e", cfg.e},
                   {"gen_std", cfg.gen_std}, {"delta", cfg.delta}, {"t0", cfg.t0},
                   {"step", cfg.step},   {"n_mc", cfg.n_mc},   {"n_post", cfg.n_post},
                   {"n_data", cfg.n_data}, {"m_values", m_values}};
    write_manifest(out_dir / "linreg_manifest.json", "linreg", config, cfg.seed, started);
    std::cout << "wrote " << (out_dir / "linreg_curve.csv").string() << " (" << curve.size()
              << " rows)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// logistic
// ---------------------------------------------------------------------------

int run_logistic(const LogRegConfig& cfg, const std::vector<std::size_t>& m_values,
                 LogisticMode mode, const fs::path& out_dir) {
    const std::string started = now_iso8601();
    const auto curves = run_logistic_experiment(cfg, m_values, mode);

    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "logistic_curve.csv");
    csv << "m,bound_baseline,bound_optimized,alpha_baseline,alpha_optimized,"
           "sigma2_baseline,sigma2_optimized,emp_risk,emp_risk_se,true_risk,true_risk_se\n";
    for (std::size_t i = 0; i < curves.baseline.size(); ++i) {
        const auto& a = curves.baseline[i];
        const auto& b = curves.optimized[i];
        csv << a.m << ',' << fmt(a.bound_total) << ',' << fmt(b.bound_total) << ','
            << fmt(a.chosen_alpha) << ',' << fmt(b.chosen_alpha) << ',' << fmt(a.chosen_sigma2)
            << ',' << fmt(b.chosen_sigma2) << ',' << fmt(b.emp_risk_mc.value) << ','
            << fmt(b.emp_risk_mc.std_error) << ',' << fmt(b.true_risk_mc.value) << ','
            << fmt(b.true_risk_mc.std_error) << '\n';
    }

    json config = {{"d", cfg.d},
                   {"lambda", cfg.lambda},
                   {"delta", cfg.delta},
                   {"sigma0_sq", cfg.sigma0_sq},
                   {"step", cfg.step},
                   {"n_mc", cfg.n_mc},
                   {"normalize", cfg.normalize},
                   {"mode", mode == LogisticMode::AlphaComparison ? "alpha" : "informed"},
                   {"m_values", m_values}};
    write_manifest(out_dir / "logistic_manifest.json", "logistic", config, cfg.seed, started);
    std::cout << "wrote " << (out_dir / "logistic_curve.csv").string() << " ("
              << curves.baseline.size() << " rows)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify suites
// ---------------------------------------------------------------------------

struct SuiteResult {
    std::string name;
    bool pass = false;
    json measured;
};

SuiteResult suite_witness(std::uint64_t seed) {
    RngStream rng(derive_seed(seed, 101));
    const double betas[] = {0.0, 1.0 / 3.0, 0.5, 1.0};
    std::size_t failures = 0;
    const std::size_t cases = 1000;
    for (std::size_t t = 0; t < cases; ++t) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 5);
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 30);
        LossSpec spec{LossKind::AbsoluteLinear, 1.0 + rng.uniform(), 0.5 + rng.uniform()};
        Predictor h;
        h.coords.resize(d);
        for (auto& v : h.coords) v = 2.0 * rng.normal();
        // data constrained to ||x|| <= B and |y| <= C so the envelope holds
        Dataset data;
        data.points.resize(m);
        for (auto& z : data.points) {
            z.x.resize(d);
            for (auto& v : z.x) v = rng.normal();
            const double nx = norm(z.x);
            const double scale = spec.B * rng.uniform() / std::max(nx, 1e-12);
            for (auto& v : z.x) v *= scale;
            z.y = spec.C * (2.0 * rng.uniform() - 1.0);
        }
        const auto w = self_bounding_witness(spec, h, data, betas[t % 4]);
        if (!w.satisfies_invariants()) ++failures;
    }
    return {"witness", failures == 0, {{"cases", cases}, {"failures", failures}}};
}

SuiteResult suite_softening() {
    std::size_t failures = 0;
    for (SofteningKind kind : {SofteningKind::Clip, SofteningKind::SqrtTail}) {
        const SofteningFn psi{kind};
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = 100.0 * i / 1000.0;
            const double v = psi_apply(psi, x);
            if (x <= 1.0 && v != x) ++failures;
            if (x >= 1.0 && v > x) ++failures;
            if (v < prev) ++failures;
            prev = v;
        }
    }
    return {"softening", failures == 0, {{"grid_points", 1001}, {"failures", failures}}};
}

SuiteResult suite_expmoment(std::uint64_t seed) {
    // Resampling check of the exponential-moment bound on small instances.
    RngStream rng(derive_seed(seed, 102));
    const std::size_t instances = 5, resamples = 2000, n_ref = 200000;
    std::size_t failures = 0;
    double worst_margin = 1e30;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t d = 2, m = 10 + 5 * t;
        LinRegConfig gen;
        gen.d = d;
        gen.c = 1.0;
        gen.e = 1.0;
        gen.gen_std = 1.0;
        RngStream inst(rng.next_u64());
        Predictor h{sample_truncated(1.0, 1.0, d, inst)};
        auto [warmup, h_star] = gen_linreg_data(gen, 1, inst);
        (void)warmup;
        const LossSpec spec{LossKind::AbsoluteLinear, gen.B(), gen.C()};
        const auto sampler = linreg_sampler(gen, h_star);

        RngStream ref_rng(inst.next_u64());
        const double R = true_risk_mc(spec, h, sampler, n_ref, ref_rng).estimate;
        const double K = envelope(spec, h);

        for (double alpha : {0.25, 0.5}) {
            const double m_alpha = std::pow(static_cast<double>(m), alpha);
            double sum = 0.0, sumsq = 0.0;
            RngStream res_rng(derive_seed(seed, 103, t * 2 + (alpha == 0.5)));
            for (std::size_t r = 0; r < resamples; ++r) {
                double emp = 0.0;
                for (std::size_t i = 0; i < m; ++i) emp += loss(spec, h, sampler(res_rng));
                emp /= static_cast<double>(m);
                const double v = std::exp(m_alpha * (R - emp));
                sum += v;
                sumsq += v * v;
            }
            const double nn = static_cast<double>(resamples);
            const double mean = sum / nn;
            const double se = std::sqrt(std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0)) / nn);
            const double bound = hype_exp_moment_bound(K, m, alpha);
            const double margin = bound + 4.0 * se - mean;
            worst_margin = std::min(worst_margin, margin);
            if (margin < 0.0) ++failures;
        }
    }
    return {"expmoment",
            failures == 0,
            {{"instances", instances}, {"failures", failures}, {"worst_margin", worst_margin}}};
}

SuiteResult suite_xi(std::uint64_t seed) {
    std::size_t failures = 0, cases = 0;
    double worst_log_margin = 1e30;
    const std::size_t n = 20000, m = 100;
    for (double t : {0.25, 0.5, 0.75})
        for (std::size_t N : {std::size_t{6}, std::size_t{10}})
            for (double C : {0.0, 1.0})
                for (double alpha : {0.25, 0.5}) {
                    ++cases;
                    const double B = 2.0;
                    GaussianPriorConfig cfg{t, alpha, B};
                    const double m_pow = std::pow(static_cast<double>(m), 1.0 - 2.0 * alpha);
                    IsotropicGaussian prior = IsotropicGaussian::centered(N, cfg.sigma2(m));
                    RngStream rng(derive_seed(seed, 104, cases));
                    std::vector<double> exps;
                    exps.reserve(n);
                    const double sd = std::sqrt(prior.variance);
                    Vec h(N);
                    for (std::size_t k = 0; k < n; ++k) {
                        for (auto& v : h) v = sd * rng.normal();
                        const double K = B * norm(h) + C;
                        exps.push_back(K * K / (2.0 * m_pow));
                    }
                    double mx = *std::max_element(exps.begin(), exps.end());
                    double acc = 0.0, acc2 = 0.0;
                    for (double e : exps) {
                        acc += std::exp(e - mx);
                        acc2 += std::exp(2.0 * (e - mx));
                    }
                    const double log_mean = mx + std::log(acc / n);
                    const double log_bound = xi_closed_form_log_bound(cfg, C, N, m, alpha);
                    // 4-std-error slack, handled in the log domain
                    const double log_var =
                        2.0 * mx + std::log(std::max(acc2 / n - (acc / n) * (acc / n), 1e-300));
                    const double log_se = 0.5 * (log_var - std::log(static_cast<double>(n)));
                    const double log_threshold =
                        log_mean + std::log1p(-std::min(0.999, 4.0 * std::exp(log_se - log_mean)));
                    worst_log_margin = std::min(worst_log_margin, log_bound - log_threshold);
                    if (log_bound < log_threshold) ++failures;
                }
    return {"xi",
            failures == 0,
            {{"cases", cases}, {"failures", failures}, {"worst_log_margin", worst_log_margin}}};
}

SuiteResult suite_coverage(std::uint64_t seed, std::size_t trials, double delta) {
    LinRegConfig cfg;
    cfg.d = 6;
    cfg.delta = delta;
    cfg.seed = seed;
    cfg.n_mc = 1000;
    cfg.n_post = 200;
    cfg.n_data = 5000;
    RngStream rng(derive_seed(seed, 105));
    const double frac = verify_bound_coverage(linreg_coverage_builder(cfg, 50), trials, rng);
    const double limit = delta + 0.04;
    return {"coverage",
            frac <= limit,
            {{"trials", trials}, {"violation_fraction", frac}, {"limit", limit}}};
}

int run_verify(const std::string& suite, std::uint64_t seed, std::size_t trials, double delta,
               const fs::path& out_dir) {
    const std::string started = now_iso8601();
    std::vector<SuiteResult> results;
    auto want = [&](const char* name) { return suite == "all" || suite == name; };
    if (want("witness")) results.push_back(suite_witness(seed));
    if (want("softening")) results.push_back(suite_softening());
    if (want("expmoment")) results.push_back(suite_expmoment(seed));
    if (want("xi")) results.push_back(suite_xi(seed));
    if (want("coverage")) results.push_back(suite_coverage(seed, trials, delta));
    if (results.empty()) {
        std::cerr << "unknown suite: " << suite << "\n";
        return 2;
    }

    bool all_pass = true;
    json suites = json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        suites.push_back({{"name", r.name}, {"pass", r.pass}, {"measured", r.measured}});
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " " << r.measured.dump()
                  << "\n";
    }
    json report = {{"suites", suites}, {"all_pass", all_pass}};

    fs::create_directories(out_dir);
    std::ofstream f(out_dir / "verify_report.json");
    f << report.dump(2) << "\n";
    write_manifest(out_dir / "verify_manifest.json", "verify",
                   {{"suite", suite}, {"trials", trials}, {"delta", delta}}, seed, started);
    if (!all_pass) {
        for (const auto& r : results)
            if (!r.pass) std::cerr << "suite failed: " << r.name << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PAC-Bayes bounds for losses with hypothesis-dependent range"};
    app.require_subcommand(1);

    std::uint64_t seed = default_seed();
    std::string out_dir = ".";
    std::string m_values_csv = "100,200,400,800";

    // linreg
    auto* linreg = app.add_subcommand("linreg", "linear-regression bound curve over m");
    LinRegConfig lr;
    linreg->add_option("--d", lr.d, "dimension (>= 6)");
    linreg->add_option("--m-values", m_values_csv, "comma-separated sample sizes");
    linreg->add_option("--step", lr.step, "alpha grid resolution");
    linreg->add_option("--delta", lr.delta, "confidence level");
    linreg->add_option("--seed", seed, "master seed");
    linreg->add_option("--n-mc", lr.n_mc, "posterior draws for bound terms");
    linreg->add_option("--out-dir", out_dir, "output directory");

    // logistic
    auto* logistic = app.add_subcommand("logistic", "bounded-case (0-1 loss) bound curves");
    LogRegConfig lg;
    std::string mode = "alpha";
    int normalize_flag = -1;  // -1: mode default
    logistic->add_option("--d", lg.d, "dimension (<= 10)");
    logistic->add_option("--m-values", m_values_csv, "comma-separated sample sizes");
    logistic->add_option("--step", lg.step, "alpha grid resolution");
    logistic->add_option("--delta", lg.delta, "confidence level");
    logistic->add_option("--seed", seed, "master seed");
    logistic->add_option("--n-mc", lg.n_mc, "posterior draws for bound terms");
    logistic->add_option("--mode", mode, "alpha | informed");
    logistic->add_option("--normalize", normalize_flag, "0/1 override of the mode default");
    logistic->add_option("--out-dir", out_dir, "output directory");

    // verify
    auto* verify = app.add_subcommand("verify", "run the property-verification suites");
    std::string suite = "all";
    std::size_t trials = 200;
    double vdelta = 0.05;
    verify->add_option("--suite", suite, "all | witness | softening | expmoment | xi | coverage");
    verify->add_option("--trials", trials, "coverage resampling trials");
    verify->add_option("--delta", vdelta, "confidence level for coverage");
    verify->add_option("--seed", seed, "master seed");
    verify->add_option("--out-dir", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (linreg->parsed()) {
            lr.seed = seed;
            return run_linreg(lr, parse_m_values(m_values_csv), out_dir);
        }
        if (logistic->parsed()) {
            lg.seed = seed;
            LogisticMode md;
            if (mode == "alpha") {
                md = LogisticMode::AlphaComparison;
                lg.normalize = true;
            } else if (mode == "informed") {
                md = LogisticMode::InformedPrior;
                lg.normalize = false;
            } else {
                std::cerr << "unknown mode: " << mode << "\n";
                return 2;
            }
            if (normalize_flag != -1) lg.normalize = normalize_flag != 0;
            return run_logistic(lg, parse_m_values(m_values_csv), md, out_dir);
        }
        if (verify->parsed()) return run_verify(suite, seed, trials, vdelta, out_dir);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
