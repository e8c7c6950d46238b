#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacbound/core.hpp"
#include "pacbound/rng.hpp"

namespace pacbound {

// N(mean, variance * I_d). Serves as both prior and posterior; any two of
// equal dimension are mutually absolutely continuous.
struct IsotropicGaussian {
    Vec mean;
    double variance = 1.0;

    IsotropicGaussian() = default;
    IsotropicGaussian(Vec mu, double var) : mean(std::move(mu)), variance(var) {
        if (!(variance > 0.0))
            throw std::invalid_argument("IsotropicGaussian: variance must be > 0");
    }

    std::size_t dim() const { return mean.size(); }

    static IsotropicGaussian centered(std::size_t d, double var) {
        return IsotropicGaussian(Vec(d, 0.0), var);
    }
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

// KL(q || p) in nats, closed form for isotropic Gaussians:
//   (d/2)(r - 1 - ln r) + ||mu_q - mu_p||^2 / (2 sigma_p^2),  r = sigma_q^2/sigma_p^2.
inline double kl_isotropic(const IsotropicGaussian& q, const IsotropicGaussian& p) {
    if (q.dim() != p.dim())
        throw std::invalid_argument("kl_isotropic: dimension mismatch");
    const double d = static_cast<double>(q.dim());
    const double r = q.variance / p.variance;
    double shift = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) {
        const double diff = q.mean[i] - p.mean[i];
        shift += diff * diff;
    }
    return 0.5 * d * (r - 1.0 - std::log(r)) + shift / (2.0 * p.variance);
}

inline std::vector<Predictor> sample(const IsotropicGaussian& g, std::size_t n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample: n < 1");
    const double sd = std::sqrt(g.variance);
    std::vector<Predictor> out(n);
    for (auto& h : out) {
        h.coords.resize(g.dim());
        for (std::size_t i = 0; i < g.dim(); ++i) h.coords[i] = g.mean[i] + sd * rng.normal();
    }
    return out;
}

// One draw from the centered isotropic Gaussian with per-coordinate standard
// deviation `std`, conditioned on the hypercube [-half_side, half_side]^d.
// Per-coordinate rejection; acceptance is ~95% per coordinate at std=5,
// half_side=10.
inline Vec sample_truncated(double std_dev, double half_side, std::size_t d, RngStream& rng) {
    if (!(std_dev > 0.0)) throw std::invalid_argument("sample_truncated: std <= 0");
    if (!(half_side > 0.0)) throw std::invalid_argument("sample_truncated: half_side <= 0");
    Vec v(d);
    for (std::size_t i = 0; i < d; ++i) {
        double x;
        do {
            x = std_dev * rng.normal();
        } while (std::abs(x) > half_side);
        v[i] = x;
    }
    return v;
}

// Monte-Carlo expectation E_{h~g}[fn(h)] with standard error of the mean.
inline McEstimate mc_expect(const IsotropicGaussian& g,
                            const std::function<double(const Predictor&)>& fn, std::size_t n,
                            RngStream& rng) {
    if (n < 2) throw std::invalid_argument("mc_expect: n < 2");
    const double sd = std::sqrt(g.variance);
    Predictor h;
    h.coords.resize(g.dim());
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < g.dim(); ++i) h.coords[i] = g.mean[i] + sd * rng.normal();
        const double v = fn(h);
        if (!std::isfinite(v))
            throw std::runtime_error("mc_expect: non-finite value at draw " + std::to_string(k));
        sum += v;
        sumsq += v * v;
    }
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    const double var = std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn), n, rng.seed()};
}

}  // namespace pacbound
