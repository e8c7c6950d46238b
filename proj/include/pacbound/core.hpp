#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pacbound/rng.hpp"

namespace pacbound {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// A predictor is a weight vector in R^d.
struct Predictor {
    Vec coords;

    std::size_t dim() const { return coords.size(); }
    double norm() const { return pacbound::norm(coords); }
};

struct DataPoint {
    Vec x;
    double y = 0.0;
};

// Ordered m-sample. split(k) yields the prefix of size k and the suffix of
// size m-k, preserving order.
struct Dataset {
    std::vector<DataPoint> points;

    std::size_t m() const { return points.size(); }

    std::pair<Dataset, Dataset> split(std::size_t k) const {
        if (k > m()) throw std::invalid_argument("Dataset::split: k > m");
        Dataset lo, hi;
        lo.points.assign(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(k));
        hi.points.assign(points.begin() + static_cast<std::ptrdiff_t>(k), points.end());
        return {std::move(lo), std::move(hi)};
    }
};

enum class LossKind {
    AbsoluteLinear,           // l(h,(x,y)) = |<h,x> - y|,  K(h) = B*||h|| + C
    ZeroOneLogisticThreshold  // l(h,(x,y)) = |1{<h,x> > 0} - y|,  K(h) = C (constant)
};

// A loss paired with its envelope parameters. The envelope K(h) upper-bounds
// the loss for every data point (the hypothesis-dependent range condition).
struct LossSpec {
    LossKind kind = LossKind::AbsoluteLinear;
    double B = 0.0;
    double C = 0.0;
};

struct degenerate_envelope_error : std::domain_error {
    using std::domain_error::domain_error;
};

inline double loss(const LossSpec& spec, const Predictor& h, const DataPoint& z) {
    switch (spec.kind) {
        case LossKind::AbsoluteLinear:
            return std::abs(dot(h.coords, z.x) - z.y);
        case LossKind::ZeroOneLogisticThreshold: {
            // phi(h^T x) > 1/2  <=>  h^T x > 0; the boundary h^T x = 0 predicts 0.
            const double pred = dot(h.coords, z.x) > 0.0 ? 1.0 : 0.0;
            return std::abs(pred - z.y);
        }
    }
    throw std::logic_error("loss: unknown kind");
}

inline double envelope(const LossSpec& spec, const Predictor& h) {
    switch (spec.kind) {
        case LossKind::AbsoluteLinear:
            return spec.B * h.norm() + spec.C;
        case LossKind::ZeroOneLogisticThreshold:
            return spec.C;
    }
    throw std::logic_error("envelope: unknown kind");
}

inline double empirical_risk(const LossSpec& spec, const Predictor& h, const Dataset& s) {
    if (s.m() == 0) throw std::invalid_argument("empirical_risk: empty dataset");
    double total = 0.0;
    for (const auto& z : s.points) total += loss(spec, h, z);
    return total / static_cast<double>(s.m());
}

using DataPointSampler = std::function<DataPoint(RngStream&)>;

struct RiskEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo estimate of the theoretical risk R(h) = E[l(h,Z)] from n fresh
// draws of the data generator. Deterministic given the stream's seed.
inline RiskEstimate true_risk_mc(const LossSpec& spec, const Predictor& h,
                                 const DataPointSampler& sampler, std::size_t n,
                                 RngStream& rng) {
    if (n < 2) throw std::invalid_argument("true_risk_mc: n < 2");
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = loss(spec, h, sampler(rng));
        sum += v;
        sumsq += v * v;
    }
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    const double var = std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn)};
}

// Witness of the self-bounding property of f(x) = (1/K) sum_i (K - l(h,x_i)):
// f is (beta, (1-beta)m)-self-bounding for any beta in [0,1]. The witness
// carries every quantity needed to check the definition directly.
struct SelfBoundingWitness {
    double beta = 0.0;
    double f_value = 0.0;
    std::vector<double> per_index_gaps;  // f(x) - f_i(x^(i))
    double gap_sum = 0.0;

    std::size_t m() const { return per_index_gaps.size(); }

    bool satisfies_invariants(double tol = 0.0) const {
        const double mm = static_cast<double>(m());
        if (f_value < -tol || f_value > mm + tol) return false;
        for (double g : per_index_gaps)
            if (g < -tol || g > 1.0 + tol) return false;
        return gap_sum <= beta * f_value + (1.0 - beta) * mm + tol;
    }
};

inline SelfBoundingWitness self_bounding_witness(const LossSpec& spec, const Predictor& h,
                                                 const Dataset& s, double beta) {
    if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("self_bounding_witness: beta outside [0,1]");
    const double K = envelope(spec, h);
    if (K <= 0.0) throw degenerate_envelope_error("self_bounding_witness: K(h) = 0");

    const std::size_t m = s.m();
    std::vector<double> contrib(m);
    double f = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        contrib[i] = (K - loss(spec, h, s.points[i])) / K;
        f += contrib[i];
    }

    SelfBoundingWitness w;
    w.beta = beta;
    w.f_value = f;
    w.per_index_gaps.resize(m);
    w.gap_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        // f - f_i collapses to the i-th contribution (K - l_i)/K; using it
        // directly keeps gap_sum bit-identical to f_value.
        w.per_index_gaps[i] = contrib[i];
        w.gap_sum += w.per_index_gaps[i];
    }
    return w;
}

}  // namespace pacbound
