#include "bergomi/sampler.hpp"

#include "bergomi/encoding.hpp"

#include <algorithm>
#include <cmath>

namespace bergomi {

double sample_rho12(double rho1, double rho2, Rng& rng) {
    const double c = rho1 * rho2;
    const double w = std::sqrt(std::max(0.0, (1.0 - rho1 * rho1) * (1.0 - rho2 * rho2)));
    return std::clamp(uniform(rng, c - w, c + w), -1.0, 1.0);
}

FactorLaw factor_law(double t, double k1, double k2, double rho12) {
    return {-std::expm1(-2.0 * k1 * t) / (2.0 * k1) + 0.01, -std::expm1(-2.0 * k2 * t) / (2.0 * k2) + 0.01,
            rho12 * -std::expm1(-(k1 + k2) * t) / (k1 + k2)};
}

std::pair<double, double> sample_factors_raw(double t, double k1, double k2, double rho12, Rng& rng) {
    const FactorLaw law = factor_law(t, k1, k2, rho12);
    const double l11 = std::sqrt(law.var1);
    const double l21 = law.cov / l11;
    const double l22 = std::sqrt(std::max(0.0, law.var2 - l21 * l21));
    const double z1 = std_normal(rng);
    const double z2 = std_normal(rng);
    return {l11 * z1, l21 * z1 + l22 * z2};
}

std::pair<double, double> sample_factors(double t, double k1, double k2, double rho12, Rng& rng) {
    auto [x1, x2] = sample_factors_raw(t, k1, k2, rho12, rng);
    const double b1 = factor_bound(k1);
    const double b2 = factor_bound(k2);
    return {std::clamp(x1, -b1, b1), std::clamp(x2, -b2, b2)};
}

std::pair<double, double> log_barrier_range(OptionKind kind) {
    const double lk = std::log(kStrike);
    if (is_vanilla(kind)) return {lk, lk};
    const double lo = std::log(kStrike / 1.5);
    const double hi = std::log(1.5 * kStrike);
    if (is_call(kind) && is_up(kind)) return {lk, hi};
    if (!is_call(kind) && !is_up(kind)) return {lo, lk};
    return {lo, hi};
}

std::pair<double, double> log_spot_range(OptionKind kind, double log_barrier, bool test) {
    const double lo = test ? std::log(kStrike / 2.0) : std::log(kStrike / 20.0);
    const double hi = test ? std::log(2.0 * kStrike) : std::log(20.0 * kStrike);
    if (is_vanilla(kind)) return {lo, hi};
    return is_up(kind) ? std::pair{lo, log_barrier} : std::pair{log_barrier, hi};
}

ParamPoint sample_point(const SamplingConfig& cfg, Rng& rng) {
    ParamPoint p;
    p.kind = cfg.kind;
    do {
        p.maturity = uniform(rng, 0.0, 3.0);
        p.t = cfg.test ? 0.0 : uniform(rng, 0.0, p.maturity);
    } while (p.maturity - p.t < 1e-6);

    auto& m = p.params;
    m.r = uniform(rng, 0.0, 0.1);
    m.q = uniform(rng, 0.0, 0.1);
    std::vector<double> xi(static_cast<std::size_t>(curve_segments(cfg.mode)));
    for (double& v : xi) v = uniform(rng, 0.05 * 0.05, 0.5 * 0.5);
    m.curve = ForwardVarianceCurve::for_mode(cfg.mode, xi);
    m.omega = uniform(rng, 0.0, 3.0);
    m.theta = uniform(rng, 0.0, 1.0);
    m.k1 = uniform(rng, 0.1, 4.0);
    m.k2 = uniform(rng, 2.0, 12.0);
    m.rho1 = uniform(rng, -0.9, 0.2);
    m.rho2 = uniform(rng, -0.9, 0.2);
    m.rho12 = sample_rho12(m.rho1, m.rho2, rng);

    const auto [blo, bhi] = log_barrier_range(cfg.kind);
    const double log_b = is_vanilla(cfg.kind) ? blo : uniform(rng, blo, bhi);
    p.barrier = is_vanilla(cfg.kind) ? kStrike : std::exp(log_b);
    const auto [slo, shi] = log_spot_range(cfg.kind, log_b, cfg.test);
    p.s = uniform(rng, slo, shi);
    // exp(log B) may round; keep s on the admissible side of ln B as computed from B.
    if (is_barrier(cfg.kind)) {
        const double lb = std::log(p.barrier);
        p.s = is_up(cfg.kind) ? std::min(p.s, lb) : std::max(p.s, lb);
    }

    if (cfg.test) {
        p.x1 = p.x2 = 0.0;
    } else {
        std::tie(p.x1, p.x2) = sample_factors(p.t, m.k1, m.k2, m.rho12, rng);
    }
    return p;
}

std::vector<ParamPoint> sample_batch(const SamplingConfig& cfg, std::uint64_t stream, std::size_t count) {
    Rng rng = make_rng(cfg.seed, stream, cfg.test ? 1 : 0);
    std::vector<ParamPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_point(cfg, rng));
    return out;
}

} // namespace bergomi
