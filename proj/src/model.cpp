#include "bergomi/model.hpp"

#include "bergomi/analytic.hpp"
#include "bergomi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bergomi {

namespace {

constexpr int kSimpsonIntervals = 64;

// (1 - e^{-a t}) / a with a removable singularity at a = 0.
double decay_integral(double a, double t) {
    if (a * t < 1e-8) return t * (1.0 - 0.5 * a * t);
    return -std::expm1(-a * t) / a;
}

} // namespace

bool correlation_admissible(double rho1, double rho2, double rho12, double tol) {
    if (std::abs(rho1) > 1.0 || std::abs(rho2) > 1.0 || std::abs(rho12) > 1.0) return false;
    const double width = std::sqrt(std::max(0.0, (1.0 - rho1 * rho1) * (1.0 - rho2 * rho2)));
    const double centre = rho1 * rho2;
    return rho12 >= centre - width - tol && rho12 <= centre + width + tol;
}

void validate(const ParamPoint& p) {
    const auto& m = p.params;
    if (!(p.t >= 0.0) || !(p.t <= p.maturity)) throw DomainError("need 0 <= t <= T");
    if (p.maturity > m.curve.horizon()) throw DomainError("maturity beyond the forward variance curve");
    if (!(m.omega >= 0.0)) throw DomainError("omega must be >= 0");
    if (!(m.k1 > 0.0) || !(m.k2 > 0.0)) throw DomainError("mean reversion rates must be positive");
    if (!(m.theta >= 0.0 && m.theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
    if (!correlation_admissible(m.rho1, m.rho2, m.rho12)) throw DomainError("correlations are not positive semidefinite");
    if (is_barrier(p.kind) && !(p.barrier > 0.0)) throw DomainError("barrier must be positive");
    if (!std::isfinite(p.s) || !std::isfinite(p.x1) || !std::isfinite(p.x2)) throw DomainError("non-finite state");
}

double alpha_theta(double theta, double rho12) {
    const double radicand = (1.0 - theta) * (1.0 - theta) + theta * theta + 2.0 * rho12 * theta * (1.0 - theta);
    if (!(radicand > 0.0)) throw DomainError("alpha_theta: non-positive radicand");
    return 1.0 / std::sqrt(radicand);
}

double var_xtt(double t, double k1, double k2, double theta, double rho12) {
    const double a = alpha_theta(theta, rho12);
    const double w1 = 1.0 - theta;
    const double w2 = theta;
    return a * a *
           (w1 * w1 * decay_integral(2.0 * k1, t) + w2 * w2 * decay_integral(2.0 * k2, t) +
            2.0 * w1 * w2 * rho12 * decay_integral(k1 + k2, t));
}

double xi_inst(double t, double x1, double x2, const BergomiParams& m) {
    const double base = m.curve.value_at(t);
    if (m.omega == 0.0) return base;
    const double a = alpha_theta(m.theta, m.rho12);
    const double x = a * ((1.0 - m.theta) * x1 + m.theta * x2);
    const double var = var_xtt(t, m.k1, m.k2, m.theta, m.rho12);
    return base * std::exp(m.omega * x - 0.5 * m.omega * m.omega * var);
}

double avg_sigma(double t, double T, const ForwardVarianceCurve& curve) {
    if (!(t < T)) throw DomainError("avg_sigma requires t < T");
    return std::sqrt(curve.integral(t, T) / (T - t));
}

double avg_sigma_dt(double t, double T, const ForwardVarianceCurve& curve) {
    const double sig = avg_sigma(t, T, curve);
    if (sig == 0.0) return 0.0;
    // Value on the segment containing (t, t + dt).
    const double nodes_right = std::nextafter(t, T);
    const double xi_t = curve.value_at(std::min(nodes_right, curve.horizon()));
    return (sig * sig - xi_t) / (2.0 * sig * (T - t));
}

double factor_bound(double k) {
    if (!(k > 0.0)) throw DomainError("factor_bound: k must be positive");
    return 3.0 * std::sqrt(1.0 / (2.0 * k) + 0.01);
}

std::pair<double, double> test_s_range(OptionKind kind, double barrier) {
    double lo = std::log(kStrike / 2.0);
    double hi = std::log(2.0 * kStrike);
    if (is_barrier(kind)) {
        if (is_up(kind))
            hi = std::log(barrier);
        else
            lo = std::log(barrier);
    }
    return {lo, hi};
}

DomainBounds domain_bounds(const ParamPoint& p) {
    DomainBounds b{};
    b.s_min = std::log(kStrike / 20.0);
    b.s_max = std::log(20.0 * kStrike);
    if (is_barrier(p.kind)) {
        if (is_up(p.kind))
            b.s_max = std::log(p.barrier);
        else
            b.s_min = std::log(p.barrier);
    }
    b.x1_max = factor_bound(p.params.k1);
    b.x1_min = -b.x1_max;
    b.x2_max = factor_bound(p.params.k2);
    b.x2_min = -b.x2_max;
    return b;
}

double deterministic_factor_vol(const ParamPoint& p) {
    const double t = p.t;
    const double T = p.maturity;
    if (!(T > t)) throw DomainError("deterministic_factor_vol requires t < T");
    const auto& m = p.params;
    if (m.omega == 0.0) return avg_sigma(t, T, m.curve);

    const double a = alpha_theta(m.theta, m.rho12);
    auto integrand = [&](double u) {
        const double x1 = p.x1 * std::exp(-m.k1 * (u - t));
        const double x2 = p.x2 * std::exp(-m.k2 * (u - t));
        const double x = a * ((1.0 - m.theta) * x1 + m.theta * x2);
        const double var = var_xtt(u, m.k1, m.k2, m.theta, m.rho12);
        return std::exp(m.omega * x - 0.5 * m.omega * m.omega * var);
    };

    double total = 0.0;
    double left = 0.0;
    const auto nodes = m.curve.nodes();
    const auto values = m.curve.values();
    for (std::size_t j = 0; j < nodes.size() && left < T; ++j) {
        const double lo = std::max(left, t);
        const double hi = std::min(nodes[j], T);
        left = nodes[j];
        if (!(hi > lo)) continue;
        const double h = (hi - lo) / kSimpsonIntervals;
        double acc = integrand(lo) + integrand(hi);
        for (int i = 1; i < kSimpsonIntervals; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(lo + i * h);
        total += values[j] * acc * h / 3.0;
    }
    if (!std::isfinite(total) || total < 0.0) throw NumericError("boundary_estimate: quadrature produced a non-finite value");
    return std::sqrt(total / (T - t));
}

double boundary_estimate(const ParamPoint& p) {
    if (!is_vanilla(p.kind)) throw UsageError("boundary_estimate is defined for vanilla kinds only");
    BsInputs in;
    in.s = p.s;
    in.strike = kStrike;
    in.tau = p.tau();
    in.r = p.params.r;
    in.q = p.params.q;
    in.kind = p.kind;
    in.sigma = in.tau > 0.0 ? deterministic_factor_vol(p) : 0.0;
    return bs_vanilla(in);
}

} // namespace bergomi
