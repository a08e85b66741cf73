#include "bergomi/analytic.hpp"

#include "bergomi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bergomi {

namespace {

constexpr double kSigmaFloor = 1e-8;
constexpr double kLogTolerance = 1e-12;

void check_common(const BsInputs& in) {
    if (!(in.strike > 0.0)) throw DomainError("strike must be positive");
    if (!(in.tau >= 0.0)) throw DomainError("tau must be non-negative");
    if (!(in.sigma >= 0.0)) throw DomainError("sigma must be non-negative");
    if (!std::isfinite(in.s) || !std::isfinite(in.r) || !std::isfinite(in.q) || !std::isfinite(in.tau) ||
        !std::isfinite(in.sigma))
        throw DomainError("non-finite Black-Scholes input");
}

// Vanilla price with strike k; eta selects call/put.
double vanilla_raw(double s, double k, double tau, double sigma, double r, double q, double eta) {
    if (tau == 0.0) return std::max(eta * (std::exp(s) - k), 0.0);
    const double fwd_spot = std::exp(s - q * tau);
    const double disc_strike = k * std::exp(-r * tau);
    if (sigma == 0.0) return std::max(eta * (fwd_spot - disc_strike), 0.0);
    const double v = sigma * std::sqrt(tau);
    const double h = s - std::log(k) + (r - q) * tau;
    return eta * fwd_spot * norm_cdf(eta * (h / v + 0.5 * v)) - eta * disc_strike * norm_cdf(eta * (h / v - 0.5 * v));
}

double digital_raw(double s, double k, double tau, double sigma, double r, double q, double eta) {
    const double h = s - std::log(k) + (r - q) * tau;
    if (tau == 0.0) return (eta * h > 0.0) ? 1.0 : 0.0;
    const double disc = std::exp(-r * tau);
    if (sigma == 0.0) return (eta * h > 0.0) ? disc : 0.0;
    const double v = sigma * std::sqrt(tau);
    return disc * norm_cdf(eta * (h / v - 0.5 * v));
}


double log_norm_cdf(double z) {
    if (z > -30.0) return std::log(norm_cdf(z));
    // Asymptotic tail: N(z) = phi(z)/|z| * (1 - 1/z^2 + 3/z^4 - 15/z^6)
    const double z2 = z * z;
    return -0.5 * z2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-z) +
           std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

// log(N(u) - N(l)) for l < u, taking differences in whichever tail keeps precision.
double log_norm_interval(double l, double u) {
    if (!(u > l)) return -std::numeric_limits<double>::infinity();
    if (u <= 0.0) {
        const double lu = log_norm_cdf(u);
        return lu + std::log1p(-std::exp(log_norm_cdf(l) - lu));
    }
    if (l >= 0.0) {
        const double ll = log_norm_cdf(-l);
        return ll + std::log1p(-std::exp(log_norm_cdf(-u) - ll));
    }
    return std::log(norm_cdf(u) - norm_cdf(l));
}

// Reflection term of a single-barrier knock-in: discounted expectation of (w0 e^z + w1) 1{a < z < b}
// under the mirrored law, scaled by (S/B)^(1 - 2(r-q)/sigma^2). The scale and the Gaussian mass are
// combined in log space since either may over/underflow on its own.
double reflected_leg(double s, double log_b, double tau, double sigma, double r, double q, double a, double b,
                     double w0, double w1) {
    const double var = sigma * sigma * tau;
    const double sd = std::sqrt(var);
    const double log_scale = (s - log_b) * (1.0 + 2.0 * (q - r) / (sigma * sigma));
    const double m = 2.0 * log_b - s + (r - q - 0.5 * sigma * sigma) * tau;
    const double lo = (a - m) / sd;
    const double hi = (b - m) / sd;
    double out = 0.0;
    if (w1 != 0.0) out += w1 * std::exp(log_scale - r * tau + log_norm_interval(lo, hi));
    if (w0 != 0.0) out += w0 * std::exp(log_scale - r * tau + m + 0.5 * var + log_norm_interval(lo - sd, hi - sd));
    return out;
}

} // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double norm_cdf_approx(double z) {
    if (!std::isfinite(z)) throw DomainError("norm_cdf_approx: non-finite argument");
    const double a = 2.0 * std::sqrt(2.0 / std::numbers::pi) * (z + 0.044715 * z * z * z);
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double bs_vanilla(const BsInputs& in) {
    check_common(in);
    return vanilla_raw(in.s, in.strike, in.tau, in.sigma, in.r, in.q, eta(in.kind));
}

double bs_digital(const BsInputs& in) {
    check_common(in);
    return digital_raw(in.s, in.strike, in.tau, in.sigma, in.r, in.q, eta(in.kind));
}

bool barrier_applicable(OptionKind kind, double s, double strike, double barrier) {
    if (is_vanilla(kind)) return true;
    const double log_b = std::log(barrier);
    if (is_up(kind) && s > log_b + kLogTolerance) return false;
    if (!is_up(kind) && s < log_b - kLogTolerance) return false;
    const OptionKind in = knock_in_of(kind);
    if (in == OptionKind::UpInCall && barrier < strike) return false;
    if (in == OptionKind::DownInPut && barrier > strike) return false;
    return true;
}

double bs_barrier(const BsInputs& in) {
    check_common(in);
    if (is_vanilla(in.kind)) throw UsageError("bs_barrier called with a vanilla kind");
    if (!(in.barrier > 0.0)) throw DomainError("barrier must be positive");
    if (!barrier_applicable(in.kind, in.s, in.strike, in.barrier))
        throw DomainError("bs_barrier: input outside the applicability region");

    const double K = in.strike;
    const double B = in.barrier;
    const double s = in.s;
    const double tau = in.tau;
    const double r = in.r;
    const double q = in.q;
    const double sigma = std::max(in.sigma, kSigmaFloor);
    const OptionKind knock_in = knock_in_of(in.kind);
    const double et = eta(in.kind);
    const double vanilla = vanilla_raw(s, K, tau, sigma, r, q, et);

    double knock_in_price = 0.0;
    if (tau == 0.0) {
        const bool touched = is_up(knock_in) ? s >= std::log(B) - kLogTolerance : s <= std::log(B) + kLogTolerance;
        knock_in_price = touched ? vanilla : 0.0;
    } else {
        const double log_b = std::log(B);
        const double log_k = std::log(K);
        const double inf = std::numeric_limits<double>::infinity();
        auto cv = [&](double k) { return vanilla_raw(s, k, tau, sigma, r, q, 1.0); };
        auto cd = [&](double k) { return digital_raw(s, k, tau, sigma, r, q, 1.0); };
        auto pv = [&](double k) { return vanilla_raw(s, k, tau, sigma, r, q, -1.0); };
        auto pd = [&](double k) { return digital_raw(s, k, tau, sigma, r, q, -1.0); };
        // Paths that touch the barrier and end in [a, b] (log space), paying w0 e^z + w1.
        auto crossed = [&](double a, double b, double w0, double w1) {
            return reflected_leg(s, log_b, tau, sigma, r, q, a, b, w0, w1);
        };

        switch (knock_in) {
        case OptionKind::UpInCall:
            knock_in_price = cv(B) + (B - K) * cd(B) + crossed(log_k, log_b, 1.0, -K);
            break;
        case OptionKind::DownInCall: {
            const double hi = std::max(B, K);
            const double gap = std::max(0.0, B - K);
            knock_in_price = cv(K) - cv(hi) - gap * cd(B) + crossed(std::log(hi), inf, 1.0, -K);
            break;
        }
        case OptionKind::UpInPut: {
            const double lo = std::min(B, K);
            const double gap = std::max(0.0, K - B);
            knock_in_price = pv(K) - pv(lo) - gap * pd(B) + crossed(-inf, std::log(lo), -1.0, K);
            break;
        }
        default: // DownInPut
            knock_in_price = pv(B) - (B - K) * pd(B) + crossed(log_b, log_k, -1.0, K);
            break;
        }
    }
    return is_knock_in(in.kind) ? knock_in_price : vanilla - knock_in_price;
}

} // namespace bergomi
