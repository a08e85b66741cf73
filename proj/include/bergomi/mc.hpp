#pragma once

// Monte Carlo benchmarks for the two-factor Bergomi model.
//
// Time grid: N = ceil(steps_per_year * (T - t)) equal steps. Over step n the
// instantaneous variance is the exact average of the initial curve over the
// step times exp(omega x_n - omega^2/2 var(x_{u_n})) evaluated at the left end.
// Factors use the exact OU transition; the log-price uses Euler. Barriers are
// monitored at grid times only.
//
// Paths are generated in blocks; block k draws from stream (seed, k), and
// block statistics are merged in block order, so estimates do not depend on
// how blocks are scheduled.

#include "bergomi/model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bergomi {

enum class McScheme { Conditional, Euler, ImportanceSampling };

std::string_view to_string(McScheme s);
McScheme parse_mc_scheme(std::string_view text);

struct McConfig {
    std::size_t paths = 100000;
    std::size_t steps_per_year = 1000;
    std::uint64_t seed = 1;
    bool antithetic = false;
    std::size_t block = 1024; ///< paths per RNG stream (even when antithetic)
    /// Conditional vanilla pricer: use the equivalent forward S~ e^{-q tau},
    /// whose mean is known, as a control variate (regression coefficient).
    bool control_variate = true;
    /// When > 0, benchmark_price reruns with more paths until se <= target_se
    /// or max_paths is reached.
    double target_se = 0.0;
    std::size_t max_paths = 4000000;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t paths = 0;
    std::size_t steps = 0;
    McScheme scheme = McScheme::Euler;
    double weight_mean = 1.0; ///< mean likelihood-ratio weight (IS only)
    double weight_se = 0.0;
};

/// Coefficients expressing (W^1, W^2, W^S) through independent (Z^1, Z^2, Z^3):
/// W^1 = Z^1, W^2 = mu21 Z^1 + mu22 Z^2, W^S = mu31 Z^1 + mu32 Z^2 + mu33 Z^3.
struct CorrelationCoeffs {
    double mu21, mu22, mu31, mu32, mu33;
};

/// Throws DomainError when the correlations are not admissible. A radicand in
/// [-1e-12, 0) is clamped to 0. For |rho12| = 1 the limit needs rho2 = rho1 rho12.
CorrelationCoeffs correlation_coeffs(double rho1, double rho2, double rho12);

std::size_t grid_steps(double tau, std::size_t steps_per_year);

/// Terminal quantities of simulated paths, mostly for moment tests.
struct PathBundle {
    std::vector<double> s;      ///< log-price at T
    std::vector<double> x1;     ///< factors at T
    std::vector<double> x2;
    std::vector<double> w1;     ///< W^1_T - W^1_t
    std::vector<double> w2;
    std::vector<double> int_xi; ///< integral of xi_u^u over [t, T]
    std::vector<double> xi_first_path; ///< per-step variance of path 0
    std::size_t steps = 0;
};

PathBundle simulate_paths(const ParamPoint& p, const McConfig& mc);

/// Stock dimension integrated out by Black-Scholes along each variance path.
McEstimate price_vanilla_conditional(const ParamPoint& p, const McConfig& mc);

/// Plain Euler vanilla price.
McEstimate price_vanilla_euler(const ParamPoint& p, const McConfig& mc);

/// Plain Euler barrier price, discrete monitoring; any barrier kind.
McEstimate price_barrier_euler(const ParamPoint& p, const McConfig& mc);
/// Same engine restricted to barrier puts.
McEstimate price_barrier_put_euler(const ParamPoint& p, const McConfig& mc);

/// Barrier calls under a measure with the Z^3 drift flipped, reweighted by the
/// exact discrete likelihood ratio.
McEstimate price_barrier_call_is(const ParamPoint& p, const McConfig& mc);

/// Estimate with paths chosen so that se <= mc.target_se where possible: a
/// pilot run at mc.paths, then reruns sized from the latest se, each with more
/// paths, until the target is met or mc.max_paths is reached.
template <class Pricer>
McEstimate price_to_target(const ParamPoint& p, const McConfig& mc, Pricer&& pricer);

/// The benchmark each kind uses: conditional for vanillas, IS for barrier
/// calls, Euler for barrier puts.
McEstimate benchmark_price(const ParamPoint& p, const McConfig& mc);

template <class Pricer>
McEstimate price_to_target(const ParamPoint& p, const McConfig& mc, Pricer&& pricer) {
    McEstimate e = pricer(p, mc);
    const std::size_t unit = mc.antithetic ? 2 * mc.block : mc.block;
    McConfig more = mc;
    // A small pilot underestimates the se of heavy-tailed payoffs, so keep
    // resizing from the latest run until the target or the cap is reached.
    while (mc.target_se > 0.0 && e.se > mc.target_se && more.paths < mc.max_paths) {
        const double ratio = e.se / mc.target_se;
        const double want = 1.2 * ratio * ratio * static_cast<double>(more.paths);
        std::size_t n = static_cast<std::size_t>(std::min(want, static_cast<double>(mc.max_paths)));
        n = std::min(((n + unit - 1) / unit) * unit, mc.max_paths);
        if (mc.antithetic) n -= n % 2;
        if (n <= more.paths) break;
        more.paths = n;
        e = pricer(p, more);
    }
    return e;
}

} // namespace bergomi
