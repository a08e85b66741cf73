#pragma once

// Payoff-matched singular terms. Templated over the scalar type so the same
// expressions run on plain doubles (pricing, tests) and on Tape::Var (training,
// derivatives). N is always the sigmoid approximation.
//
// At tau == 0 the CDF arguments are replaced by their limits: N(+inf) = 1,
// N(-inf) = 0 and 1/2 exactly at the kink, so no 1/sqrt(tau) is ever formed.

#include "bergomi/errors.hpp"
#include "bergomi/option_kind.hpp"
#include "bergomi/tape.hpp"

#include <cmath>

namespace bergomi {

template <class S>
struct SingularArgs {
    S s;      ///< log-price
    S tau;    ///< T - t
    S sigbar; ///< averaged volatility over [t, T]; sqrt(xi_0^T) when tau == 0
    S beta;
    S gamma;
    double strike = 100.0;
    double barrier = 100.0;
    double r = 0.0;
    double q = 0.0;
    OptionKind kind = OptionKind::VanillaCall;
};

namespace detail {

inline double lift(double, double c) { return c; }
inline Var lift(const Var& like, double c) { return like.tape()->constant(c); }
inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

inline double step_limit(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

/// N(eta (h/v + sign v/2)), or its tau -> 0 limit.
template <class S>
S cdf_term(const S& h, const S& v, double eta, double sign, bool expired) {
    using std::exp;
    if (expired) return lift(h, step_limit(eta * value_of(h)));
    return ncdf_approx(eta * (h / v + sign * 0.5 * v));
}

/// eta S e^{-q tau} N(d1) - eta K e^{-r tau} N(d2) with generic h.
template <class S>
S bs_block(const SingularArgs<S>& a, const S& spot_factor, const S& h, const S& v, double eta, bool expired) {
    using std::exp;
    const S n1 = cdf_term(h, v, eta, 1.0, expired);
    const S n2 = cdf_term(h, v, eta, -1.0, expired);
    const S disc = exp(-a.r * a.tau);
    return eta * (spot_factor * n1) - (eta * a.strike) * (disc * n2);
}

} // namespace detail

/// alpha_v: Black-Scholes form with drift beta and volatility gamma * sigbar.
template <class S>
S singular_vanilla(const SingularArgs<S>& a) {
    using std::exp;
    using std::log;
    using std::sqrt;
    if (!is_vanilla(a.kind)) throw UsageError("singular_vanilla needs a vanilla kind");
    const double eta = bergomi::eta(a.kind);
    const bool expired = detail::value_of(a.tau) <= 0.0;
    const S h = a.s - std::log(a.strike) + a.beta * a.tau;
    const S v = expired ? detail::lift(a.s, 0.0) : a.gamma * a.sigbar * sqrt(a.tau);
    const S spot = exp(a.s - a.q * a.tau);
    return detail::bs_block(a, spot, h, v, eta, expired);
}

/// F1 = N(zeta h_B / v): a smoothed barrier-touch indicator.
template <class S>
S singular_barrier_f1(const SingularArgs<S>& a) {
    using std::sqrt;
    if (!is_knock_in(a.kind)) throw UsageError("singular_barrier_f1 needs a knock-in kind");
    const double zeta = bergomi::zeta(a.kind);
    const S hb = a.s - std::log(a.barrier) + (a.r - a.q + a.beta) * a.tau;
    if (detail::value_of(a.tau) <= 0.0) return detail::lift(a.s, detail::step_limit(zeta * detail::value_of(hb)));
    const S v = a.gamma * a.sigbar * sqrt(a.tau);
    return ncdf_approx(zeta * hb / v);
}

/// F2 = F21 + F22 exp((s - ln B)(1 - 2(r - q)/sigbar^2)), the barrier
/// Black-Scholes form for up-in puts and down-in calls.
template <class S>
S singular_barrier_f2(const SingularArgs<S>& a) {
    using std::exp;
    using std::sqrt;
    if (a.kind != OptionKind::UpInPut && a.kind != OptionKind::DownInCall)
        throw UsageError("singular_barrier_f2 needs an up-in put or a down-in call");
    if (!(detail::value_of(a.sigbar) > 0.0)) throw DomainError("singular_barrier_f2 needs sigbar > 0");
    const double eta = bergomi::eta(a.kind);
    const bool expired = detail::value_of(a.tau) <= 0.0;
    const double ln_b = std::log(a.barrier);
    const double ln_k = std::log(a.strike);
    const S drift = (a.r - a.q + a.beta) * a.tau;
    const S v = expired ? detail::lift(a.s, 0.0) : a.gamma * a.sigbar * sqrt(a.tau);
    const S spot = exp(a.s - a.q * a.tau);
    const bool strike_beyond = eta * (a.strike - a.barrier) < 0.0;

    const S h_tilde = strike_beyond ? (ln_b - a.s) + drift : (2.0 * ln_b - ln_k - a.s) + drift;
    const S mirror_spot = (a.barrier * a.barrier) * exp(-a.s - a.q * a.tau);
    const S f22 = detail::bs_block(a, mirror_spot, h_tilde, v, eta, expired);
    const S power = (a.s - ln_b) * (1.0 - 2.0 * (a.r - a.q) / (a.sigbar * a.sigbar));
    S out = f22 * exp(power);
    if (strike_beyond) {
        const S hk = (a.s - ln_k) + drift;
        const S hb = (a.s - ln_b) + drift;
        out = out + (detail::bs_block(a, spot, hk, v, eta, expired) - detail::bs_block(a, spot, hb, v, eta, expired));
    }
    return out;
}

/// F1 for up-in calls and down-in puts, F2 for up-in puts and down-in calls.
template <class S>
S singular_barrier(const SingularArgs<S>& a) {
    if (a.kind == OptionKind::UpInPut || a.kind == OptionKind::DownInCall) return singular_barrier_f2(a);
    return singular_barrier_f1(a);
}

} // namespace bergomi
