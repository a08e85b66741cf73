#pragma once

// Closed-form Black-Scholes layer: normal CDF (exact and the sigmoid
// approximation used inside networks), vanilla, digital and single-barrier
// prices. Every function takes the log-price s, not the spot.

#include "bergomi/option_kind.hpp"

namespace bergomi {

/// Standard normal CDF via erfc. Exact to double precision.
double norm_cdf(double z);

/// Standard normal density.
double norm_pdf(double z);

/// sigmoid(2 sqrt(2/pi) (z + 0.044715 z^3)). Differentiable stand-in for N(z)
/// used by the network singular terms. Throws DomainError on non-finite z.
double norm_cdf_approx(double z);

struct BsInputs {
    double s = 0.0;       ///< log-price
    double strike = 100.0;
    double barrier = 100.0; ///< ignored for vanilla kinds
    double tau = 0.0;     ///< T - t
    double sigma = 0.0;
    double r = 0.0;
    double q = 0.0;
    OptionKind kind = OptionKind::VanillaCall;
};

/// Vanilla call or put (the call/put side of `kind` decides). tau == 0 or
/// sigma == 0 return the (discounted) intrinsic value.
double bs_vanilla(const BsInputs& in);

/// Digital call 1{S_T > K} or digital put 1{S_T < K}, discounted.
double bs_digital(const BsInputs& in);

/// Knock-in / knock-out price for the eight barrier kinds. Knock-outs are
/// vanilla minus knock-in. Throws DomainError outside the applicability
/// region: up kinds need s <= ln B, down kinds s >= ln B, up calls B >= K,
/// down puts B <= K. Sigma is clamped below at 1e-8.
double bs_barrier(const BsInputs& in);

/// True when (s, B, K) lies in the region where bs_barrier is defined for `kind`.
bool barrier_applicable(OptionKind kind, double s, double strike, double barrier);

} // namespace bergomi
