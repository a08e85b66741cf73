#pragma once

// Two-factor Bergomi model state and the deterministic quantities derived from
// it: factor variance, instantaneous variance, averaged volatility, the
// training-domain bounds and the deterministic-factor boundary estimate.

#include "bergomi/curve.hpp"
#include "bergomi/option_kind.hpp"

namespace bergomi {

/// Strike used throughout; networks are trained for this single strike.
inline constexpr double kStrike = 100.0;

struct BergomiParams {
    double omega = 0.0;
    double k1 = 1.0;
    double k2 = 10.0;
    double theta = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double rho12 = 0.0;
    double r = 0.0;
    double q = 0.0;
    ForwardVarianceCurve curve = ForwardVarianceCurve::constant(0.04);
};

/// One evaluation point of a pricing function: state (s, t, x1, x2), contract
/// (maturity, barrier, kind) and model parameters.
struct ParamPoint {
    double s = 0.0;
    double t = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    double maturity = 1.0;
    double barrier = kStrike; ///< unused by vanilla kinds
    BergomiParams params;
    OptionKind kind = OptionKind::VanillaCall;

    double tau() const { return maturity - t; }
};

/// Three-by-three correlation matrix of (W^S, W^1, W^2) is positive semidefinite.
bool correlation_admissible(double rho1, double rho2, double rho12, double tol = 1e-12);

/// Throws DomainError when the point violates the model invariants.
void validate(const ParamPoint& p);

double alpha_theta(double theta, double rho12);

/// Variance of x_t^t = alpha_theta((1-theta) X^1_t + theta X^2_t) started at zero.
double var_xtt(double t, double k1, double k2, double theta, double rho12);

/// xi_t^t = xi_0^t exp(omega x_t^t - omega^2/2 var(x_t^t)). sigma^2 of the PDE.
double xi_inst(double t, double x1, double x2, const BergomiParams& params);

/// sqrt((1/(T-t)) int_t^T xi_0^u du), exact for the step curve. Requires t < T.
double avg_sigma(double t, double T, const ForwardVarianceCurve& curve);

/// d avg_sigma / dt, using the curve value just right of t.
double avg_sigma_dt(double t, double T, const ForwardVarianceCurve& curve);

/// 3 sqrt(1/(2k) + 0.01): the symmetric OU factor bound.
double factor_bound(double k);

struct DomainBounds {
    double s_min;
    double s_max;
    double x1_min;
    double x1_max;
    double x2_min;
    double x2_max;
};

/// Training-domain box; the s range is truncated at ln B for barrier kinds.
DomainBounds domain_bounds(const ParamPoint& p);

/// Test s-range: [ln(K/2), ln(2K)] intersected with the barrier side.
std::pair<double, double> test_s_range(OptionKind kind, double barrier);

/// Vanilla price with the factors frozen on their deterministic decay paths
/// x_j e^{-k_j (u - t)}: Black-Scholes with the resulting effective volatility.
/// Composite Simpson over each curve segment intersected with [t, T].
double boundary_estimate(const ParamPoint& p);

/// Effective volatility used by boundary_estimate.
double deterministic_factor_vol(const ParamPoint& p);

} // namespace bergomi
