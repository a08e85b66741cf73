#pragma once

// PDE residual and the per-sample losses for vanilla and knock-in networks.
//
// Every sample contributes all terms: the interior residual at the sampled
// point plus boundary residuals at copies of it with s, t or (x1, x2)
// overridden. Boundary targets for vanillas follow the analytic limits
// (V(s_m) = K e^{-r tau} - e^{s_m - q tau} for puts, V(s_M) = e^{s_M - q tau} -
// K e^{-r tau} for calls).

#include "bergomi/network.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace bergomi {

struct LossConfig {
    double lambda1 = 0.01; ///< weight of the two volatility-boundary terms
    double lambda2 = 25.0; ///< weight of the knock-in terminal condition
    double h_floor = 0.25; ///< relative-error floor used in evaluation
};

/// Weighted squared residuals of one sample (or batch means of them).
struct LossTerms {
    double pde = 0.0;
    double initial = 0.0;
    double s_low = 0.0;   ///< s = s_m
    double s_high = 0.0;  ///< s = s_M
    double vol_low = 0.0; ///< (x1, x2) = (x1_m, x2_m)
    double vol_high = 0.0;
    double barrier = 0.0; ///< s = ln B against the frozen vanilla

    double total() const { return pde + initial + s_low + s_high + vol_low + vol_high + barrier; }
};

inline constexpr std::array<std::string_view, 7> kLossTermNames = {"pde",      "initial",  "s_low",  "s_high",
                                                                   "vol_low",  "vol_high", "barrier"};
double loss_term(const LossTerms& t, std::size_t i);

/// min(1, 4 K^2 e^{-2s}).
double phi_weight(double s);

/// Coefficients c such that H = sum_c c_c V_c over the jet components of V.
Jet pde_coefficients(const ParamPoint& p);

/// H from the derivatives of V at p. Throws DomainError at tau <= 0.
double pde_residual(const Jet& v, const ParamPoint& p);
double pde_residual(const PricingNetwork& net, const ParamPoint& p);

/// Single-sample losses.
LossTerms loss_vanilla(const PricingNetwork& net, const ParamPoint& p, const LossConfig& cfg);
LossTerms loss_knock_in(const PricingNetwork& net, const PricingNetwork& vanilla, const ParamPoint& p,
                        const LossConfig& cfg);

struct BatchLoss {
    LossTerms mean;
    double total = 0.0; ///< compensated mean of the per-sample totals
};

/// Mean loss over a batch; when `grad` is non-empty it receives the gradient of
/// the mean total with respect to net's weights (overwritten). `vanilla` must be
/// given for knock-in networks and is only read.
BatchLoss batch_loss(const PricingNetwork& net, const PricingNetwork* vanilla, std::span<const ParamPoint> points,
                     const LossConfig& cfg, std::span<double> grad = {});

/// Per-sample totals for a batch (no gradient).
std::vector<LossTerms> per_sample_losses(const PricingNetwork& net, const PricingNetwork* vanilla,
                                         std::span<const ParamPoint> points, const LossConfig& cfg);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> xs);

} // namespace bergomi
