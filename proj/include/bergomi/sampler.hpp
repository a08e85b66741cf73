#pragma once

// Training and test points drawn uniformly over the parameter box, with the
// factors drawn from their time-t Gaussian law (variance inflated by 0.01) and
// clipped to the domain bounds.

#include "bergomi/model.hpp"
#include "bergomi/rng.hpp"

#include <utility>
#include <vector>

namespace bergomi {

struct SamplingConfig {
    CurveMode mode = CurveMode::Constant;
    OptionKind kind = OptionKind::VanillaCall;
    bool test = false;
    std::uint64_t seed = 0;
};

/// Uniform on rho1 rho2 -/+ sqrt((1 - rho1^2)(1 - rho2^2)), clamped to [-1, 1].
double sample_rho12(double rho1, double rho2, Rng& rng);

/// Covariance entries (var1, var2, cov) of the factor law at time t.
struct FactorLaw {
    double var1;
    double var2;
    double cov;
};
FactorLaw factor_law(double t, double k1, double k2, double rho12);

/// Draw before clipping.
std::pair<double, double> sample_factors_raw(double t, double k1, double k2, double rho12, Rng& rng);
/// Draw clipped to +/- factor_bound(k_j).
std::pair<double, double> sample_factors(double t, double k1, double k2, double rho12, Rng& rng);

/// Range of ln B for a kind (degenerate {ln K, ln K} for vanillas).
std::pair<double, double> log_barrier_range(OptionKind kind);
/// Range of s for a kind given ln B, training or test.
std::pair<double, double> log_spot_range(OptionKind kind, double log_barrier, bool test);

ParamPoint sample_point(const SamplingConfig& cfg, Rng& rng);

/// `count` points from the independent stream `stream` of cfg.seed.
std::vector<ParamPoint> sample_batch(const SamplingConfig& cfg, std::uint64_t stream, std::size_t count);

} // namespace bergomi
