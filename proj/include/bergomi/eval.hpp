#pragma once

// Evaluation layer: error metrics, point and result CSVs, batch pricing with
// knock-outs from in-out parity, and one-dimensional price slices.

#include "bergomi/csv.hpp"
#include "bergomi/mc.hpp"
#include "bergomi/network.hpp"

#include <span>
#include <vector>

namespace bergomi {

/// sqrt(mean((pred - bench)^2)). UsageError on empty or mismatched input.
double rmse(std::span<const double> pred, std::span<const double> bench);

/// (pred - bench) / max(bench, h) elementwise.
std::vector<double> relative_error(std::span<const double> pred, std::span<const double> bench,
                                   double h = 0.25);

/// Columns of a points file: kind, s, t, x1, x2, T, B, r, q, omega, theta, k1,
/// k2, rho1, rho2, rho12, xi_1..xi_m (m = 1 constant curve, 9 nine-segment).
std::vector<std::string> point_columns(CurveMode mode);
void append_point(std::vector<std::string>& row, const ParamPoint& p);
CsvTable points_table(std::span<const ParamPoint> points);
std::vector<ParamPoint> points_from_table(const CsvTable& table);

/// Up calls with B < K and down puts with B > K are plain vanillas in
/// disguise and lie outside every trained domain.
void reject_degenerate(const ParamPoint& p);

/// Networks needed to price a set of points: the vanilla net, and the knock-in
/// net when barrier kinds are involved. Knock-outs use vanilla - knock-in.
struct PricingModels {
    const PricingNetwork* vanilla = nullptr;
    const PricingNetwork* knock_in = nullptr;
};

std::vector<double> price_points(const PricingModels& models, std::span<const ParamPoint> points);

/// Benchmark every point with benchmark_price (to mc.target_se when set).
/// Point i uses mc.seed mixed with i, so subsets and reorderings reproduce.
std::vector<McEstimate> benchmark_points(std::span<const ParamPoint> points, const McConfig& mc);

CsvTable benchmark_table(std::span<const ParamPoint> points, std::span<const McEstimate> est);

struct EvalReport {
    std::size_t count = 0;
    double rmse = 0.0;
    double max_abs_error = 0.0;
    double mean_error = 0.0;
    double bench_se_rms = 0.0; ///< sqrt(mean(se^2))
    double bench_se_max = 0.0;
    double max_abs_rel_error = 0.0;
};

EvalReport evaluate(std::span<const double> pred, std::span<const McEstimate> bench, double h = 0.25);

/// Inputs, network price, benchmark, se, error, relative error per point.
CsvTable evaluation_table(std::span<const ParamPoint> points, std::span<const double> pred,
                          std::span<const McEstimate> bench, double h = 0.25);

CsvTable report_table(const EvalReport& r);

/// Slice through a base point: `count` evenly spaced s on [s_lo, s_hi]. The
/// range must lie inside the kind's test range.
std::vector<ParamPoint> slice_points(const ParamPoint& base, double s_lo, double s_hi,
                                     std::size_t count);

/// Columns S, network, benchmark, se, rel_error.
CsvTable curve_table(std::span<const ParamPoint> points, std::span<const double> pred,
                     std::span<const McEstimate> bench, double h = 0.25);

} // namespace bergomi
