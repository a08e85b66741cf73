#pragma once

// Flat network input vector and its standardization.
//
// Order: s, t, x1, x2, T, B, r, q, xi_1..xi_m, omega, k1, k2, theta, rho1,
// rho2, rho12 with m = 1 (constant curve) or 9. The raw encoding is exact and
// invertible; standardization is a separate per-coordinate affine map to about
// [-1, 1] derived from the sampling ranges.

#include "bergomi/curve.hpp"
#include "bergomi/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace bergomi {

inline constexpr int kEncS = 0;
inline constexpr int kEncT = 1;
inline constexpr int kEncX1 = 2;
inline constexpr int kEncX2 = 3;
inline constexpr int kEncMaturity = 4;
inline constexpr int kEncBarrier = 5;
inline constexpr int kEncR = 6;
inline constexpr int kEncQ = 7;
inline constexpr int kEncXi = 8;

int curve_segments(CurveMode mode);
int input_dim(CurveMode mode);
/// Column names in encoding order.
std::vector<std::string> input_names(CurveMode mode);

/// Raw flat vector. Throws UsageError when the curve does not have the
/// segment layout of `mode`.
std::vector<double> encode_raw(const ParamPoint& p, CurveMode mode);
ParamPoint decode_raw(std::span<const double> x, CurveMode mode, OptionKind kind);

/// Affine standardization z = (x - center) / half_width.
struct InputEncoding {
    CurveMode mode = CurveMode::Constant;
    std::vector<double> center;
    std::vector<double> half_width;

    /// Constants derived from the training ranges for strike 100.
    static InputEncoding standard(CurveMode mode);

    int dim() const { return static_cast<int>(center.size()); }
    std::vector<double> standardize(std::span<const double> raw) const;
    std::vector<double> unstandardize(std::span<const double> z) const;

    bool operator==(const InputEncoding&) const = default;
};

} // namespace bergomi
