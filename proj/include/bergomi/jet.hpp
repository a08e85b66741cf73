#pragma once

// Truncated Taylor jets in the pricing-function state variables.
//
// A Jet carries a value, the four first partials with respect to (s, t, x1, x2)
// and the six second partials the pricing PDE needs: ss, x1x1, x2x2, sx1, sx2,
// x1x2. Time enters the PDE at first order only, so no second partial involving
// t is tracked; the truncated algebra is still closed under +, * and smooth
// unary functions.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace bergomi {

enum StateVar : int { kVarS = 0, kVarT = 1, kVarX1 = 2, kVarX2 = 3 };

inline constexpr int kNumFirst = 4;
inline constexpr int kNumSecond = 6;
inline constexpr int kJetWidth = 1 + kNumFirst + kNumSecond;

/// (i, j) state-variable pairs of the stored second partials, in storage order.
inline constexpr std::array<std::pair<int, int>, kNumSecond> kSecondPairs = {{
    {kVarS, kVarS},
    {kVarX1, kVarX1},
    {kVarX2, kVarX2},
    {kVarS, kVarX1},
    {kVarS, kVarX2},
    {kVarX1, kVarX2},
}};

enum SecondIndex : int { kSS = 0, kX1X1 = 1, kX2X2 = 2, kSX1 = 3, kSX2 = 4, kX1X2 = 5 };

struct Jet {
    double v = 0.0;
    std::array<double, kNumFirst> d{};
    std::array<double, kNumSecond> h{};

    static Jet constant(double value) { return Jet{value, {}, {}}; }
    static Jet variable(double value, StateVar var) {
        Jet j{value, {}, {}};
        j.d[var] = 1.0;
        return j;
    }

    /// Flat view: [v, d0..d3, h0..h5].
    double component(int c) const { return c == 0 ? v : (c <= kNumFirst ? d[c - 1] : h[c - 1 - kNumFirst]); }
    double& component(int c) { return c == 0 ? v : (c <= kNumFirst ? d[c - 1] : h[c - 1 - kNumFirst]); }

    Jet& operator+=(const Jet& o);
    Jet& operator*=(double c);
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double c, Jet a);

/// Unary composition y = f(u) given f', f'' at u.v.
Jet compose(const Jet& u, double f0, double f1, double f2);

/// Value, the first partials and the six second partials of a scalar pricing
/// function, plus (optionally) its gradient with respect to network weights.
struct DerivBundle {
    Jet jet;
    std::vector<double> weight_grad;

    double value() const { return jet.v; }
    double ds() const { return jet.d[kVarS]; }
    double dt() const { return jet.d[kVarT]; }
    double dx1() const { return jet.d[kVarX1]; }
    double dx2() const { return jet.d[kVarX2]; }
    double dss() const { return jet.h[kSS]; }
    double dx1x1() const { return jet.h[kX1X1]; }
    double dx2x2() const { return jet.h[kX2X2]; }
    double dsx1() const { return jet.h[kSX1]; }
    double dsx2() const { return jet.h[kSX2]; }
    double dx1x2() const { return jet.h[kX1X2]; }
};

} // namespace bergomi

namespace bergomi {

/// Reverse pass of compose(): accumulates into u_bar the adjoint of u given
/// the adjoint y_bar of the output and f', f'', f''' at u.v.
void compose_adjoint(const Jet& u, double f1, double f2, double f3, const Jet& y_bar, Jet& u_bar);

/// Reverse pass of a * b.
void mul_adjoint(const Jet& a, const Jet& b, const Jet& y_bar, Jet& a_bar, Jet& b_bar);

} // namespace bergomi
