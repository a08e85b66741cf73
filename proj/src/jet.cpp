#include "bergomi/jet.hpp"

namespace bergomi {

Jet& Jet::operator+=(const Jet& o) {
    v += o.v;
    for (int k = 0; k < kNumFirst; ++k) d[k] += o.d[k];
    for (int p = 0; p < kNumSecond; ++p) h[p] += o.h[p];
    return *this;
}

Jet& Jet::operator*=(double c) {
    v *= c;
    for (auto& x : d) x *= c;
    for (auto& x : h) x *= c;
    return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }

Jet operator-(const Jet& a, const Jet& b) {
    Jet r = a;
    r += -1.0 * b;
    return r;
}

Jet operator*(double c, Jet a) { return a *= c; }

Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    for (int k = 0; k < kNumFirst; ++k) r.d[k] = a.d[k] * b.v + a.v * b.d[k];
    for (int p = 0; p < kNumSecond; ++p) {
        const auto [i, j] = kSecondPairs[p];
        r.h[p] = a.h[p] * b.v + a.v * b.h[p] + a.d[i] * b.d[j] + a.d[j] * b.d[i];
    }
    return r;
}

Jet compose(const Jet& u, double f0, double f1, double f2) {
    Jet r;
    r.v = f0;
    for (int k = 0; k < kNumFirst; ++k) r.d[k] = f1 * u.d[k];
    for (int p = 0; p < kNumSecond; ++p) {
        const auto [i, j] = kSecondPairs[p];
        r.h[p] = f2 * u.d[i] * u.d[j] + f1 * u.h[p];
    }
    return r;
}

} // namespace bergomi

namespace bergomi {

void compose_adjoint(const Jet& u, double f1, double f2, double f3, const Jet& y_bar, Jet& u_bar) {
    double v_acc = 0.0;
    for (int k = 0; k < kNumFirst; ++k) {
        u_bar.d[k] += y_bar.d[k] * f1;
        v_acc += f2 * y_bar.d[k] * u.d[k];
    }
    for (int p = 0; p < kNumSecond; ++p) {
        const auto [i, j] = kSecondPairs[p];
        const double yb = y_bar.h[p];
        if (yb == 0.0) continue;
        u_bar.h[p] += yb * f1;
        u_bar.d[i] += f2 * yb * u.d[j];
        u_bar.d[j] += f2 * yb * u.d[i];
        v_acc += yb * (f3 * u.d[i] * u.d[j] + f2 * u.h[p]);
    }
    u_bar.v += y_bar.v * f1 + v_acc;
}

void mul_adjoint(const Jet& a, const Jet& b, const Jet& y_bar, Jet& a_bar, Jet& b_bar) {
    a_bar.v += y_bar.v * b.v;
    b_bar.v += y_bar.v * a.v;
    for (int k = 0; k < kNumFirst; ++k) {
        a_bar.v += y_bar.d[k] * b.d[k];
        b_bar.v += y_bar.d[k] * a.d[k];
        a_bar.d[k] += y_bar.d[k] * b.v;
        b_bar.d[k] += y_bar.d[k] * a.v;
    }
    for (int p = 0; p < kNumSecond; ++p) {
        const auto [i, j] = kSecondPairs[p];
        const double yb = y_bar.h[p];
        if (yb == 0.0) continue;
        a_bar.v += yb * b.h[p];
        b_bar.v += yb * a.h[p];
        a_bar.h[p] += yb * b.v;
        b_bar.h[p] += yb * a.v;
        a_bar.d[i] += yb * b.d[j];
        a_bar.d[j] += yb * b.d[i];
        b_bar.d[i] += yb * a.d[j];
        b_bar.d[j] += yb * a.d[i];
    }
}

} // namespace bergomi
