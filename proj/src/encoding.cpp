#include "bergomi/encoding.hpp"

#include "bergomi/errors.hpp"

#include <cmath>

namespace bergomi {

int curve_segments(CurveMode mode) { return mode == CurveMode::Constant ? 1 : 9; }

int input_dim(CurveMode mode) { return 15 + curve_segments(mode); }

std::vector<std::string> input_names(CurveMode mode) {
    std::vector<std::string> names = {"s", "t", "x1", "x2", "T", "B", "r", "q"};
    const int m = curve_segments(mode);
    if (m == 1) {
        names.emplace_back("xi");
    } else {
        for (int j = 1; j <= m; ++j) names.push_back("xi" + std::to_string(j));
    }
    for (const char* n : {"omega", "k1", "k2", "theta", "rho1", "rho2", "rho12"}) names.emplace_back(n);
    return names;
}

namespace {

void check_curve(const ForwardVarianceCurve& c, CurveMode mode) {
    static const std::vector<double> constant_nodes = {3.0};
    const std::span<const double> expected =
        mode == CurveMode::Constant ? std::span<const double>(constant_nodes) : ForwardVarianceCurve::nine_segment_nodes();
    const auto nodes = c.nodes();
    bool ok = nodes.size() == expected.size();
    for (std::size_t i = 0; ok && i < nodes.size(); ++i) ok = nodes[i] == expected[i];
    if (!ok) throw UsageError("forward variance curve does not match curve mode " + std::string(to_string(mode)));
}

} // namespace

std::vector<double> encode_raw(const ParamPoint& p, CurveMode mode) {
    check_curve(p.params.curve, mode);
    std::vector<double> x = {p.s, p.t, p.x1, p.x2, p.maturity, p.barrier, p.params.r, p.params.q};
    for (double xi : p.params.curve.values()) x.push_back(xi);
    const auto& m = p.params;
    for (double v : {m.omega, m.k1, m.k2, m.theta, m.rho1, m.rho2, m.rho12}) x.push_back(v);
    return x;
}

ParamPoint decode_raw(std::span<const double> x, CurveMode mode, OptionKind kind) {
    if (static_cast<int>(x.size()) != input_dim(mode)) throw UsageError("encoded vector has the wrong length");
    const int m = curve_segments(mode);
    ParamPoint p;
    p.s = x[kEncS];
    p.t = x[kEncT];
    p.x1 = x[kEncX1];
    p.x2 = x[kEncX2];
    p.maturity = x[kEncMaturity];
    p.barrier = x[kEncBarrier];
    p.kind = kind;
    auto& b = p.params;
    b.r = x[kEncR];
    b.q = x[kEncQ];
    b.curve = ForwardVarianceCurve::for_mode(mode, x.subspan(kEncXi, static_cast<std::size_t>(m)));
    const std::size_t o = static_cast<std::size_t>(kEncXi + m);
    b.omega = x[o];
    b.k1 = x[o + 1];
    b.k2 = x[o + 2];
    b.theta = x[o + 3];
    b.rho1 = x[o + 4];
    b.rho2 = x[o + 5];
    b.rho12 = x[o + 6];
    return p;
}

InputEncoding InputEncoding::standard(CurveMode mode) {
    // (lo, hi) per coordinate; the map sends lo -> -1 and hi -> +1.
    std::vector<std::pair<double, double>> ranges = {
        {std::log(5.0), std::log(2000.0)},           // s
        {0.0, 3.0},                                  // t
        {-factor_bound(0.1), factor_bound(0.1)},     // x1
        {-factor_bound(2.0), factor_bound(2.0)},     // x2
        {0.0, 3.0},                                  // T
        {kStrike / 1.5, kStrike * 1.5},              // B
        {0.0, 0.1},                                  // r
        {0.0, 0.1},                                  // q
    };
    for (int j = 0; j < curve_segments(mode); ++j) ranges.emplace_back(0.05 * 0.05, 0.5 * 0.5);
    ranges.insert(ranges.end(), {{0.0, 3.0}, {0.1, 4.0}, {2.0, 12.0}, {0.0, 1.0}, {-0.9, 0.2}, {-0.9, 0.2}, {-1.0, 1.0}});

    InputEncoding enc;
    enc.mode = mode;
    for (auto [lo, hi] : ranges) {
        enc.center.push_back(0.5 * (lo + hi));
        enc.half_width.push_back(0.5 * (hi - lo));
    }
    return enc;
}

std::vector<double> InputEncoding::standardize(std::span<const double> raw) const {
    if (raw.size() != center.size()) throw UsageError("standardize: dimension mismatch");
    std::vector<double> z(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) z[i] = (raw[i] - center[i]) / half_width[i];
    return z;
}

std::vector<double> InputEncoding::unstandardize(std::span<const double> z) const {
    if (z.size() != center.size()) throw UsageError("unstandardize: dimension mismatch");
    std::vector<double> raw(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) raw[i] = z[i] * half_width[i] + center[i];
    return raw;
}

} // namespace bergomi
