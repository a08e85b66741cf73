#include "bergomi/curve.hpp"

#include "bergomi/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace bergomi {

namespace {
constexpr std::array<double, 9> kNineNodes = {1.0 / 52, 1.0 / 26, 1.0 / 12, 1.0 / 6, 0.25, 0.5, 1.0, 2.0, 3.0};
} // namespace

std::string_view to_string(CurveMode mode) { return mode == CurveMode::Constant ? "constant" : "nine_segment"; }

CurveMode parse_curve_mode(std::string_view text) {
    if (text == "constant") return CurveMode::Constant;
    if (text == "nine_segment" || text == "nine-segment" || text == "nine") return CurveMode::NineSegment;
    throw UsageError("unknown curve mode '" + std::string(text) + "'");
}

ForwardVarianceCurve::ForwardVarianceCurve(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.empty() || nodes_.size() != values_.size())
        throw ConfigError("forward variance curve needs one value per node");
    double prev = 0.0;
    for (double n : nodes_) {
        if (!(n > prev)) throw ConfigError("forward variance curve nodes must be strictly increasing and positive");
        prev = n;
    }
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("forward variance values must be finite and >= 0");
}

ForwardVarianceCurve ForwardVarianceCurve::constant(double xi, double horizon) { return {{horizon}, {xi}}; }

std::span<const double> ForwardVarianceCurve::nine_segment_nodes() { return kNineNodes; }

ForwardVarianceCurve ForwardVarianceCurve::nine_segment(std::span<const double> values) {
    if (values.size() != kNineNodes.size()) throw ConfigError("nine-segment curve needs 9 values");
    return {std::vector<double>(kNineNodes.begin(), kNineNodes.end()), std::vector<double>(values.begin(), values.end())};
}

ForwardVarianceCurve ForwardVarianceCurve::for_mode(CurveMode mode, std::span<const double> values) {
    if (mode == CurveMode::Constant) {
        if (values.size() != 1) throw ConfigError("constant curve needs exactly one value");
        return constant(values[0]);
    }
    return nine_segment(values);
}

std::size_t ForwardVarianceCurve::segment_index(double t) const {
    if (!(t >= 0.0) || t > nodes_.back()) throw DomainError("time outside the forward variance curve support");
    // First node >= t: a node belongs to the segment on its left.
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin());
}

double ForwardVarianceCurve::value_at(double t) const { return values_[segment_index(t)]; }

double ForwardVarianceCurve::integral(double a, double b) const {
    if (a > b) throw DomainError("curve integral bounds reversed");
    if (!(a >= 0.0) || b > nodes_.back()) throw DomainError("curve integral outside support");
    double total = 0.0;
    double left = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double lo = std::max(left, a);
        const double hi = std::min(nodes_[j], b);
        if (hi > lo) total += values_[j] * (hi - lo);
        left = nodes_[j];
        if (left >= b) break;
    }
    return total;
}

} // namespace bergomi
