#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace bergomi {

enum class CurveMode { Constant, NineSegment };

std::string_view to_string(CurveMode mode);
CurveMode parse_curve_mode(std::string_view text);

/// Initial forward variance curve xi_0^t as a step function on [0, nodes.back()].
///
/// Segment j covers (nodes[j-1], nodes[j]] with nodes[-1] = 0; a lookup exactly
/// at a node returns the segment to its left, and t = 0 returns the first segment.
class ForwardVarianceCurve {
public:
    ForwardVarianceCurve(std::vector<double> nodes, std::vector<double> values);

    static ForwardVarianceCurve constant(double xi, double horizon = 3.0);
    static ForwardVarianceCurve nine_segment(std::span<const double> values);
    /// (1/52, 1/26, 1/12, 1/6, 1/4, 1/2, 1, 2, 3)
    static std::span<const double> nine_segment_nodes();
    static ForwardVarianceCurve for_mode(CurveMode mode, std::span<const double> values);

    double value_at(double t) const;
    /// Exact integral of the step function over [a, b], a <= b within the support.
    double integral(double a, double b) const;

    double horizon() const { return nodes_.back(); }
    std::size_t segments() const { return values_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> values() const { return values_; }

    bool operator==(const ForwardVarianceCurve&) const = default;

private:
    std::size_t segment_index(double t) const;

    std::vector<double> nodes_;
    std::vector<double> values_;
};

} // namespace bergomi
