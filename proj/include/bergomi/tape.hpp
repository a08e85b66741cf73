#pragma once

// Reverse-mode recording of scalar jet expressions.
//
// Each node caches its primal Jet; nodes are appended in evaluation order so
// the list is topologically sorted by construction. backward() propagates Jet
// adjoints, i.e. the sensitivity of a scalar loss to every value and partial
// stored in every node. The singular terms and other small scalar heads of the
// networks are evaluated on a Tape; dense layers have their own batched path.

#include "bergomi/jet.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace bergomi {

class Tape;

/// Handle to a node of a Tape.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int index) : tape_(tape), index_(index) {}

    Tape* tape() const { return tape_; }
    int index() const { return index_; }
    const Jet& jet() const;
    double value() const { return jet().v; }

private:
    Tape* tape_ = nullptr;
    int index_ = -1;
};

enum class TapeOp : std::uint8_t { Input, Constant, Add, Sub, Mul, Scale, Shift, Exp, Log, Sqrt, Recip, Sigmoid, Softplus };

std::string_view to_string(TapeOp op);

class Tape {
public:
    Tape() { nodes_.reserve(128); }

    Var input(const Jet& value);
    Var constant(double value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double c);
    Var shift(Var a, double c);
    Var unary(TapeOp op, Var a);

    const Jet& value(Var v) const { return nodes_[static_cast<std::size_t>(v.index())].value; }
    std::size_t size() const { return nodes_.size(); }
    TapeOp op(std::size_t i) const { return nodes_[i].op; }
    void clear() { nodes_.clear(); }

    /// Adjoints of every node for the scalar functional <seed, output>.
    std::vector<Jet> backward(Var output, const Jet& seed) const;

private:
    struct Node {
        TapeOp op;
        int a;
        int b;
        double c;
        double f1;
        double f2;
        double f3;
        Jet value;
    };

    Var push(Node node);

    std::vector<Node> nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);

Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
/// Sigmoid approximation of the normal CDF, recorded as elementary nodes.
Var ncdf_approx(Var z);
double ncdf_approx(double z);

} // namespace bergomi
