#include "bergomi/tape.hpp"

#include "bergomi/activations.hpp"
#include "bergomi/analytic.hpp"
#include "bergomi/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace bergomi {

const Jet& Var::jet() const { return tape_->value(*this); }

std::string_view to_string(TapeOp op) {
    switch (op) {
    case TapeOp::Input: return "input";
    case TapeOp::Constant: return "constant";
    case TapeOp::Add: return "add";
    case TapeOp::Sub: return "sub";
    case TapeOp::Mul: return "mul";
    case TapeOp::Scale: return "scale";
    case TapeOp::Shift: return "shift";
    case TapeOp::Exp: return "exp";
    case TapeOp::Log: return "log";
    case TapeOp::Sqrt: return "sqrt";
    case TapeOp::Recip: return "recip";
    case TapeOp::Sigmoid: return "sigmoid";
    case TapeOp::Softplus: return "softplus";
    }
    return "?";
}

Var Tape::push(Node node) {
    const Jet& j = node.value;
    bool finite = std::isfinite(j.v);
    for (double x : j.d) finite = finite && std::isfinite(x);
    for (double x : j.h) finite = finite && std::isfinite(x);
    if (!finite)
        throw NumericError("non-finite value at tape node " + std::to_string(nodes_.size()) + " (" +
                           std::string(to_string(node.op)) + ")");
    nodes_.push_back(node);
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::input(const Jet& value) { return push({TapeOp::Input, -1, -1, 0.0, 0.0, 0.0, 0.0, value}); }

Var Tape::constant(double value) { return push({TapeOp::Constant, -1, -1, 0.0, 0.0, 0.0, 0.0, Jet::constant(value)}); }

Var Tape::add(Var a, Var b) { return push({TapeOp::Add, a.index(), b.index(), 0.0, 0.0, 0.0, 0.0, value(a) + value(b)}); }

Var Tape::sub(Var a, Var b) { return push({TapeOp::Sub, a.index(), b.index(), 0.0, 0.0, 0.0, 0.0, value(a) - value(b)}); }

Var Tape::mul(Var a, Var b) { return push({TapeOp::Mul, a.index(), b.index(), 0.0, 0.0, 0.0, 0.0, value(a) * value(b)}); }

Var Tape::scale(Var a, double c) { return push({TapeOp::Scale, a.index(), -1, c, 0.0, 0.0, 0.0, c * value(a)}); }

Var Tape::shift(Var a, double c) {
    Jet j = value(a);
    j.v += c;
    return push({TapeOp::Shift, a.index(), -1, c, 0.0, 0.0, 0.0, j});
}

Var Tape::unary(TapeOp op, Var a) {
    const Jet& u = value(a);
    const double x = u.v;
    double f0 = 0, f1 = 0, f2 = 0, f3 = 0;
    switch (op) {
    case TapeOp::Exp:
        f0 = f1 = f2 = f3 = std::exp(x);
        break;
    case TapeOp::Log:
        if (!(x > 0.0)) throw NumericError("log of non-positive value on tape");
        f0 = std::log(x);
        f1 = 1.0 / x;
        f2 = -f1 * f1;
        f3 = 2.0 * f1 * f1 * f1;
        break;
    case TapeOp::Sqrt:
        if (!(x > 0.0)) throw NumericError("sqrt of non-positive value on tape");
        f0 = std::sqrt(x);
        f1 = 0.5 / f0;
        f2 = -0.5 * f1 / x;
        f3 = -1.5 * f2 / x;
        break;
    case TapeOp::Recip:
        if (x == 0.0) throw NumericError("reciprocal of zero on tape");
        f0 = 1.0 / x;
        f1 = -f0 * f0;
        f2 = 2.0 * f0 * f0 * f0;
        f3 = -6.0 * f0 * f0 * f0 * f0;
        break;
    case TapeOp::Sigmoid: {
        const auto d = activate(Activation::Sigmoid, x);
        f0 = d.value, f1 = d.d1, f2 = d.d2, f3 = d.d3;
        break;
    }
    case TapeOp::Softplus: {
        const auto d = activate(Activation::Softplus, x);
        f0 = d.value, f1 = d.d1, f2 = d.d2, f3 = d.d3;
        break;
    }
    default:
        throw UsageError("Tape::unary called with a non-unary op");
    }
    return push({op, a.index(), -1, 0.0, f1, f2, f3, compose(u, f0, f1, f2)});
}

std::vector<Jet> Tape::backward(Var output, const Jet& seed) const {
    std::vector<Jet> adj(nodes_.size());
    adj[static_cast<std::size_t>(output.index())] = seed;
    for (int i = output.index(); i >= 0; --i) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        const Jet& yb = adj[static_cast<std::size_t>(i)];
        switch (n.op) {
        case TapeOp::Input:
        case TapeOp::Constant:
            break;
        case TapeOp::Add:
            adj[n.a] += yb;
            adj[n.b] += yb;
            break;
        case TapeOp::Sub:
            adj[n.a] += yb;
            adj[n.b] += -1.0 * yb;
            break;
        case TapeOp::Mul:
            mul_adjoint(nodes_[n.a].value, nodes_[n.b].value, yb, adj[n.a], adj[n.b]);
            break;
        case TapeOp::Scale:
            adj[n.a] += n.c * yb;
            break;
        case TapeOp::Shift:
            adj[n.a] += yb;
            break;
        default:
            compose_adjoint(nodes_[n.a].value, n.f1, n.f2, n.f3, yb, adj[n.a]);
            break;
        }
    }
    return adj;
}

Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
Var operator/(Var a, Var b) { return a.tape()->mul(a, b.tape()->unary(TapeOp::Recip, b)); }
Var operator-(Var a) { return a.tape()->scale(a, -1.0); }
Var operator+(Var a, double c) { return a.tape()->shift(a, c); }
Var operator+(double c, Var a) { return a.tape()->shift(a, c); }
Var operator-(Var a, double c) { return a.tape()->shift(a, -c); }
Var operator-(double c, Var a) { return a.tape()->shift(a.tape()->scale(a, -1.0), c); }
Var operator*(Var a, double c) { return a.tape()->scale(a, c); }
Var operator*(double c, Var a) { return a.tape()->scale(a, c); }
Var operator/(Var a, double c) { return a.tape()->scale(a, 1.0 / c); }
Var operator/(double c, Var a) { return a.tape()->scale(a.tape()->unary(TapeOp::Recip, a), c); }

Var exp(Var a) { return a.tape()->unary(TapeOp::Exp, a); }
Var log(Var a) { return a.tape()->unary(TapeOp::Log, a); }
Var sqrt(Var a) { return a.tape()->unary(TapeOp::Sqrt, a); }
Var sigmoid(Var a) { return a.tape()->unary(TapeOp::Sigmoid, a); }
Var softplus(Var a) { return a.tape()->unary(TapeOp::Softplus, a); }

Var ncdf_approx(Var z) {
    const double c = 2.0 * std::sqrt(2.0 / std::numbers::pi);
    return sigmoid(c * (z + 0.044715 * (z * z * z)));
}

double ncdf_approx(double z) { return norm_cdf_approx(z); }

} // namespace bergomi
