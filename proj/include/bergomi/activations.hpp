#pragma once

#include <string_view>

namespace bergomi {

enum class Activation { Sigmoid, SiLU, Softplus };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

/// Value and the first three derivatives. The third derivative is what the
/// reverse pass through a second-order jet needs.
struct ActDerivs {
    double value;
    double d1;
    double d2;
    double d3;
};

double sigmoid(double z);
double silu(double z);
/// ln(1 + e^z) without overflow for large |z|.
double softplus(double z);
/// Inverse of softplus for y > 0.
double softplus_inverse(double y);

ActDerivs activate(Activation a, double z);

} // namespace bergomi
