#include "bergomi/activations.hpp"

#include "bergomi/errors.hpp"

#include <cmath>
#include <string>

namespace bergomi {

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::Sigmoid:
        return "sigmoid";
    case Activation::SiLU:
        return "silu";
    default:
        return "softplus";
    }
}

Activation parse_activation(std::string_view text) {
    if (text == "sigmoid") return Activation::Sigmoid;
    if (text == "silu") return Activation::SiLU;
    if (text == "softplus") return Activation::Softplus;
    throw UsageError("unknown activation '" + std::string(text) + "'");
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double silu(double z) { return z * sigmoid(z); }

double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double softplus_inverse(double y) {
    if (!(y > 0.0)) throw DomainError("softplus_inverse needs y > 0");
    if (y > 30.0) return y + std::log1p(-std::exp(-y));
    return std::log(std::expm1(y));
}

ActDerivs activate(Activation a, double z) {
    const double sg = sigmoid(z);
    const double s1 = sg * (1.0 - sg);              // sigmoid'
    const double s2 = s1 * (1.0 - 2.0 * sg);        // sigmoid''
    const double s3 = s1 * (1.0 - 6.0 * sg * (1.0 - sg)); // sigmoid'''
    switch (a) {
    case Activation::Sigmoid:
        return {sg, s1, s2, s3};
    case Activation::SiLU:
        return {z * sg, sg + z * s1, 2.0 * s1 + z * s2, 3.0 * s2 + z * s3};
    default:
        return {softplus(z), sg, s1, s2};
    }
}

} // namespace bergomi
