#include "qcff/models/activation.hpp"

#include <cmath>

#include "qcff/errors.hpp"

namespace qcff::models {

namespace {
constexpr double kLeakySlope = 0.01;
}

double activate(Activation a, double x) {
    switch (a) {
    case Activation::Identity:
        return x;
    case Activation::ReLU:
        return x > 0.0 ? x : 0.0;
    case Activation::LeakyReLU:
        return x > 0.0 ? x : kLeakySlope * x;
    case Activation::Tanh:
        return std::tanh(x);
    case Activation::ReLU6:
        return x <= 0.0 ? 0.0 : (x >= 6.0 ? 6.0 : x);
    case Activation::Tanhshrink:
        return x - std::tanh(x);
    }
    return x;
}

double activate_grad(Activation a, double x) {
    switch (a) {
    case Activation::Identity:
        return 1.0;
    case Activation::ReLU:
        return x > 0.0 ? 1.0 : 0.0;
    case Activation::LeakyReLU:
        return x > 0.0 ? 1.0 : kLeakySlope;
    case Activation::Tanh: {
        const double th = std::tanh(x);
        return 1.0 - th * th;
    }
    case Activation::ReLU6:
        return (x > 0.0 && x < 6.0) ? 1.0 : 0.0;
    case Activation::Tanhshrink: {
        const double th = std::tanh(x);
        return th * th;
    }
    }
    return 1.0;
}

std::string to_string(Activation a) {
    switch (a) {
    case Activation::Identity:
        return "identity";
    case Activation::ReLU:
        return "relu";
    case Activation::LeakyReLU:
        return "leaky_relu";
    case Activation::Tanh:
        return "tanh";
    case Activation::ReLU6:
        return "relu6";
    case Activation::Tanhshrink:
        return "tanhshrink";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "leaky_relu") return Activation::LeakyReLU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu6") return Activation::ReLU6;
    if (name == "tanhshrink") return Activation::Tanhshrink;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

} // namespace qcff::models
