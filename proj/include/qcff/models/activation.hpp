#pragma once

#include <string>
#include <string_view>

namespace qcff::models {

enum class Activation {
    Identity,
    ReLU,
    LeakyReLU, // slope 0.01 below zero
    Tanh,
    ReLU6,
    Tanhshrink, // x - tanh(x)
};

double activate(Activation a, double x);
/// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double x);

std::string to_string(Activation a);
/// Throws ConfigError on unknown names.
Activation parse_activation(std::string_view name);

} // namespace qcff::models
