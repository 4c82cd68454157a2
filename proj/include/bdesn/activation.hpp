// Nonlinearity tags shared by the reservoir and the MLP readout.
#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace bdesn {

enum class Activation { Tanh, Relu, Identity };

inline double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Identity: return x;
    }
    return x;
}

inline double activation_derivative(Activation a, double pre) {
    switch (a) {
        case Activation::Tanh: {
            const double t = std::tanh(pre);
            return 1.0 - t * t;
        }
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
    }
    return "tanh";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    throw ParameterError("unknown activation tag: " + name);
}

}  // namespace bdesn
