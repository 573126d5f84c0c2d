#pragma once

#include <cmath>
#include <string>

#include "homolens/errors.hpp"

namespace homolens {

enum class ActKind { ReLU, LeakyReLU, Linear, PowerReLU, Sigmoid };

/// Element-wise activation. ReLU/LeakyReLU/Linear are positively
/// 1-homogeneous, PowerReLU(u) is u-homogeneous; Sigmoid is not homogeneous
/// and is legal only inside normalized layers. At the ReLU/LeakyReLU kink
/// the subgradient value 0 is used, consistently in value and derivative.
struct Activation {
    ActKind kind = ActKind::ReLU;
    double param = 0.0; // LeakyReLU slope, or PowerReLU exponent u

    static Activation relu() { return {ActKind::ReLU, 0.0}; }
    static Activation leaky_relu(double slope) {
        if (!(slope > 0.0 && slope < 1.0))
            throw InvalidSpec("LeakyReLU slope must be in (0,1)");
        return {ActKind::LeakyReLU, slope};
    }
    static Activation linear() { return {ActKind::Linear, 0.0}; }
    static Activation power_relu(double u) {
        if (!(u >= 1.0)) throw InvalidSpec("PowerReLU exponent must be >= 1");
        return {ActKind::PowerReLU, u};
    }
    static Activation sigmoid() { return {ActKind::Sigmoid, 0.0}; }

    double operator()(double z) const {
        switch (kind) {
            case ActKind::ReLU: return z > 0.0 ? z : 0.0;
            case ActKind::LeakyReLU: return z > 0.0 ? z : param * z;
            case ActKind::Linear: return z;
            case ActKind::PowerReLU: return z > 0.0 ? std::pow(z, param) : 0.0;
            case ActKind::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        }
        return 0.0;
    }

    double deriv(double z) const {
        switch (kind) {
            case ActKind::ReLU: return z > 0.0 ? 1.0 : 0.0;
            case ActKind::LeakyReLU:
                if (z > 0.0) return 1.0;
                return z < 0.0 ? param : 0.0;
            case ActKind::Linear: return 1.0;
            case ActKind::PowerReLU:
                return z > 0.0 ? param * std::pow(z, param - 1.0) : 0.0;
            case ActKind::Sigmoid: {
                const double s = 1.0 / (1.0 + std::exp(-z));
                return s * (1.0 - s);
            }
        }
        return 0.0;
    }

    bool positively_homogeneous() const { return kind != ActKind::Sigmoid; }

    /// Homogeneity degree of the activation (u for PowerReLU, else 1).
    double degree() const {
        if (kind == ActKind::Sigmoid)
            throw InvalidSpec("Sigmoid has no homogeneity degree");
        return kind == ActKind::PowerReLU ? param : 1.0;
    }

    /// True when the derivative is continuous everywhere.
    bool smooth() const {
        switch (kind) {
            case ActKind::Linear:
            case ActKind::Sigmoid: return true;
            case ActKind::PowerReLU: return param > 1.0;
            default: return false;
        }
    }

    /// True when the derivative is additionally Lipschitz (bounded curvature).
    bool curvature_bounded() const {
        switch (kind) {
            case ActKind::Linear:
            case ActKind::Sigmoid: return true;
            case ActKind::PowerReLU: return param >= 2.0 || param == 1.0;
            default: return false;
        }
    }

    std::string name() const {
        switch (kind) {
            case ActKind::ReLU: return "relu";
            case ActKind::LeakyReLU: return "leaky_relu";
            case ActKind::Linear: return "linear";
            case ActKind::PowerReLU: return "power_relu";
            case ActKind::Sigmoid: return "sigmoid";
        }
        return "?";
    }
};

} // namespace homolens
