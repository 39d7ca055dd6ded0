#pragma once

#include "posnet/quadrature.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace posnet {

/// A scalar activation with its Lipschitz constant.
struct Activation {
    std::string name;
    std::function<double(double)> eval;
    double lipschitz = 1.0;
};

inline Activation relu() {
    return {"relu", [](double t) { return t > 0.0 ? t : 0.0; }, 1.0};
}

inline Activation abs_activation() {
    return {"abs", [](double t) { return std::fabs(t); }, 1.0};
}

inline Activation tanh_activation() {
    return {"tanh", [](double t) { return std::tanh(t); }, 1.0};
}

inline Activation linear_activation() {
    return {"linear", [](double t) { return t; }, 1.0};
}

/// Gaussian moments of an activation used throughout the learner:
/// b1 = E[phi], c = E[phi(t) t], c1 = E[phi(t)(t^2-1)], b2 = E[phi^2], b4 = E[phi^4].
struct ActivationMoments {
    double b1 = 0.0;
    double c = 0.0;
    double c1 = 0.0;
    double b2 = 0.0;
    double b4 = 0.0;
};

/// Compute the moment record by Gaussian quadrature (kink-aware rule,
/// `quad_nodes` nodes per half-axis).
inline ActivationMoments activation_moments(const std::function<double(double)>& phi,
                                            int quad_nodes = 128) {
    const GaussRule1d rule = gaussian_kink_rule(quad_nodes);
    ActivationMoments m;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i], w = rule.weights[i];
        const double v = phi(t);
        m.b1 += w * v;
        m.c += w * v * t;
        m.c1 += w * v * (t * t - 1.0);
        m.b2 += w * v * v;
        m.b4 += w * v * v * v * v;
    }
    if (!std::isfinite(m.b1) || !std::isfinite(m.c) || !std::isfinite(m.c1) ||
        !std::isfinite(m.b2) || !std::isfinite(m.b4))
        throw std::runtime_error("activation_moments: non-finite quadrature sum");
    return m;
}

/// An activation validated for use in the learner (non-negative, Lipschitz)
/// together with its cached Gaussian moments.
class ActivationSpec {
public:
    ActivationSpec(Activation act, int quad_nodes = 128)
        : act_(std::move(act)), moments_(activation_moments(act_.eval, quad_nodes)) {
        validate();
    }

    [[nodiscard]] double operator()(double t) const { return act_.eval(t); }
    [[nodiscard]] const Activation& activation() const noexcept { return act_; }
    [[nodiscard]] const std::string& name() const noexcept { return act_.name; }
    [[nodiscard]] double lipschitz() const noexcept { return act_.lipschitz; }
    [[nodiscard]] const ActivationMoments& moments() const noexcept { return moments_; }

private:
    void validate() const {
        // Spot-check non-negativity and the Lipschitz bound on a fixed grid;
        // the learner's guarantees require both.
        const double L = act_.lipschitz;
        double prev_t = -8.0, prev_v = act_.eval(prev_t);
        for (int i = 1; i <= 400; ++i) {
            const double t = -8.0 + i * 0.04;
            const double v = act_.eval(t);
            if (v < 0.0)
                throw std::invalid_argument("ActivationSpec: activation must be non-negative");
            if (std::fabs(v - prev_v) > L * std::fabs(t - prev_t) + 1e-9)
                throw std::invalid_argument("ActivationSpec: Lipschitz constant violated");
            prev_t = t;
            prev_v = v;
        }
        if (moments_.b2 < moments_.b1 * moments_.b1 - 1e-12 ||
            moments_.b4 < moments_.b2 * moments_.b2 - 1e-12)
            throw std::invalid_argument("ActivationSpec: moments violate Jensen ordering");
    }

    Activation act_;
    ActivationMoments moments_;
};

} // namespace posnet
