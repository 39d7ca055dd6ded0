#pragma once

#include "posnet/activation.hpp"
#include "posnet/hermite.hpp"
#include "posnet/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace posnet {

/// Odd outer activations for the hard construction.
enum class OuterActivation { identity, tanh, cube, smoothed_sign };

inline double apply_outer(OuterActivation s, double t) {
    switch (s) {
        case OuterActivation::identity: return t;
        case OuterActivation::tanh: return std::tanh(t);
        case OuterActivation::cube: return t * t * t;
        case OuterActivation::smoothed_sign: return t / std::sqrt(1.0 + t * t);
    }
    return t;
}

inline const char* outer_name(OuterActivation s) {
    switch (s) {
        case OuterActivation::identity: return "identity";
        case OuterActivation::tanh: return "tanh";
        case OuterActivation::cube: return "cube";
        case OuterActivation::smoothed_sign: return "smoothed_sign";
    }
    return "?";
}

inline OuterActivation outer_from_name(const std::string& name) {
    if (name == "identity") return OuterActivation::identity;
    if (name == "tanh") return OuterActivation::tanh;
    if (name == "cube") return OuterActivation::cube;
    if (name == "smoothed_sign") return OuterActivation::smoothed_sign;
    throw std::invalid_argument("unknown outer activation: " + name);
}

/// The planar hard function
///   f(x, y) = sigma( sum_{m=1}^{2k} (-1)^m phi(x cos(pi m/k) + y sin(pi m/k)) ).
/// Flips sign under rotation by pi/k, which kills its low-degree moments.
inline double hard2d_eval(int k, const Activation& phi, OuterActivation outer, double x,
                          double y) {
    if (k < 1) throw std::invalid_argument("hard2d_eval: k >= 1 required");
    const double step = std::numbers::pi / k;
    double acc = 0.0;
    double sign = -1.0; // (-1)^m starting at m = 1
    for (int m = 1; m <= 2 * k; ++m) {
        acc += sign * phi.eval(x * std::cos(step * m) + y * std::sin(step * m));
        sign = -sign;
    }
    return apply_outer(outer, acc);
}

/// Quadrature E[f^2] over N^2; positive iff the construction is a usable
/// hard instance (the k-parity-part criterion decides which (k, phi) vanish).
inline double nonvanishing_check(int k, const Activation& phi, OuterActivation outer,
                                 int radial_order = 96, int arc_order = 32) {
    const PolarGrid grid(k, radial_order, arc_order);
    return grid.expect([&](double x, double y) {
        const double v = hard2d_eval(k, phi, outer, x, y);
        return v * v;
    });
}

/// A hard function embedded into R^d through a plane with orthonormal rows,
/// normalized to unit second moment.
class HardInstance {
public:
    HardInstance(int k, Activation phi, OuterActivation outer, Eigen::MatrixXd plane,
                 int radial_order = 96, int arc_order = 32)
        : k_(k), phi_(std::move(phi)), outer_(outer), plane_(std::move(plane)) {
        detail::require_orthonormal_rows(plane_, "HardInstance");
        const double second_moment = nonvanishing_check(k_, phi_, outer_, radial_order, arc_order);
        if (!(second_moment > 1e-8))
            throw std::domain_error("HardInstance: construction vanishes for (k=" +
                                    std::to_string(k_) + ", phi=" + phi_.name + ", sigma=" +
                                    outer_name(outer_) + ")");
        z_norm_ = std::sqrt(second_moment);
    }

    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] const Activation& phi() const noexcept { return phi_; }
    [[nodiscard]] OuterActivation outer() const noexcept { return outer_; }
    [[nodiscard]] const Eigen::MatrixXd& plane() const noexcept { return plane_; }
    [[nodiscard]] double z_norm() const noexcept { return z_norm_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(plane_.cols()); }

    /// Normalized planar function g~(u, v) = f(u, v) / z_norm.
    [[nodiscard]] double eval2d(double u, double v) const {
        return hard2d_eval(k_, phi_, outer_, u, v) / z_norm_;
    }

    /// g(x) = f(plane x) / z_norm for ambient x.
    [[nodiscard]] double eval(const Eigen::VectorXd& x) const {
        if (x.size() != plane_.cols()) throw std::invalid_argument("HardInstance: dimension mismatch");
        const Eigen::Vector2d p = plane_ * x;
        return eval2d(p(0), p(1));
    }

    [[nodiscard]] bool same_family(const HardInstance& other) const {
        return k_ == other.k_ && phi_.name == other.phi_.name && outer_ == other.outer_ &&
               plane_.cols() == other.plane_.cols();
    }

private:
    int k_;
    Activation phi_;
    OuterActivation outer_;
    Eigen::MatrixXd plane_;
    double z_norm_ = 0.0;
};

/// Max |Hermite coefficient| of the normalized planar hard function per
/// degree 0..degree_cap, computed on the rotation-exact polar grid. The
/// antisymmetry argument forces degrees below k to vanish; the degree-k
/// slot can carry the (k,0)-frequency mass and is reported, not asserted.
inline std::vector<double> moment_check(int k, const Activation& phi, OuterActivation outer,
                                        int degree_cap, int radial_order = 96,
                                        int arc_order = 32) {
    if (degree_cap > kHermiteDegreeCap)
        throw std::invalid_argument("moment_check: degree cap beyond Hermite cap");
    const double second_moment = nonvanishing_check(k, phi, outer, radial_order, arc_order);
    const double z = second_moment > 1e-8 ? std::sqrt(second_moment) : 1.0;
    const PolarGrid grid(k, radial_order, arc_order);
    const HermiteExpansion exp = expand_2d(
        [&](double x, double y) { return hard2d_eval(k, phi, outer, x, y) / z; }, degree_cap,
        grid);
    std::vector<double> out(static_cast<std::size_t>(degree_cap) + 1);
    for (int m = 0; m <= degree_cap; ++m) out[static_cast<std::size_t>(m)] = exp.max_abs_coeff(m);
    return out;
}

/// Rotate planar coordinates by pi/k (the symmetry the construction flips
/// under): (x, y) -> (x cos + y sin, -x sin + y cos).
inline std::pair<double, double> rotate_by_pi_over_k(int k, double x, double y) {
    const double a = std::numbers::pi / k;
    return {x * std::cos(a) + y * std::sin(a), -x * std::sin(a) + y * std::cos(a)};
}

} // namespace posnet
