#include "posnet/hard_instance.hpp"
#include "posnet/planes.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace posnet;
using Catch::Matchers::WithinAbs;

namespace {

// closed-form E[f^2] for phi = relu, sigma = identity, via the arccos kernel
double ef2_closed(int k) {
    const auto kernel = [](double rho) {
        rho = std::clamp(rho, -1.0, 1.0);
        return (std::sqrt(1.0 - rho * rho) + rho * (std::numbers::pi - std::acos(rho))) /
               (2.0 * std::numbers::pi);
    };
    double acc = 0.0;
    for (int m = 1; m <= 2 * k; ++m)
        for (int mp = 1; mp <= 2 * k; ++mp) {
            const double sign = ((m + mp) % 2 == 0) ? 1.0 : -1.0;
            acc += sign * kernel(std::cos(std::numbers::pi * (m - mp) / k));
        }
    return acc;
}

Eigen::MatrixXd axis_plane(int d, int a, int b) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, d);
    p(0, a) = 1.0;
    p(1, b) = 1.0;
    return p;
}

} // namespace

TEST_CASE("hand-evaluated points of the planar hard function") {
    REQUIRE(hard2d_eval(2, relu(), OuterActivation::identity, 0.0, 0.0) == 0.0);
    // k=2 at (1,0): -phi(0) + phi(-1) - phi(0) + phi(1) = 1
    REQUIRE_THAT(hard2d_eval(2, relu(), OuterActivation::identity, 1.0, 0.0),
                 WithinAbs(1.0, 1e-15));
}

TEST_CASE("rotation by pi/k flips the sign") {
    Rng rng({900, 0});
    for (int k : {1, 2, 3, 4}) {
        for (const Activation& phi : {relu(), tanh_activation()}) {
            for (OuterActivation outer :
                 {OuterActivation::identity, OuterActivation::tanh, OuterActivation::cube,
                  OuterActivation::smoothed_sign}) {
                for (int rep = 0; rep < 50; ++rep) {
                    const double x = 2.0 * rng.gaussian();
                    const double y = 2.0 * rng.gaussian();
                    const auto [xr, yr] = rotate_by_pi_over_k(k, x, y);
                    const double direct = hard2d_eval(k, phi, outer, x, y);
                    const double rotated = hard2d_eval(k, phi, outer, xr, yr);
                    REQUIRE_THAT(rotated + direct, WithinAbs(0.0, 1e-12));
                }
            }
        }
    }
}

TEST_CASE("nonvanishing criterion follows the parity rule") {
    // even k with relu: even part |x|/2 is not a polynomial -> alive
    REQUIRE(nonvanishing_check(2, relu(), OuterActivation::identity) > 1e-3);
    REQUIRE(nonvanishing_check(4, relu(), OuterActivation::identity) > 1e-3);
    REQUIRE(nonvanishing_check(1, relu(), OuterActivation::identity) > 1e-3);

    // odd k with relu: odd part t/2 is degree-1 polynomial -> vanishes
    REQUIRE(nonvanishing_check(3, relu(), OuterActivation::identity) <= 1e-10);

    // linear phi, k=3: degree-1 odd polynomial -> vanishes
    REQUIRE(nonvanishing_check(3, linear_activation(), OuterActivation::identity) <= 1e-10);

    // odd k with tanh: odd, not polynomial -> alive
    REQUIRE(nonvanishing_check(3, tanh_activation(), OuterActivation::identity) > 1e-3);

    // even k with tanh: even part is zero -> vanishes
    REQUIRE(nonvanishing_check(2, tanh_activation(), OuterActivation::identity) <= 1e-10);
}

TEST_CASE("E[f^2] matches the closed form for ReLU instances") {
    for (int k : {1, 2, 4}) {
        const double est = nonvanishing_check(k, relu(), OuterActivation::identity);
        REQUIRE_THAT(est, WithinAbs(ef2_closed(k), 1e-12));
    }
}

TEST_CASE("low-degree moments vanish on the rotation-exact grid") {
    SECTION("k=4, relu, identity: degrees 0..3") {
        const auto coeffs = moment_check(4, relu(), OuterActivation::identity, 6);
        for (int m = 0; m <= 3; ++m) REQUIRE(coeffs[static_cast<std::size_t>(m)] <= 1e-8);
        REQUIRE(coeffs[4] > 1e-3); // degree-k mass is real and reported
    }
    SECTION("k=2, relu: degrees 0..1") {
        const auto coeffs = moment_check(2, relu(), OuterActivation::identity, 4);
        REQUIRE(coeffs[0] <= 1e-8);
        REQUIRE(coeffs[1] <= 1e-8);
        REQUIRE(coeffs[2] > 1e-3);
    }
    SECTION("odd k with tanh inner: degrees below k") {
        for (int k : {1, 3}) {
            const auto coeffs =
                moment_check(k, tanh_activation(), OuterActivation::identity, k + 1);
            for (int m = 0; m < k; ++m) REQUIRE(coeffs[static_cast<std::size_t>(m)] <= 1e-8);
        }
    }
}

TEST_CASE("instances are normalized to unit second moment") {
    const int d = 7;
    for (OuterActivation outer : {OuterActivation::identity, OuterActivation::tanh}) {
        const HardInstance inst(2, relu(), outer, axis_plane(d, 0, 1));
        // recompute E[g^2] on a finer independent grid
        const PolarGrid fine(2, 128, 48);
        const double second = fine.expect([&](double x, double y) {
            const double g = inst.eval2d(x, y);
            return g * g;
        });
        REQUIRE_THAT(second, WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("vanishing constructions are rejected") {
    REQUIRE_THROWS_AS(HardInstance(3, relu(), OuterActivation::identity, axis_plane(5, 0, 1)),
                      std::domain_error);
}

TEST_CASE("ambient evaluation goes through the plane") {
    const int d = 5;
    const HardInstance inst(2, relu(), OuterActivation::identity, axis_plane(d, 1, 3));
    Rng rng({901, 0});
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x(j) = rng.gaussian();
        REQUIRE_THAT(inst.eval(x) - inst.eval2d(x(1), x(3)), WithinAbs(0.0, 1e-15));
    }
    Eigen::VectorXd bad(d + 1);
    bad.setZero();
    REQUIRE_THROWS_AS(inst.eval(bad), std::invalid_argument);
}

TEST_CASE("every outer activation in the menu is odd") {
    Rng rng({902, 0});
    for (OuterActivation outer :
         {OuterActivation::identity, OuterActivation::tanh, OuterActivation::cube,
          OuterActivation::smoothed_sign}) {
        for (int rep = 0; rep < 200; ++rep) {
            const double t = 3.0 * rng.gaussian();
            REQUIRE_THAT(apply_outer(outer, -t) + apply_outer(outer, t), WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("non-orthonormal planes are rejected") {
    Eigen::MatrixXd p = axis_plane(5, 0, 1);
    p(0, 0) = 0.9;
    REQUIRE_THROWS_AS(HardInstance(2, relu(), OuterActivation::identity, p),
                      std::invalid_argument);
}
