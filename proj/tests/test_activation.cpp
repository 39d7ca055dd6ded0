#include "posnet/activation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace posnet;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}

TEST_CASE("ReLU moment record matches the closed forms") {
    const ActivationMoments m = activation_moments(relu().eval, 128);
    REQUIRE_THAT(m.b1, WithinAbs(kInvSqrt2Pi, 1e-12)); // E[relu] = 1/sqrt(2pi)
    REQUIRE_THAT(m.c, WithinAbs(0.5, 1e-12));          // E[relu(t) t] = 1/2
    REQUIRE_THAT(m.c1, WithinAbs(kInvSqrt2Pi, 1e-12)); // E[relu(t)(t^2-1)] = 1/sqrt(2pi)
    REQUIRE_THAT(m.b2, WithinAbs(0.5, 1e-12));         // half-Gaussian second moment
    REQUIRE_THAT(m.b4, WithinAbs(1.5, 1e-12));         // half-Gaussian fourth moment
}

TEST_CASE("moment cache is consistent across quadrature orders") {
    const ActivationMoments a = activation_moments(relu().eval, 64);
    const ActivationMoments b = activation_moments(relu().eval, 128);
    REQUIRE_THAT(a.b1 - b.b1, WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(a.c - b.c, WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(a.c1 - b.c1, WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(a.b2 - b.b2, WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(a.b4 - b.b4, WithinAbs(0.0, 1e-10));
}

TEST_CASE("abs activation moments") {
    const ActivationMoments m = activation_moments(abs_activation().eval, 128);
    REQUIRE_THAT(m.b1, WithinAbs(std::sqrt(2.0 / std::numbers::pi), 1e-12));
    REQUIRE_THAT(m.b2, WithinAbs(1.0, 1e-12));
}

TEST_CASE("spec validation enforces the learner's requirements") {
    REQUIRE_NOTHROW(ActivationSpec(relu()));
    REQUIRE_NOTHROW(ActivationSpec(abs_activation()));

    // identity goes negative
    REQUIRE_THROWS_AS(ActivationSpec(linear_activation()), std::invalid_argument);

    // claimed Lipschitz constant too small
    Activation steep{"steep", [](double t) { return t > 0 ? 3.0 * t : 0.0; }, 1.0};
    REQUIRE_THROWS_AS(ActivationSpec(steep), std::invalid_argument);
}

TEST_CASE("Jensen ordering of the cached moments") {
    for (const Activation& a : {relu(), abs_activation()}) {
        const ActivationMoments m = activation_moments(a.eval, 128);
        REQUIRE(m.b2 >= m.b1 * m.b1 - 1e-12);
        REQUIRE(m.b4 >= m.b2 * m.b2 - 1e-12);
    }
}
