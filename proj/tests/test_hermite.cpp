#include "posnet/hermite.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

using namespace posnet;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double relu_fn(double t) { return t > 0 ? t : 0.0; }

const std::function<double(double, double)> relu2d = [](double x, double) { return relu_fn(x); };
const std::function<double(double, double)> coord2d = [](double x, double) { return x; };

// closed-form E[relu(u) relu(v)] for rho-correlated standard normals
double relu_kernel(double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    return (std::sqrt(1.0 - rho * rho) + rho * (std::numbers::pi - std::acos(rho))) /
           (2.0 * std::numbers::pi);
}
} // namespace

TEST_CASE("normalized Hermite values") {
    REQUIRE(hermite_1d(0, 3.7) == 1.0);
    REQUIRE(hermite_1d(1, -2.5) == -2.5);
    REQUIRE_THAT(hermite_1d(2, 1.0), WithinAbs(0.0, 1e-15)); // (x^2-1)/sqrt(2)
    // He_3(x) = x^3 - 3x, normalized by 1/sqrt(6)
    REQUIRE_THAT(hermite_1d(3, 1.0), WithinAbs(-2.0 / std::sqrt(6.0), 1e-14));
    REQUIRE_THROWS_AS(hermite_1d(61, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(hermite_1d(-1, 0.0), std::invalid_argument);

    // chain evaluation agrees with the single-degree recurrence
    const Eigen::VectorXd vals = hermite_values(12, 0.83);
    for (int m = 0; m <= 12; ++m) REQUIRE(vals(m) == hermite_1d(m, 0.83));
}

TEST_CASE("expansion of coordinate functions") {
    const QuadratureGrid grid(48);
    const HermiteExpansion ex = expand_2d(coord2d, 6, grid);
    REQUIRE_THAT(ex.coeff(1, 0), WithinAbs(1.0, 1e-12));
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; a + b <= 6; ++b)
            if (!(a == 1 && b == 0)) REQUIRE_THAT(ex.coeff(a, b), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(ex.degree_part_norm(1), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(ex.degree_part_norm(0), WithinAbs(0.0, 1e-12));
    REQUIRE_THROWS_AS(ex.degree_part_norm(7), std::invalid_argument);
}

TEST_CASE("expansion of x^2 + y^2") {
    const QuadratureGrid grid(48);
    const HermiteExpansion ex =
        expand_2d([](double x, double y) { return x * x + y * y; }, 6, grid);
    REQUIRE_THAT(ex.coeff(0, 0), WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(ex.coeff(2, 0), WithinAbs(std::sqrt(2.0), 1e-12));
    REQUIRE_THAT(ex.coeff(0, 2), WithinAbs(std::sqrt(2.0), 1e-12));
    REQUIRE_THAT(ex.coeff(1, 1), WithinAbs(0.0, 1e-12));
}

TEST_CASE("expansion of ReLU(x) matches the activation moments") {
    const QuadratureGrid grid(64);
    const HermiteExpansion ex = expand_2d(relu2d, 10, grid);
    REQUIRE_THAT(ex.coeff(0, 0), WithinAbs(kInvSqrt2Pi, 1e-12));                  // B1
    REQUIRE_THAT(ex.coeff(1, 0), WithinAbs(0.5, 1e-12));                          // C
    REQUIRE_THAT(ex.coeff(2, 0), WithinAbs(kInvSqrt2Pi / std::sqrt(2.0), 1e-12)); // C1/sqrt(2)
    REQUIRE_THAT(ex.degree_part_norm(2), WithinAbs(1.0 / (4.0 * std::numbers::pi), 1e-12));

    // Parseval at the truncation: sum of degree parts <= E[f^2] = 1/2
    REQUIRE(ex.parseval_sum() <= 0.5 + 1e-8);
    REQUIRE(ex.parseval_sum() > 0.49);
}

TEST_CASE("non-finite integrand is reported") {
    const QuadratureGrid grid(16);
    REQUIRE_THROWS_AS(expand_2d([](double x, double) { return std::log(x - 100.0); }, 2, grid),
                      std::runtime_error);
}

TEST_CASE("Hermite basis is orthonormal under the tensor grid") {
    const QuadratureGrid grid(64);
    const int cap = 12;
    std::vector<std::pair<int, int>> js;
    for (int a = 0; a <= cap; ++a)
        for (int b = 0; a + b <= cap; ++b) js.emplace_back(a, b);
    const auto& pts = grid.points();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(pts.size()),
                          static_cast<Eigen::Index>(js.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Eigen::VectorXd hx = hermite_values(cap, pts[p].x);
        const Eigen::VectorXd hy = hermite_values(cap, pts[p].y);
        w(static_cast<Eigen::Index>(p)) = pts[p].w;
        for (std::size_t c = 0; c < js.size(); ++c)
            basis(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) =
                hx(js[c].first) * hy(js[c].second);
    }
    const Eigen::MatrixXd gram = basis.transpose() * w.asDiagonal() * basis;
    const double dev =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    REQUIRE(dev <= 1e-10);
}

TEST_CASE("cross-plane correlation: identical, orthogonal, rho-rotated") {
    const int d = 6;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, d);
    u(0, 0) = 1.0;
    u(1, 1) = 1.0;

    SECTION("identical planes give E[f^2]") {
        const McEstimate est = cross_plane_correlation(relu2d, u, u, 200'000, {40, 0}, 2);
        REQUIRE(std::fabs(est.value - 0.5) <= 3.0 * est.std_err);
    }

    SECTION("orthogonal planes decorrelate linear forms") {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, d);
        v(0, 2) = 1.0;
        v(1, 3) = 1.0;
        const McEstimate est = cross_plane_correlation(coord2d, u, v, 200'000, {41, 0}, 2);
        REQUIRE(std::fabs(est.value) <= 3.0 * est.std_err);
    }

    SECTION("UV^T = rho I gives correlation rho for f = x") {
        const double rho = 0.3;
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, d);
        v(0, 0) = rho;
        v(0, 2) = std::sqrt(1.0 - rho * rho);
        v(1, 1) = rho;
        v(1, 3) = std::sqrt(1.0 - rho * rho);
        const McEstimate est = cross_plane_correlation(coord2d, u, v, 400'000, {42, 0}, 2);
        REQUIRE(std::fabs(est.value - rho) <= 3.0 * est.std_err);
    }

    SECTION("non-orthonormal rows are rejected") {
        Eigen::MatrixXd bad = u;
        bad(0, 0) = 2.0;
        REQUIRE_THROWS_AS(cross_plane_correlation(coord2d, bad, u, 100, {43, 0}),
                          std::invalid_argument);
    }
}

TEST_CASE("spectral decay bound on cross-plane correlation") {
    // E[p(Ux) p(Vx)] <= sum_m ||UV^T||^m ||p^[m]||^2 + tail; p = relu(x)
    const int d = 6;
    const double rho = 0.6;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, d);
    u(0, 0) = 1.0;
    u(1, 1) = 1.0;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, d);
    v(0, 0) = rho;
    v(0, 2) = std::sqrt(1.0 - rho * rho);
    v(1, 1) = rho;
    v(1, 3) = std::sqrt(1.0 - rho * rho);

    const McEstimate lhs = cross_plane_correlation(relu2d, u, v, 400'000, {44, 0}, 2);
    // the closed-form kernel is an independent oracle for the left side
    REQUIRE(std::fabs(lhs.value - relu_kernel(rho)) <= 3.0 * lhs.std_err);

    const int cap = 16;
    const QuadratureGrid grid(64);
    const HermiteExpansion ex = expand_2d(relu2d, cap, grid);
    double rhs = 0.0;
    for (int m = 0; m <= cap; ++m) rhs += std::pow(rho, m) * ex.degree_part_norm(m);
    const double tail = std::max(0.0, 0.5 - ex.parseval_sum()) * std::pow(rho, cap + 1);
    REQUIRE(lhs.value <= rhs + tail + 3.0 * lhs.std_err);
}

TEST_CASE("harmonic derivative identity via finite differences") {
    // p = H_(2,1): contracting the constant tensor grad^3 p with itself
    // gives 3! E[p^2] = 6
    const auto p = [](double x, double y) { return hermite_1d(2, x) * hermite_1d(1, y); };
    const double h = 1e-3;
    const double x0 = 0.3, y0 = -0.7;

    const auto d3 = [&](int nx) {
        std::function<double(double, double)> g = p;
        for (int i = 0; i < nx; ++i) {
            auto f = g;
            g = [f, h](double x, double y) { return (f(x + h, y) - f(x - h, y)) / (2 * h); };
        }
        for (int i = 0; i < 3 - nx; ++i) {
            auto f = g;
            g = [f, h](double x, double y) { return (f(x, y + h) - f(x, y - h)) / (2 * h); };
        }
        return g(x0, y0);
    };

    double acc = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                const int nx = (i == 0) + (j == 0) + (k == 0);
                const double val = d3(nx);
                acc += val * val;
            }
    REQUIRE_THAT(acc, WithinAbs(6.0, 1e-4));
}
