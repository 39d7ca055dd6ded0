#pragma once

#include "posnet/parallel.hpp"
#include "posnet/quadrature.hpp"
#include "posnet/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace posnet {

inline constexpr int kHermiteDegreeCap = 60;

/// Normalized probabilists' Hermite polynomial H_m(t) = He_m(t)/sqrt(m!),
/// evaluated by the normalized three-term recurrence
/// H_{j+1}(t) = (t H_j(t) - sqrt(j) H_{j-1}(t)) / sqrt(j+1).
inline double hermite_1d(int m, double t) {
    if (m < 0 || m > kHermiteDegreeCap)
        throw std::invalid_argument("hermite_1d: degree must be in [0, 60]");
    double prev = 1.0;
    if (m == 0) return prev;
    double cur = t;
    for (int j = 1; j < m; ++j) {
        const double next = (t * cur - std::sqrt(static_cast<double>(j)) * prev) /
                            std::sqrt(static_cast<double>(j + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

/// All values H_0(t) .. H_max(t) in one pass.
inline Eigen::VectorXd hermite_values(int max_degree, double t) {
    if (max_degree < 0 || max_degree > kHermiteDegreeCap)
        throw std::invalid_argument("hermite_values: degree must be in [0, 60]");
    Eigen::VectorXd h(max_degree + 1);
    h(0) = 1.0;
    if (max_degree >= 1) h(1) = t;
    for (int j = 1; j < max_degree; ++j)
        h(j + 1) = (t * h(j) - std::sqrt(static_cast<double>(j)) * h(j - 1)) /
                   std::sqrt(static_cast<double>(j + 1));
    return h;
}

/// Truncated 2D Hermite expansion: coefficients f_hat(J) for multi-indices
/// J = (a, b) with a + b <= max_degree.
class HermiteExpansion {
public:
    explicit HermiteExpansion(int max_degree)
        : max_degree_(max_degree),
          coeffs_(Eigen::MatrixXd::Zero(max_degree + 1, max_degree + 1)) {
        if (max_degree < 0 || max_degree > kHermiteDegreeCap)
            throw std::invalid_argument("HermiteExpansion: degree must be in [0, 60]");
    }

    [[nodiscard]] int max_degree() const noexcept { return max_degree_; }

    [[nodiscard]] double coeff(int a, int b) const {
        if (a < 0 || b < 0 || a + b > max_degree_)
            throw std::invalid_argument("HermiteExpansion: index out of range");
        return coeffs_(a, b);
    }

    double& coeff_ref(int a, int b) { return coeffs_(a, b); }

    /// Parseval piece ||f^[m]||^2 = sum_{|J|=m} f_hat(J)^2.
    [[nodiscard]] double degree_part_norm(int m) const {
        if (m < 0 || m > max_degree_)
            throw std::invalid_argument("degree_part_norm: degree beyond expansion cap");
        double acc = 0.0;
        for (int a = 0; a <= m; ++a) acc += coeffs_(a, m - a) * coeffs_(a, m - a);
        return acc;
    }

    /// Largest |f_hat(J)| over |J| = m.
    [[nodiscard]] double max_abs_coeff(int m) const {
        if (m < 0 || m > max_degree_)
            throw std::invalid_argument("max_abs_coeff: degree beyond expansion cap");
        double acc = 0.0;
        for (int a = 0; a <= m; ++a) acc = std::max(acc, std::fabs(coeffs_(a, m - a)));
        return acc;
    }

    [[nodiscard]] double parseval_sum() const {
        double acc = 0.0;
        for (int m = 0; m <= max_degree_; ++m) acc += degree_part_norm(m);
        return acc;
    }

private:
    int max_degree_;
    Eigen::MatrixXd coeffs_;
};

/// Expand f against the normalized Hermite basis: f_hat(J) = E[f(x) H_J(x)],
/// with the expectation taken by the supplied grid (tensor or polar).
template <class Grid>
HermiteExpansion expand_2d(const std::function<double(double, double)>& f, int max_degree,
                           const Grid& grid) {
    HermiteExpansion exp(max_degree);
    const auto& pts = grid.points();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(max_degree + 1, max_degree + 1);
    for (const auto& p : pts) {
        const double v = f(p.x, p.y);
        if (!std::isfinite(v))
            throw std::runtime_error("expand_2d: non-finite integrand at node (" +
                                     std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        const Eigen::VectorXd hx = hermite_values(max_degree, p.x);
        const Eigen::VectorXd hy = hermite_values(max_degree, p.y);
        const double wv = p.w * v;
        for (int a = 0; a <= max_degree; ++a)
            for (int b = 0; a + b <= max_degree; ++b) acc(a, b) += wv * hx(a) * hy(b);
    }
    for (int a = 0; a <= max_degree; ++a)
        for (int b = 0; a + b <= max_degree; ++b) exp.coeff_ref(a, b) = acc(a, b);
    return exp;
}

inline double degree_part_norm(const HermiteExpansion& exp, int m) {
    return exp.degree_part_norm(m);
}

/// Monte-Carlo estimate with standard error.
struct McEstimate {
    double value = 0.0;
    double std_err = 0.0;
};

namespace detail {

inline void require_orthonormal_rows(const Eigen::MatrixXd& plane, const char* who) {
    if (plane.rows() != 2) throw std::invalid_argument(std::string(who) + ": plane must be 2 x d");
    Eigen::Matrix2d gram = plane * plane.transpose();
    if ((gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument(std::string(who) + ": rows must be orthonormal");
}

} // namespace detail

/// Monte-Carlo estimate of E_{x~N^d}[f(Ux) f(Vx)] for two planes with
/// orthonormal rows.
inline McEstimate cross_plane_correlation(const std::function<double(double, double)>& f,
                                          const Eigen::MatrixXd& u_plane,
                                          const Eigen::MatrixXd& v_plane, std::int64_t n_mc,
                                          RngStream stream, int threads = 0) {
    detail::require_orthonormal_rows(u_plane, "cross_plane_correlation");
    detail::require_orthonormal_rows(v_plane, "cross_plane_correlation");
    if (u_plane.cols() != v_plane.cols())
        throw std::invalid_argument("cross_plane_correlation: dimension mismatch");
    if (n_mc < 2) throw std::invalid_argument("cross_plane_correlation: n_mc >= 2 required");
    const int d = static_cast<int>(u_plane.cols());

    constexpr std::int64_t kBlock = 65536;
    const std::int64_t blocks = (n_mc + kBlock - 1) / kBlock;
    std::vector<double> sum1(static_cast<std::size_t>(blocks), 0.0);
    std::vector<double> sum2(static_cast<std::size_t>(blocks), 0.0);
    parallel_blocks(blocks, threads, [&](std::int64_t b) {
        const std::int64_t len = std::min(n_mc, (b + 1) * kBlock) - b * kBlock;
        Rng rng(stream.substream(static_cast<std::uint64_t>(b)));
        Eigen::VectorXd x(d);
        double s1 = 0.0, s2 = 0.0;
        for (std::int64_t i = 0; i < len; ++i) {
            for (int j = 0; j < d; ++j) x(j) = rng.gaussian();
            const Eigen::Vector2d pu = u_plane * x;
            const Eigen::Vector2d pv = v_plane * x;
            const double prod = f(pu(0), pu(1)) * f(pv(0), pv(1));
            s1 += prod;
            s2 += prod * prod;
        }
        sum1[static_cast<std::size_t>(b)] = s1;
        sum2[static_cast<std::size_t>(b)] = s2;
    });
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < sum1.size(); ++b) {
        s1 += sum1[b];
        s2 += sum2[b];
    }
    const double mean = s1 / static_cast<double>(n_mc);
    const double var = std::max(0.0, s2 / static_cast<double>(n_mc) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n_mc))};
}

} // namespace posnet
