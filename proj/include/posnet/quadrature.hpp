#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace posnet {

/// One-dimensional quadrature rule: E[g(t)] ~ sum_i w_i g(t_i).
struct GaussRule1d {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <class F>
    [[nodiscard]] double integrate(F&& g) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g(nodes[i]);
        return acc;
    }
};

namespace detail {

// Gauss rule from a symmetric tridiagonal Jacobi matrix (Golub-Welsch).
//
// Nodes come from the eigenvalues, Newton-polished as zeros of the
// orthonormal polynomial p_n. Weights use the Christoffel identity
// w_i = 1 / sum_{j<n} p_j(x_i)^2, which keeps full relative accuracy even
// where the weights underflow toward the tail; reading them off the dense
// eigenvector first components loses them to absolute eigensolver error.
inline GaussRule1d golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                                double total_mass) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jacobi(i, i) = diag(i);
        if (i + 1 < n) jacobi(i, i + 1) = jacobi(i + 1, i) = offdiag(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("golub_welsch: eigensolver failed");

    // orthonormal-polynomial recurrence: x p_j = b_{j+1} p_{j+1} + a_j p_j + b_j p_{j-1};
    // returns p_0..p_n and the derivative of p_n (b_n := 1, zeros unaffected)
    const auto eval_chain = [&](double x, Eigen::VectorXd& p, double& pn_prime) {
        double dprev = 0.0, dcur = 0.0;
        p(0) = 1.0 / std::sqrt(total_mass);
        for (int j = 0; j < n; ++j) {
            const double bnext = j + 1 < n ? offdiag(j) : 1.0;
            const double bprev = j > 0 ? offdiag(j - 1) : 0.0;
            p(j + 1) = ((x - diag(j)) * p(j) - bprev * (j > 0 ? p(j - 1) : 0.0)) / bnext;
            const double dnext = (p(j) + (x - diag(j)) * dcur - bprev * dprev) / bnext;
            dprev = dcur;
            dcur = dnext;
        }
        pn_prime = dcur;
    };

    GaussRule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    Eigen::VectorXd p(n + 1);
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double pn_prime = 0.0;
        for (int step = 0; step < 3; ++step) {
            eval_chain(x, p, pn_prime);
            if (pn_prime != 0.0) x -= p(n) / pn_prime;
        }
        eval_chain(x, p, pn_prime);
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / p.head(n).squaredNorm();
    }
    return rule;
}

} // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline GaussRule1d gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n > 1 ? n - 1 : 0);
    for (int i = 1; i < n; ++i) off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
    return detail::golub_welsch(diag, off, 2.0);
}

/// Gauss rule for the half-line weight exp(-t^2/2) on [0, inf).
///
/// The recurrence coefficients of the weight have no closed form, so they are
/// recovered by Lanczos tridiagonalization of a dense composite-Legendre
/// discretization of the measure (Gautschi's discretized Stieltjes
/// procedure). Exactness at the top end (degree near 2n) erodes to ~1e-2
/// relative in doubles; moments up to degree ~n stay at ~1e-13, which is the
/// regime every caller in this library uses.
inline GaussRule1d half_gaussian_rule(int n) {
    if (n < 1) throw std::invalid_argument("half_gaussian_rule: n >= 1 required");
    constexpr double kUpper = 40.0; // exp(-800): zero mass beyond
    constexpr int kPanels = 120;
    constexpr int kPanelOrder = 32;

    const GaussRule1d gl = gauss_legendre(kPanelOrder);
    const int npts = kPanels * kPanelOrder;
    Eigen::VectorXd x(npts), w(npts);
    for (int p = 0; p < kPanels; ++p) {
        const double a = kUpper * p / kPanels, b = kUpper * (p + 1) / kPanels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int j = 0; j < kPanelOrder; ++j) {
            const int idx = p * kPanelOrder + j;
            x(idx) = mid + half * gl.nodes[j];
            w(idx) = half * gl.weights[j] * std::exp(-0.5 * x(idx) * x(idx));
        }
    }

    // Lanczos with full reorthogonalization on diag(x), start vector sqrt(w).
    Eigen::VectorXd q = w.cwiseSqrt();
    const double mass = q.norm();
    q /= mass;
    Eigen::MatrixXd basis(npts, n);
    basis.col(0) = q;
    Eigen::VectorXd alpha(n), beta(n > 1 ? n - 1 : 0);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd v = x.cwiseProduct(basis.col(j));
        alpha(j) = basis.col(j).dot(v);
        v -= alpha(j) * basis.col(j);
        if (j > 0) v -= beta(j - 1) * basis.col(j - 1);
        const auto span = basis.leftCols(j + 1);
        v -= span * (span.transpose() * v);
        v -= span * (span.transpose() * v);
        if (j + 1 < n) {
            beta(j) = v.norm();
            if (!(beta(j) > 0.0)) throw std::runtime_error("half_gaussian_rule: Lanczos breakdown");
            basis.col(j + 1) = v / beta(j);
        }
    }
    return detail::golub_welsch(alpha, beta, mass * mass);
}

/// Quadrature for E_{t~N(0,1)}[g(t)], exact for polynomials and for
/// integrands that are smooth on each side of a kink at zero (ReLU, |t|).
/// Built as two mirrored half-range panels of `order` nodes each; weights
/// carry the 1/sqrt(2*pi) normalization and sum to 1.
inline GaussRule1d gaussian_kink_rule(int order) {
    const GaussRule1d half = half_gaussian_rule(order);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    GaussRule1d rule;
    rule.nodes.reserve(2 * half.nodes.size());
    rule.weights.reserve(2 * half.nodes.size());
    for (std::size_t i = half.nodes.size(); i-- > 0;) {
        rule.nodes.push_back(-half.nodes[i]);
        rule.weights.push_back(norm * half.weights[i]);
    }
    for (std::size_t i = 0; i < half.nodes.size(); ++i) {
        rule.nodes.push_back(half.nodes[i]);
        rule.weights.push_back(norm * half.weights[i]);
    }
    return rule;
}

/// A weighted planar node: E[g] ~ sum w_i g(x_i, y_i).
struct QuadNode2d {
    double x, y, w;
};

/// Tensor grid for E_{(x,y)~N^2}[g], built from the 1D kink-aware rule.
/// `order` counts nodes per half-axis, so one axis carries 2*order nodes.
class QuadratureGrid {
public:
    explicit QuadratureGrid(int order = 64) : order_(order), rule_(gaussian_kink_rule(order)) {}

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] const std::vector<double>& nodes_1d() const noexcept { return rule_.nodes; }
    [[nodiscard]] const std::vector<double>& weights_1d() const noexcept { return rule_.weights; }

    [[nodiscard]] std::vector<QuadNode2d> points() const {
        std::vector<QuadNode2d> pts;
        pts.reserve(rule_.nodes.size() * rule_.nodes.size());
        for (std::size_t i = 0; i < rule_.nodes.size(); ++i)
            for (std::size_t j = 0; j < rule_.nodes.size(); ++j)
                pts.push_back({rule_.nodes[i], rule_.nodes[j], rule_.weights[i] * rule_.weights[j]});
        return pts;
    }

    template <class F>
    [[nodiscard]] double expect(F&& g) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < rule_.nodes.size(); ++j)
                row += rule_.weights[j] * g(rule_.nodes[i], rule_.nodes[j]);
            acc += rule_.weights[i] * row;
        }
        return acc;
    }

private:
    int order_;
    GaussRule1d rule_;
};

/// Polar grid for E_{(x,y)~N^2}[g], specialized for integrands whose only
/// non-smoothness lies along the 2k rays where the hard construction's inner
/// arguments vanish (angles pi/2 + m*pi/k).
///
/// Radial: half-range Gaussian rule with the Jacobian r folded into the
/// weights. Angular: Gauss-Legendre on each of the 2k arcs between
/// consecutive rays. The node set is invariant under rotation by pi/k, so
/// moments that vanish by the rotation-antisymmetry argument vanish to
/// machine precision here, not merely to quadrature accuracy.
class PolarGrid {
public:
    explicit PolarGrid(int k_sym, int radial_order = 64, int arc_order = 24)
        : k_sym_(k_sym) {
        if (k_sym < 1) throw std::invalid_argument("PolarGrid: k >= 1 required");
        const GaussRule1d radial = half_gaussian_rule(radial_order);
        const GaussRule1d arc = gauss_legendre(arc_order);
        const double pi = std::numbers::pi;
        points_.reserve(radial.nodes.size() * 2 * static_cast<std::size_t>(k_sym) * arc.nodes.size());
        for (int m = 0; m < 2 * k_sym; ++m) {
            const double a = pi / 2 + pi * m / k_sym;
            const double half = pi / (2.0 * k_sym);
            for (std::size_t j = 0; j < arc.nodes.size(); ++j) {
                const double theta = a + half + half * arc.nodes[j];
                const double wt = half * arc.weights[j] / (2.0 * pi);
                const double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
                    const double r = radial.nodes[i];
                    points_.push_back({r * c, r * s, radial.weights[i] * r * wt});
                }
            }
        }
    }

    [[nodiscard]] int k_sym() const noexcept { return k_sym_; }
    [[nodiscard]] const std::vector<QuadNode2d>& points() const noexcept { return points_; }

    template <class F>
    [[nodiscard]] double expect(F&& g) const {
        double acc = 0.0;
        for (const auto& p : points_) acc += p.w * g(p.x, p.y);
        return acc;
    }

private:
    int k_sym_;
    std::vector<QuadNode2d> points_;
};

} // namespace posnet
