#pragma once

#include "posnet/chow.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace posnet {

/// Span of the top-k eigenvectors of the (symmetrized) Chow matrix.
struct Subspace {
    Eigen::MatrixXd basis;       // d x k, orthonormal columns
    Eigen::VectorXd eigenvalues; // the k retained eigenvalues, descending

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(basis.rows()); }
    [[nodiscard]] int rank() const noexcept { return static_cast<int>(basis.cols()); }

    /// Project an ambient vector onto the subspace (returns coordinates).
    [[nodiscard]] Eigen::VectorXd coordinates(const Eigen::VectorXd& x) const {
        return basis.transpose() * x;
    }
};

inline Subspace top_k_subspace(const ChowMatrix& chow, int k) {
    const int d = static_cast<int>(chow.m_hat.rows());
    if (k < 1 || k > d) throw std::invalid_argument("top_k_subspace: need 1 <= k <= d");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chow.m_hat);
    if (es.info() != Eigen::Success) throw std::runtime_error("top_k_subspace: eigensolver failed");
    // Eigen returns eigenvalues ascending; take the algebraically largest k.
    Subspace sub;
    sub.basis.resize(d, k);
    sub.eigenvalues.resize(k);
    for (int i = 0; i < k; ++i) {
        sub.basis.col(i) = es.eigenvectors().col(d - 1 - i);
        sub.eigenvalues(i) = es.eigenvalues()(d - 1 - i);
    }
    return sub;
}

/// Per-unit distance ||w_i - proj w_i|| between the true weight rows and the
/// recovered subspace (test harness; requires ground truth).
inline std::vector<double> subspace_residual(const Subspace& sub, const NetworkParams& params) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(params.units()));
    for (int i = 0; i < params.units(); ++i) {
        const Eigen::VectorXd w = params.weights().row(i).transpose();
        out.push_back((w - sub.basis * (sub.basis.transpose() * w)).norm());
    }
    return out;
}

} // namespace posnet
