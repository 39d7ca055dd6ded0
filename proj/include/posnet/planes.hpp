#pragma once

#include "posnet/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace posnet {

/// Spectral norm of A B^T for two 2 x d matrices, via the closed form for
/// the singular values of a 2 x 2 matrix.
inline double plane_product_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::Matrix2d m = a * b.transpose();
    const double fro2 = m.squaredNorm();
    const double det = m.determinant();
    const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
    return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

/// Uniformly random 2-frame: orthonormalize two iid Gaussian vectors.
inline Eigen::MatrixXd random_plane(int d, Rng& rng) {
    if (d < 2) throw std::invalid_argument("random_plane: d >= 2 required");
    for (int attempt = 0; attempt < 5; ++attempt) {
        Eigen::MatrixXd plane(2, d);
        for (int r = 0; r < 2; ++r)
            for (int j = 0; j < d; ++j) plane(r, j) = rng.gaussian();
        const double n0 = plane.row(0).norm();
        if (n0 < 1e-12) continue;
        plane.row(0) /= n0;
        plane.row(1) -= plane.row(0) * plane.row(0).dot(plane.row(1));
        const double n1 = plane.row(1).norm();
        if (n1 < 1e-12) continue; // collinear draw; try again
        plane.row(1) /= n1;
        return plane;
    }
    throw std::runtime_error("random_plane: degenerate draws exhausted retries");
}

/// A set of planes with small pairwise ||A_i A_j^T||_2.
struct PlaneSet {
    std::vector<Eigen::MatrixXd> planes;
    double pairwise_bound = 0.0; // exact max over pairs; 0 when fewer than 2 planes

    [[nodiscard]] std::size_t size() const noexcept { return planes.size(); }

    /// Recompute the max pairwise product norm from scratch.
    [[nodiscard]] double recompute_pairwise_bound() const {
        double mx = 0.0;
        for (std::size_t i = 0; i < planes.size(); ++i)
            for (std::size_t j = i + 1; j < planes.size(); ++j)
                mx = std::max(mx, plane_product_norm(planes[i], planes[j]));
        return mx;
    }
};

/// Thrown when rejection sampling cannot pack m planes under the bound.
class PackingError : public std::runtime_error {
public:
    PackingError(int achieved, int requested, std::int64_t attempts)
        : std::runtime_error("plane_packing: placed " + std::to_string(achieved) + " of " +
                             std::to_string(requested) + " planes in " +
                             std::to_string(attempts) + " attempts"),
          achieved_(achieved) {}
    [[nodiscard]] int achieved() const noexcept { return achieved_; }

private:
    int achieved_;
};

/// Draw planes at random, rejecting any that violate the pairwise bound
/// against those already kept.
inline PlaneSet plane_packing(int d, int m, double bound, Rng& rng,
                              std::int64_t max_attempts) {
    if (m < 1) throw std::invalid_argument("plane_packing: m >= 1 required");
    if (!(bound >= 0.0 && bound < 1.0))
        throw std::invalid_argument("plane_packing: bound in [0,1) required");
    PlaneSet set;
    set.planes.reserve(static_cast<std::size_t>(m));
    std::int64_t attempts = 0;
    while (static_cast<int>(set.planes.size()) < m) {
        if (attempts >= max_attempts)
            throw PackingError(static_cast<int>(set.planes.size()), m, attempts);
        ++attempts;
        Eigen::MatrixXd cand = random_plane(d, rng);
        bool ok = true;
        double worst = 0.0;
        for (const auto& p : set.planes) {
            const double nrm = plane_product_norm(cand, p);
            worst = std::max(worst, nrm);
            if (nrm > bound) {
                ok = false;
                break;
            }
        }
        if (ok) {
            set.planes.push_back(std::move(cand));
            set.pairwise_bound = std::max(set.pairwise_bound, worst);
        }
    }
    return set;
}

} // namespace posnet
