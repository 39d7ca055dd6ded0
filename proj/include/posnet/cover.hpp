#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace posnet {

/// Deterministic cover of the k-ball annulus {v : eps*R <= ||v|| <= R}.
/// Points live in subspace coordinates.
struct Cover {
    Eigen::MatrixXd points; // one row per point, k columns
    double eps = 0.0;
    double radius = 0.0;
    int scales = 0; // largest shell index; shell i has radius (1-eps)^i * R

    [[nodiscard]] std::int64_t size() const noexcept { return points.rows(); }
};

/// C(n+k-1, k): number of size-k multisets over n cover points, saturating
/// at int64 max.
inline std::int64_t candidate_count(std::int64_t n, int k) {
    if (n <= 0) return 0;
    long double acc = 1.0L;
    for (int i = 1; i <= k; ++i) acc = acc * static_cast<long double>(n - 1 + i) / i;
    if (acc > static_cast<long double>(std::numeric_limits<std::int64_t>::max()))
        return std::numeric_limits<std::int64_t>::max();
    return static_cast<std::int64_t>(acc + 0.5L);
}

/// Build the cover: radial shells (1-eps)^i * R down to eps*R, decorated with
/// a deterministic direction net taken from the axis-aligned lattice of
/// spacing eps*R/sqrt(k) intersected with the ball. Directions are
/// deduplicated exactly by reducing each lattice point to its primitive
/// integer vector.
inline Cover build_cover(int k, double eps, double radius) {
    if (k < 1) throw std::invalid_argument("build_cover: k >= 1 required");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("build_cover: eps in (0,1) required");
    if (radius < 0.0) throw std::invalid_argument("build_cover: radius >= 0 required");

    Cover cover;
    cover.eps = eps;
    cover.radius = radius;
    if (radius == 0.0) {
        cover.points.resize(0, k);
        return cover;
    }

    int scales = 0;
    while (std::pow(1.0 - eps, scales) > eps) ++scales;
    cover.scales = scales;

    // integer lattice odometer over [-n_max, n_max]^k
    const int n_max = static_cast<int>(std::floor(std::sqrt(static_cast<double>(k)) / eps));
    std::vector<int> idx(static_cast<std::size_t>(k), -n_max);
    std::map<std::vector<int>, Eigen::VectorXd> directions; // primitive vector -> unit direction
    const double cell = eps * radius / std::sqrt(static_cast<double>(k));
    for (;;) {
        double norm2 = 0.0;
        bool all_zero = true;
        for (int c : idx) {
            norm2 += static_cast<double>(c) * c;
            all_zero = all_zero && c == 0;
        }
        const double norm = cell * std::sqrt(norm2);
        if (!all_zero && norm <= radius) {
            std::vector<int> prim = idx;
            int g = 0;
            for (int c : prim) g = std::gcd(g, std::abs(c));
            for (int& c : prim) c /= g;
            if (!directions.contains(prim)) {
                Eigen::VectorXd dir(k);
                for (int j = 0; j < k; ++j) dir(j) = prim[static_cast<std::size_t>(j)];
                directions.emplace(std::move(prim), dir / dir.norm());
            }
        }
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n_max) {
            idx[static_cast<std::size_t>(pos)] = -n_max;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }

    cover.points.resize(static_cast<Eigen::Index>(directions.size()) * (scales + 1), k);
    Eigen::Index row = 0;
    for (int i = 0; i <= scales; ++i) {
        const double shell = std::pow(1.0 - eps, i) * radius;
        for (const auto& [prim, dir] : directions) cover.points.row(row++) = shell * dir.transpose();
    }
    return cover;
}

/// One candidate of the search: k cover points (a multiset, stored as
/// non-decreasing indices into the cover).
struct Candidate {
    std::vector<std::int64_t> indices;
    Eigen::MatrixXd us; // k x k, row per unit, subspace coordinates
};

/// Lazily enumerates all size-k multisets of cover points in lexicographic
/// order of their non-decreasing index tuples.
class CandidateEnumerator {
public:
    CandidateEnumerator(const Cover& cover, int k)
        : cover_(&cover), k_(k), idx_(static_cast<std::size_t>(k), 0) {
        if (k < 1) throw std::invalid_argument("CandidateEnumerator: k >= 1 required");
        done_ = cover.size() == 0;
    }

    /// Total number of candidates this enumerator will yield.
    [[nodiscard]] std::int64_t count() const { return candidate_count(cover_->size(), k_); }

    /// Advance to the next candidate; returns false when exhausted.
    bool next(Candidate& out) {
        if (done_) return false;
        out.indices.assign(idx_.begin(), idx_.end());
        out.us.resize(k_, cover_->points.cols());
        for (int i = 0; i < k_; ++i) out.us.row(i) = cover_->points.row(idx_[static_cast<std::size_t>(i)]);
        advance();
        return true;
    }

    /// Restore the tuple at a given flat position (used by parallel sweeps).
    void seek(const std::vector<std::int64_t>& tuple) {
        idx_.assign(tuple.begin(), tuple.end());
        done_ = false;
    }

private:
    void advance() {
        const std::int64_t n = cover_->size();
        int pos = k_ - 1;
        while (pos >= 0 && idx_[static_cast<std::size_t>(pos)] == n - 1) --pos;
        if (pos < 0) {
            done_ = true;
            return;
        }
        const std::int64_t v = idx_[static_cast<std::size_t>(pos)] + 1;
        for (int j = pos; j < k_; ++j) idx_[static_cast<std::size_t>(j)] = v;
    }

    const Cover* cover_;
    int k_;
    std::vector<std::int64_t> idx_;
    bool done_ = false;
};

/// Lazy stream of all size-k multisets of cover points.
inline CandidateEnumerator enumerate_candidates(const Cover& cover, int k) {
    return CandidateEnumerator(cover, k);
}

} // namespace posnet
