#pragma once

#include "posnet/hard_instance.hpp"
#include "posnet/parallel.hpp"
#include "posnet/quadrature.hpp"
#include "posnet/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace posnet {

/// Raised when a Monte-Carlo query cannot reach the precision the tolerance
/// contract demands.
class PrecisionError : public std::runtime_error {
public:
    PrecisionError(double std_err, double tau)
        : std::runtime_error("sq_query: std-err " + std::to_string(std_err) +
                             " too large for tau " + std::to_string(tau) +
                             "; increase n_mc") {}
};

/// Simulated correlational statistical-query oracle for one hard instance.
///
/// Answers are the true inner product E[q(x) g(x)] plus adversarial jitter,
/// guaranteed within tau of the truth:
///  - plane-expressible queries q(x) = q2d(plane x): truth by 2D quadrature
///    on the instance's polar grid, jitter spans the full [-tau, tau];
///  - ambient queries: truth by Monte-Carlo with enforced std-err <= tau/3,
///    jitter restricted to [-(tau - 3 se), +(tau - 3 se)].
class SqOracle {
public:
    SqOracle(HardInstance instance, double tau, RngStream stream, int radial_order = 96,
             int arc_order = 32)
        : inst_(std::move(instance)), tau_(tau), rng_(stream),
          grid_(inst_.k(), radial_order, arc_order) {
        if (!(tau > 0.0)) throw std::invalid_argument("SqOracle: tau > 0 required");
    }

    [[nodiscard]] const HardInstance& instance() const noexcept { return inst_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] std::int64_t query_count() const noexcept { return query_count_; }

    /// Quadrature truth for a plane-expressible query (exposed for tests).
    [[nodiscard]] double plane_truth(const std::function<double(double, double)>& q2d) const {
        return grid_.expect([&](double x, double y) {
            const double qv = q2d(x, y);
            check_range(qv);
            return qv * inst_.eval2d(x, y);
        });
    }

    /// Answer a query given as a function of the plane coordinates.
    double query_plane(const std::function<double(double, double)>& q2d) {
        const double truth = plane_truth(q2d);
        ++query_count_;
        return truth + tau_ * (2.0 * rng_.uniform() - 1.0);
    }

    /// Answer an ambient query q: R^d -> [-1, 1] by Monte-Carlo.
    double query(const std::function<double(const Eigen::VectorXd&)>& q, std::int64_t n_mc,
                 int threads = 0) {
        if (n_mc < 2) throw std::invalid_argument("sq_query: n_mc >= 2 required");
        const int d = inst_.dim();
        const RngStream mc_stream = rng_.stream().substream(0xABCD0000u + static_cast<std::uint64_t>(query_count_));
        constexpr std::int64_t kBlock = 65536;
        const std::int64_t blocks = (n_mc + kBlock - 1) / kBlock;
        std::vector<double> s1(static_cast<std::size_t>(blocks), 0.0);
        std::vector<double> s2(static_cast<std::size_t>(blocks), 0.0);
        parallel_blocks(blocks, threads, [&](std::int64_t b) {
            const std::int64_t len = std::min(n_mc, (b + 1) * kBlock) - b * kBlock;
            Rng rng(mc_stream.substream(static_cast<std::uint64_t>(b)));
            Eigen::VectorXd x(d);
            double a1 = 0.0, a2 = 0.0;
            for (std::int64_t i = 0; i < len; ++i) {
                for (int j = 0; j < d; ++j) x(j) = rng.gaussian();
                const double qv = q(x);
                check_range(qv);
                const double v = qv * inst_.eval(x);
                a1 += v;
                a2 += v * v;
            }
            s1[static_cast<std::size_t>(b)] = a1;
            s2[static_cast<std::size_t>(b)] = a2;
        });
        double t1 = 0.0, t2 = 0.0;
        for (std::size_t b = 0; b < s1.size(); ++b) {
            t1 += s1[b];
            t2 += s2[b];
        }
        const double mean = t1 / static_cast<double>(n_mc);
        const double var = std::max(0.0, t2 / static_cast<double>(n_mc) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(n_mc));
        if (se >= tau_ / 3.0) throw PrecisionError(se, tau_);
        const double slack = tau_ - 3.0 * se;
        ++query_count_;
        return mean + slack * (2.0 * rng_.uniform() - 1.0);
    }

private:
    static void check_range(double qv) {
        if (!(std::fabs(qv) <= 1.0 + 1e-9))
            throw std::invalid_argument("sq_query: query value outside [-1, 1]");
    }

    HardInstance inst_;
    double tau_;
    Rng rng_;
    PolarGrid grid_;
    std::int64_t query_count_ = 0;
};

} // namespace posnet
