#pragma once

#include "posnet/hard_instance.hpp"
#include "posnet/parallel.hpp"
#include "posnet/planes.hpp"
#include "posnet/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace posnet {

/// Pairwise Monte-Carlo correlations E[g_i(x) g_j(x)] of embedded hard
/// instances, with the spectral-decay bounds they are compared against.
struct CorrelationReport {
    Eigen::MatrixXd estimate;  // m x m, diagonal ~ 1
    Eigen::MatrixXd std_err;   // standard error per entry
    Eigen::MatrixXd bound_k;   // ||A_i A_j^T||^k   (decay from degree k on)
    Eigen::MatrixXd bound_k1;  // ||A_i A_j^T||^{k+1} (the stricter printed form)
    double avg_offdiag = 0.0;  // signed mean over i != j
    std::int64_t n_mc = 0;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(estimate.rows()); }
};

/// Estimate all pairwise correlations in one pass over shared Gaussian
/// samples. Instances must share (k, phi, outer) and the ambient dimension.
inline CorrelationReport pairwise_correlation_report(const std::vector<HardInstance>& instances,
                                                     std::int64_t n_mc, RngStream stream,
                                                     int threads = 0) {
    if (instances.empty())
        throw std::invalid_argument("pairwise_correlation_report: no instances");
    if (n_mc < 2) throw std::invalid_argument("pairwise_correlation_report: n_mc >= 2 required");
    const int m = static_cast<int>(instances.size());
    const int d = instances[0].dim();
    for (const auto& inst : instances)
        if (!inst.same_family(instances[0]))
            throw std::invalid_argument(
                "pairwise_correlation_report: instances must share (k, phi, sigma_out)");

    // stack all planes: projections for every instance in one GEMM per block
    Eigen::MatrixXd stacked(2 * m, d);
    for (int i = 0; i < m; ++i) stacked.middleRows(2 * i, 2) = instances[i].plane();

    constexpr std::int64_t kBlock = 16384;
    const std::int64_t blocks = (n_mc + kBlock - 1) / kBlock;
    std::vector<Eigen::MatrixXd> prod_sum(static_cast<std::size_t>(blocks));
    std::vector<Eigen::MatrixXd> prod2_sum(static_cast<std::size_t>(blocks));
    parallel_blocks(blocks, threads, [&](std::int64_t b) {
        const std::int64_t len = std::min(n_mc, (b + 1) * kBlock) - b * kBlock;
        Rng rng(stream.substream(static_cast<std::uint64_t>(b)));
        Eigen::MatrixXd x(len, d);
        for (std::int64_t r = 0; r < len; ++r)
            for (int j = 0; j < d; ++j) x(r, j) = rng.gaussian();
        const Eigen::MatrixXd proj = x * stacked.transpose(); // len x 2m
        Eigen::MatrixXd vals(len, m);
        for (int i = 0; i < m; ++i)
            for (std::int64_t r = 0; r < len; ++r)
                vals(r, i) = instances[static_cast<std::size_t>(i)].eval2d(proj(r, 2 * i),
                                                                           proj(r, 2 * i + 1));
        prod_sum[static_cast<std::size_t>(b)] = vals.transpose() * vals;
        const Eigen::MatrixXd sq = vals.array().square().matrix();
        prod2_sum[static_cast<std::size_t>(b)] = sq.transpose() * sq;
    });

    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(m, m);
    for (std::int64_t b = 0; b < blocks; ++b) {
        s1 += prod_sum[static_cast<std::size_t>(b)];
        s2 += prod2_sum[static_cast<std::size_t>(b)];
    }

    CorrelationReport rep;
    rep.n_mc = n_mc;
    rep.estimate = s1 / static_cast<double>(n_mc);
    rep.std_err.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double mean = rep.estimate(i, j);
            const double var = std::max(0.0, s2(i, j) / static_cast<double>(n_mc) - mean * mean);
            rep.std_err(i, j) = std::sqrt(var / static_cast<double>(n_mc));
        }
    const int k = instances[0].k();
    rep.bound_k = Eigen::MatrixXd::Ones(m, m);
    rep.bound_k1 = Eigen::MatrixXd::Ones(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            const double nrm = plane_product_norm(instances[static_cast<std::size_t>(i)].plane(),
                                                  instances[static_cast<std::size_t>(j)].plane());
            rep.bound_k(i, j) = std::pow(nrm, k);
            rep.bound_k1(i, j) = std::pow(nrm, k + 1);
        }
    if (m > 1) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j) acc += rep.estimate(i, j);
        rep.avg_offdiag = acc / static_cast<double>(m * (m - 1));
    }
    return rep;
}

} // namespace posnet
