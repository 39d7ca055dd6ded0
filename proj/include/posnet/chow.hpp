#pragma once

#include "posnet/network.hpp"
#include "posnet/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace posnet {

/// Empirical degree-2 Chow matrix: symmetrized (1/N) sum_i y_i x_i x_i^T.
struct ChowMatrix {
    Eigen::MatrixXd m_hat;
    std::int64_t n_used = 0;
    double target_tol = 0.0;
};

/// Empirical mean of the labels (degree-0 Chow parameter). May be negative
/// under noise; the learner clamps.
struct MeanEstimate {
    double mu_hat = 0.0;
    std::int64_t n_used = 0;
};

/// Default sample-size schedule for Chow estimation: ceil(mult*d*k*log(d+3)/eps^2).
inline std::int64_t chow_sample_size(int d, int k, double eps, double multiplier = 50.0) {
    return static_cast<std::int64_t>(
        std::ceil(multiplier * d * k * std::log(static_cast<double>(d) + 3.0) / (eps * eps)));
}

inline ChowMatrix estimate_chow2(const SampleSet& samples, double target_tol = 0.0,
                                 int threads = 0) {
    const std::int64_t n = samples.size();
    if (n < 2) throw std::invalid_argument("estimate_chow2: at least two samples required");
    const int d = samples.dim();

    const std::int64_t block = detail::kSampleBlock;
    const std::int64_t blocks = (n + block - 1) / block;
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(blocks));
    parallel_blocks(blocks, threads, [&](std::int64_t b) {
        const std::int64_t lo = b * block;
        const std::int64_t len = std::min(n, lo + block) - lo;
        const auto xb = samples.xs().middleRows(lo, len);
        const auto yb = samples.ys().segment(lo, len);
        partial[static_cast<std::size_t>(b)] =
            xb.transpose() * (xb.array().colwise() * yb.array()).matrix();
    });
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (const auto& p : partial) acc += p; // fixed block order for reproducibility
    acc /= static_cast<double>(n);

    // exact symmetrization: both triangles get the same double
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double v = 0.5 * (acc(i, j) + acc(j, i));
            acc(i, j) = v;
            acc(j, i) = v;
        }
    return ChowMatrix{std::move(acc), n, target_tol};
}

inline MeanEstimate estimate_mean(const SampleSet& samples) {
    if (samples.size() < 1) throw std::invalid_argument("estimate_mean: empty sample set");
    return MeanEstimate{samples.ys().mean(), samples.size()};
}

/// Population value of E[f(x) x x^T] = B1*(sum alpha)*I + C1*sum alpha_i w_i w_i^T.
inline Eigen::MatrixXd analytic_chow2(const NetworkParams& params, const ActivationSpec& act) {
    const int d = params.dim();
    Eigen::MatrixXd sigma =
        act.moments().b1 * params.coefficient_sum() * Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < params.units(); ++i) {
        const auto w = params.weights().row(i);
        sigma += act.moments().c1 * params.alpha()(i) * (w.transpose() * w);
    }
    return sigma;
}

/// Spectral norm of m_hat minus the analytic Chow matrix (test harness).
inline double chow_spectral_error(const ChowMatrix& chow, const NetworkParams& params,
                                  const ActivationSpec& act) {
    Eigen::MatrixXd diff = chow.m_hat - analytic_chow2(params, act);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace posnet
