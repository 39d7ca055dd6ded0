#pragma once

#include "posnet/chow.hpp"
#include "posnet/cover.hpp"
#include "posnet/network.hpp"
#include "posnet/parallel.hpp"
#include "posnet/subspace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace posnet {

/// Tuning knobs of the end-to-end learner. Sample-size schedules follow the
/// asymptotic shapes of the analysis with explicit constants.
struct LearnConfig {
    int k = 1;
    double eps = 0.25;
    double sigma = 0.0; // noise level, assumed known
    double chow_multiplier = 50.0;
    double mean_multiplier = 400.0;
    double select_multiplier = 50.0;
    double delta = 0.1;        // confidence parameter for the median trick
    double mean_offset_c = 2.0; // the constant c in the radius mu + c*sigma
    double cover_eps_factor = 1.0; // cover resolution = eps * factor
    std::int64_t max_candidates = 2'000'000;
    int threads = 0;

    void validate() const {
        if (k < 1) throw std::invalid_argument("LearnConfig: k >= 1 required");
        if (!(eps > 0.0 && eps < 1.0))
            throw std::invalid_argument("LearnConfig: eps in (0,1) required");
        if (sigma < 0.0) throw std::invalid_argument("LearnConfig: sigma >= 0 required");
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("LearnConfig: delta in (0,1) required");
    }
};

/// Thrown when the candidate sweep would exceed the configured budget.
class BudgetError : public std::runtime_error {
public:
    BudgetError(std::int64_t candidates, std::int64_t budget)
        : std::runtime_error("candidate count " + std::to_string(candidates) +
                             " exceeds budget " + std::to_string(budget)),
          candidates_(candidates) {}
    [[nodiscard]] std::int64_t candidates() const noexcept { return candidates_; }

private:
    std::int64_t candidates_;
};

/// Radius of the search ball: an upper bound on sum_i alpha_i derived from
/// the clamped label mean, R = (2*max(mu,0) + 2*c*sigma) / B1.
inline double cover_radius(const MeanEstimate& mean, const LearnConfig& cfg,
                           const ActivationSpec& act) {
    const double b1 = act.moments().b1;
    if (!(b1 > 0.0)) throw std::invalid_argument("cover_radius: activation needs E[phi] > 0");
    const double mu = std::max(0.0, mean.mu_hat);
    return std::max(0.0, 2.0 * mu + 2.0 * cfg.mean_offset_c * cfg.sigma) / b1;
}

/// Turn a candidate (subspace coordinates) into an ambient network:
/// alpha_i = ||u_i||, w_i = basis * u_i/||u_i||. Zero units are dropped.
inline NetworkParams lift_candidate(const Candidate& cand, const Subspace& sub) {
    std::vector<double> alphas;
    std::vector<Eigen::VectorXd> rows;
    for (Eigen::Index i = 0; i < cand.us.rows(); ++i) {
        const double a = cand.us.row(i).norm();
        if (a == 0.0) continue;
        Eigen::VectorXd w = sub.basis * (cand.us.row(i).transpose() / a);
        rows.push_back(w / w.norm());
        alphas.push_back(a);
    }
    if (alphas.empty()) return NetworkParams::zero(sub.dim());
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(alphas.size()));
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(rows.size()), sub.dim());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        alpha(static_cast<Eigen::Index>(i)) = alphas[i];
        weights.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return NetworkParams(std::move(alpha), std::move(weights));
}

namespace detail {

inline double median_in_place(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median over buckets of block-mean squared residual of `pred - y`.
inline double median_of_means_sq(const Eigen::VectorXd& pred, const Eigen::VectorXd& y,
                                 int buckets) {
    const std::int64_t bs = y.size() / buckets;
    std::vector<double> means(static_cast<std::size_t>(buckets));
    for (int b = 0; b < buckets; ++b) {
        double acc = 0.0;
        for (std::int64_t j = b * bs; j < (b + 1) * bs; ++j) {
            const double r = pred(j) - y(j);
            acc += r * r;
        }
        means[static_cast<std::size_t>(b)] = acc / static_cast<double>(bs);
    }
    return median_in_place(means);
}

} // namespace detail

/// Median-of-means estimate of E[(f_U(x) - y)^2] for one candidate, with
/// f_U(x) = sum_i ||u_i|| phi(<basis u_i/||u_i||, x>). Units are evaluated in
/// row order, so permuting a candidate's rows cannot change the value.
inline double empirical_sq_error(const Candidate& cand, const Subspace& sub,
                                 const ActivationSpec& act, const SampleSet& samples,
                                 int buckets) {
    if (buckets < 1) throw std::invalid_argument("empirical_sq_error: buckets >= 1 required");
    if (samples.size() < buckets)
        throw std::invalid_argument("empirical_sq_error: need at least one sample per bucket");
    Eigen::MatrixXd z = samples.xs() * sub.basis; // n x k
    Eigen::VectorXd pred = Eigen::VectorXd::Zero(samples.size());
    // sort unit order by (norm, coordinates) so permuted candidates evaluate identically
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cand.us.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < cand.us.cols(); ++j)
            if (cand.us(a, j) != cand.us(b, j)) return cand.us(a, j) < cand.us(b, j);
        return false;
    });
    for (Eigen::Index i : order) {
        const double a = cand.us.row(i).norm();
        if (a == 0.0) continue; // zero unit contributes nothing
        const Eigen::VectorXd proj = z * (cand.us.row(i).transpose() / a);
        for (Eigen::Index j = 0; j < pred.size(); ++j) pred(j) += a * act(proj(j));
    }
    return detail::median_of_means_sq(pred, samples.ys(), buckets);
}

/// Source of fresh labeled samples. `draw(n, phase)` must return independent
/// batches for distinct phases; the learner uses phases 1 (Chow), 2 (mean),
/// 3 (selection).
struct SampleOracle {
    int dim = 0;
    std::function<SampleSet(std::int64_t, std::uint64_t)> draw;
};

struct LearnDiagnostics {
    std::int64_t n_chow = 0, n_mean = 0, n_select = 0;
    int buckets = 0;
    double mu_hat = 0.0;
    double radius = 0.0;
    std::int64_t cover_size = 0;
    std::int64_t candidates = 0;
    double best_error = 0.0;
    Subspace subspace;
    double secs_chow = 0.0;
    double secs_sweep = 0.0;
};

namespace detail {

struct SweepBest {
    double err = std::numeric_limits<double>::infinity();
    double alpha_sum = std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> tuple;

    [[nodiscard]] bool beats(double e, double a) const noexcept {
        return e < err || (e == err && a < alpha_sum);
    }
};

// Exhaustive sweep over all size-k multisets of cover points, evaluated
// against precomputed per-point prediction columns. Parallel over the first
// index; per-index results merged in index order, so the winner (including
// tie-breaks: error, then sum of coefficients, then enumeration order) is
// independent of the thread count.
inline SweepBest sweep_candidates(const Eigen::MatrixXd& rows, const Eigen::VectorXd& norms,
                                  const Eigen::VectorXd& y, int k, int buckets, int threads) {
    const std::int64_t n_points = rows.cols();
    const std::int64_t n = y.size();
    const std::int64_t bs = n / buckets;
    const std::int64_t used = bs * buckets;
    std::vector<SweepBest> per_first(static_cast<std::size_t>(n_points));

    parallel_blocks(n_points, threads, [&](std::int64_t first) {
        SweepBest best;
        std::vector<std::int64_t> tuple(static_cast<std::size_t>(k));
        Eigen::MatrixXd partial(used, k); // partial(.,t) = -y + cols of tuple[0..t]
        std::vector<double> means(static_cast<std::size_t>(buckets));

        // depth-first over non-decreasing tuples starting at `first`
        std::function<void(int, std::int64_t, double)> recurse = [&](int depth, std::int64_t lo,
                                                                     double alpha_acc) {
            for (std::int64_t i = lo; i < n_points; ++i) {
                tuple[static_cast<std::size_t>(depth)] = i;
                partial.col(depth) = partial.col(depth - 1) + rows.col(i).head(used);
                const double alpha = alpha_acc + norms(i);
                if (depth + 1 == k) {
                    for (int b = 0; b < buckets; ++b)
                        means[static_cast<std::size_t>(b)] =
                            partial.col(depth).segment(b * bs, bs).squaredNorm() /
                            static_cast<double>(bs);
                    const double e = median_in_place(means);
                    if (best.beats(e, alpha)) {
                        best.err = e;
                        best.alpha_sum = alpha;
                        best.tuple = tuple;
                    }
                } else {
                    recurse(depth + 1, i, alpha);
                }
            }
        };
        tuple[0] = first;
        partial.col(0) = -y.head(used) + rows.col(first).head(used);
        if (k == 1) {
            for (int b = 0; b < buckets; ++b)
                means[static_cast<std::size_t>(b)] =
                    partial.col(0).segment(b * bs, bs).squaredNorm() / static_cast<double>(bs);
            const double e = median_in_place(means);
            best.err = e;
            best.alpha_sum = norms(first);
            best.tuple = {first};
        } else {
            recurse(1, first, norms(first));
        }
        per_first[static_cast<std::size_t>(first)] = std::move(best);
    });

    SweepBest winner;
    for (const auto& b : per_first)
        if (winner.beats(b.err, b.alpha_sum)) winner = b;
    return winner;
}

} // namespace detail

/// The full pipeline: Chow estimation, spectral dimension reduction, mean
/// estimation, cover construction in the recovered subspace, candidate sweep
/// on fresh samples, argmin selection.
inline NetworkParams nn_learner(const LearnConfig& cfg, const ActivationSpec& act,
                                const SampleOracle& oracle, LearnDiagnostics* diag = nullptr) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    LearnDiagnostics local;
    LearnDiagnostics& dg = diag ? *diag : local;

    // Phase 1: degree-2 Chow parameters and the top-k subspace.
    const auto t0 = clock::now();
    dg.n_chow = chow_sample_size(oracle.dim, cfg.k, cfg.eps, cfg.chow_multiplier);
    const SampleSet chow_samples = oracle.draw(dg.n_chow, 1);
    const ChowMatrix chow = estimate_chow2(chow_samples, cfg.eps / cfg.k, cfg.threads);
    dg.subspace = top_k_subspace(chow, cfg.k);
    dg.secs_chow = std::chrono::duration<double>(clock::now() - t0).count();

    // Phase 2: label mean -> search radius.
    const double l2 = act.lipschitz() * act.lipschitz();
    dg.n_mean = std::max<std::int64_t>(
        1000, static_cast<std::int64_t>(std::ceil(cfg.mean_multiplier * cfg.k *
                                                  std::max(l2, act.moments().b2))));
    const MeanEstimate mean = estimate_mean(oracle.draw(dg.n_mean, 2));
    dg.mu_hat = mean.mu_hat;
    dg.radius = cover_radius(mean, cfg, act);

    const Cover cover = build_cover(cfg.k, cfg.eps * cfg.cover_eps_factor, dg.radius);
    dg.cover_size = cover.size();
    dg.candidates = candidate_count(cover.size(), cfg.k);
    if (dg.candidates > cfg.max_candidates) throw BudgetError(dg.candidates, cfg.max_candidates);
    if (cover.size() == 0) {
        dg.best_error = 0.0;
        return NetworkParams::zero(oracle.dim);
    }

    // Phase 3: candidate sweep on fresh samples.
    dg.buckets = std::max(
        9, static_cast<int>(std::ceil(8.0 * std::log(static_cast<double>(dg.candidates) /
                                                     cfg.delta))));
    const double count_term = std::log(std::max(2.0, static_cast<double>(dg.candidates) / cfg.delta));
    dg.n_select = std::max<std::int64_t>(
        16 * dg.buckets,
        static_cast<std::int64_t>(std::ceil(cfg.select_multiplier * cfg.k * cfg.k * count_term /
                                            (cfg.eps * cfg.eps))));
    const SampleSet sel = oracle.draw(dg.n_select, 3);

    const auto t1 = clock::now();
    Eigen::MatrixXd z = sel.xs() * dg.subspace.basis; // n x k
    Eigen::VectorXd norms(cover.size());
    Eigen::MatrixXd rows(sel.size(), cover.size());
    parallel_blocks(cover.size(), cfg.threads, [&](std::int64_t g) {
        const double a = cover.points.row(g).norm();
        norms(g) = a;
        const Eigen::VectorXd proj = z * (cover.points.row(g).transpose() / a);
        for (Eigen::Index j = 0; j < proj.size(); ++j) rows(j, g) = a * act(proj(j));
    });
    const detail::SweepBest winner =
        detail::sweep_candidates(rows, norms, sel.ys(), cfg.k, dg.buckets, cfg.threads);
    dg.secs_sweep = std::chrono::duration<double>(clock::now() - t1).count();
    dg.best_error = winner.err;

    Candidate cand;
    cand.indices = winner.tuple;
    cand.us.resize(cfg.k, cfg.k);
    for (int i = 0; i < cfg.k; ++i)
        cand.us.row(i) = cover.points.row(winner.tuple[static_cast<std::size_t>(i)]);
    return lift_candidate(cand, dg.subspace);
}

} // namespace posnet
