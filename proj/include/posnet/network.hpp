#pragma once

#include "posnet/activation.hpp"
#include "posnet/parallel.hpp"
#include "posnet/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace posnet {

/// One-hidden-layer network f(x) = sum_i alpha_i phi(<w_i, x>) with positive
/// coefficients and unit-norm weight rows. A default-constructed instance is
/// the zero network (no units, predicts 0).
class NetworkParams {
public:
    NetworkParams() = default;

    NetworkParams(Eigen::VectorXd alpha, Eigen::MatrixXd weights)
        : alpha_(std::move(alpha)), weights_(std::move(weights)) {
        if (alpha_.size() != weights_.rows())
            throw std::invalid_argument("NetworkParams: alpha/weights size mismatch");
        for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
            if (!(alpha_(i) > 0.0))
                throw std::invalid_argument("NetworkParams: coefficients must be positive");
            if (std::fabs(weights_.row(i).norm() - 1.0) > 1e-12)
                throw std::invalid_argument("NetworkParams: weight rows must be unit vectors");
        }
    }

    static NetworkParams zero(int dim) {
        NetworkParams p;
        p.weights_.resize(0, dim);
        return p;
    }

    [[nodiscard]] int units() const noexcept { return static_cast<int>(alpha_.size()); }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(weights_.cols()); }
    [[nodiscard]] const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
    [[nodiscard]] const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    [[nodiscard]] double coefficient_sum() const noexcept { return alpha_.sum(); }

private:
    Eigen::VectorXd alpha_;
    Eigen::MatrixXd weights_;
};

inline double eval_network(const NetworkParams& params, const Eigen::VectorXd& x,
                           const ActivationSpec& act) {
    if (params.units() > 0 && x.size() != params.dim())
        throw std::invalid_argument("eval_network: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < params.units(); ++i)
        acc += params.alpha()(i) * act(params.weights().row(i).dot(x));
    return acc;
}

/// Vector of f(x) over the rows of xs.
inline Eigen::VectorXd eval_network_batch(const NetworkParams& params, const Eigen::MatrixXd& xs,
                                          const ActivationSpec& act) {
    if (params.units() == 0) return Eigen::VectorXd::Zero(xs.rows());
    if (xs.cols() != params.dim())
        throw std::invalid_argument("eval_network_batch: dimension mismatch");
    Eigen::MatrixXd z = xs * params.weights().transpose(); // n x k
    Eigen::VectorXd out = Eigen::VectorXd::Zero(xs.rows());
    for (int i = 0; i < params.units(); ++i) {
        const double a = params.alpha()(i);
        for (Eigen::Index r = 0; r < z.rows(); ++r) out(r) += a * act(z(r, i));
    }
    return out;
}

/// Additive label noise: zero mean, standard deviation sigma, subgaussian.
struct NoiseModel {
    enum class Kind { gaussian, bounded_uniform };
    double sigma = 0.0;
    Kind kind = Kind::gaussian;

    double draw(Rng& rng) const {
        if (sigma == 0.0) return 0.0;
        switch (kind) {
            case Kind::gaussian:
                return sigma * rng.gaussian();
            case Kind::bounded_uniform:
                // uniform on [-a, a] with a = sigma*sqrt(3) has std sigma
                return sigma * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
        }
        return 0.0;
    }
};

/// Immutable batch of labeled examples from the noisy oracle.
class SampleSet {
public:
    SampleSet(Eigen::MatrixXd xs, Eigen::VectorXd ys, double sigma, RngStream seed)
        : xs_(std::move(xs)), ys_(std::move(ys)), sigma_(sigma), seed_(seed) {
        if (xs_.rows() != ys_.size())
            throw std::invalid_argument("SampleSet: xs/ys row count mismatch");
    }

    [[nodiscard]] std::int64_t size() const noexcept { return xs_.rows(); }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(xs_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& xs() const noexcept { return xs_; }
    [[nodiscard]] const Eigen::VectorXd& ys() const noexcept { return ys_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] const RngStream& seed() const noexcept { return seed_; }

private:
    Eigen::MatrixXd xs_;
    Eigen::VectorXd ys_;
    double sigma_;
    RngStream seed_;
};

namespace detail {
constexpr std::int64_t kSampleBlock = 65536;
}

/// Draw n iid examples (x, y) with x ~ N(0, I_d) and y = f(x) + xi.
///
/// Generation is blocked; block b consumes stream.substream(b), so the output
/// is byte-identical for a given stream regardless of thread count.
inline SampleSet draw_samples(const NetworkParams& params, const ActivationSpec& act,
                              const NoiseModel& noise, std::int64_t n, RngStream stream,
                              int threads = 0) {
    if (n < 1) throw std::invalid_argument("draw_samples: n >= 1 required");
    const int d = params.dim();
    Eigen::MatrixXd xs(n, d);
    Eigen::VectorXd ys(n);
    const std::int64_t blocks = (n + detail::kSampleBlock - 1) / detail::kSampleBlock;
    parallel_blocks(blocks, threads, [&](std::int64_t b) {
        const std::int64_t lo = b * detail::kSampleBlock;
        const std::int64_t hi = std::min(n, lo + detail::kSampleBlock);
        Rng rng(stream.substream(static_cast<std::uint64_t>(b)));
        for (std::int64_t r = lo; r < hi; ++r)
            for (int j = 0; j < d; ++j) xs(r, j) = rng.gaussian();
        Eigen::VectorXd labels = eval_network_batch(params, xs.middleRows(lo, hi - lo), act);
        for (std::int64_t r = lo; r < hi; ++r) ys(r) = labels(r - lo) + noise.draw(rng);
    });
    return SampleSet(std::move(xs), std::move(ys), noise.sigma, stream);
}

} // namespace posnet
