// posnet experiment runner: seeded, reproducible runs of the learner and the
// SQ-hardness suites, with JSON + CSV reports.

#include "posnet/activation.hpp"
#include "posnet/chow.hpp"
#include "posnet/config.hpp"
#include "posnet/correlation.hpp"
#include "posnet/cover.hpp"
#include "posnet/hard_instance.hpp"
#include "posnet/hermite.hpp"
#include "posnet/learner.hpp"
#include "posnet/network.hpp"
#include "posnet/planes.hpp"
#include "posnet/report.hpp"
#include "posnet/rng.hpp"
#include "posnet/sq_oracle.hpp"
#include "posnet/subspace.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace posnet;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInvariant = 4;

struct ArgSink {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

// Register a flag that lands in the key-value config as plain text; file
// values load first, explicit flags win.
void add_kv_option(CLI::App* sub, ArgSink& sink, const std::string& flag, const std::string& key,
                   const std::string& desc) {
    sub->add_option_function<std::string>(
        flag, [&sink, key](const std::string& v) { sink.overrides[key] = v; }, desc);
}

void add_shared_options(CLI::App* sub, ArgSink& sink) {
    sub->add_option("--config", sink.config_path, "key = value config file");
    add_kv_option(sub, sink, "--seed", "seed", "base RNG seed");
    add_kv_option(sub, sink, "--out", "out", "output directory");
    add_kv_option(sub, sink, "--trials", "trials", "number of seeded trials");
    add_kv_option(sub, sink, "--threads", "threads", "worker threads (0 = hardware)");
}

KeyValueConfig resolve_config(const ArgSink& sink) {
    KeyValueConfig cfg;
    if (!sink.config_path.empty()) cfg = KeyValueConfig::from_file(sink.config_path);
    for (const auto& [k, v] : sink.overrides) cfg.set(k, v);
    return cfg;
}

fs::path prepare_out_dir(ResolvedConfig& cfg, const std::string& command) {
    const fs::path dir = cfg.get_string("out", "posnet-out/" + command);
    fs::create_directories(dir);
    return dir;
}

Activation activation_by_name(const std::string& name) {
    if (name == "relu") return relu();
    if (name == "abs") return abs_activation();
    if (name == "tanh") return tanh_activation();
    if (name == "linear") return linear_activation();
    throw ConfigError("unknown activation: " + name);
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

NetworkParams random_positive_network(int d, int k, double alpha_min, double alpha_max,
                                      double angle_deg, Rng& rng) {
    Eigen::MatrixXd w(k, d);
    if (angle_deg >= 0.0 && k == 2) {
        Eigen::VectorXd w1(d), z(d);
        for (int j = 0; j < d; ++j) w1(j) = rng.gaussian();
        w1.normalize();
        for (int j = 0; j < d; ++j) z(j) = rng.gaussian();
        z -= w1 * w1.dot(z);
        z.normalize();
        const double a = angle_deg * std::numbers::pi / 180.0;
        w.row(0) = w1.transpose();
        w.row(1) = (std::cos(a) * w1 + std::sin(a) * z).transpose();
    } else {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < d; ++j) w(i, j) = rng.gaussian();
            w.row(i).normalize();
        }
    }
    Eigen::VectorXd alpha(k);
    for (int i = 0; i < k; ++i) alpha(i) = rng.uniform_in(alpha_min, alpha_max);
    return NetworkParams(alpha, w);
}

// ---------------------------------------------------------------------------
// learn
// ---------------------------------------------------------------------------

int run_learn(const KeyValueConfig& raw) {
    ResolvedConfig cfg(raw);
    const int d = static_cast<int>(cfg.get_int("d", 20));
    const int k = static_cast<int>(cfg.get_int("k", 1));
    const int trials = static_cast<int>(cfg.get_int("trials", 1));
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const double sigma = cfg.get_double("sigma", 0.1);
    const double angle_deg = cfg.get_double("weight_angle_deg", -1.0);
    const double alpha_min = cfg.get_double("alpha_min", 0.5);
    const double alpha_max = cfg.get_double("alpha_max", 1.5);
    const std::int64_t holdout = cfg.get_int("holdout", 100'000);
    const NoiseModel noise{sigma, cfg.get_string("noise", "gaussian") == "bounded_uniform"
                                      ? NoiseModel::Kind::bounded_uniform
                                      : NoiseModel::Kind::gaussian};

    LearnConfig lc;
    lc.k = k;
    lc.eps = cfg.get_double("eps", 0.25);
    lc.sigma = sigma;
    lc.chow_multiplier = cfg.get_double("chow_multiplier", 50.0);
    lc.mean_multiplier = cfg.get_double("mean_multiplier", 400.0);
    lc.select_multiplier = cfg.get_double("select_multiplier", 50.0);
    lc.delta = cfg.get_double("delta", 0.1);
    lc.mean_offset_c = cfg.get_double("mean_offset_c", 2.0);
    lc.cover_eps_factor = cfg.get_double("cover_eps_factor", 1.0);
    lc.max_candidates = cfg.get_int("max_candidates", 2'000'000);
    lc.threads = static_cast<int>(cfg.get_int("threads", 0));
    lc.validate();
    if (d < 1 || k > d) throw std::invalid_argument("learn: need 1 <= k <= d");
    if (trials < 1) throw std::invalid_argument("learn: trials >= 1 required");

    const ActivationSpec act(activation_by_name(cfg.get_string("activation", "relu")));
    const fs::path out = prepare_out_dir(cfg, "learn");
    Report report("learn", cfg.echo(), seed);

    std::vector<std::vector<double>> csv_rows;
    std::vector<double> rel_errors;
    auto& trial_metrics = report.metrics()["trials"];
    trial_metrics = nlohmann::json::array();

    for (int t = 0; t < trials; ++t) {
        const RngStream trial_base{seed, static_cast<std::uint64_t>(t)};
        Rng truth_rng(trial_base.substream(0));
        const NetworkParams truth =
            random_positive_network(d, k, alpha_min, alpha_max, angle_deg, truth_rng);

        SampleOracle oracle;
        oracle.dim = d;
        oracle.draw = [&](std::int64_t n, std::uint64_t phase) {
            return draw_samples(truth, act, noise, n, trial_base.substream(phase), lc.threads);
        };

        LearnDiagnostics diag;
        const NetworkParams hypothesis = nn_learner(lc, act, oracle, &diag);

        const SampleSet ho = draw_samples(truth, act, NoiseModel{}, holdout,
                                          trial_base.substream(7), lc.threads);
        const Eigen::VectorXd hv = eval_network_batch(hypothesis, ho.xs(), act);
        const double mse = (ho.ys() - hv).squaredNorm() / static_cast<double>(holdout);
        const double f2 = ho.ys().squaredNorm() / static_cast<double>(holdout);
        const double rel_error = mse / (sigma * sigma + f2);

        double residual_max = 0.0;
        for (double r : subspace_residual(diag.subspace, truth)) residual_max = std::max(residual_max, r);

        rel_errors.push_back(rel_error);
        csv_rows.push_back({static_cast<double>(t), static_cast<double>(d),
                            static_cast<double>(k), lc.eps, sigma,
                            static_cast<double>(diag.n_chow), static_cast<double>(diag.cover_size),
                            static_cast<double>(diag.candidates), rel_error, residual_max,
                            diag.secs_chow, diag.secs_sweep});
        trial_metrics.push_back({{"trial", t},
                                 {"rel_error", rel_error},
                                 {"residual_max", residual_max},
                                 {"cover_size", diag.cover_size},
                                 {"candidates", diag.candidates},
                                 {"n_chow", diag.n_chow},
                                 {"n_select", diag.n_select},
                                 {"buckets", diag.buckets},
                                 {"mu_hat", diag.mu_hat},
                                 {"radius", diag.radius},
                                 {"best_error", diag.best_error},
                                 {"hypothesis_units", hypothesis.units()}});
        report.timings()["trial_" + std::to_string(t)] = {{"secs_chow", diag.secs_chow},
                                                          {"secs_sweep", diag.secs_sweep}};
        std::cout << "trial " << t << ": rel_error=" << rel_error
                  << " residual_max=" << residual_max << " cover=" << diag.cover_size
                  << " candidates=" << diag.candidates << "\n";
    }

    report.add_summary("rel_error", rel_errors);
    report.write(out / "report.json");
    write_csv(out / "trials.csv",
              {"trial", "d", "k", "eps", "sigma", "n_chow", "cover_size", "candidates",
               "rel_error", "residual_max", "secs_chow", "secs_sweep"},
              csv_rows);
    std::cout << "median rel_error = " << summarize(rel_errors).median << "\n"
              << "wrote " << (out / "report.json").string() << " and "
              << (out / "trials.csv").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// hardness
// ---------------------------------------------------------------------------

int run_hardness(const KeyValueConfig& raw) {
    ResolvedConfig cfg(raw);
    const int d = static_cast<int>(cfg.get_int("d", 200));
    const int k = static_cast<int>(cfg.get_int("k", 4));
    const int m = static_cast<int>(cfg.get_int("planes", 32));
    const double bound = cfg.get_double("bound", 0.25);
    const std::int64_t n_mc = cfg.get_int("n_mc", 1'000'000);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const int threads = static_cast<int>(cfg.get_int("threads", 0));
    const std::int64_t attempts =
        cfg.get_int("max_attempts", 10LL * static_cast<std::int64_t>(m));
    const Activation phi = activation_by_name(cfg.get_string("phi", "relu"));
    const OuterActivation outer = outer_from_name(cfg.get_string("sigma_out", "identity"));
    int degree_cap = static_cast<int>(cfg.get_int("degree_cap", 0));
    if (degree_cap == 0) degree_cap = k + 2;

    const fs::path out = prepare_out_dir(cfg, "hardness");
    Report report("hardness", cfg.echo(), seed);

    const double second_moment = nonvanishing_check(k, phi, outer);
    report.metrics()["nonvanishing_e_f2"] = second_moment;
    if (second_moment <= 1e-8) {
        report.metrics()["vanishing_instance"] = true;
        report.write(out / "report.json");
        std::cout << "warning: construction vanishes for (k=" << k << ", phi=" << phi.name
                  << ", sigma_out=" << outer_name(outer)
                  << "); skipping correlation suite (E[f^2]=" << second_moment << ")\n";
        return kExitOk;
    }
    report.metrics()["vanishing_instance"] = false;

    const std::vector<double> coeffs = moment_check(k, phi, outer, degree_cap);
    auto& moments = report.metrics()["max_abs_coeff_by_degree"];
    moments = nlohmann::json::array();
    for (int deg = 0; deg <= degree_cap; ++deg) {
        moments.push_back(coeffs[static_cast<std::size_t>(deg)]);
        std::cout << "degree " << deg << ": max|coeff| = " << coeffs[static_cast<std::size_t>(deg)]
                  << (deg < k ? "  (must vanish)" : "") << "\n";
    }

    Rng rng({seed, 0xACC0});
    PlaneSet set;
    const double t0 = now_seconds();
    try {
        set = plane_packing(d, m, bound, rng, attempts);
    } catch (const PackingError& e) {
        report.metrics()["packing_achieved"] = e.achieved();
        report.write(out / "report.json");
        std::cout << e.what() << "\n";
        return kExitBudget;
    }
    report.metrics()["packing_pairwise_bound"] = set.pairwise_bound;
    report.metrics()["packing_recomputed_bound"] = set.recompute_pairwise_bound();
    report.timings()["secs_packing"] = now_seconds() - t0;

    if (m < 2) {
        report.metrics()["correlation_pairs"] = nlohmann::json::array();
        report.write(out / "report.json");
        std::cout << "single plane: empty correlation matrix\n";
        return kExitOk;
    }

    std::vector<HardInstance> instances;
    instances.reserve(set.planes.size());
    for (const auto& p : set.planes) instances.emplace_back(k, phi, outer, p);

    const double t1 = now_seconds();
    const CorrelationReport corr =
        pairwise_correlation_report(instances, n_mc, {seed, 0xC0DE}, threads);
    report.timings()["secs_correlation"] = now_seconds() - t1;

    std::vector<std::vector<double>> csv_rows;
    double max_ratio = 0.0;
    double max_global_ratio = 0.0;
    const double global_bound = std::pow(bound, k);
    for (int i = 0; i < corr.size(); ++i)
        for (int j = i + 1; j < corr.size(); ++j) {
            const double est = corr.estimate(i, j);
            const double se = corr.std_err(i, j);
            const double bk = corr.bound_k(i, j);
            const double ratio = std::fabs(est) / (bk + 3.0 * se);
            max_ratio = std::max(max_ratio, ratio);
            max_global_ratio = std::max(max_global_ratio,
                                        std::fabs(est) / (global_bound + 3.0 * se));
            csv_rows.push_back({static_cast<double>(i), static_cast<double>(j),
                                plane_product_norm(set.planes[static_cast<std::size_t>(i)],
                                                   set.planes[static_cast<std::size_t>(j)]),
                                est, se, bk, corr.bound_k1(i, j), ratio});
        }
    report.metrics()["avg_offdiag_correlation"] = corr.avg_offdiag;
    report.metrics()["max_corr_to_bound_ratio"] = max_ratio;
    report.metrics()["max_corr_to_global_bound_ratio"] = max_global_ratio;
    report.write(out / "report.json");
    write_csv(out / "pairs.csv",
              {"i", "j", "product_norm", "estimate", "std_err", "bound_k", "bound_k1", "ratio"},
              csv_rows);
    std::cout << "packed " << set.size() << " planes, pairwise bound " << set.pairwise_bound
              << "\n"
              << "max |corr| / (pair bound^k + 3se) = " << max_ratio
              << "   (per-pair; 3-sigma tails expected when the pair bound is below the MC error)\n"
              << "max |corr| / (" << bound << "^" << k << " + 3se) = " << max_global_ratio << "\n"
              << "avg off-diagonal correlation = " << corr.avg_offdiag << "\n"
              << "wrote " << (out / "report.json").string() << " and "
              << (out / "pairs.csv").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct InvariantResult {
    bool pass = false;
    double margin = 0.0; // how far inside the requirement the measurement sits
    std::string detail;
};

struct VerifyContext {
    std::uint64_t seed = 1;
    int threads = 0;
    int grid_order = 64;
};

InvariantResult check_chow_formula(const VerifyContext& ctx) {
    const ActivationSpec act(relu());
    const int d = 5;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, d);
    w(0, 0) = 1.0;
    const NetworkParams p(Eigen::VectorXd::Ones(1), w);
    const SampleSet s =
        draw_samples(p, act, NoiseModel{}, 400'000, {ctx.seed, 0x10}, ctx.threads);
    const double err = chow_spectral_error(estimate_chow2(s, 0, ctx.threads), p, act);
    return {err <= 0.02, 0.02 - err, "spectral error " + std::to_string(err)};
}

InvariantResult check_hermite_orthonormality(const VerifyContext& ctx) {
    const QuadratureGrid grid(ctx.grid_order);
    const int cap = 12;
    std::vector<std::pair<int, int>> js;
    for (int a = 0; a <= cap; ++a)
        for (int b = 0; a + b <= cap; ++b) js.emplace_back(a, b);
    double dev = 0.0;
    const auto& pts = grid.points();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(pts.size()),
                          static_cast<Eigen::Index>(js.size()));
    Eigen::VectorXd wv(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t pi = 0; pi < pts.size(); ++pi) {
        const Eigen::VectorXd hx = hermite_values(cap, pts[pi].x);
        const Eigen::VectorXd hy = hermite_values(cap, pts[pi].y);
        wv(static_cast<Eigen::Index>(pi)) = pts[pi].w;
        for (std::size_t c = 0; c < js.size(); ++c)
            basis(static_cast<Eigen::Index>(pi), static_cast<Eigen::Index>(c)) =
                hx(js[c].first) * hy(js[c].second);
    }
    const Eigen::MatrixXd gram = basis.transpose() * wv.asDiagonal() * basis;
    dev = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    return {dev <= 1e-10, 1e-10 - dev, "max Gram deviation " + std::to_string(dev)};
}

InvariantResult check_rotation_antisymmetry(const VerifyContext& ctx) {
    Rng rng({ctx.seed, 0x30});
    double worst = 0.0;
    for (int k : {1, 2, 3, 4})
        for (const Activation& phi : {relu(), tanh_activation()})
            for (OuterActivation outer :
                 {OuterActivation::identity, OuterActivation::tanh, OuterActivation::cube,
                  OuterActivation::smoothed_sign})
                for (int rep = 0; rep < 1000 / 8; ++rep) {
                    const double x = 2.0 * rng.gaussian(), y = 2.0 * rng.gaussian();
                    const auto [xr, yr] = rotate_by_pi_over_k(k, x, y);
                    worst = std::max(worst, std::fabs(hard2d_eval(k, phi, outer, xr, yr) +
                                                      hard2d_eval(k, phi, outer, x, y)));
                }
    return {worst <= 1e-12, 1e-12 - worst, "max |f(Rx) + f(x)| = " + std::to_string(worst)};
}

InvariantResult check_correlated_differences(const VerifyContext& ctx) {
    Rng rng({ctx.seed, 0x40});
    const std::int64_t n = 400'000;
    double min_margin = 1e30;
    std::ostringstream detail;
    for (double rho : {0.5, 0.9, 0.99}) {
        double acc = 0.0, acc2 = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double u = rng.gaussian();
            const double v = rho * u + std::sqrt(1.0 - rho * rho) * rng.gaussian();
            const double diff = std::max(u, 0.0) - std::max(v, 0.0);
            const double val = 0.5 * diff * diff;
            acc += val;
            acc2 += val * val;
        }
        const double mean = acc / n;
        const double se = std::sqrt(std::max(0.0, acc2 / n - mean * mean) / n);
        const double margin = (1.0 - rho) * 0.5 + 3.0 * se - mean;
        min_margin = std::min(min_margin, margin);
        detail << "rho=" << rho << " lhs=" << mean << " bound=" << (1.0 - rho) * 0.5 << "; ";
    }
    return {min_margin >= 0.0, min_margin, detail.str()};
}

InvariantResult check_fourth_moment(const VerifyContext& ctx) {
    const ActivationSpec act(relu());
    double min_margin = 1e30;
    for (int k : {1, 2, 3}) {
        Rng rng({ctx.seed, 0x50 + static_cast<std::uint64_t>(k)});
        const NetworkParams p = random_positive_network(8, k, 0.5, 1.5, -1.0, rng);
        const SampleSet s = draw_samples(p, act, NoiseModel{}, 200'000,
                                         {ctx.seed, 0x60 + static_cast<std::uint64_t>(k)},
                                         ctx.threads);
        const Eigen::ArrayXd f = s.ys().array();
        const std::int64_t n = s.size();
        const double m2 = f.square().mean();
        const double m4 = f.square().square().mean();
        const double se4 = std::sqrt(std::max(0.0, f.pow(8).mean() - m4 * m4) / n);
        const double se2 = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
        const double se = std::sqrt(se4 * se4 + std::pow(12.0 * k * k * m2 * se2, 2));
        min_margin = std::min(min_margin, 6.0 * k * k * m2 * m2 + 3.0 * se - m4);
    }
    return {min_margin >= 0.0, min_margin, "min margin " + std::to_string(min_margin)};
}

InvariantResult check_moment_vanishing(const VerifyContext&) {
    double worst = 0.0;
    for (int k : {2, 4}) {
        const auto coeffs = moment_check(k, relu(), OuterActivation::identity, k - 1);
        for (int m = 0; m < k; ++m) worst = std::max(worst, coeffs[static_cast<std::size_t>(m)]);
    }
    for (int k : {1, 3}) {
        const auto coeffs = moment_check(k, tanh_activation(), OuterActivation::identity,
                                         std::max(0, k - 1));
        for (int m = 0; m < k; ++m) worst = std::max(worst, coeffs[static_cast<std::size_t>(m)]);
    }
    return {worst <= 1e-8, 1e-8 - worst, "max low-degree |coeff| = " + std::to_string(worst)};
}

InvariantResult check_cover_soundness(const VerifyContext& ctx) {
    const double eps = 0.25, radius = 1.0;
    const Cover cover = build_cover(2, eps, radius);
    Rng rng({ctx.seed, 0x70});
    int tested = 0;
    double worst = 0.0;
    while (tested < 10'000) {
        Eigen::Vector2d v(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        const double n = v.norm();
        if (n < eps * radius || n > radius) continue;
        ++tested;
        double best = 1e30;
        for (Eigen::Index i = 0; i < cover.points.rows(); ++i)
            best = std::min(best, (cover.points.row(i).transpose() - v).norm());
        worst = std::max(worst, best);
    }
    return {worst <= eps * radius, eps * radius - worst,
            "worst covering distance " + std::to_string(worst)};
}

InvariantResult check_relu_reparam(const VerifyContext& ctx) {
    Rng rng({ctx.seed, 0x80});
    double worst = 0.0;
    for (int rep = 0; rep < 2000; ++rep) {
        Eigen::Vector3d u(rng.gaussian(), rng.gaussian(), rng.gaussian());
        Eigen::Vector3d x(rng.gaussian(), rng.gaussian(), rng.gaussian());
        const double nu = u.norm();
        const double lhs = nu * std::max(u.dot(x) / nu, 0.0);
        const double rhs = std::max(u.dot(x), 0.0);
        worst = std::max(worst, std::fabs(lhs - rhs) / (1.0 + std::fabs(rhs)));
    }
    return {worst <= 1e-12, 1e-12 - worst, "max relative gap " + std::to_string(worst)};
}

InvariantResult check_instance_normalization(const VerifyContext&) {
    double worst = 0.0;
    for (int k : {1, 2, 4}) {
        const HardInstance inst(k, relu(), OuterActivation::identity,
                                Eigen::MatrixXd::Identity(2, 4));
        const PolarGrid fine(k, 128, 48);
        const double second = fine.expect([&](double x, double y) {
            const double g = inst.eval2d(x, y);
            return g * g;
        });
        worst = std::max(worst, std::fabs(second - 1.0));
    }
    return {worst <= 1e-6, 1e-6 - worst, "max |E[g^2] - 1| = " + std::to_string(worst)};
}

InvariantResult check_packing_exactness(const VerifyContext& ctx) {
    Rng rng({ctx.seed, 0x90});
    const PlaneSet set = plane_packing(60, 8, 0.4, rng, 200);
    const double gap = std::fabs(set.recompute_pairwise_bound() - set.pairwise_bound);
    return {gap <= 1e-12, 1e-12 - gap, "recompute gap " + std::to_string(gap)};
}

InvariantResult check_noise_model(const VerifyContext& ctx) {
    double worst = 0.0;
    for (const auto kind : {NoiseModel::Kind::gaussian, NoiseModel::Kind::bounded_uniform}) {
        Rng rng({ctx.seed, 0xA0 + static_cast<std::uint64_t>(kind)});
        const NoiseModel noise{0.8, kind};
        const std::int64_t n = 400'000;
        double s1 = 0, s2 = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double xi = noise.draw(rng);
            s1 += xi;
            s2 += xi * xi;
        }
        const double mean = s1 / n;
        const double sd = std::sqrt(s2 / n - mean * mean);
        worst = std::max({worst, std::fabs(mean) / 0.01, std::fabs(sd - 0.8) / 0.01});
    }
    return {worst <= 1.0, 1.0 - worst, "scaled deviation " + std::to_string(worst)};
}

InvariantResult check_sq_oracle_honesty(const VerifyContext& ctx) {
    Eigen::MatrixXd plane = Eigen::MatrixXd::Zero(2, 6);
    plane(0, 0) = 1.0;
    plane(1, 1) = 1.0;
    const double tau = 0.01;
    SqOracle oracle(HardInstance(2, relu(), OuterActivation::identity, plane), tau,
                    {ctx.seed, 0xB0});
    Rng rng({ctx.seed, 0xB1});
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const double a = rng.gaussian(), b = rng.gaussian(), c = rng.gaussian();
        const auto q = [a, b, c](double x, double y) { return std::tanh(a * x + b * y + c); };
        const double truth = oracle.plane_truth(q);
        const double ans = oracle.query_plane(q);
        worst = std::max(worst, std::fabs(ans - truth));
    }
    return {worst <= tau, tau - worst, "max |answer - truth| = " + std::to_string(worst)};
}

int run_verify(const KeyValueConfig& raw) {
    ResolvedConfig cfg(raw);
    VerifyContext ctx;
    ctx.seed = cfg.get_u64("seed", 1);
    ctx.threads = static_cast<int>(cfg.get_int("threads", 0));
    ctx.grid_order = static_cast<int>(cfg.get_int("grid_order", 64));

    const std::vector<std::pair<std::string, std::function<InvariantResult(const VerifyContext&)>>>
        catalog = {
            {"chow_formula", check_chow_formula},
            {"hermite_orthonormality", check_hermite_orthonormality},
            {"rotation_antisymmetry", check_rotation_antisymmetry},
            {"correlated_differences", check_correlated_differences},
            {"fourth_moment", check_fourth_moment},
            {"moment_vanishing", check_moment_vanishing},
            {"cover_soundness", check_cover_soundness},
            {"relu_reparam", check_relu_reparam},
            {"instance_normalization", check_instance_normalization},
            {"packing_exactness", check_packing_exactness},
            {"noise_model", check_noise_model},
            {"sq_oracle_honesty", check_sq_oracle_honesty},
        };

    const std::string selection = cfg.get_string("invariants", "all");
    std::vector<std::string> selected;
    if (selection != "all") {
        std::istringstream ss(selection);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) selected.push_back(item);
        }
        for (const auto& name : selected) {
            const bool known = std::any_of(catalog.begin(), catalog.end(),
                                           [&](const auto& c) { return c.first == name; });
            if (!known) throw ConfigError("unknown invariant: " + name);
        }
    }

    const fs::path out = prepare_out_dir(cfg, "verify");
    Report report("verify", cfg.echo(), ctx.seed);
    auto& results = report.metrics()["invariants"];
    results = nlohmann::json::array();

    bool all_pass = true;
    for (const auto& [name, fn] : catalog) {
        if (selection != "all" &&
            std::find(selected.begin(), selected.end(), name) == selected.end())
            continue;
        const double t0 = now_seconds();
        const InvariantResult r = fn(ctx);
        all_pass = all_pass && r.pass;
        results.push_back(
            {{"name", name}, {"pass", r.pass}, {"margin", r.margin}, {"detail", r.detail}});
        std::cout << (r.pass ? "PASS " : "FAIL ") << name << "  margin=" << r.margin << "  ("
                  << r.detail << ")  [" << now_seconds() - t0 << "s]\n";
    }
    report.metrics()["all_pass"] = all_pass;
    report.write(out / "report.json");
    std::cout << "wrote " << (out / "report.json").string() << "\n";
    return all_pass ? kExitOk : kExitInvariant;
}

// ---------------------------------------------------------------------------
// chow (estimation-only diagnostics)
// ---------------------------------------------------------------------------

int run_chow(const KeyValueConfig& raw) {
    ResolvedConfig cfg(raw);
    const int d = static_cast<int>(cfg.get_int("d", 10));
    const int k = static_cast<int>(cfg.get_int("k", 2));
    const int trials = static_cast<int>(cfg.get_int("trials", 1));
    const double eps = cfg.get_double("eps", 0.25);
    const double sigma = cfg.get_double("sigma", 0.1);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const int threads = static_cast<int>(cfg.get_int("threads", 0));
    std::int64_t n = cfg.get_int("n", 0);
    if (n == 0) n = chow_sample_size(d, k, eps, cfg.get_double("chow_multiplier", 50.0));
    if (k < 1 || k > d) throw std::invalid_argument("chow: need 1 <= k <= d");

    const ActivationSpec act(relu());
    const fs::path out = prepare_out_dir(cfg, "chow");
    Report report("chow", cfg.echo(), seed);
    std::vector<std::vector<double>> csv_rows;
    std::vector<double> errors;
    auto& trial_metrics = report.metrics()["trials"];
    trial_metrics = nlohmann::json::array();

    for (int t = 0; t < trials; ++t) {
        const RngStream base{seed, static_cast<std::uint64_t>(t)};
        Rng rng(base.substream(0));
        const NetworkParams truth = random_positive_network(d, k, 0.5, 1.5, -1.0, rng);
        const SampleSet s = draw_samples(truth, act, NoiseModel{sigma, NoiseModel::Kind::gaussian},
                                         n, base.substream(1), threads);
        const ChowMatrix chow = estimate_chow2(s, eps / k, threads);
        const double err = chow_spectral_error(chow, truth, act);
        const Subspace sub = top_k_subspace(chow, k);
        double residual_max = 0.0;
        for (double r : subspace_residual(sub, truth)) residual_max = std::max(residual_max, r);
        errors.push_back(err);
        csv_rows.push_back({static_cast<double>(t), static_cast<double>(d),
                            static_cast<double>(k), static_cast<double>(n), err, residual_max});
        trial_metrics.push_back(
            {{"trial", t}, {"spectral_error", err}, {"residual_max", residual_max}});
        std::cout << "trial " << t << ": n=" << n << " spectral_error=" << err
                  << " residual_max=" << residual_max << "\n";
    }
    report.add_summary("spectral_error", errors);
    report.write(out / "report.json");
    write_csv(out / "trials.csv", {"trial", "d", "k", "n", "spectral_error", "residual_max"},
              csv_rows);
    std::cout << "wrote " << (out / "report.json").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// pack (packing-only)
// ---------------------------------------------------------------------------

int run_pack(const KeyValueConfig& raw) {
    ResolvedConfig cfg(raw);
    const int d = static_cast<int>(cfg.get_int("d", 400));
    const int m = static_cast<int>(cfg.get_int("planes", 64));
    const double bound = cfg.get_double("bound", 0.25);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const std::int64_t attempts =
        cfg.get_int("max_attempts", 10LL * static_cast<std::int64_t>(m));

    const fs::path out = prepare_out_dir(cfg, "pack");
    Report report("pack", cfg.echo(), seed);
    Rng rng({seed, 0xACC0});
    const double t0 = now_seconds();
    try {
        const PlaneSet set = plane_packing(d, m, bound, rng, attempts);
        report.metrics()["planes"] = static_cast<int>(set.size());
        report.metrics()["pairwise_bound"] = set.pairwise_bound;
        report.metrics()["recomputed_bound"] = set.recompute_pairwise_bound();
        report.timings()["secs"] = now_seconds() - t0;
        report.write(out / "report.json");
        std::cout << "packed " << set.size() << " planes in R^" << d << " under bound " << bound
                  << "; pairwise max = " << set.pairwise_bound << "\n"
                  << "wrote " << (out / "report.json").string() << "\n";
        return kExitOk;
    } catch (const PackingError& e) {
        report.metrics()["planes"] = e.achieved();
        report.metrics()["failed"] = true;
        report.write(out / "report.json");
        std::cout << e.what() << "\n";
        return kExitBudget;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"posnet: learner and SQ-hardness experiments for positive one-hidden-layer "
                 "networks under Gaussian inputs"};
    app.require_subcommand(1);

    ArgSink learn_args, hardness_args, verify_args, chow_args, pack_args;

    CLI::App* learn = app.add_subcommand("learn", "run the end-to-end learner over seeded trials");
    add_shared_options(learn, learn_args);
    add_kv_option(learn, learn_args, "-d,--dim", "d", "ambient dimension");
    add_kv_option(learn, learn_args, "-k,--units", "k", "hidden units");
    add_kv_option(learn, learn_args, "--eps", "eps", "accuracy parameter");
    add_kv_option(learn, learn_args, "--sigma", "sigma", "label noise level");
    add_kv_option(learn, learn_args, "--noise", "noise", "gaussian | bounded_uniform");
    add_kv_option(learn, learn_args, "--weight-angle-deg", "weight_angle_deg",
                  "fixed angle between the two weights (k=2 only)");
    add_kv_option(learn, learn_args, "--max-candidates", "max_candidates", "sweep budget");
    add_kv_option(learn, learn_args, "--holdout", "holdout", "held-out sample count");

    CLI::App* hardness =
        app.add_subcommand("hardness", "hard-instance suite: moments, packing, correlations");
    add_shared_options(hardness, hardness_args);
    add_kv_option(hardness, hardness_args, "-d,--dim", "d", "ambient dimension");
    add_kv_option(hardness, hardness_args, "-k,--angular", "k", "angular parameter");
    add_kv_option(hardness, hardness_args, "--planes", "planes", "number of packed planes");
    add_kv_option(hardness, hardness_args, "--bound", "bound", "pairwise product-norm bound");
    add_kv_option(hardness, hardness_args, "--n-mc", "n_mc", "Monte-Carlo samples");
    add_kv_option(hardness, hardness_args, "--phi", "phi", "inner activation");
    add_kv_option(hardness, hardness_args, "--sigma-out", "sigma_out", "odd outer activation");
    add_kv_option(hardness, hardness_args, "--degree-cap", "degree_cap", "moment table degree cap");

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    add_shared_options(verify, verify_args);
    add_kv_option(verify, verify_args, "--invariants", "invariants",
                  "comma-separated invariant names, or 'all'");
    add_kv_option(verify, verify_args, "--grid-order", "grid_order", "quadrature grid order");

    CLI::App* chow = app.add_subcommand("chow", "Chow-matrix estimation diagnostics");
    add_shared_options(chow, chow_args);
    add_kv_option(chow, chow_args, "-d,--dim", "d", "ambient dimension");
    add_kv_option(chow, chow_args, "-k,--units", "k", "hidden units");
    add_kv_option(chow, chow_args, "-n,--samples", "n", "sample count (0 = schedule)");
    add_kv_option(chow, chow_args, "--eps", "eps", "accuracy for the schedule");
    add_kv_option(chow, chow_args, "--sigma", "sigma", "label noise level");

    CLI::App* pack = app.add_subcommand("pack", "plane packing only");
    add_shared_options(pack, pack_args);
    add_kv_option(pack, pack_args, "-d,--dim", "d", "ambient dimension");
    add_kv_option(pack, pack_args, "--planes", "planes", "number of planes");
    add_kv_option(pack, pack_args, "--bound", "bound", "pairwise product-norm bound");
    add_kv_option(pack, pack_args, "--max-attempts", "max_attempts", "rejection budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (learn->parsed()) return run_learn(resolve_config(learn_args));
        if (hardness->parsed()) return run_hardness(resolve_config(hardness_args));
        if (verify->parsed()) return run_verify(resolve_config(verify_args));
        if (chow->parsed()) return run_chow(resolve_config(chow_args));
        if (pack->parsed()) return run_pack(resolve_config(pack_args));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const BudgetError& e) {
        std::cerr << "budget refusal: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
