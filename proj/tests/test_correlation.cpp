#include "posnet/correlation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

using namespace posnet;

namespace {

Eigen::MatrixXd axis_plane(int d, int a, int b) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, d);
    p(0, a) = 1.0;
    p(1, b) = 1.0;
    return p;
}

} // namespace

TEST_CASE("diagonal entries estimate the unit second moment") {
    const int d = 8;
    std::vector<HardInstance> insts;
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 0, 1));
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 2, 3));
    const CorrelationReport rep = pairwise_correlation_report(insts, 200'000, {60, 0}, 2);
    for (int i = 0; i < rep.size(); ++i)
        REQUIRE(std::fabs(rep.estimate(i, i) - 1.0) <= 3.0 * rep.std_err(i, i));
}

TEST_CASE("orthogonal planes decorrelate the embeddings") {
    const int d = 8;
    std::vector<HardInstance> insts;
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 0, 1));
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 2, 3));
    const CorrelationReport rep = pairwise_correlation_report(insts, 400'000, {61, 0}, 2);
    REQUIRE(rep.bound_k(0, 1) == 0.0); // product norm is exactly zero here
    REQUIRE(std::fabs(rep.estimate(0, 1)) <= 3.0 * rep.std_err(0, 1));
}

TEST_CASE("packed planes respect the spectral decay bound") {
    const int d = 50, k = 2;
    Rng rng({62, 0});
    const PlaneSet set = plane_packing(d, 6, 0.45, rng, 200);
    std::vector<HardInstance> insts;
    for (const auto& p : set.planes) insts.emplace_back(k, relu(), OuterActivation::identity, p);
    const CorrelationReport rep = pairwise_correlation_report(insts, 400'000, {63, 0}, 2);
    for (int i = 0; i < rep.size(); ++i)
        for (int j = 0; j < rep.size(); ++j) {
            if (i == j) continue;
            REQUIRE(std::fabs(rep.estimate(i, j)) <= rep.bound_k(i, j) + 3.0 * rep.std_err(i, j));
            REQUIRE(rep.bound_k1(i, j) <= rep.bound_k(i, j));
        }
    REQUIRE(std::fabs(rep.avg_offdiag) < 0.1);
}

TEST_CASE("mismatched instance families are rejected") {
    const int d = 8;
    std::vector<HardInstance> insts;
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 0, 1));
    insts.emplace_back(4, relu(), OuterActivation::identity, axis_plane(d, 2, 3));
    REQUIRE_THROWS_AS(pairwise_correlation_report(insts, 1000, {64, 0}),
                      std::invalid_argument);
}

TEST_CASE("report is reproducible for a fixed stream") {
    const int d = 10;
    std::vector<HardInstance> insts;
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 0, 1));
    insts.emplace_back(2, relu(), OuterActivation::identity, axis_plane(d, 4, 7));
    const CorrelationReport a = pairwise_correlation_report(insts, 100'000, {65, 0}, 2);
    const CorrelationReport b = pairwise_correlation_report(insts, 100'000, {65, 0}, 1);
    REQUIRE(std::memcmp(a.estimate.data(), b.estimate.data(),
                        sizeof(double) * static_cast<std::size_t>(a.estimate.size())) == 0);
}
