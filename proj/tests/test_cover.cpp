#include "posnet/cover.hpp"
#include "posnet/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace posnet;
using Catch::Matchers::WithinAbs;

TEST_CASE("1-D cover at eps=0.5 is exactly {+-1, +-0.5}") {
    const Cover c = build_cover(1, 0.5, 1.0);
    std::vector<double> pts;
    for (Eigen::Index i = 0; i < c.points.rows(); ++i) pts.push_back(c.points(i, 0));
    std::sort(pts.begin(), pts.end());
    REQUIRE(pts.size() == 4);
    REQUIRE_THAT(pts[0], WithinAbs(-1.0, 1e-15));
    REQUIRE_THAT(pts[1], WithinAbs(-0.5, 1e-15));
    REQUIRE_THAT(pts[2], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(pts[3], WithinAbs(1.0, 1e-15));
}

TEST_CASE("zero radius gives an empty cover; bad eps rejected") {
    const Cover c = build_cover(3, 0.25, 0.0);
    REQUIRE(c.size() == 0);
    REQUIRE_THROWS_AS(build_cover(2, 0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(build_cover(2, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(build_cover(0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("cover point norms stay inside the shell range and the count bound") {
    for (double radius : {1.0, 3.7}) {
        const Cover c = build_cover(2, 0.25, radius);
        const double lo = std::pow(0.75, c.scales) * radius;
        for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
            const double n = c.points.row(i).norm();
            REQUIRE(n >= lo - 1e-12);
            REQUIRE(n <= radius + 1e-12);
        }
        const double count_bound = std::pow(1.0 + 2.0 * 2 / 0.25, 2) * (c.scales + 1);
        REQUIRE(static_cast<double>(c.size()) <= count_bound);
    }
}

TEST_CASE("every vector in the annulus has a nearby cover point") {
    const int k = 2;
    const double eps = 0.25, radius = 1.0;
    const Cover c = build_cover(k, eps, radius);
    Rng rng({321, 0});
    int tested = 0;
    while (tested < 10'000) {
        Eigen::VectorXd v(k);
        for (int j = 0; j < k; ++j) v(j) = 2.0 * rng.uniform() - 1.0;
        const double n = v.norm();
        if (n < eps * radius || n > radius) continue;
        ++tested;
        double best = 1e30;
        for (Eigen::Index i = 0; i < c.points.rows(); ++i)
            best = std::min(best, (c.points.row(i).transpose() - v).norm());
        REQUIRE(best <= eps * radius);
    }
}

TEST_CASE("direction preservation: some cover point is angularly close") {
    const Cover c = build_cover(2, 0.25, 1.0);
    Rng rng({322, 0});
    for (int rep = 0; rep < 2000; ++rep) {
        Eigen::Vector2d v(rng.gaussian(), rng.gaussian());
        v.normalize();
        double best = 1e30;
        for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
            const Eigen::Vector2d dir = c.points.row(i).transpose().normalized();
            best = std::min(best, (dir - v).norm());
        }
        REQUIRE(best <= 0.25);
    }
}

TEST_CASE("candidate counts are multiset coefficients") {
    REQUIRE(candidate_count(3, 2) == 6);
    REQUIRE(candidate_count(1, 3) == 1);
    REQUIRE(candidate_count(10, 2) == 55);
    REQUIRE(candidate_count(0, 2) == 0);
}

TEST_CASE("enumerator yields each multiset once, in order") {
    const Cover c = build_cover(1, 0.5, 1.0); // 4 points
    CandidateEnumerator en(c, 2);
    REQUIRE(en.count() == 10);
    std::set<std::vector<std::int64_t>> seen;
    Candidate cand;
    std::vector<std::int64_t> prev;
    while (en.next(cand)) {
        REQUIRE(std::is_sorted(cand.indices.begin(), cand.indices.end()));
        REQUIRE(!seen.contains(cand.indices));
        if (!prev.empty()) REQUIRE(prev < cand.indices);
        seen.insert(cand.indices);
        prev = cand.indices;
    }
    REQUIRE(seen.size() == 10);
}

TEST_CASE("cover construction is deterministic") {
    const Cover a = build_cover(3, 0.3, 2.0);
    const Cover b = build_cover(3, 0.3, 2.0);
    REQUIRE(a.size() == b.size());
    REQUIRE((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
}
