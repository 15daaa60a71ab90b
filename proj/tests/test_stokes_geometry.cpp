#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "ptspectra/stokes_geometry.hpp"

using namespace ptspectra;

namespace {

double ang_dist(double a, double b) {
    const double d = normalize_angle(a - b);
    return std::min(d, 2.0 * kPi - d);
}

}  // namespace

TEST_CASE("critical angles of the cubic") {
    const auto t = critical_angles(1);
    const std::vector<double> expected{kPi / 10, kPi / 2, 9 * kPi / 10, 13 * kPi / 10, 17 * kPi / 10};
    REQUIRE(t.size() == expected.size());
    for (std::size_t j = 0; j < t.size(); ++j) CHECK(t[j] == doctest::Approx(expected[j]).epsilon(1e-14));
}

TEST_CASE("critical angles for n = 2 use the even branch") {
    const auto t = critical_angles(2);
    REQUIRE(t.size() == 7);
    CHECK(t[0] == doctest::Approx(2 * kPi - kPi / 14).epsilon(1e-14));
    for (int j = 1; j < 7; ++j) CHECK(t[j] == doctest::Approx((4 * j - 1) * kPi / 14).epsilon(1e-14));
}

TEST_CASE("critical angles partition the circle evenly and avoid the real axis") {
    for (int n = 1; n <= 9; ++n) {
        auto t = critical_angles(n);
        CHECK(t.size() == static_cast<std::size_t>(2 * n + 3));
        std::sort(t.begin(), t.end());
        double total = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            const double gap = normalize_angle(t[(j + 1) % t.size()] - t[j]);
            CHECK(gap == doctest::Approx(2 * kPi / (2 * n + 3)).epsilon(1e-12));
            total += gap;
            CHECK(ang_dist(t[j], 0.0) > 1e-3);
            CHECK(ang_dist(t[j], kPi) > 1e-3);
        }
        CHECK(std::abs(total - 2 * kPi) < 1e-12);
    }
    CHECK_THROWS_AS(critical_angles(0), PreconditionError);
}

TEST_CASE("chart rejects bad epsilon") {
    CHECK_THROWS_AS(StokesChart(1, 0.0), PreconditionError);
    CHECK_THROWS_AS(StokesChart(1, kPi / 5), PreconditionError);
    CHECK_NOTHROW(StokesChart(1, 0.1));
}

TEST_CASE("region index for the cubic") {
    const StokesChart chart(1, 0.1);
    const auto right = region_index(chart, cplx{1.0, 0.0});
    CHECK(right.sector == chart.right_hand_sector());
    CHECK(right.in_shrunk_sector);
    CHECK_FALSE(right.on_critical_ray);
    CHECK(chart.sector_center(chart.right_hand_sector()) == doctest::Approx(2 * kPi - kPi / 10));
    CHECK(chart.sector_center(chart.left_hand_sector()) == doctest::Approx(kPi + kPi / 10));

    const auto ray = region_index(chart, std::polar(1.0, kPi / 10));
    CHECK(ray.on_critical_ray);
    CHECK_FALSE(ray.in_shrunk_sector);

    const auto down = region_index(chart, cplx{0.0, -1.0});
    CHECK(down.sector == 3);
    CHECK(chart.thetas()[3] == doctest::Approx(13 * kPi / 10));

    CHECK_THROWS_AS(region_index(chart, cplx{}), PreconditionError);
}

TEST_CASE("rotated chart shifts every ray by pi") {
    const StokesChart plain(2, 0.1);
    const StokesChart rot(2, 0.1, true);
    for (std::size_t j = 0; j < plain.thetas().size(); ++j) {
        CHECK(ang_dist(rot.thetas()[j], plain.thetas()[j] + kPi) < 1e-13);
    }
}

TEST_CASE("region index is locally constant away from rays") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi), rad(0.1, 50.0), pert(-1.0, 1.0);
    for (int n = 1; n <= 4; ++n) {
        const StokesChart chart(n, 0.05);
        for (int trial = 0; trial < 2000; ++trial) {
            const double a = ang(rng);
            bool near_ray = false;
            for (double t : chart.thetas()) near_ray |= ang_dist(a, t) < 1e-7;
            if (near_ray) continue;
            const cplx z = std::polar(rad(rng), a);
            const cplx zp = z * (1.0 + 1e-9 * cplx{pert(rng), pert(rng)});
            CHECK(region_index(chart, z).sector == region_index(chart, zp).sector);
        }
    }
}

TEST_CASE("cubic region labels at reference points") {
    CHECK(classify_cubic_regions(cplx{0.0, 2.0}, 1.0).a_region == ARegion::A1);
    CHECK(classify_cubic_regions(cplx{}, 1.0).a_region == ARegion::A4);
    CHECK(classify_cubic_regions(std::polar(3.0, 7 * kPi / 6), 1.0).a_region == ARegion::A2);
    CHECK(classify_cubic_regions(std::polar(3.0, 11 * kPi / 6), 1.0).a_region == ARegion::A3);
    CHECK(classify_cubic_regions(std::polar(3.0, 9 * kPi / 10), 1.0).a_region == ARegion::A4);
    CHECK(classify_cubic_regions(cplx{3.0, 0.0}, 1.0).b_region == BRegion::B1);
    CHECK(classify_cubic_regions(std::polar(3.0, 7 * kPi / 10), 1.0).b_region == BRegion::B2);
    CHECK(classify_cubic_regions(std::polar(3.0, 4 * kPi / 3), 1.0).b_region == BRegion::B3);
    CHECK(classify_cubic_regions(cplx{-3.0, 0.0}, cplx{1.0, 0.5}).b_region == BRegion::B4);
    CHECK_THROWS_AS(classify_cubic_regions(cplx{1.0, 0.0}, cplx{-1.0, 0.0}), PreconditionError);
}

TEST_CASE("cubic labels agree with recomputed signs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-5.0, 5.0), alpha(0.1, 10.0), beta(-5.0, 5.0);
    int checked = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        const cplx z{coord(rng), coord(rng)};
        const cplx lambda{alpha(rng), beta(rng)};
        const auto label = classify_cubic_regions(z, lambda);
        const cplx w = kI * z * z * z - lambda;
        if (label.a_region != ARegion::boundary) {
            CHECK((w.real() < 0.0) == (label.a_region == ARegion::A4));
            ++checked;
        }
        if (label.b_region != BRegion::boundary) {
            const double im = label.reflected ? -w.imag() : w.imag();
            CHECK((im < 0.0) == (label.b_region == BRegion::B4));
        }
        CHECK(label.reflected == (lambda.imag() < 0.0));
    }
    CHECK(checked > 19000);
}

TEST_CASE("turning points") {
    SUBCASE("lambda = i gives the cube roots of unity") {
        const auto r = cubic_turning_points(kI);
        CHECK(std::abs(r[0] - 1.0) < 1e-14);
        CHECK(std::abs(r[1] - std::polar(1.0, 2 * kPi / 3)) < 1e-14);
        CHECK(std::abs(r[2] - std::polar(1.0, 4 * kPi / 3)) < 1e-14);
    }
    SUBCASE("lambda = 8i scales by two") {
        const auto r = cubic_turning_points(8.0 * kI);
        CHECK(std::abs(r[0] - 2.0) < 1e-13);
        CHECK(std::abs(r[1] - std::polar(2.0, 2 * kPi / 3)) < 1e-13);
    }
    SUBCASE("real lambda sits on the degenerate sector boundaries") {
        const auto r = cubic_turning_points(1.0);
        CHECK(ang_dist(std::arg(r[0]), kPi / 2) < 1e-13);
        CHECK(ang_dist(std::arg(r[1]), 7 * kPi / 6) < 1e-13);
        CHECK(ang_dist(std::arg(r[2]), -kPi / 6) < 1e-13);
    }
    SUBCASE("complex lambda has one root in each of quadrants II, III, IV") {
        const auto r = cubic_turning_points(cplx{1.0, 1.0});
        CHECK((r[0].real() < 0 && r[0].imag() > 0));
        CHECK((r[1].real() < 0 && r[1].imag() < 0));
        CHECK((r[2].real() > 0 && r[2].imag() < 0));
    }
    SUBCASE("roots lie on both zero level sets") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> c(-20.0, 20.0);
        for (int trial = 0; trial < 500; ++trial) {
            const cplx lambda{c(rng), c(rng)};
            for (cplx root : cubic_turning_points(lambda)) {
                const cplx w = kI * root * root * root - lambda;
                CHECK(std::abs(w) <= 1e-12 * std::abs(lambda));
                CHECK(std::abs(w.real()) <= 1e-12 * std::abs(lambda));
                CHECK(std::abs(w.imag()) <= 1e-12 * std::abs(lambda));
            }
        }
    }
    CHECK_THROWS_AS(cubic_turning_points(0.0), PreconditionError);
}
