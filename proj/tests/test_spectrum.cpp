#include <cmath>

#include "doctest.h"
#include "oracle/frozen_eigenvalues.hpp"
#include "ptspectra/spectrum.hpp"

using namespace ptspectra;
using oracle::kCubicEigenvalues;

TEST_CASE("W vanishes at the oracle ground state and not at negative lambda") {
    const auto cubic = PotentialSpec::canonical(1);
    const auto at_root = refine(cubic, kCubicEigenvalues[0]);
    CHECK(std::abs(wronskian_miss(cubic, at_root.lambda).normalized) < 1e-9);
    CHECK(std::abs(wronskian_miss(cubic, kCubicEigenvalues[0]).normalized) < 1e-9);
    CHECK(std::abs(wronskian_miss(cubic, -1.0).normalized) > 0.1);
}

TEST_CASE("harmonic adapter has roots at odd integers") {
    const auto h = PotentialSpec::harmonic_test_adapter();
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(wronskian_miss(h, 2.0 * k + 1.0).normalized) < 1e-9);
        CHECK(std::abs(wronskian_miss(h, 2.0 * k + 2.0).normalized) > 1e-3);
    }
    const auto rec = refine(h, 5.2);
    CHECK(std::abs(rec.lambda - 5.0) < 1e-10);
}

TEST_CASE("argument-principle counts") {
    const auto cubic = PotentialSpec::canonical(1);
    CHECK(count_in_box(cubic, SearchBox{0.5, 2.0, -0.5, 0.5}) == 1);
    CHECK(count_in_box(cubic, SearchBox{-2.0, -0.5, -0.5, 0.5}) == 0);
    CHECK(count_in_box(cubic, SearchBox{1.0, 1.0, -0.5, 0.5}) == 0);

    const SearchBox whole{0.3, 9.0, -1.3, 1.1};
    const int total = count_in_box(cubic, whole);
    CHECK(total == 3);
    SearchBox left = whole, right = whole;
    left.re_hi = right.re_lo = 5.3;
    CHECK(count_in_box(cubic, left) + count_in_box(cubic, right) == total);
}

TEST_CASE("contour through an eigenvalue is rejected") {
    const auto cubic = PotentialSpec::canonical(1);
    const auto l1 = refine(cubic, 1.2).lambda.real();
    SearchBox box{l1, 2.0, -0.5, 0.5};
    box.samples_per_edge = 4;
    CHECK_THROWS_AS(count_in_box(cubic, box), ContourError);
}

TEST_CASE("refine agrees with the oracle") {
    const auto cubic = PotentialSpec::canonical(1);
    const auto r1 = refine(cubic, 1.2);
    CHECK(std::abs(r1.lambda.real() - kCubicEigenvalues[0]) < 1e-9);
    CHECK(std::abs(r1.lambda.imag()) < 1e-8);
    CHECK(r1.wronskian_residual < 1e-9);
    const auto r2 = refine(cubic, 4.0);
    CHECK(std::abs(r2.lambda.real() - kCubicEigenvalues[1]) < 1e-9);
    CHECK(std::abs(r2.lambda.imag()) < 1e-8);
}

TEST_CASE("refine from a far seed either fails or lands inside the sector") {
    const auto cubic = PotentialSpec::canonical(1);
    try {
        const auto rec = refine(cubic, cplx{0.1, 0.4});
        CHECK_FALSE(verify_sector(rec, 1).violation);
    } catch (const ConvergenceError& e) {
        CHECK(std::string(e.what()).find("iter") != std::string::npos);
    }
}

TEST_CASE("refined eigenvalue does not depend on matching point or start radius") {
    const auto cubic = PotentialSpec::canonical(1);
    for (double seed : {1.2, 4.0, 7.5}) {
        const auto base = refine(cubic, seed);
        RefineOptions moved;
        moved.shooting.x_match = 0.3;
        CHECK(std::abs(refine(cubic, seed, moved).lambda - base.lambda) < 1e-10);
        RefineOptions longer;
        longer.shooting.L = default_start_radius(cubic, base.lambda) + 2.0;
        CHECK(std::abs(refine(cubic, seed, longer).lambda - base.lambda) < 1e-8 * std::abs(base.lambda));
    }
}

TEST_CASE("search in a small box finds a conjugation-closed set") {
    const auto cubic = PotentialSpec::canonical(1);
    int total = 0;
    const auto found = find_eigenvalues(cubic, SearchBox{0.0, 12.0, -3.0, 3.0}, {}, &total);
    REQUIRE(found.size() == 4);
    CHECK(total == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(found[k].lambda.real() - kCubicEigenvalues[k]) < 1e-6 * kCubicEigenvalues[k]);
        CHECK(found[k].index == static_cast<int>(k));
        CHECK_FALSE(verify_sector(found[k], 1).violation);
    }
    CHECK(conjugation_defect(found) < 1e-8);
}

TEST_CASE("sector report") {
    EigenvalueRecord r;
    r.lambda = kCubicEigenvalues[0];
    const auto ok = verify_sector(r, 1);
    CHECK(ok.margin == doctest::Approx(kPi / 5));
    CHECK_FALSE(ok.violation);
    r.lambda = std::polar(1.0, kPi / 4);
    CHECK(verify_sector(r, 1).violation);
    r.lambda = -1.0;
    CHECK(verify_sector(r, 1).violation);
    CHECK(verify_sector(r, 3).bound == doctest::Approx(kPi / 9));
}

TEST_CASE("sufficient-condition coefficients") {
    CHECK(sufficient_coefficient(3, 0) == doctest::Approx(3.41).epsilon(0.005 / 3.41));
    CHECK(sufficient_coefficient(3, 1) == doctest::Approx(0.74).epsilon(0.005 / 0.74));
    CHECK(sufficient_coefficient(3, 2) == doctest::Approx(0.14).epsilon(0.005 / 0.14));

    auto spec = PotentialSpec::canonical(3);
    spec.a = {1.0, 2.0, 0.5, 1.0};
    const auto trivial = sufficient_condition(spec);
    CHECK(trivial.holds);
    CHECK(trivial.terms.size() == 3);
    CHECK(trivial.terms[0].factor == 2.0);
    CHECK(trivial.terms[1].factor == 1.0);
    CHECK(trivial.terms[2].factor == 2.0);

    auto cubic = PotentialSpec::canonical(1);
    cubic.a = {0.0, 1.0};
    cubic.b[0] = 0.5;
    const auto fails = sufficient_condition(cubic);
    CHECK_FALSE(fails.holds);
    CHECK(fails.terms[0].factor == 4.0);

    cubic.a = {1.0, 1.0};
    CHECK(sufficient_condition(cubic).holds);
    cubic.a = {-1.0, 1.0};
    CHECK_THROWS_AS(sufficient_condition(cubic), PreconditionError);
}

TEST_CASE("sign condition on P") {
    CHECK(sign_condition_critical_c() == doctest::Approx(1.837).epsilon(0.0005 / 1.837));

    auto spec = PotentialSpec::canonical(3);
    spec.a = {0.0, 1.0, -1.8, 1.0};
    CHECK(sign_condition_check(spec).minimum >= 0.0);

    // Closed form at the sector edge θ = π/18: the quartic in r has minimum
    // r²·(cos5θ − c²cos²3θ/(4cosθ)) at r² = −c·cos3θ/(2cosθ).
    spec.a = {0.0, 1.0, -2.0, 1.0};
    const double t = kPi / 18;
    const double r2 = 2.0 * std::cos(3 * t) / (2 * std::cos(t));
    const double expected = r2 * (std::cos(5 * t) - 4.0 * std::cos(3 * t) * std::cos(3 * t) / (4 * std::cos(t)));
    const auto rep = sign_condition_check(spec);
    CHECK(rep.minimum < 0.0);
    CHECK(rep.minimum == doctest::Approx(expected).epsilon(1e-2));

    CHECK(sign_condition_check(PotentialSpec::canonical(3)).minimum == 0.0);
}

TEST_CASE("imaginary shift of the cubic") {
    const auto id = shift_cubic(0.0);
    const auto canon = PotentialSpec::canonical(1);
    for (cplx z : {cplx{0.3, 0.2}, cplx{-1.0, 2.0}}) CHECK(std::abs(potential_eval(id, z) - potential_eval(canon, z)) < 1e-15);

    const auto one = shift_cubic(1.0);
    CHECK(one.a == std::vector<double>{1.0, -3.0});
    CHECK(one.b == std::vector<double>{-3.0, 1.0});
    for (cplx z : {cplx{0.3, 0.2}, cplx{-1.0, 2.0}}) {
        const cplx v = kI * (z + kI) * (z + kI) * (z + kI);
        CHECK(std::abs(potential_eval(one, z) - v) < 1e-13);
    }

    const auto shifted = refine(shift_cubic(0.5), 1.2);
    CHECK(std::abs(shifted.lambda - kCubicEigenvalues[0]) < 1e-8 * kCubicEigenvalues[0]);
}
