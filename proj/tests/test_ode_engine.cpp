#include <cmath>
#include <random>

#include "doctest.h"
#include "engine_matrix.hpp"
#include "ptspectra/ode_engine.hpp"

using namespace ptspectra;

namespace {

PotentialSpec free_particle() {
    PotentialSpec s;
    s.n = 1;
    s.a = {0.0, 0.0};
    s.b = {0.0, 0.0};
    s.test_adapter = true;
    return s;
}


}  // namespace

TEST_CASE("canonical potential evaluation") {
    const auto cubic = PotentialSpec::canonical(1);
    for (double x : {-2.0, -0.3, 0.7, 3.0}) {
        const cplx v = potential_eval(cubic, x);
        CHECK(std::abs(v - kI * x * x * x) < 1e-14 * (1 + std::abs(x * x * x)));
    }
    for (int n = 1; n <= 4; ++n) {
        const auto spec = PotentialSpec::canonical(n);
        const cplx z{0.4, -0.9};
        CHECK(std::abs(potential_eval(spec, z) + std::pow(kI * z, 2 * n + 1)) < 1e-13);
        CHECK(spec.degree() == 2 * n + 1);
    }
}

TEST_CASE("potential with harmonic part and scaling") {
    PotentialSpec spec = PotentialSpec::canonical(1);
    spec.a = {0.0, 1.0};
    for (double x : {-1.5, 0.25, 2.0}) {
        const cplx expected = x * x - std::pow(kI * x, 3);
        CHECK(std::abs(potential_eval(spec, x) - expected) < 1e-13);
    }
    spec.g = 0.5;
    const double x = 1.3;
    CHECK(std::abs(potential_eval(spec, x) - (x * x + 0.5 * kI * x * x * x)) < 1e-13);
}

TEST_CASE("imaginary shift reproduces the translated cubic") {
    for (double a : {0.0, 0.5, 1.0, -0.7}) {
        PotentialSpec spec = PotentialSpec::canonical(1);
        spec.xi = cplx{0.0, -a};
        const cplx z{0.3, 1.1};
        const cplx expected = -(3 * a * z * z - a * a * a) + kI * z * (z * z - 3 * a * a);
        CHECK(std::abs(potential_eval(spec, z) - expected) < 1e-13);
    }
}

TEST_CASE("potential derivative matches a finite difference") {
    PotentialSpec spec = PotentialSpec::canonical(2);
    spec.a = {1.0, -2.0, 0.5};
    spec.b[0] = 0.3;
    spec.xi = cplx{0.0, 0.2};
    const cplx z{0.7, -0.4};
    const double h = 1e-5;
    const cplx fd = (potential_eval(spec, z + h) - potential_eval(spec, z - h)) / (2 * h);
    CHECK(std::abs(potential_derivative(spec, z) - fd) < 1e-8);
}

TEST_CASE("spec validation") {
    PotentialSpec spec = PotentialSpec::canonical(1);
    spec.b[1] = 0.0;
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    spec = PotentialSpec::canonical(1);
    spec.a.pop_back();
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    spec = PotentialSpec::canonical(1);
    spec.g = 0.0;
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
    CHECK_THROWS_AS(PotentialSpec::canonical(0), PreconditionError);
}

TEST_CASE("stokes chart follows the sign of the leading odd term") {
    auto spec = PotentialSpec::canonical(1);
    CHECK_FALSE(stokes_chart(spec, 0.1).rotated());
    spec.g = -1.0;
    CHECK(stokes_chart(spec, 0.1).rotated());
    CHECK_THROWS_AS(stokes_chart(PotentialSpec::harmonic_test_adapter(), 0.1), PreconditionError);
}

TEST_CASE("closed-form propagation") {
    const auto spec = free_particle();
    SUBCASE("u'' = u gives cosh") {
        const auto r = integrate(spec, -1.0, ComplexPath::segment(0.0, 1.0), SolutionState{0.0, 1.0, 0.0});
        CHECK(std::abs(r.final_state.true_u() - std::cosh(1.0)) < 1e-12 * std::cosh(1.0));
        CHECK(std::abs(r.final_state.true_du() - std::sinh(1.0)) < 1e-12 * std::cosh(1.0));
    }
    SUBCASE("u'' = -u gives cos") {
        const auto r = integrate(spec, 1.0, ComplexPath::segment(0.0, kPi / 2), SolutionState{0.0, 1.0, 0.0});
        CHECK(std::abs(r.final_state.true_u()) < 1e-12);
        CHECK(std::abs(r.final_state.true_du() + 1.0) < 1e-12);
    }
    SUBCASE("complex path for u'' = -u") {
        const cplx end{1.0, 0.7};
        const auto r = integrate(spec, 1.0, ComplexPath({0.0, cplx{0.0, 0.7}, end}), SolutionState{0.0, 1.0, 0.0});
        CHECK(std::abs(r.final_state.true_u() - std::cos(end)) < 1e-12 * std::abs(std::cos(end)));
        CHECK(r.waypoint_states.size() == 3);
    }
}

TEST_CASE("integrate rejects mismatched initial state") {
    const auto spec = free_particle();
    CHECK_THROWS_AS(integrate(spec, 1.0, ComplexPath::segment(0.0, 1.0), SolutionState{0.5, 1.0, 0.0}),
                    PreconditionError);
    CHECK_THROWS_AS(integrate(spec, 1.0, ComplexPath::segment(0.0, 1.0), SolutionState{0.0, 0.0, 0.0}),
                    PreconditionError);
    CHECK_THROWS_AS(ComplexPath({1.0}), PreconditionError);
    CHECK_THROWS_AS(ComplexPath({1.0, 1.0, 2.0}), PreconditionError);
}

TEST_CASE("asymptotic start conditions for the cubic") {
    const auto spec = PotentialSpec::canonical(1);
    const double L = 12.0;
    const auto left = asymptotic_init(spec, 1.0, -L);
    CHECK((left.du / left.u).real() > 0.0);
    const auto right = asymptotic_init(spec, 1.0, L);
    CHECK((right.du / right.u).real() < 0.0);
    CHECK(left.u == cplx{1.0, 0.0});
    CHECK(left.log_scale == 0.0);

    CHECK_NOTHROW(asymptotic_init(spec, 1.0, std::polar(L, kPi / 20)));
    CHECK_THROWS_AS(asymptotic_init(spec, 1.0, std::polar(L, kPi / 10)), PreconditionError);
    CHECK_THROWS_AS(asymptotic_init(spec, 1.0, 1.5), PreconditionError);

    const auto grow = asymptotic_init(spec, 1.0, L, AsymptoticMode::growing);
    CHECK((grow.du / grow.u).real() > 0.0);
}

TEST_CASE("asymptotic start approximates the exact decaying solution") {
    // V = z² with |V| ≥ 100|λ| at z = 8 needs λ ≤ 0.64. The start slope is
    // −√(V−λ) − V′/(4(V−λ)), close to the exact −z of exp(−z²/2) at λ = 1.
    const auto spec = PotentialSpec::harmonic_test_adapter();
    const auto s = asymptotic_init(spec, 0.5, 8.0);
    CHECK(std::abs(s.du / s.u + 8.0 * std::sqrt(1.0 - 0.5 / 64.0) + 1.0 / (2.0 * 8.0 * (1.0 - 0.5 / 64.0))) < 1e-12);
    CHECK(std::abs(s.du / s.u + 8.0) < 0.05);
}

TEST_CASE("start radius defaults") {
    CHECK(default_start_radius(PotentialSpec::canonical(1), 1.0) == doctest::Approx(12.0).epsilon(0.01));
    CHECK(default_start_radius(PotentialSpec::canonical(1), 40.0) >= 12.0);
    const double L3 = default_start_radius(PotentialSpec::canonical(3), 10.0);
    CHECK(std::abs(potential_eval(PotentialSpec::canonical(3), L3)) >= 1000.0);
}

TEST_CASE("decaying start propagates inward with growth") {
    const auto spec = PotentialSpec::canonical(1);
    const double lambda1 = 1.1562670719881;
    const auto init = asymptotic_init(spec, lambda1, -12.0);
    const auto r = integrate(spec, lambda1, ComplexPath::segment(-12.0, 0.0), init);
    CHECK(std::isfinite(r.final_state.u.real()));
    CHECK(r.final_state.log_scale > 0.0);
}

TEST_CASE("engine invariants on the seeded path matrix") {
    const auto spec = PotentialSpec::canonical(1);
    const double tol = 1e-12;
    IntegrateOptions opt;
    opt.tol = tol;
    for (const auto& c : testing::engine_matrix(spec, 10, 2024)) {
        const auto r1 = integrate(spec, c.lambda, c.path, c.first, opt);
        const auto r2 = integrate(spec, c.lambda, c.path, c.second, opt);

        const cplx w0 = c.first.u * c.second.du - c.first.du * c.second.u;
        for (std::size_t k = 0; k < c.path.waypoints().size(); ++k) {
            const auto& a = r1.waypoint_states[k];
            const auto& b = r2.waypoint_states[k];
            const cplx w = (a.u * b.du - a.du * b.u) * std::exp(a.log_scale + b.log_scale);
            CHECK(std::abs(w - w0) <= 10 * tol * std::abs(w0));
        }

        const auto back = integrate(spec, c.lambda, c.path.reversed(), r1.final_state, opt);
        CHECK(testing::state_distance(c.first, back.final_state) <= 100 * tol);

        IntegrateOptions low = opt;
        low.rescale_log_threshold = 20.0;
        const auto r3 = integrate(spec, c.lambda, c.path, c.first, low);
        CHECK(testing::state_distance(r1.final_state, r3.final_state) <= 10 * tol);
    }
}

TEST_CASE("analyticity: detour and straight path agree") {
    const auto spec = PotentialSpec::canonical(1);
    const double L = 12.0;
    for (cplx lambda : {cplx{1.0, 0.0}, cplx{4.5, 0.8}, cplx{9.0, -1.5}}) {
        const auto init = asymptotic_init(spec, lambda, -L);
        const auto straight = integrate(spec, lambda, ComplexPath::segment(-L, L), init);
        const auto detour = integrate(spec, lambda, ComplexPath({-L, cplx{-L, 0.2}, cplx{L, 0.2}, L}), init);
        CHECK(testing::state_distance(straight.final_state, detour.final_state) <= 100 * 1e-12);
    }
}

TEST_CASE("renormalization keeps magnitudes bounded") {
    const auto spec = PotentialSpec::canonical(1);
    const auto init = asymptotic_init(spec, 2.0, -12.0);
    IntegrateOptions opt;
    opt.dense = true;
    const auto r = integrate(spec, 2.0, ComplexPath::segment(-12.0, 12.0), init, opt);
    CHECK(r.final_state.log_scale > 100.0);
    for (const auto& s : r.samples) CHECK(std::max(std::abs(s.u), std::abs(s.du)) < std::exp(31.0));
    CHECK(r.samples.size() > 10);
}
