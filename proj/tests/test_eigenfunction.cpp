#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle/frozen_eigenvalues.hpp"
#include "ptspectra/eigenfunction_analysis.hpp"

using namespace ptspectra;
using oracle::kCubicEigenvalues;

namespace {

const PotentialSpec& cubic() {
    static const PotentialSpec s = PotentialSpec::canonical(1);
    return s;
}

const EigenvalueRecord& ground() {
    static const EigenvalueRecord r = refine(cubic(), kCubicEigenvalues[0]);
    return r;
}

const FieldGrid& square_grid() {
    static const FieldGrid g = build_grid(cubic(), ground(), {-6, 6, -6, 6}, 241, 241);
    return g;
}

const FieldGrid& wide_rows() {
    static const FieldGrid g = [] {
        GridOptions o;
        o.fill = GridFill::rows;
        return build_grid(cubic(), ground(), {-8, 8, -2, 2}, 641, 81, o);
    }();
    return g;
}

const CheckSummary& find(const std::vector<CheckSummary>& v, const std::string& id) {
    const auto it = std::find_if(v.begin(), v.end(), [&](const CheckSummary& c) { return c.id == id; });
    REQUIRE(it != v.end());
    return *it;
}

}  // namespace

TEST_CASE("zero finder on a closed-form field") {
    const auto g = FieldGrid::from_function(
        {-2, 2, -1.5, 1.5}, 41, 31, [](cplx z) { return std::pair{z * z - 1.0, 2.0 * z}; },
        [](cplx) { return cplx{2.0}; });
    const auto zs = find_zeros(g);
    std::vector<cplx> u, du;
    for (const auto& z : zs) {
        CHECK(z.winding == 1);
        (z.which == ZeroKind::zero_of_u ? u : du).push_back(z.z);
    }
    REQUIRE(u.size() == 2);
    CHECK(std::abs(u[0] - cplx{-1.0}) < 1e-12);
    CHECK(std::abs(u[1] - cplx{1.0}) < 1e-12);
    REQUIRE(du.size() == 1);
    CHECK(std::abs(du[0]) < 1e-12);
}

TEST_CASE("zero-free field yields no zeros") {
    const auto g = FieldGrid::from_function(
        {-1, 1, -1, 1}, 21, 21, [](cplx z) { return std::pair{std::exp(z), std::exp(z)}; },
        [](cplx z) { return std::exp(z); });
    CHECK(find_zeros(g).empty());
}

TEST_CASE("ground-state grid is finite and matches the real-axis shooting") {
    const auto g = build_grid(cubic(), ground(), {-6, 6, -4, 4}, 241, 161);
    for (const auto& s : g.samples()) {
        REQUIRE(std::isfinite(std::abs(s.u)));
        REQUIRE(std::isfinite(std::abs(s.du)));
        REQUIRE(std::isfinite(s.log_scale));
        REQUIRE(std::abs(s.u) + std::abs(s.du) > 0.0);
    }
    CHECK(g.origin_mismatch() < 1e-9);
    CHECK(g.seam_defect() < 1e-8);
    const auto& o = g.at(120, 80);
    CHECK(std::abs(o.u * std::exp(o.log_scale) - 1.0) < 1e-12);
}

TEST_CASE("eigenfunction is PT symmetric") {
    const auto rep = pt_symmetry_residual(square_grid());
    CHECK(rep.checked > 50000);
    CHECK(rep.max_relative_error < 1e-6);
    CHECK(pt_symmetry_residual(wide_rows()).max_relative_error < 1e-6);
}

TEST_CASE("row and column filling agree") {
    const auto h = build_grid(cubic(), ground(), {-8, 8, -2, 2}, 641, 81);
    const auto& r = wide_rows();
    double worst = 0.0;
    for (int j = 0; j < 81; j += 4) {
        for (int i = 0; i < 641; i += 8) {
            const auto &a = r.at(i, j), &b = h.at(i, j);
            worst = std::max(worst, std::abs(a.u * std::exp(a.log_scale - b.log_scale) - b.u) /
                                        (std::abs(b.u) + std::abs(b.du)));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("a perturbed eigenvalue is rejected") {
    EigenvalueRecord bad = ground();
    bad.lambda += 0.01;
    CHECK_THROWS_AS(build_grid(cubic(), bad, {-2, 2, -2, 2}, 21, 21), PreconditionError);
}

TEST_CASE("Green's transform") {
    const auto& g = square_grid();
    SUBCASE("real axis") {
        const auto r = green_residual(g, {{-4, 0}, {4, 0}});
        CHECK(r.real_residual < 1e-7);
        CHECK(r.imag_residual < 1e-7);
    }
    SUBCASE("imaginary axis carries no real flux for real lambda") {
        const auto r = green_residual(g, {{0, -3}, {0, 3}});
        CHECK(std::abs(r.lhs_real) < 1e-9 * r.scale);
        CHECK(std::abs(r.rhs_real) < 1e-9 * r.scale);
        CHECK(r.imag_residual < 1e-7);
    }
    SUBCASE("bent path") {
        const auto r = green_residual(g, {{-3, -2}, {1, 2.5}, {4, -1}});
        CHECK(r.real_residual < 1e-7);
        CHECK(r.imag_residual < 1e-7);
    }
    SUBCASE("zero length") {
        const auto r = green_residual(g, {{1, 1}, {1, 1}});
        CHECK(r.lhs_real == 0.0);
        CHECK(r.rhs_real == 0.0);
        CHECK(r.lhs_imag == 0.0);
        CHECK(r.rhs_imag == 0.0);
    }
    SUBCASE("path leaving the grid") { CHECK_THROWS_AS(green_residual(g, {{0, 0}, {9, 0}}), PreconditionError); }
}

TEST_CASE("sign fields hold in every certified region") {
    const auto checks = verify_sign_theorems(square_grid());
    for (const auto& c : checks) {
        INFO(c.id);
        CHECK(c.violations == 0);
        CHECK(c.checked > (c.id == "real_axis_im_q_negative" ? 200 : 1000));
    }
    CHECK(find(checks, "im_q_negative").checked > 10000);
    CHECK(find(checks, "re_q_positive_lower_left").checked > 10000);
    CHECK(find(checks, "re_q_negative_lower_right").checked > 10000);
}

TEST_CASE("real axis has strictly negative im_q") {
    const auto& g = square_grid();
    const int j0 = 120;
    REQUIRE(std::abs(g.y(j0)) < 1e-12);
    for (int i = 0; i < g.nx(); ++i) CHECK(g.q_scaled(i, j0).imag() < 0.0);
}

TEST_CASE("monotonicity and level-set orderings") {
    const auto checks = verify_monotonicity(square_grid());
    CHECK(find(checks, "re_q_monotone_on_sign_constant_columns").violations == 0);
    const auto& rows = find(checks, "re_q_increasing_along_rows_in_A1");
    CHECK(rows.checked > 1000);
    CHECK(rows.violations == 0);
    CHECK(find(checks, "im_q_level_set_ordering_in_A4").violations == 0);
    CHECK_FALSE(find(checks, "re_q_level_set_ordering_in_A1").applicable);
    CHECK(find(checks, "re_q_vanishes_on_imaginary_axis").violations == 0);
}

TEST_CASE("re_q increases along a row inside A1") {
    // A1 reaches down to Im z = ∛λ ≈ 1.05 on the imaginary axis.
    const auto& g = square_grid();
    const int j = 160;
    REQUIRE(std::abs(g.y(j) - 2.0) < 1e-12);
    int prev = -1, checked = 0;
    for (int i = 0; i < g.nx(); ++i) {
        if (classify_cubic_regions(g.z(i, j), g.lambda()).a_region != ARegion::A1) continue;
        if (prev == i - 1) {
            CHECK(g.re_q(i, j) > g.re_q(prev, j));
            ++checked;
        }
        prev = i;
    }
    CHECK(checked > 20);
}

TEST_CASE("zeros avoid the certified regions") {
    const auto& g = square_grid();
    const auto zs = find_zeros(g);
    const auto c = zero_census(g, zs, {4, 6});
    CHECK(c.upper_u_zeros > 5);
    CHECK(c.misplaced_upper == 0);
    CHECK(c.in_certified == 0);
    CHECK(c.misplaced_lower == 0);
    CHECK(c.ordering_violations == 0);
    CHECK(c.min_separation > 1e-6);
    CHECK(c.count_grows);
    for (const auto& z : zs) {
        if (z.which == ZeroKind::zero_of_u && z.z.imag() > 0.0) {
            CHECK(std::abs(z.z.real()) < 1e-6);
            CHECK(z.z.imag() > std::cbrt(ground().lambda.real()));
        }
    }
}

TEST_CASE("axis zero count grows with window height") {
    const auto g = build_grid(cubic(), ground(), {-0.5, 0.5, 0, 16}, 10, 801);
    const auto c = zero_census(g, find_zeros(g), {10, 16});
    REQUIRE(c.counts_by_height.size() == 2);
    CHECK(c.counts_by_height[1].second > c.counts_by_height[0].second);
    CHECK(c.count_grows);
    CHECK(c.misplaced_upper == 0);
}

TEST_CASE("convexity of the row integral") {
    const auto rep = convexity_check(wide_rows());
    CHECK(rep.convex);
    CHECK(rep.worst_second_difference >= -1e-8);
    CHECK(rep.second_derivative_mismatch < 1e-4);
    CHECK(rep.worst_tail < 1e-10);
    CHECK(rep.F.size() == 81);
}

TEST_CASE("convexity needs enough rows and enough width") {
    const auto one = build_grid(cubic(), ground(), {-8, 8, 0, 0}, 161, 1);
    CHECK_THROWS_WITH_AS(convexity_check(one), doctest::Contains("insufficient rows"), PreconditionError);
    const auto narrow = build_grid(cubic(), ground(), {-2, 2, -1, 1}, 81, 21);
    CHECK_THROWS_WITH_AS(convexity_check(narrow), doctest::Contains("widen"), PreconditionError);
}

TEST_CASE("decay envelope bounds the row tails") {
    const auto& g = wide_rows();
    for (int j : {0, 40, 80}) {
        const auto e = decay_envelope(g, j);
        CHECK(e.holds);
        CHECK(e.c2 >= 1.0);
        CHECK(e.relative_tail < 1e-10);
        for (int i = 0; i < g.nx(); ++i) {
            const double ax = std::abs(g.x(i));
            if (ax < 4.0) continue;
            const auto& s = g.at(i, j);
            CHECK(std::log(std::abs(s.u) + std::abs(s.du)) + s.log_scale <= e.log_c1 - std::pow(ax, e.c2) + 1e-12);
        }
    }
}

TEST_CASE("finite differences converge at second order") {
    std::vector<DifferenceReport> reps;
    for (int n : {41, 81, 161}) {
        const auto g = build_grid(cubic(), ground(), {-2, 2, -2, 2}, n, n);
        reps.push_back(finite_difference_check(g, {-1.5, 1.5, -1.5, 1.5}));
    }
    for (std::size_t k = 1; k < reps.size(); ++k) {
        CHECK(std::log2(reps[k - 1].im_q_error / reps[k].im_q_error) >= 1.9);
        CHECK(std::log2(reps[k - 1].im_diff_error / reps[k].im_diff_error) >= 1.9);
        CHECK(std::log2(reps[k - 1].real_diff_error / reps[k].real_diff_error) >= 1.9);
    }
    CHECK(reps.back().im_q_error < 1e-3);
}
