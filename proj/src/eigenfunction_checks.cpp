#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "ptspectra/detail/dopri5.hpp"
#include "ptspectra/eigenfunction_analysis.hpp"

namespace ptspectra {

namespace {

const PotentialSpec& require_spec(const FieldGrid& grid, const char* who) {
    if (!grid.spec()) throw PreconditionError(std::string(who) + ": grid was not built from an eigenvalue");
    return *grid.spec();
}

void require_cubic(const FieldGrid& grid, const char* who) {
    if (!is_pure_cubic(require_spec(grid, who))) {
        throw PreconditionError(std::string(who) + ": the region results are stated for V = iz^3");
    }
    if (!(grid.lambda().real() > 0.0)) throw PreconditionError(std::string(who) + ": requires Re(lambda) > 0");
}

/// |u|(|u| + |u′|) in the sample's own units.
double local_scale(const SolutionState& s) { return std::abs(s.u) * (std::abs(s.u) + std::abs(s.du)); }

/// The two negative roots y1 < y2 of y³ − 3x²y − α, present when 2|x|³ > α.
std::optional<std::pair<double, double>> lower_roots(double x, double alpha) {
    const double ax = std::abs(x);
    if (!(2.0 * ax * ax * ax > alpha)) return std::nullopt;
    const double phi = std::acos(alpha / (2.0 * ax * ax * ax));
    const double y2 = 2.0 * ax * std::cos(phi / 3.0 - 2.0 * kPi / 3.0);
    const double y1 = 2.0 * ax * std::cos(phi / 3.0 - 4.0 * kPi / 3.0);
    return std::make_pair(y1, y2);
}

/// Predictions for Im λ ≥ 0 at ζ.
std::vector<SignPrediction> predictions_upper(cplx zeta, cplx lam, bool real) {
    std::vector<SignPrediction> out;
    const double x = zeta.real(), y = zeta.imag();
    const double alpha = lam.real(), beta = lam.imag();
    const CubicRegionLabel lab = classify_cubic_regions(zeta, lam);
    auto im_w = [&](double yy) { return x * x * x - 3.0 * x * yy * yy - beta; };

    const double c = std::cbrt(beta / 2.0);
    const bool im_region = lab.b_region == BRegion::B1 || (lab.b_region == BRegion::B4 && x <= -c) ||
                           (lab.a_region != ARegion::A1 && lab.a_region != ARegion::boundary && y >= -c);
    if (im_region) out.push_back({"im_q_negative", false, -1});
    if (y == 0.0) out.push_back({"real_axis_im_q_negative", false, -1});

    const auto turning = cubic_turning_points(lam);
    cplx w3{}, w4{};
    for (cplx t : turning) {
        if (t.real() < 0.0 && t.imag() < 0.0) w3 = t;
        if (t.real() > 0.0 && t.imag() < 0.0) w4 = t;
    }

    if (const auto roots = lower_roots(x, alpha)) {
        const auto [y1, y2] = *roots;
        if (x < 0.0) {
            bool in = lab.a_region == ARegion::A2;
            if (!in && y < y1 && im_w(y1) > 0.0 && lab.b_region == BRegion::B3) in = true;
            if (!in && x <= w3.real() && y >= y2 && im_w(y2) <= 0.0 && lab.b_region == BRegion::B4 &&
                y * y < (beta - x * x * x) / (3.0 * -x)) {
                in = true;
            }
            if (in) out.push_back({"re_q_positive_lower_left", true, +1});
        } else {
            bool in = lab.a_region == ARegion::A3;
            if (!in && y < y1 && im_w(y1) < 0.0 && lab.b_region == BRegion::B4) in = true;
            if (!in && x >= w4.real() && y >= y2 && im_w(y2) >= 0.0 && lab.b_region == BRegion::B1 &&
                y * y < (x * x * x - beta) / (3.0 * x)) {
                in = true;
            }
            if (in) out.push_back({"re_q_negative_lower_right", true, -1});
        }
    }

    if (real && lab.a_region == ARegion::A1) {
        if (x < 0.0) out.push_back({"re_q_negative_A1_left", true, -1});
        if (x > 0.0) out.push_back({"re_q_positive_A1_right", true, +1});
    }
    return out;
}

/// Maps z to the Im λ ≥ 0 picture: (ζ, λ′, sign applied to Re predictions).
struct Mirror {
    cplx zeta;
    cplx lam;
    int re_sign = 1;
};

Mirror mirror(cplx z, cplx lambda) {
    if (effectively_real(lambda)) return {z, cplx{lambda.real(), 0.0}, 1};
    if (lambda.imag() < 0.0) return {-std::conj(z), std::conj(lambda), -1};
    return {z, lambda, 1};
}

/// True if no pair has Im ordered one way and Re the other (beyond tol).
/// `increasing`: Im ζ1 < Im ζ2 must imply Re ζ1 < Re ζ2.
long ordering_violations(const std::vector<cplx>& pts, bool increasing, double tol) {
    long v = 0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = 0; b < pts.size(); ++b) {
            if (pts[b].imag() <= pts[a].imag() + tol) continue;
            const double dre = pts[b].real() - pts[a].real();
            if (increasing ? dre < -tol : dre > tol) ++v;
        }
    }
    return v;
}

/// Same with the roles of Re and Im exchanged.
long ordering_violations_by_re(const std::vector<cplx>& pts, bool increasing, double tol) {
    std::vector<cplx> swapped;
    swapped.reserve(pts.size());
    for (cplx p : pts) swapped.emplace_back(p.imag(), p.real());
    return ordering_violations(swapped, increasing, tol);
}

CheckSummary named(std::string id) {
    CheckSummary c;
    c.id = std::move(id);
    return c;
}

void record(CheckSummary& c, double margin, double tol) {
    ++c.checked;
    c.worst_margin = std::min(c.worst_margin, margin);
    if (margin < -tol) ++c.violations;
}

}  // namespace

bool is_pure_cubic(const PotentialSpec& spec) {
    if (spec.test_adapter || spec.n != 1 || spec.xi != cplx{}) return false;
    if (std::any_of(spec.a.begin(), spec.a.end(), [](double v) { return v != 0.0; })) return false;
    return spec.b.size() == 2 && spec.b[0] == 0.0 && spec.g * spec.b[1] == 1.0;
}

bool effectively_real(cplx lambda) { return std::abs(lambda.imag()) <= 1e-8 * std::max(1.0, std::abs(lambda)); }

std::vector<SignPrediction> sign_predictions(cplx z, cplx lambda) {
    if (!(lambda.real() > 0.0)) throw PreconditionError("sign_predictions: requires Re(lambda) > 0");
    const Mirror m = mirror(z, lambda);
    std::vector<SignPrediction> out = predictions_upper(m.zeta, m.lam, effectively_real(lambda));
    for (auto& p : out) {
        if (p.real_part) p.sign *= m.re_sign;
    }
    return out;
}

GreenResidual green_residual(const FieldGrid& grid, const std::vector<cplx>& waypoints, double tol) {
    const Potential pot(require_spec(grid, "green_residual"));
    const cplx lambda = grid.lambda();
    const GridRect& r = grid.rect();
    const double pad = 1e-12 * (1.0 + std::abs(r.x_hi - r.x_lo) + std::abs(r.y_hi - r.y_lo));
    std::vector<cplx> pts;
    for (cplx p : waypoints) {
        if (p.real() < r.x_lo - pad || p.real() > r.x_hi + pad || p.imag() < r.y_lo - pad || p.imag() > r.y_hi + pad) {
            std::ostringstream msg;
            msg << "green_residual: waypoint " << p << " leaves the computed domain";
            throw PreconditionError(msg.str());
        }
        if (pts.empty() || pts.back() != p) pts.push_back(p);
    }
    GreenResidual res;
    if (pts.size() < 2) return res;

    const SolutionState start = grid.probe(pts.front());
    detail::CVec<5> y{start.u, start.du, cplx{}, cplx{}, cplx{}};
    double log_scale = start.log_scale;
    detail::StepControl ctl;
    ctl.tol = tol;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const cplx dz = pts[k] - pts[k - 1];
        auto rhs = [&](cplx z, const detail::CVec<5>& s) {
            const cplx w = pot(z) - lambda;
            const double uu = std::norm(s[0]), dd = std::norm(s[1]);
            const double re_part = dz.real() * dd + (w * dz).real() * uu;
            const double im_part = -dz.imag() * dd + (w * dz).imag() * uu;
            const double mass = std::abs(dz) * (dd + std::abs(w) * uu);
            return detail::CVec<5>{s[1], w * s[0], re_part / dz, im_part / dz, mass / dz};
        };
        detail::SegmentIntegrator<5, decltype(rhs)> stepper(rhs, {1, 1, 2, 2, 2}, ctl);
        stepper.advance(pts[k - 1], pts[k], y, log_scale, [](cplx, const detail::CVec<5>&, double) {});
    }

    const cplx q_end = y[1] * std::conj(y[0]);
    const cplx q_start = start.du * std::conj(start.u) * std::exp(2.0 * (start.log_scale - log_scale));
    res.lhs_real = (q_end - q_start).real();
    res.lhs_imag = (q_end - q_start).imag();
    res.rhs_real = y[2].real();
    res.rhs_imag = y[3].real();
    res.scale = y[4].real() + std::abs(q_end) + std::abs(q_start);
    const double eps = 1e-6 * res.scale + std::numeric_limits<double>::min();
    res.real_residual = std::abs(res.lhs_real - res.rhs_real) / (std::abs(res.lhs_real) + std::abs(res.rhs_real) + eps);
    res.imag_residual = std::abs(res.lhs_imag - res.rhs_imag) / (std::abs(res.lhs_imag) + std::abs(res.rhs_imag) + eps);
    return res;
}

std::vector<CheckSummary> verify_sign_theorems(const FieldGrid& grid, double tol) {
    require_cubic(grid, "verify_sign_theorems");
    const cplx lambda = grid.lambda();
    std::map<std::string, CheckSummary> by_id;
    for (const char* id : {"im_q_negative", "re_q_positive_lower_left", "re_q_negative_lower_right"}) {
        by_id[id].id = id;
    }
    if (effectively_real(lambda)) {
        for (const char* id : {"re_q_negative_A1_left", "re_q_positive_A1_right"}) by_id[id].id = id;
    }
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const SolutionState& s = grid.at(i, j);
            const double scale = local_scale(s);
            const cplx q = grid.q_scaled(i, j);
            for (const SignPrediction& p : sign_predictions(grid.z(i, j), lambda)) {
                CheckSummary& c = by_id[p.id];
                c.id = p.id;
                const double v = p.real_part ? q.real() : q.imag();
                record(c, scale > 0.0 ? p.sign * v / scale : 0.0, tol);
            }
        }
    }
    std::vector<CheckSummary> out;
    for (auto& [id, c] : by_id) out.push_back(c);
    return out;
}

std::vector<cplx> zero_level_points(const FieldGrid& grid, const std::function<double(int, int)>& field) {
    std::vector<cplx> pts;
    auto edge = [&](int i0, int j0, int i1, int j1) {
        const double a = field(i0, j0), b = field(i1, j1);
        if (a * b < 0.0) {
            const cplx za = grid.z(i0, j0), zb = grid.z(i1, j1);
            pts.push_back(za + (zb - za) * (a / (a - b)));
        }
    };
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (field(i, j) == 0.0) pts.push_back(grid.z(i, j));
            if (i + 1 < grid.nx()) edge(i, j, i + 1, j);
            if (j + 1 < grid.ny()) edge(i, j, i, j + 1);
        }
    }
    return pts;
}

std::vector<CheckSummary> verify_monotonicity(const FieldGrid& grid, double tol) {
    const Potential pot(require_spec(grid, "verify_monotonicity"));
    const cplx lambda = grid.lambda();
    const bool cubic = is_pure_cubic(*grid.spec()) && lambda.real() > 0.0;
    const bool real = effectively_real(lambda);
    auto w_at = [&](cplx z) { return pot(z) - lambda; };

    // Re q at two neighbouring samples in common units, with their scale.
    auto pair_delta = [&](int i0, int j0, int i1, int j1) {
        const SolutionState& a = grid.at(i0, j0);
        const SolutionState& b = grid.at(i1, j1);
        const double m = std::max(a.log_scale, b.log_scale);
        const double fa = std::exp(2.0 * (a.log_scale - m)), fb = std::exp(2.0 * (b.log_scale - m));
        const double delta = grid.q_scaled(i1, j1).real() * fb - grid.q_scaled(i0, j0).real() * fa;
        const double scale = std::max(local_scale(a) * fa, local_scale(b) * fb);
        return std::make_pair(delta, scale);
    };

    std::vector<CheckSummary> out;

    CheckSummary vert = named("re_q_monotone_on_sign_constant_columns");
    for (int i = 0; i < grid.nx(); ++i) {
        for (int j = 0; j + 1 < grid.ny(); ++j) {
            const cplx za = grid.z(i, j), zb = grid.z(i, j + 1);
            const double s0 = w_at(za).imag(), s1 = w_at(zb).imag(), sm = w_at(0.5 * (za + zb)).imag();
            if (!(s0 * s1 > 0.0 && s0 * sm > 0.0)) continue;
            const auto [delta, scale] = pair_delta(i, j, i, j + 1);
            if (scale == 0.0) continue;
            record(vert, (s0 > 0.0 ? -delta : delta) / scale, tol);
        }
    }
    out.push_back(vert);

    CheckSummary horiz = named("re_q_increasing_along_rows_in_A1");
    if (cubic) {
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i + 1 < grid.nx(); ++i) {
                const cplx za = grid.z(i, j), zb = grid.z(i + 1, j);
                auto in_a1 = [&](cplx z) { return classify_cubic_regions(z, lambda).a_region == ARegion::A1; };
                if (!(in_a1(za) && in_a1(zb) && in_a1(0.5 * (za + zb)))) continue;
                const auto [delta, scale] = pair_delta(i, j, i + 1, j);
                if (scale == 0.0) continue;
                record(horiz, delta / scale, tol);
            }
        }
    } else {
        horiz.applicable = false;
        horiz.note = "region labels are defined for V = iz^3";
    }
    out.push_back(horiz);

    const double pos_tol = 0.05 * std::max(grid.dx(), grid.dy());
    auto normalized = [&](bool re) {
        return [&grid, re](int i, int j) {
            const SolutionState& s = grid.at(i, j);
            const double sc = local_scale(s);
            const cplx q = grid.q_scaled(i, j);
            return sc > 0.0 ? (re ? q.real() : q.imag()) / sc : 0.0;
        };
    };

    CheckSummary lvl_re = named("re_q_level_set_ordering_in_A1");
    if (!cubic || real) {
        lvl_re.applicable = false;
        lvl_re.note = real ? "stated for Im(lambda) != 0" : "region labels are defined for V = iz^3";
    } else {
        std::vector<cplx> in_b2, off_b2;
        for (cplx p : zero_level_points(grid, normalized(true))) {
            const Mirror m = mirror(p, lambda);
            const CubicRegionLabel lab = classify_cubic_regions(m.zeta, m.lam);
            if (lab.a_region != ARegion::A1) continue;
            (lab.b_region == BRegion::B2 ? in_b2 : off_b2).push_back(m.zeta);
        }
        lvl_re.checked = static_cast<long>(in_b2.size() + off_b2.size());
        lvl_re.violations =
            ordering_violations_by_re(in_b2, true, pos_tol) + ordering_violations_by_re(off_b2, false, pos_tol);
    }
    out.push_back(lvl_re);

    CheckSummary lvl_im = named("im_q_level_set_ordering_in_A4");
    if (!cubic) {
        lvl_im.applicable = false;
        lvl_im.note = "region labels are defined for V = iz^3";
    } else {
        std::vector<cplx> b3, b4;
        for (cplx p : zero_level_points(grid, normalized(false))) {
            const Mirror m = mirror(p, lambda);
            const CubicRegionLabel lab = classify_cubic_regions(m.zeta, m.lam);
            if (lab.a_region != ARegion::A4) continue;
            if (lab.b_region == BRegion::B3) b3.push_back(m.zeta);
            if (lab.b_region == BRegion::B4) b4.push_back(m.zeta);
        }
        lvl_im.checked = static_cast<long>(b3.size() + b4.size());
        lvl_im.violations = ordering_violations(b3, true, pos_tol) + ordering_violations(b4, false, pos_tol);
    }
    out.push_back(lvl_im);

    CheckSummary odd = named("re_q_vanishes_on_imaginary_axis");
    if (!real) {
        odd.applicable = false;
        std::ostringstream note;
        if (grid.rect().x_lo <= 0.0 && grid.rect().x_hi >= 0.0) {
            const SolutionState s = grid.probe(cplx{0.0, grid.rect().y_hi});
            note << "observed sign of Re(u'conj(u)) at the top of the axis: "
                 << ((s.du * std::conj(s.u)).real() >= 0.0 ? "+" : "-");
        }
        odd.note = note.str();
    } else if (grid.rect().x_lo <= 0.0 && grid.rect().x_hi >= 0.0) {
        for (int j = 0; j < grid.ny(); ++j) {
            const SolutionState s = grid.probe(cplx{0.0, grid.y(j)});
            const double sc = local_scale(s);
            if (sc == 0.0) continue;
            record(odd, -std::abs((s.du * std::conj(s.u)).real()) / sc, tol);
        }
    } else {
        odd.applicable = false;
        odd.note = "grid does not reach the imaginary axis";
    }
    out.push_back(odd);
    return out;
}

RowDensity row_density(const FieldGrid& grid, int j) {
    if (j < 0 || j >= grid.ny()) throw PreconditionError("row_density: row index out of range");
    double m = -HUGE_VAL;
    for (int i = 0; i < grid.nx(); ++i) m = std::max(m, grid.at(i, j).log_scale);
    RowDensity d;
    d.log_scale = 2.0 * m;
    d.abs2.resize(grid.nx());
    d.abs2_du.resize(grid.nx());
    for (int i = 0; i < grid.nx(); ++i) {
        const SolutionState& s = grid.at(i, j);
        const double f = std::exp(2.0 * (s.log_scale - m));
        d.abs2[i] = std::norm(s.u) * f;
        d.abs2_du[i] = std::norm(s.du) * f;
    }
    return d;
}

double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
    return s * h;
}

DecayEnvelope decay_envelope(const FieldGrid& grid, int j) {
    DecayEnvelope env;
    const GridRect& r = grid.rect();
    const double x_max = std::max(std::abs(r.x_lo), std::abs(r.x_hi));
    std::vector<std::pair<double, double>> outer;  // (|x|, log m)
    for (int i = 0; i < grid.nx(); ++i) {
        const double ax = std::abs(grid.x(i));
        if (ax < 0.5 * x_max || ax <= 1.0) continue;
        const SolutionState& s = grid.at(i, j);
        outer.emplace_back(ax, std::log(std::abs(s.u) + std::abs(s.du)) + s.log_scale);
    }
    if (outer.empty()) return env;
    const RowDensity d = row_density(grid, j);
    const double log_row = std::log(trapezoid(d.abs2, grid.dx())) + d.log_scale;

    // For C₂ ≥ 1, ∫_X^∞ C₁² e^{−2x^{C₂}} dx ≤ C₁² e^{−2X^{C₂}} / (2C₂X^{C₂−1}).
    // C₁ is the smallest constant that bounds every outer sample; C₂ is
    // chosen on a grid to make the tail estimate smallest.
    auto log_tail = [](double log_c1, double c2, double X) {
        return 2.0 * log_c1 - 2.0 * std::pow(X, c2) - std::log(2.0 * c2) - (c2 - 1.0) * std::log(X);
    };
    double best = HUGE_VAL;
    for (int k = 0; k <= 300; ++k) {
        const double c2 = 1.0 + 0.01 * k;
        double log_c1 = -HUGE_VAL;
        for (const auto& [ax, lm] : outer) log_c1 = std::max(log_c1, lm + std::pow(ax, c2));
        double tail = 0.0;
        for (double X : {std::abs(r.x_lo), std::abs(r.x_hi)}) {
            tail += X > 1.0 ? std::exp(log_tail(log_c1, c2, X) - log_row) : HUGE_VAL;
        }
        if (tail < best) {
            best = tail;
            env.log_c1 = log_c1;
            env.c2 = c2;
        }
    }
    env.relative_tail = best;
    env.holds = std::isfinite(best);
    return env;
}

ConvexityReport convexity_check(const FieldGrid& grid, double tail_budget) {
    if (grid.ny() < 3) throw PreconditionError("convexity_check: insufficient rows (need at least 3)");
    ConvexityReport rep;
    const int ny = grid.ny();
    std::vector<double> G(ny);
    rep.y.resize(ny);
    rep.F.resize(ny);
    for (int j = 0; j < ny; ++j) {
        const RowDensity d = row_density(grid, j);
        const double f = std::exp(d.log_scale);
        rep.y[j] = grid.y(j);
        rep.F[j] = trapezoid(d.abs2, grid.dx()) * f;
        G[j] = 4.0 * trapezoid(d.abs2_du, grid.dx()) * f;
        if (!std::isfinite(rep.F[j]) || !std::isfinite(G[j])) {
            throw PreconditionError("convexity_check: row integral overflows; shrink the y range");
        }
        const DecayEnvelope env = decay_envelope(grid, j);
        const double t = env.holds ? env.relative_tail : HUGE_VAL;
        rep.worst_tail = std::max(rep.worst_tail, t);
    }
    if (!(rep.worst_tail <= tail_budget)) {
        std::ostringstream msg;
        msg << "convexity_check: decay tail " << rep.worst_tail << " exceeds " << tail_budget << "; widen the grid";
        throw PreconditionError(msg.str());
    }
    const double fmax = *std::max_element(rep.F.begin(), rep.F.end());
    const double h = grid.dy();
    rep.worst_second_difference = HUGE_VAL;
    for (int j = 1; j + 1 < ny; ++j) {
        rep.worst_second_difference =
            std::min(rep.worst_second_difference, (rep.F[j - 1] - 2.0 * rep.F[j] + rep.F[j + 1]) / fmax);
    }
    // F grows roughly like exp(c·y³), so a stencil on F itself loses accuracy
    // where F is steep; log F is far smoother and F″ = F(φ″ + φ′²).
    std::vector<double> phi(ny);
    for (int j = 0; j < ny; ++j) phi[j] = std::log(rep.F[j]);
    for (int j = 2; j + 2 < ny; ++j) {
        const double d1 = (phi[j - 2] - 8.0 * phi[j - 1] + 8.0 * phi[j + 1] - phi[j + 2]) / (12.0 * h);
        const double d2 =
            (-phi[j - 2] + 16.0 * phi[j - 1] - 30.0 * phi[j] + 16.0 * phi[j + 1] - phi[j + 2]) / (12.0 * h * h);
        const double fpp = rep.F[j] * (d2 + d1 * d1);
        rep.second_derivative_mismatch = std::max(rep.second_derivative_mismatch, std::abs(fpp - G[j]) / G[j]);
    }
    rep.convex = rep.worst_second_difference >= -1e-8;
    return rep;
}

ZeroCensus zero_census(const FieldGrid& grid, const std::vector<ZeroRecord>& zeros, const std::vector<double>& heights,
                       double axis_tol) {
    require_cubic(grid, "zero_census");
    const cplx lambda = grid.lambda();
    const bool real = effectively_real(lambda);
    const double alpha = lambda.real();
    const double cube = std::cbrt(std::abs(lambda));
    const double half = std::cbrt(alpha / 2.0);
    ZeroCensus c;

    auto inside_certified = [&](cplx z) {
        const auto center = sign_predictions(z, lambda);
        for (const SignPrediction& p : center) {
            bool all = true;
            for (int k = 0; k < 8 && all; ++k) {
                const auto around = sign_predictions(z + std::polar(axis_tol, kPi * k / 4.0), lambda);
                all = std::any_of(around.begin(), around.end(), [&](const SignPrediction& q) { return q.id == p.id; });
            }
            if (all) return true;
        }
        return false;
    };

    std::vector<cplx> b3, b4;
    for (const ZeroRecord& zr : zeros) {
        const cplx z = zr.z;
        if (inside_certified(z)) ++c.in_certified;
        if (z.imag() > 0.0) {
            if (zr.which == ZeroKind::zero_of_u) {
                ++c.upper_u_zeros;
                const bool ok = real ? (std::abs(z.real()) <= axis_tol && z.imag() > cube)
                                     : classify_cubic_regions(z, lambda).a_region == ARegion::A1;
                if (!ok) ++c.misplaced_upper;
            }
        } else if (z.imag() < 0.0) {
            ++c.lower_zeros;
            if (real) {
                const CubicRegionLabel lab = classify_cubic_regions(z, lambda);
                const double arg = std::arg(z);
                const bool arch = lab.a_region == ARegion::A4 && arg > -5.0 * kPi / 6.0 && arg < -kPi / 6.0 &&
                                  z.imag() > -half;
                const bool column = std::abs(z.real()) < half && z.imag() <= -half;
                if (!arch && !column) ++c.misplaced_lower;
            }
            const Mirror m = mirror(z, lambda);
            const CubicRegionLabel lab = classify_cubic_regions(m.zeta, m.lam);
            if (lab.a_region == ARegion::A4 && lab.b_region == BRegion::B3) b3.push_back(m.zeta);
            if (lab.a_region == ARegion::A4 && lab.b_region == BRegion::B4) b4.push_back(m.zeta);
        }
    }
    c.ordering_violations = ordering_violations(b3, true, axis_tol) + ordering_violations(b4, false, axis_tol);

    for (const ZeroRecord& a : zeros) {
        if (a.which != ZeroKind::zero_of_u) continue;
        for (const ZeroRecord& b : zeros) {
            if (b.which == ZeroKind::zero_of_du) c.min_separation = std::min(c.min_separation, std::abs(a.z - b.z));
        }
    }

    const GridRect& r = grid.rect();
    if (!real && r.x_lo <= 0.0 && r.x_hi >= 0.0 && r.y_hi >= 0.0) {
        // Sign of Re(u′ū) on the imaginary axis decides where zeros in A1 may sit.
        c.axis_rule_applicable = true;
        const int re_sign = lambda.imag() < 0.0 ? -1 : 1;
        double y0 = HUGE_VAL;
        for (int j = 0; j < grid.ny(); ++j) {
            if (grid.y(j) < 0.0) continue;
            const SolutionState s = grid.probe(cplx{0.0, grid.y(j)});
            if (re_sign * (s.du * std::conj(s.u)).real() >= 0.0) y0 = std::min(y0, grid.y(j));
        }
        for (const ZeroRecord& zr : zeros) {
            const Mirror m = mirror(zr.z, lambda);
            const CubicRegionLabel lab = classify_cubic_regions(m.zeta, m.lam);
            if (lab.a_region != ARegion::A1) continue;
            const bool bad = std::isfinite(y0) ? (lab.b_region != BRegion::B2 && m.zeta.real() >= 0.0 && m.zeta.imag() > y0)
                                               : m.zeta.real() <= 0.0;
            if (bad) ++c.axis_rule_violations;
        }
    }

    std::vector<double> hs = heights;
    std::sort(hs.begin(), hs.end());
    for (double h : hs) {
        const long n = std::count_if(zeros.begin(), zeros.end(), [&](const ZeroRecord& z) {
            return z.which == ZeroKind::zero_of_u && z.z.imag() > 0.0 && z.z.imag() <= h;
        });
        c.counts_by_height.emplace_back(h, n);
    }
    c.count_grows = c.counts_by_height.size() >= 2;
    for (std::size_t k = 1; k < c.counts_by_height.size(); ++k) {
        if (c.counts_by_height[k].second <= c.counts_by_height[k - 1].second) c.count_grows = false;
    }
    return c;
}

SymmetryReport pt_symmetry_residual(const FieldGrid& grid) {
    const GridRect& r = grid.rect();
    if (std::abs(r.x_lo + r.x_hi) > 1e-12 * (r.x_hi - r.x_lo)) {
        throw PreconditionError("pt_symmetry_residual: grid must be symmetric about the imaginary axis");
    }
    const int nx = grid.nx();
    int bi = 0, bj = 0;
    double best = HUGE_VAL;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < nx; ++i) {
            if (std::abs(grid.z(i, j)) < best) {
                best = std::abs(grid.z(i, j));
                bi = i;
                bj = j;
            }
        }
    }
    const SolutionState& s0 = grid.at(bi, bj);
    const SolutionState& m0 = grid.at(nx - 1 - bi, bj);
    const cplx ratio = s0.u != cplx{} ? s0.u / std::conj(m0.u) : -s0.du / std::conj(m0.du);
    const cplx phase = ratio / std::abs(ratio);

    SymmetryReport rep;
    rep.phase = std::arg(phase);
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < nx; ++i) {
            const SolutionState& s = grid.at(i, j);
            const SolutionState& m = grid.at(nx - 1 - i, j);
            const cplx pred = phase * std::conj(m.u) * std::exp(m.log_scale - s.log_scale);
            const double denom = std::abs(s.u) + std::abs(s.du);
            if (denom == 0.0) continue;
            rep.max_relative_error = std::max(rep.max_relative_error, std::abs(s.u - pred) / denom);
            ++rep.checked;
        }
    }
    return rep;
}

DifferenceReport finite_difference_check(const FieldGrid& grid, GridRect window) {
    const Potential pot(require_spec(grid, "finite_difference_check"));
    const cplx lambda = grid.lambda();
    DifferenceReport rep;
    const double dx = grid.dx(), dy = grid.dy();
    for (int j = 1; j + 1 < grid.ny(); ++j) {
        for (int i = 1; i + 1 < grid.nx(); ++i) {
            const cplx z = grid.z(i, j);
            if (z.real() < window.x_lo || z.real() > window.x_hi || z.imag() < window.y_lo || z.imag() > window.y_hi) {
                continue;
            }
            const SolutionState& c = grid.at(i, j);
            auto rel = [&](int ii, int jj) {
                const SolutionState& s = grid.at(ii, jj);
                const double f = std::exp(s.log_scale - c.log_scale);
                return std::make_pair(s.u * f, s.du * f);
            };
            const auto [un, dun] = rel(i, j + 1);
            const auto [us, dus] = rel(i, j - 1);
            const auto [ue, due] = rel(i + 1, j);
            const auto [uw, duw] = rel(i - 1, j);
            const double scale = std::pow(std::abs(c.u) + std::abs(c.du), 2);
            const cplx q = c.du * std::conj(c.u);
            const cplx w = pot(z) - lambda;

            const double fd_im_q = -0.5 * (std::norm(un) - std::norm(us)) / (2.0 * dy);
            const cplx dq = (due * std::conj(ue) - duw * std::conj(uw)) / (2.0 * dx);
            rep.im_q_error = std::max(rep.im_q_error, std::abs(fd_im_q - q.imag()) / scale);
            rep.im_diff_error = std::max(rep.im_diff_error, std::abs(dq.imag() - w.imag() * std::norm(c.u)) / scale);
            rep.real_diff_error = std::max(
                rep.real_diff_error, std::abs(dq.real() - std::norm(c.du) - w.real() * std::norm(c.u)) / scale);
            ++rep.checked;
        }
    }
    return rep;
}

}  // namespace ptspectra
