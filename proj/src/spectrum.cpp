#include "ptspectra/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ptspectra/parallel.hpp"

namespace ptspectra {

namespace {

double sector_bound(int n) { return kPi / (2 * n + 3); }

/// Vertical offset of the matching point. The quantization of large
/// eigenvalues happens between the two turning points adjacent to the left-
/// and right-hand Stokes sectors; on the real axis both decaying solutions
/// are dominated by the same WKB branch and W cancels heavily, so the
/// solutions are compared at 3/4 of the height of that turning-point pair.
double matching_height(const PotentialSpec& spec, const Potential& pot, cplx lambda) {
    if (spec.test_adapter || lambda == cplx{}) return 0.0;
    const int d = pot.degree();
    const StokesChart chart = stokes_chart(spec, default_sector_epsilon(spec.n));
    const double radius = std::pow(std::abs(lambda / pot.leading_coefficient()), 1.0 / d);
    const double base = std::arg(lambda / pot.leading_coefficient()) / d;
    auto nearest = [&](double direction) {
        cplx best;
        double best_dist = HUGE_VAL;
        for (int k = 0; k < d; ++k) {
            const double a = base + 2.0 * kPi * k / d;
            const double dist = std::abs(std::remainder(a - direction, 2.0 * kPi));
            if (dist < best_dist) {
                best_dist = dist;
                best = std::polar(radius, a);
            }
        }
        return best;
    };
    const cplx right = nearest(chart.sector_center(chart.right_hand_sector()));
    const cplx left = nearest(chart.sector_center(chart.left_hand_sector()));
    return 0.75 * 0.5 * (right.imag() + left.imag()) + pot.shift().imag();
}

/// Shoots both decaying solutions with a prebuilt potential: each runs on a
/// straight segment from ∓L to the complex matching point.
WronskianValue shoot(const PotentialSpec& spec, const Potential& pot, cplx lambda, const ShootingOptions& opt) {
    const double L = opt.L > 0.0 ? opt.L : default_start_radius(spec, lambda, opt.min_potential_ratio);
    if (!(std::abs(opt.x_match) < 0.5 * L)) {
        throw PreconditionError("wronskian_miss: matching point must lie well inside [-L, L]");
    }
    InitOptions init_opt;
    init_opt.min_potential_ratio = opt.min_potential_ratio;
    IntegrateOptions int_opt;
    int_opt.tol = opt.tol;

    const cplx zl{-L, 0.0}, zr{L, 0.0};
    const cplx zm{opt.x_match, matching_height(spec, pot, lambda)};
    auto route = [&](cplx start) { return ComplexPath::segment(start, zm); };

    SolutionState left, right;
    try {
        left = integrate(pot, lambda, route(zl), asymptotic_init(spec, lambda, zl, AsymptoticMode::decaying, init_opt),
                         int_opt).final_state;
        right = integrate(pot, lambda, route(zr), asymptotic_init(spec, lambda, zr, AsymptoticMode::decaying, init_opt),
                          int_opt).final_state;
    } catch (const IntegrationError& e) {
        std::ostringstream msg;
        msg << "wronskian_miss at lambda = " << lambda << ": " << e.what();
        throw IntegrationError(msg.str(), e.position());
    }

    WronskianValue w;
    w.scaled = left.u * right.du - left.du * right.u;
    w.log_scale = left.log_scale + right.log_scale;
    w.normalized = w.scaled / ((std::abs(left.u) + std::abs(left.du)) * (std::abs(right.u) + std::abs(right.du)));
    return w;
}

struct Sample {
    cplx lambda;
    cplx w;
};

/// Boundary of the box traversed counter-clockwise, closed.
std::vector<cplx> initial_contour(const SearchBox& box) {
    const cplx corners[4] = {{box.re_lo, box.im_lo}, {box.re_hi, box.im_lo},
                             {box.re_hi, box.im_hi}, {box.re_lo, box.im_hi}};
    const int m = std::max(box.samples_per_edge, 2);
    std::vector<cplx> pts;
    for (int e = 0; e < 4; ++e) {
        const cplx a = corners[e], b = corners[(e + 1) % 4];
        for (int k = 0; k < m; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / m));
    }
    return pts;
}

std::vector<cplx> evaluate_all(const PotentialSpec& spec, const Potential& pot, const std::vector<cplx>& lambdas,
                               const ShootingOptions& opt) {
    std::vector<cplx> out(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t i) { out[i] = shoot(spec, pot, lambdas[i], opt).normalized; });
    return out;
}

double phase_step(cplx a, cplx b) { return std::arg(b / a); }

bool outside_sector(const SearchBox& box, double half_angle) {
    if (box.re_hi < 0.0) return true;
    if (half_angle >= kPi / 2) return false;
    const double s = std::sin(half_angle), c = std::cos(half_angle);
    const cplx corners[4] = {{box.re_lo, box.im_lo}, {box.re_hi, box.im_lo},
                             {box.re_hi, box.im_hi}, {box.re_lo, box.im_hi}};
    bool above = true, below = true;
    for (cplx p : corners) {
        above = above && (-s * p.real() + c * p.imag() > 0.0);
        below = below && (-s * p.real() - c * p.imag() > 0.0);
    }
    return above || below;
}

}  // namespace

WronskianValue wronskian_miss(const PotentialSpec& spec, cplx lambda, const ShootingOptions& options) {
    const Potential pot(spec);
    return shoot(spec, pot, lambda, options);
}

int count_in_box(const PotentialSpec& spec, const SearchBox& box, const CountOptions& options) {
    if (box.degenerate()) return 0;
    const Potential pot(spec);
    std::vector<cplx> pts = initial_contour(box);
    std::vector<cplx> vals = evaluate_all(spec, pot, pts, options.shooting);

    for (int round = 0;; ++round) {
        std::vector<std::size_t> split;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::size_t j = (i + 1) % pts.size();
            if (std::abs(phase_step(vals[i], vals[j])) > options.max_phase_step) split.push_back(i);
        }
        if (split.empty()) break;
        if (round >= options.max_refinements) {
            throw ContourError("count_in_box: phase of W unresolved on the contour; perturb the box");
        }
        std::vector<cplx> mids;
        for (std::size_t i : split) mids.push_back(0.5 * (pts[i] + pts[(i + 1) % pts.size()]));
        const std::vector<cplx> mid_vals = evaluate_all(spec, pot, mids, options.shooting);

        std::vector<cplx> new_pts, new_vals;
        std::size_t s = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            new_pts.push_back(pts[i]);
            new_vals.push_back(vals[i]);
            if (s < split.size() && split[s] == i) {
                new_pts.push_back(mids[s]);
                new_vals.push_back(mid_vals[s]);
                ++s;
            }
        }
        pts.swap(new_pts);
        vals.swap(new_vals);
    }

    double min_w = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        min_w = std::min(min_w, std::abs(vals[i]));
        total += phase_step(vals[i], vals[(i + 1) % pts.size()]);
    }
    if (min_w < options.min_boundary_w) {
        std::ostringstream msg;
        msg << "count_in_box: |W| = " << min_w << " on the contour is below " << options.min_boundary_w
            << "; perturb the box";
        throw ContourError(msg.str());
    }
    const double winding = total / (2.0 * kPi);
    return static_cast<int>(std::lround(winding));
}

EigenvalueRecord refine(const PotentialSpec& spec, cplx lambda0, const RefineOptions& options) {
    // The iteration runs on the normalized W. It differs from the analytic W
    // by a smooth positive factor, so it has the same zeros with the same
    // local linear behaviour, while staying O(1) away from them where the
    // analytic W varies exponentially in λ.
    const Potential pot(spec);
    struct Point {
        cplx lambda;
        cplx w;
    };
    auto eval = [&](cplx l) { return Point{l, shoot(spec, pot, l, options.shooting).normalized}; };

    std::ostringstream trace;
    std::vector<Point> hist;
    hist.push_back(eval(lambda0 + 1e-3 * (1.0 + std::abs(lambda0))));
    hist.push_back(eval(lambda0));

    for (int it = 1; it <= options.max_iterations; ++it) {
        const Point b = hist.back();
        const Point a = hist[hist.size() - 2];
        trace << "  iter " << it << ": lambda = " << b.lambda << ", |W| = " << std::abs(b.w) << '\n';

        cplx step;
        if (b.w == cplx{}) {
            step = 0.0;
        } else if (b.w == a.w) {
            throw ConvergenceError("refine: secant denominator vanished\n" + trace.str());
        } else {
            step = -b.w * (b.lambda - a.lambda) / (b.w - a.w);
            if (hist.size() >= 3 && std::abs(b.w) > 0.5 * std::abs(a.w)) {
                // Slow progress: try a Muller step through the last three points.
                const Point c = hist[hist.size() - 3];
                const cplx h1 = a.lambda - c.lambda, h2 = b.lambda - a.lambda;
                if (h1 != cplx{} && h2 != cplx{} && h1 + h2 != cplx{}) {
                    const cplx d1 = (a.w - c.w) / h1, d2 = (b.w - a.w) / h2;
                    const cplx qa = (d2 - d1) / (h2 + h1);
                    const cplx qb = qa * h2 + d2;
                    const cplx disc = std::sqrt(qb * qb - 4.0 * b.w * qa);
                    const cplx den = std::abs(qb + disc) > std::abs(qb - disc) ? qb + disc : qb - disc;
                    if (den != cplx{}) step = -2.0 * b.w / den;
                }
            }
        }
        const double cap = 0.25 * (1.0 + std::abs(b.lambda));
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        const cplx next = b.lambda + step;
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) {
            throw ConvergenceError("refine: non-finite iterate\n" + trace.str());
        }
        hist.push_back(step == cplx{} ? b : eval(next));
        if (std::abs(step) <= options.step_tol * (1.0 + std::abs(next))) {
            EigenvalueRecord rec;
            rec.lambda = next;
            rec.wronskian_residual = std::abs(hist.back().w);
            rec.sector_margin = sector_bound(spec.n) - std::abs(std::arg(next));
            rec.iterations = it;
            if (rec.wronskian_residual > options.capture) {
                std::ostringstream msg;
                msg << "refine: iteration stalled at " << next << " with |W| = " << rec.wronskian_residual << '\n';
                throw ConvergenceError(msg.str() + trace.str());
            }
            return rec;
        }
    }
    std::ostringstream msg;
    msg << "refine: no convergence within " << options.max_iterations << " iterations from " << lambda0 << '\n';
    throw ConvergenceError(msg.str() + trace.str());
}

std::vector<EigenvalueRecord> find_eigenvalues(const PotentialSpec& spec, const SearchBox& box,
                                               const SearchOptions& options, int* total_count) {
    std::vector<EigenvalueRecord> found;
    const double half_angle = sector_bound(spec.n) + options.sector_slack;
    const int total = count_in_box(spec, box, options.count);
    if (total_count) *total_count = total;

    struct Pending {
        SearchBox box;
        int count;
        int depth;
    };
    std::vector<Pending> stack{{box, total, 0}};
    static constexpr double kFractions[] = {0.4871, 0.4371, 0.5413, 0.3917, 0.6089};

    while (!stack.empty() && found.size() < options.max_eigenvalues) {
        const Pending cur = stack.back();
        stack.pop_back();
        if (cur.count <= 0) continue;
        if (options.sector_prune && outside_sector(cur.box, half_angle)) continue;

        if (cur.count == 1) {
            const cplx seed{0.5 * (cur.box.re_lo + cur.box.re_hi), 0.5 * (cur.box.im_lo + cur.box.im_hi)};
            try {
                EigenvalueRecord rec = refine(spec, seed, options.refine);
                if (cur.box.contains(rec.lambda)) {
                    found.push_back(rec);
                    continue;
                }
            } catch (const ConvergenceError&) {
            }
        }
        if (cur.depth >= options.max_depth) {
            std::ostringstream msg;
            msg << "find_eigenvalues: subdivision depth exhausted near [" << cur.box.re_lo << ", " << cur.box.re_hi
                << "] x [" << cur.box.im_lo << ", " << cur.box.im_hi << "]";
            throw ConvergenceError(msg.str());
        }

        const double w = cur.box.re_hi - cur.box.re_lo, h = cur.box.im_hi - cur.box.im_lo;
        bool split_done = false;
        for (double f : kFractions) {
            SearchBox lo = cur.box, hi = cur.box;
            if (w >= h) {
                const double cut = cur.box.re_lo + f * w;
                lo.re_hi = cut;
                hi.re_lo = cut;
            } else {
                double cut = cur.box.im_lo + f * h;
                if (std::abs(cut) < 1e-3 * h) cut += 0.05 * h;
                lo.im_hi = cut;
                hi.im_lo = cut;
            }
            int c_lo = 0, c_hi = 0;
            try {
                c_lo = count_in_box(spec, lo, options.count);
                c_hi = count_in_box(spec, hi, options.count);
            } catch (const ContourError&) {
                continue;
            }
            if (c_lo + c_hi != cur.count) continue;
            stack.push_back({hi, c_hi, cur.depth + 1});
            stack.push_back({lo, c_lo, cur.depth + 1});
            split_done = true;
            break;
        }
        if (!split_done) {
            throw ContourError("find_eigenvalues: no consistent subdivision of a box with nonzero winding");
        }
    }

    std::sort(found.begin(), found.end(), [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
        return std::abs(a.lambda) < std::abs(b.lambda);
    });
    for (std::size_t i = 0; i < found.size(); ++i) found[i].index = static_cast<int>(i);
    std::sort(found.begin(), found.end(), [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return found;
}

SectorReport verify_sector(const EigenvalueRecord& record, int n, double tol) {
    SectorReport r;
    r.abs_arg = std::abs(std::arg(record.lambda));
    r.bound = sector_bound(n);
    r.margin = r.bound - r.abs_arg;
    r.violation = !(record.lambda.real() > 0.0) || r.margin < -tol;
    return r;
}

double sufficient_coefficient(int n, int k) {
    const double theta = kPi / (2.0 * (2 * n + 3));
    const double s = std::sin((2 * n - 2 * k) * theta);
    return s * s / (std::cos((2 * n - 2 * k + 1) * theta) * std::cos((2 * n - 2 * k - 1) * theta));
}

SufficientReport sufficient_condition(const PotentialSpec& spec) {
    spec.validate();
    const int n = spec.n;
    for (int k = 0; k <= n; ++k) {
        if (spec.a[k] < 0.0) {
            throw PreconditionError("sufficient_condition: requires nonnegative coefficients a_k");
        }
    }
    SufficientReport report;
    report.holds = true;
    for (int k = 0; k < n; ++k) {
        SufficientTerm t;
        t.k = k;
        t.coefficient = sufficient_coefficient(n, k);
        if (n == 1) {
            t.factor = 4.0;
        } else if (k == 0 || k == n - 1) {
            t.factor = 2.0;
        } else {
            t.factor = 1.0;
        }
        const double bk = spec.g * spec.b[k];
        t.lhs = t.coefficient * bk * bk;
        t.rhs = t.factor * spec.a[k] * spec.a[k + 1];
        t.holds = t.lhs <= t.rhs;
        report.holds = report.holds && t.holds;
        report.terms.push_back(t);
    }
    return report;
}

SignConditionReport sign_condition_check(const PotentialSpec& spec, int nr, int ntheta) {
    spec.validate();
    const int n = spec.n;
    const double theta_max = kPi / (2.0 * (2 * n + 3));
    auto f = [&](double r, double theta) {
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) acc += spec.a[k] * std::pow(r, 2 * k) * std::cos((2 * n - 2 * k + 1) * theta);
        return acc;
    };

    // Beyond r_max the top coefficient dominates every lower term.
    double r_max = 4.0;
    if (spec.a[n] > 0.0) {
        double lower = 0.0;
        for (int k = 0; k < n; ++k) lower += std::abs(spec.a[k]);
        r_max = std::max(1.0, 1.0 + std::sqrt(lower / (spec.a[n] * std::cos(theta_max))));
    }

    SignConditionReport rep;
    rep.r_max = r_max;
    rep.minimum = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nr; ++i) {
        const double r = r_max * i / (nr - 1);
        for (int j = 0; j < ntheta; ++j) {
            const double theta = -theta_max + 2.0 * theta_max * j / (ntheta - 1);
            const double v = f(r, theta);
            if (v < rep.minimum) {
                rep.minimum = v;
                rep.r_at_minimum = r;
                rep.theta_at_minimum = theta;
            }
        }
    }
    return rep;
}

double sign_condition_critical_c() {
    return std::sqrt(16.0 / 3.0 * std::cos(kPi / 18.0) * std::cos(5.0 * kPi / 18.0));
}

PotentialSpec shift_cubic(double a) {
    PotentialSpec spec;
    spec.n = 1;
    spec.a = {a * a * a, -3.0 * a};
    spec.b = {-3.0 * a * a, 1.0};
    return spec;
}

double conjugation_defect(const std::vector<EigenvalueRecord>& records) {
    double worst = 0.0;
    for (const auto& r : records) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : records) best = std::min(best, std::abs(r.lambda - std::conj(s.lambda)));
        worst = std::max(worst, best / std::max(1.0, std::abs(r.lambda)));
    }
    return worst;
}

}  // namespace ptspectra
