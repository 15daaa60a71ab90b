#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptspectra/eigenfunction_analysis.hpp"
#include "ptspectra/parallel.hpp"

namespace ptspectra {

namespace {

/// Multiplies a log-scaled state by c·e^{lc}.
SolutionState rescaled(SolutionState s, cplx c, double lc) {
    s.u *= c;
    s.du *= c;
    s.log_scale += lc;
    return s;
}

/// Factor c·e^{lc} minimizing |c·a − b| over (u, u′), and the relative defect.
struct MatchFactor {
    cplx c;
    double lc = 0.0;
    double defect = 0.0;
};

MatchFactor match_factor(const SolutionState& a, const SolutionState& b) {
    const double na = std::norm(a.u) + std::norm(a.du);
    MatchFactor m;
    m.c = (std::conj(a.u) * b.u + std::conj(a.du) * b.du) / na;
    m.lc = b.log_scale - a.log_scale;
    const double nb = std::sqrt(std::norm(b.u) + std::norm(b.du));
    m.defect = std::sqrt(std::norm(m.c * a.u - b.u) + std::norm(m.c * a.du - b.du)) / nb;
    return m;
}

IntegrateOptions grid_integrate_options(double tol) {
    IntegrateOptions o;
    o.tol = tol;
    // Waypoints sit one grid spacing apart; let the error control set the step.
    o.max_step_fraction = 1.0;
    return o;
}

/// Far end of row y on the side `side` (±1): at least `exponent` units of
/// WKB decay beyond x_edge, with a start point accepted by asymptotic_init.
double row_start(const PotentialSpec& spec, const Potential& pot, cplx lambda, double y, double x_edge, int side,
                 double exponent) {
    double x = std::max(x_edge, 0.0);
    double acc = 0.0;
    const double h = 0.02 * std::max(1.0, x_edge);
    auto rate = [&](double t) { return std::abs(std::sqrt(pot(cplx{side * t, y}) - lambda).real()); };
    double prev = rate(x);
    for (int k = 0; k < 1'000'000 && acc < exponent; ++k) {
        const double next = rate(x + h);
        acc += 0.5 * h * (prev + next);
        prev = next;
        x += h;
    }
    for (int attempt = 0; attempt < 200; ++attempt) {
        try {
            (void)asymptotic_init(spec, lambda, cplx{side * x, y});
            return x;
        } catch (const PreconditionError&) {
            x *= 1.05;
        }
    }
    std::ostringstream msg;
    msg << "build_grid: no admissible start point for the row at y = " << y;
    throw PreconditionError(msg.str());
}

[[noreturn]] void rethrow_at(const IntegrationError& e, const std::string& where) {
    throw IntegrationError("build_grid: " + where + ": " + e.what(), e.position());
}

}  // namespace

FieldGrid::FieldGrid(GridRect rect, int nx, int ny, std::shared_ptr<const std::vector<SolutionState>> samples,
                     FieldSource source)
    : rect_(rect), nx_(nx), ny_(ny), samples_(std::move(samples)), source_(std::move(source)) {
    if (nx_ < 2 || ny_ < 1) throw PreconditionError("FieldGrid: need nx >= 2 and ny >= 1");
    if (!(rect_.x_hi > rect_.x_lo)) throw PreconditionError("FieldGrid: empty x range");
    if (ny_ == 1 ? rect_.y_hi != rect_.y_lo : !(rect_.y_hi > rect_.y_lo)) {
        throw PreconditionError("FieldGrid: y range inconsistent with ny");
    }
    if (!samples_ || samples_->size() != static_cast<std::size_t>(nx_) * ny_) {
        throw PreconditionError("FieldGrid: sample count does not match the resolution");
    }
}

FieldGrid FieldGrid::from_function(GridRect rect, int nx, int ny, std::function<std::pair<cplx, cplx>(cplx)> f,
                                   std::function<cplx(cplx)> f2) {
    auto eval = [f](cplx z) {
        const auto [u, du] = f(z);
        return SolutionState{z, u, du, 0.0};
    };
    auto samples = std::make_shared<std::vector<SolutionState>>();
    samples->reserve(static_cast<std::size_t>(nx) * ny);
    const double dx = nx > 1 ? (rect.x_hi - rect.x_lo) / (nx - 1) : 0.0;
    const double dy = ny > 1 ? (rect.y_hi - rect.y_lo) / (ny - 1) : 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) samples->push_back(eval(cplx{rect.x_lo + i * dx, rect.y_lo + j * dy}));
    }
    FieldSource src{eval, [f2](cplx z, cplx) { return f2(z); }};
    return FieldGrid(rect, nx, ny, std::move(samples), std::move(src));
}

double FieldGrid::dx() const noexcept { return (rect_.x_hi - rect_.x_lo) / (nx_ - 1); }

double FieldGrid::dy() const noexcept { return ny_ > 1 ? (rect_.y_hi - rect_.y_lo) / (ny_ - 1) : 0.0; }

cplx FieldGrid::q_scaled(int i, int j) const {
    const SolutionState& s = at(i, j);
    return s.du * std::conj(s.u);
}

double FieldGrid::re_q(int i, int j) const { return q_scaled(i, j).real() * std::exp(2.0 * at(i, j).log_scale); }

double FieldGrid::im_q(int i, int j) const { return q_scaled(i, j).imag() * std::exp(2.0 * at(i, j).log_scale); }

FieldGrid build_grid(const PotentialSpec& spec, const EigenvalueRecord& record, GridRect rect, int nx, int ny,
                     const GridOptions& options) {
    spec.validate();
    const cplx lambda = record.lambda;
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
        throw PreconditionError("build_grid: non-finite eigenvalue");
    }
    if (nx < 2 || ny < 1) throw PreconditionError("build_grid: need nx >= 2 and ny >= 1");
    if (!(rect.x_hi > rect.x_lo) || (ny == 1 ? rect.y_hi != rect.y_lo : !(rect.y_hi > rect.y_lo))) {
        throw PreconditionError("build_grid: degenerate rectangle");
    }
    const Potential pot(spec);
    const IntegrateOptions iopt = grid_integrate_options(options.tol);
    const double dx = (rect.x_hi - rect.x_lo) / (nx - 1);
    const double dy = ny > 1 ? (rect.y_hi - rect.y_lo) / (ny - 1) : 0.0;
    auto xs = [&](int i) { return rect.x_lo + i * dx; };
    auto ys = [&](int j) { return rect.y_lo + j * dy; };
    const double x_edge = std::max(std::abs(rect.x_lo), std::abs(rect.x_hi));

    // Real axis: decaying solutions from ±L, matched at the origin.
    double L = options.L > 0.0 ? options.L : default_start_radius(spec, lambda);
    L = std::max(L, 1.1 * x_edge + 1.0);
    std::vector<cplx> left_pts{cplx{-L, 0.0}}, right_pts{cplx{L, 0.0}};
    std::vector<int> left_idx, right_idx;
    for (int i = 0; i < nx; ++i) {
        if (xs(i) < 0.0) {
            left_pts.emplace_back(xs(i), 0.0);
            left_idx.push_back(i);
        }
    }
    for (int i = nx - 1; i >= 0; --i) {
        if (xs(i) > 0.0) {
            right_pts.emplace_back(xs(i), 0.0);
            right_idx.push_back(i);
        }
    }
    left_pts.emplace_back(0.0, 0.0);
    right_pts.emplace_back(0.0, 0.0);

    IntegrationResult left, right;
    try {
        left = integrate(pot, lambda, ComplexPath(left_pts), asymptotic_init(spec, lambda, left_pts.front()), iopt);
        right = integrate(pot, lambda, ComplexPath(right_pts), asymptotic_init(spec, lambda, right_pts.front()), iopt);
    } catch (const IntegrationError& e) {
        rethrow_at(e, "real axis");
    }
    const SolutionState& l0 = left.final_state;
    const SolutionState& r0 = right.final_state;
    const double w = std::abs(l0.u * r0.du - l0.du * r0.u) /
                     ((std::abs(l0.u) + std::abs(l0.du)) * (std::abs(r0.u) + std::abs(r0.du)));
    if (!(w <= options.match_tolerance)) {
        std::ostringstream msg;
        msg << "build_grid: lambda = " << lambda << " does not satisfy both decay conditions; matching mismatch "
            << w << " at the origin exceeds " << options.match_tolerance;
        throw PreconditionError(msg.str());
    }

    const bool by_value = std::abs(l0.u) >= 1e-8 * std::abs(l0.du);
    auto normalizer = [&](const SolutionState& s) { return cplx{1.0, 0.0} / (by_value ? s.u : s.du); };
    const cplx cl = normalizer(l0), cr = normalizer(r0);
    SolutionState origin{cplx{}, cplx{}, cplx{}, 0.0};
    if (by_value) {
        origin.u = 1.0;
        origin.du = 0.5 * (l0.du * cl + r0.du * cr);
    } else {
        origin.u = 0.5 * (l0.u * cl + r0.u * cr);
        origin.du = 1.0;
    }

    std::vector<SolutionState> axis(nx);
    for (std::size_t k = 0; k < left_idx.size(); ++k) {
        axis[left_idx[k]] = rescaled(left.waypoint_states[k + 1], cl, -l0.log_scale);
    }
    for (std::size_t k = 0; k < right_idx.size(); ++k) {
        axis[right_idx[k]] = rescaled(right.waypoint_states[k + 1], cr, -r0.log_scale);
    }
    for (int i = 0; i < nx; ++i) {
        if (xs(i) == 0.0) axis[i] = origin;
    }

    auto samples = std::make_shared<std::vector<SolutionState>>(static_cast<std::size_t>(nx) * ny);
    auto& S = *samples;
    auto put = [&](int i, int j, SolutionState s) {
        s.z = cplx{xs(i), ys(j)};
        S[static_cast<std::size_t>(j) * nx + i] = s;
    };
    for (int j = 0; j < ny; ++j) {
        if (ys(j) == 0.0) {
            for (int i = 0; i < nx; ++i) put(i, j, axis[i]);
        }
    }

    const bool rows_only = options.fill == GridFill::rows;

    // Imaginary axis through the origin, for rows that are matched there.
    std::vector<SolutionState> imag_axis(ny);
    auto walk_axis = [&](int direction) {
        std::vector<cplx> pts{cplx{}};
        std::vector<int> idx;
        for (int k = 0; k < ny; ++k) {
            const int j = direction > 0 ? k : ny - 1 - k;
            const double y = ys(j);
            if (direction * y > 0.0) {
                pts.emplace_back(0.0, y);
                idx.push_back(j);
            }
        }
        if (idx.empty()) return;
        try {
            const IntegrationResult r = integrate(pot, lambda, ComplexPath(pts), origin, iopt);
            for (std::size_t k = 0; k < idx.size(); ++k) imag_axis[idx[k]] = r.waypoint_states[k + 1];
        } catch (const IntegrationError& e) {
            rethrow_at(e, "imaginary axis");
        }
    };
    walk_axis(-1);
    if (rows_only) walk_axis(+1);
    for (int j = 0; j < ny; ++j) {
        if (ys(j) == 0.0) imag_axis[j] = origin;
    }

    // Upper half plane: columns from the real axis.
    if (!rows_only && rect.y_hi > 0.0) {
        parallel_for(static_cast<std::size_t>(nx), [&](std::size_t ii) {
            const int i = static_cast<int>(ii);
            std::vector<cplx> pts{cplx{xs(i), 0.0}};
            std::vector<int> idx;
            for (int j = 0; j < ny; ++j) {
                if (ys(j) > 0.0) {
                    pts.emplace_back(xs(i), ys(j));
                    idx.push_back(j);
                }
            }
            SolutionState start = axis[i];
            start.z = pts.front();
            try {
                const IntegrationResult r = integrate(pot, lambda, ComplexPath(pts), start, iopt);
                for (std::size_t k = 0; k < idx.size(); ++k) put(i, idx[k], r.waypoint_states[k + 1]);
            } catch (const IntegrationError& e) {
                std::ostringstream where;
                where << "column x = " << xs(i);
                rethrow_at(e, where.str());
            }
        });
    }

    // Rows from their far ends, matched to the imaginary axis.
    std::vector<int> row_list;
    for (int j = 0; j < ny; ++j) {
        if (ys(j) < 0.0 || (rows_only && ys(j) > 0.0)) row_list.push_back(j);
    }
    std::vector<double> defects(row_list.size(), 0.0);
    parallel_for(row_list.size(), [&](std::size_t r) {
        const int j = row_list[r];
        const double y = ys(j);
        const cplx iy{0.0, y};
        double defect = 0.0;
        for (int side : {-1, +1}) {
            const double X = row_start(spec, pot, lambda, y, x_edge, side, options.row_decay_exponent);
            std::vector<cplx> pts{cplx{side * X, y}};
            std::vector<int> idx;
            for (int k = 0; k < nx; ++k) {
                const int i = side < 0 ? k : nx - 1 - k;
                if (side * xs(i) > 0.0) {
                    pts.emplace_back(xs(i), y);
                    idx.push_back(i);
                }
            }
            pts.push_back(iy);
            try {
                const IntegrationResult res =
                    integrate(pot, lambda, ComplexPath(pts), asymptotic_init(spec, lambda, pts.front()), iopt);
                const MatchFactor m = match_factor(res.final_state, imag_axis[j]);
                defect = std::max(defect, m.defect);
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    put(idx[k], j, rescaled(res.waypoint_states[k + 1], m.c, m.lc));
                }
            } catch (const IntegrationError& e) {
                std::ostringstream where;
                where << "row y = " << y;
                rethrow_at(e, where.str());
            }
        }
        for (int i = 0; i < nx; ++i) {
            if (xs(i) == 0.0) put(i, j, imag_axis[j]);
        }
        defects[r] = defect;
    });

    const GridRect grect = rect;
    const std::shared_ptr<const std::vector<SolutionState>> shared = samples;
    const double tol = options.tol;
    auto probe = [shared, grect, nx, ny, dx, dy, pot, lambda, tol](cplx z) {
        const int i = std::clamp(static_cast<int>(std::lround((z.real() - grect.x_lo) / dx)), 0, nx - 1);
        const int j = ny > 1 ? std::clamp(static_cast<int>(std::lround((z.imag() - grect.y_lo) / dy)), 0, ny - 1) : 0;
        SolutionState s = (*shared)[static_cast<std::size_t>(j) * nx + i];
        if (s.z == z) return s;
        IntegrateOptions o;
        o.tol = tol;
        return integrate(pot, lambda, ComplexPath::segment(s.z, z), s, o).final_state;
    };
    auto second = [pot, lambda](cplx z, cplx u) { return (pot(z) - lambda) * u; };

    FieldGrid grid(rect, nx, ny, shared, FieldSource{probe, second});
    grid.spec_ = spec;
    grid.lambda_ = lambda;
    grid.origin_mismatch_ = w;
    grid.seam_defect_ = defects.empty() ? 0.0 : *std::max_element(defects.begin(), defects.end());
    return grid;
}

}  // namespace ptspectra
