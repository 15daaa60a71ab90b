#include "ptspectra/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "ptspectra/ortho_poly.hpp"

namespace ptspectra {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
public:
    explicit Stopwatch(RunReport& r, std::string name) : r_(r), name_(std::move(name)) {}
    ~Stopwatch() {
        r_.timings[name_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    RunReport& r_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

RunReport start(const std::string& command, const RunConfig& config) {
    RunReport r;
    r.command = command;
    r.config = to_json(config);
    return r;
}

/// Writes one artifact and records its path.
void emit(RunReport& r, const RunConfig& c, const std::string& name, const std::string& content) {
    const fs::path p = fs::path(c.output.directory) / name;
    write_atomic(p, content);
    r.artifacts.push_back(p.string());
}

RunReport& finish(RunReport& r, const RunConfig& c, std::ostream& log) {
    if (c.wants("json")) {
        const fs::path p = fs::path(c.output.directory) / "report.json";
        r.artifacts.push_back(p.string());
        save_report(p, r);
    }
    for (const auto& e : r.errors) log << "error: " << e << '\n';
    log << r.command << ": " << r.checks.size() << " checks, " << r.violations() << " violations, exit "
        << r.exit_code() << '\n';
    return r;
}

CheckSummary summary(std::string id, long checked, long violations, double margin, std::string note = {}) {
    CheckSummary s;
    s.id = std::move(id);
    s.checked = checked;
    s.violations = violations;
    s.worst_margin = margin;
    s.note = std::move(note);
    return s;
}

CheckSummary not_applicable(std::string id, std::string note) {
    CheckSummary s;
    s.id = std::move(id);
    s.applicable = false;
    s.note = std::move(note);
    return s;
}

std::vector<EigenvalueRecord> by_modulus(std::vector<EigenvalueRecord> v) {
    std::stable_sort(v.begin(), v.end(), [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
        const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
        if (ma != mb) return ma < mb;
        return std::make_pair(a.lambda.real(), a.lambda.imag()) < std::make_pair(b.lambda.real(), b.lambda.imag());
    });
    for (std::size_t i = 0; i < v.size(); ++i) v[i].index = static_cast<int>(i);
    return v;
}

CheckSummary sector_summary(const std::vector<EigenvalueRecord>& records, int n) {
    CheckSummary s = summary("sector_bound", static_cast<long>(records.size()), 0, HUGE_VAL);
    for (const auto& r : records) {
        const SectorReport rep = verify_sector(r, n);
        s.worst_margin = std::min(s.worst_margin, rep.margin);
        if (rep.violation) ++s.violations;
    }
    return s;
}

}  // namespace

const EigenvalueRecord& select_eigenvalue(const std::vector<EigenvalueRecord>& records, int index) {
    if (records.empty()) {
        throw PreconditionError("no eigenvalues given; run `ptspectra spectrum` first and pass --eigenvalues");
    }
    if (index < 0 || static_cast<std::size_t>(index) >= records.size()) {
        std::ostringstream msg;
        msg << "eigenvalue index " << index << " is not available; " << records.size() << " eigenvalues were given";
        throw PreconditionError(msg.str());
    }
    static thread_local std::vector<EigenvalueRecord> sorted;
    sorted = by_modulus(records);
    return sorted[static_cast<std::size_t>(index)];
}

// --------------------------------------------------------------- spectrum

RunReport cmd_spectrum(const RunConfig& config, std::ostream& log) {
    RunReport r = start("spectrum", config);
    std::vector<EigenvalueRecord> found;
    try {
        const PotentialSpec spec = config.spec();
        const SearchOptions opt = config.search_options();
        const SearchBox& box = config.solver.box;
        const int strips = std::max(1, static_cast<int>(std::ceil((box.re_hi - box.re_lo) / config.solver.strip_width)));
        const double w = (box.re_hi - box.re_lo) / strips;
        Stopwatch sw(r, "search");
        double left = box.re_lo;
        for (int k = 0; k < strips; ++k) {
            const bool last = k + 1 == strips;
            bool done = false;
            for (int attempt = 0; attempt < 4 && !done; ++attempt) {
                // An eigenvalue on a strip edge breaks the count; nudge the
                // shared edge and retry.
                const double right = last ? box.re_hi : box.re_lo + (k + 1) * w + 0.0173 * attempt * w;
                SearchBox strip = box;
                strip.re_lo = left;
                strip.re_hi = right;
                try {
                    auto part = find_eigenvalues(spec, strip, opt);
                    found.insert(found.end(), part.begin(), part.end());
                    left = right;
                    done = true;
                } catch (const ContourError& e) {
                    if (last || attempt == 3) {
                        std::ostringstream msg;
                        msg << "strip Re λ ∈ [" << strip.re_lo << ", " << strip.re_hi << "]: " << e.what();
                        r.errors.push_back(msg.str());
                        left = right;
                        done = true;
                    }
                } catch (const Error& e) {
                    std::ostringstream msg;
                    msg << "strip Re λ ∈ [" << strip.re_lo << ", " << strip.re_hi << "]: " << e.what();
                    r.errors.push_back(msg.str());
                    left = right;
                    done = true;
                }
            }
        }
        r.eigenvalues = by_modulus(found);
        if (r.eigenvalues.size() > config.solver.max_eigenvalues) r.eigenvalues.resize(config.solver.max_eigenvalues);
        r.checks.push_back(sector_summary(r.eigenvalues, spec.n));
        r.checks.push_back(summary("eigenvalue_conjugation", static_cast<long>(r.eigenvalues.size()), 0, HUGE_VAL));
        if (!r.eigenvalues.empty()) {
            const double d = conjugation_defect(r.eigenvalues);
            r.checks.back().worst_margin = 1e-8 - d;
            r.checks.back().violations = d > 1e-8 ? 1 : 0;
        }

        log << std::setw(4) << "k" << std::setw(22) << "Re lambda" << std::setw(14) << "Im lambda" << std::setw(12)
            << "|arg|" << std::setw(12) << "bound" << std::setw(12) << "margin" << "  real\n";
        json table = json::array();
        for (const auto& e : r.eigenvalues) {
            const SectorReport s = verify_sector(e, spec.n);
            const bool real = std::abs(e.lambda.imag()) < 1e-8;
            log << std::setw(4) << e.index << std::setw(22) << std::setprecision(15) << e.lambda.real()
                << std::setw(14) << std::setprecision(3) << e.lambda.imag() << std::setw(12) << std::setprecision(6)
                << s.abs_arg << std::setw(12) << s.bound << std::setw(12) << s.margin << "  " << (real ? "yes" : "no")
                << (s.violation ? "  SECTOR VIOLATION" : "") << '\n';
            table.push_back({{"index", e.index}, {"real", real}, {"abs_arg", s.abs_arg}, {"bound", s.bound}});
        }
        r.extra["sector_table"] = table;
        if (config.wants("json")) {
            const fs::path p = fs::path(config.output.directory) / "eigenvalues.json";
            save_eigenvalues(p, config.potential, r.eigenvalues);
            r.artifacts.push_back(p.string());
        }
    } catch (const Error& e) {
        r.errors.push_back(e.what());
    }
    return finish(r, config, log);
}

// ------------------------------------------------------------------ zeros

RunReport cmd_zeros(const RunConfig& config, const std::vector<EigenvalueRecord>& eigenvalues, std::ostream& log) {
    RunReport r = start("zeros", config);
    try {
        const PotentialSpec spec = config.spec();
        const EigenvalueRecord& rec = select_eigenvalue(eigenvalues, config.verification.eigenvalue_index);
        r.eigenvalues = {rec};
        const GridBlock& g = config.grid;
        GridOptions go;
        go.fill = g.fill;
        go.L = config.solver.L;
        std::optional<FieldGrid> grid;
        {
            Stopwatch sw(r, "grid");
            grid.emplace(build_grid(spec, rec, g.rect, g.nx, g.ny, go));
        }
        std::vector<ZeroRecord> zeros;
        {
            Stopwatch sw(r, "zeros");
            zeros = find_zeros(*grid);
        }
        json list = json::array();
        long nu = 0, ndu = 0;
        for (const auto& z : zeros) {
            (z.which == ZeroKind::zero_of_u ? nu : ndu)++;
            json item = {{"kind", std::string(to_string(z.which))},
                         {"z", {z.z.real(), z.z.imag()}},
                         {"winding", z.winding}};
            if (z.regions) {
                item["a_region"] = std::string(to_string(z.regions->a_region));
                item["b_region"] = std::string(to_string(z.regions->b_region));
            }
            list.push_back(item);
        }
        r.extra["zeros"] = list;
        r.extra["seam_defect"] = grid->seam_defect();
        log << "lambda = " << std::setprecision(15) << rec.lambda << "\n"
            << nu << " zeros of u and " << ndu << " zeros of u' in [" << g.rect.x_lo << ", " << g.rect.x_hi << "] x ["
            << g.rect.y_lo << ", " << g.rect.y_hi << "]\n";
        for (const auto& z : zeros) {
            log << "  " << std::setw(3) << to_string(z.which) << std::setprecision(12) << std::setw(20) << z.z.real()
                << std::setw(20) << z.z.imag() << '\n';
        }
        if (config.wants("csv")) {
            emit(r, config, "zeros.csv", zeros_csv(zeros));
            emit(r, config, "field.csv", field_csv(*grid));
        }
    } catch (const Error& e) {
        r.errors.push_back(e.what());
    }
    return finish(r, config, log);
}

// ---------------------------------------------------------------- regions

RunReport cmd_regions(const RunConfig& config, cplx lambda, std::ostream& log) {
    RunReport r = start("regions", config);
    try {
        const GridBlock& g = config.grid;
        const std::string csv = regions_csv(lambda, g.rect, g.nx, g.ny);
        const auto segments = std::count(csv.begin(), csv.end(), '\n') - 1;
        const auto tp = cubic_turning_points(lambda);
        json tps = json::array();
        for (cplx t : tp) tps.push_back({t.real(), t.imag()});
        r.extra["lambda"] = {lambda.real(), lambda.imag()};
        r.extra["turning_points"] = tps;
        r.extra["segments"] = segments;
        log << "level curves of iz^3 - lambda for lambda = " << lambda << ": " << segments << " segments\n";
        if (config.wants("csv")) emit(r, config, "regions.csv", csv);
    } catch (const Error& e) {
        r.errors.push_back(e.what());
    }
    return finish(r, config, log);
}

// ------------------------------------------------------------------ ortho

RunReport cmd_ortho(const RunConfig& config, const OrthoRequest& request,
                    const std::optional<std::vector<EigenvalueRecord>>& eigenvalues, std::ostream& log) {
    RunReport r = start("ortho", config);
    try {
        std::vector<std::pair<std::string, BivariatePoly>> polys;
        if (request.recipes.empty()) {
            for (auto& g : enumerate_family(request.depth, request.degree_cap)) polys.emplace_back(g.recipe, g.poly);
        } else {
            for (const auto& s : request.recipes) polys.emplace_back(s, apply_recipe(s));
        }
        json list = json::array();
        for (const auto& [name, p] : polys) list.push_back({{"recipe", name}, {"poly", p.to_string()}});

        if (eigenvalues) {
            const PotentialSpec spec = config.spec();
            if (!is_pure_cubic(spec)) throw PreconditionError("ortho: the family is stated for V = iz^3");
            const EigenvalueRecord& rec = select_eigenvalue(*eigenvalues, config.verification.eigenvalue_index);
            r.eigenvalues = {rec};
            const GridBlock& g = config.verification.rows_grid;
            GridOptions go;
            go.fill = g.fill;
            Stopwatch sw(r, "orthogonality");
            const FieldGrid grid = build_grid(spec, rec, g.rect, g.nx, g.ny, go);
            std::vector<BivariatePoly> ps;
            for (const auto& [name, p] : polys) ps.push_back(p);
            const auto res = orthogonality_batch(ps, grid, request.y_values);
            CheckSummary s = summary("orthogonality", 0, 0, HUGE_VAL);
            for (std::size_t k = 0; k < polys.size(); ++k) {
                json rows = json::array();
                double worst = 0.0;
                for (const auto& o : res[k]) {
                    rows.push_back({{"y", o.y}, {"residual", o.residual}});
                    worst = std::max(worst, o.residual);
                    ++s.checked;
                    if (!(o.residual < config.verification.ortho_tol)) ++s.violations;
                    s.worst_margin = std::min(s.worst_margin, config.verification.ortho_tol - o.residual);
                }
                list[k]["residuals"] = rows;
                log << std::setw(28) << std::left << polys[k].first << std::right << " degree "
                    << std::setw(2) << polys[k].second.total_degree() << "  worst residual " << std::setprecision(3)
                    << worst << '\n';
            }
            r.checks.push_back(s);
        } else {
            for (const auto& [name, p] : polys) log << name << " = " << p.to_string() << '\n';
        }
        r.extra["polynomials"] = list;
    } catch (const Error& e) {
        r.errors.push_back(e.what());
    }
    return finish(r, config, log);
}

// ----------------------------------------------------------------- stokes

RunReport cmd_stokes(const RunConfig& config, std::ostream& log) {
    RunReport r = start("stokes", config);
    try {
        const int n = config.potential.n;
        const auto t = critical_angles(n);
        json angles = json::array();
        log << "critical rays of -(iz)^" << 2 * n + 1 << ":\n";
        for (double a : t) {
            angles.push_back(a);
            log << "  " << std::setprecision(12) << a << "  (" << a / kPi << " pi)\n";
        }
        r.extra["angles"] = angles;
        if (config.wants("csv")) {
            emit(r, config, "stokes_angles.csv", stokes_angles_csv(n));
            emit(r, config, "stokes_rays.csv", stokes_rays_csv(n, 10.0));
        }
    } catch (const Error& e) {
        r.errors.push_back(e.what());
    }
    return finish(r, config, log);
}

// ----------------------------------------------------------------- verify

namespace {

bool enabled(const RunConfig& c, const std::string& suite) {
    const auto& s = c.verification.suites;
    return std::find(s.begin(), s.end(), suite) != s.end();
}

std::vector<cplx> random_path(std::mt19937& rng, const GridRect& rect) {
    const double mx = 0.1 * (rect.x_hi - rect.x_lo), my = 0.1 * (rect.y_hi - rect.y_lo);
    std::uniform_real_distribution<double> ux(rect.x_lo + mx, rect.x_hi - mx), uy(rect.y_lo + my, rect.y_hi - my);
    std::uniform_int_distribution<int> count(2, 4);
    std::vector<cplx> pts(static_cast<std::size_t>(count(rng)));
    for (cplx& p : pts) p = {ux(rng), uy(rng)};
    return pts;
}

void run_green(RunReport& r, const RunConfig& c, const FieldGrid& grid) {
    std::mt19937 rng(c.verification.seed);
    CheckSummary s = summary("green_transform", 0, 0, HUGE_VAL);
    json paths = json::array();
    for (int k = 0; k < c.verification.green_paths; ++k) {
        const auto pts = random_path(rng, grid.rect());
        const GreenResidual g = green_residual(grid, pts);
        const double worst = std::max(g.real_residual, g.imag_residual);
        ++s.checked;
        if (!(worst < c.verification.green_tol)) ++s.violations;
        s.worst_margin = std::min(s.worst_margin, c.verification.green_tol - worst);
        json wp = json::array();
        for (cplx p : pts) wp.push_back({p.real(), p.imag()});
        paths.push_back({{"waypoints", wp}, {"real_residual", g.real_residual}, {"imag_residual", g.imag_residual}});
    }
    r.checks.push_back(s);
    r.extra["green_paths"] = paths;
}

void run_census(RunReport& r, const RunConfig& c, const FieldGrid& grid) {
    const auto zeros = find_zeros(grid);
    std::vector<double> heights = c.verification.census_heights;
    if (heights.empty()) heights = {0.6 * grid.rect().y_hi, grid.rect().y_hi};
    const ZeroCensus z = zero_census(grid, zeros, heights);
    const long total = static_cast<long>(zeros.size());
    r.checks.push_back(summary("zeros_upper_half_plane", z.upper_u_zeros, z.misplaced_upper, HUGE_VAL));
    r.checks.push_back(summary("zeros_in_certified_regions", total, z.in_certified, HUGE_VAL));
    r.checks.push_back(summary("zeros_lower_half_plane", z.lower_zeros, z.misplaced_lower, HUGE_VAL));
    r.checks.push_back(summary("zero_ordering_lower_half_plane", z.lower_zeros, z.ordering_violations, HUGE_VAL));
    r.checks.push_back(summary("zero_count_grows_with_height", 1, z.count_grows ? 0 : 1, HUGE_VAL,
                               "finite-window proxy for infinitely many zeros"));
    r.checks.push_back(summary("zero_separation", total, z.min_separation > 1e-6 ? 0 : 1, z.min_separation - 1e-6));
    if (z.axis_rule_applicable) {
        r.checks.push_back(summary("zeros_axis_sign_rule", z.upper_u_zeros, z.axis_rule_violations, HUGE_VAL));
    } else {
        r.checks.push_back(not_applicable("zeros_axis_sign_rule", "requires non-real lambda"));
    }
    json counts = json::array();
    for (const auto& [h, n] : z.counts_by_height) counts.push_back({{"height", h}, {"u_zeros", n}});
    r.extra["zero_counts"] = counts;
    r.extra["zero_total"] = total;
}

void run_convexity(RunReport& r, const FieldGrid& rows) {
    const ConvexityReport cv = convexity_check(rows);
    const long n = static_cast<long>(cv.F.size());
    r.checks.push_back(summary("convexity_second_difference", n - 2, cv.worst_second_difference >= -1e-8 ? 0 : 1,
                               cv.worst_second_difference + 1e-8));
    r.checks.push_back(summary("convexity_second_derivative_identity", n - 4,
                               cv.second_derivative_mismatch <= 1e-4 ? 0 : 1, 1e-4 - cv.second_derivative_mismatch));
    r.extra["convexity"] = {{"worst_tail", cv.worst_tail}, {"mismatch", cv.second_derivative_mismatch}};
}

void run_ortho(RunReport& r, const RunConfig& c, const FieldGrid& rows) {
    const auto fam = enumerate_family(c.verification.ortho_depth, c.verification.ortho_degree_cap);
    std::vector<BivariatePoly> ps;
    for (const auto& g : fam) ps.push_back(g.poly);
    const auto res = orthogonality_batch(ps, rows, c.verification.ortho_y_values);
    CheckSummary s = summary("orthogonality", 0, 0, HUGE_VAL);
    for (const auto& per : res) {
        for (const auto& o : per) {
            ++s.checked;
            if (!(o.residual < c.verification.ortho_tol)) ++s.violations;
            s.worst_margin = std::min(s.worst_margin, c.verification.ortho_tol - o.residual);
        }
    }
    r.checks.push_back(s);
}

}  // namespace

RunReport cmd_verify(const RunConfig& config, const std::vector<EigenvalueRecord>& eigenvalues, std::ostream& log) {
    RunReport r = start("verify", config);
    try {
        const PotentialSpec spec = config.spec();
        const EigenvalueRecord& rec = select_eigenvalue(eigenvalues, config.verification.eigenvalue_index);
        r.eigenvalues = {rec};
        const bool cubic = is_pure_cubic(spec) && rec.lambda.real() > 0.0;
        const std::string why = "the region results are stated for V = iz^3 with Re lambda > 0";

        const GridBlock& g = config.grid;
        GridOptions go;
        go.fill = g.fill;
        go.L = config.solver.L;
        std::optional<FieldGrid> grid;
        {
            Stopwatch sw(r, "grid");
            grid.emplace(build_grid(spec, rec, g.rect, g.nx, g.ny, go));
        }
        std::optional<FieldGrid> rows;
        auto rows_grid = [&]() -> const FieldGrid& {
            if (!rows) {
                const GridBlock& rg = config.verification.rows_grid;
                GridOptions ro;
                ro.fill = rg.fill;
                ro.L = config.solver.L;
                Stopwatch sw(r, "rows_grid");
                rows.emplace(build_grid(spec, rec, rg.rect, rg.nx, rg.ny, ro));
            }
            return *rows;
        };
        auto guarded = [&](const std::string& suite, auto&& body) {
            if (!enabled(config, suite)) return;
            Stopwatch sw(r, suite);
            try {
                body();
            } catch (const Error& e) {
                r.errors.push_back(suite + ": " + e.what());
            }
        };

        guarded("sector", [&] { r.checks.push_back(sector_summary(eigenvalues, spec.n)); });
        guarded("green", [&] { run_green(r, config, *grid); });
        guarded("signs", [&] {
            if (!cubic) return r.checks.push_back(not_applicable("sign_fields", why));
            for (auto& s : verify_sign_theorems(*grid)) r.checks.push_back(s);
        });
        guarded("monotonicity", [&] {
            if (!cubic) return r.checks.push_back(not_applicable("monotonicity", why));
            for (auto& s : verify_monotonicity(*grid)) r.checks.push_back(s);
        });
        guarded("census", [&] {
            if (!cubic) return r.checks.push_back(not_applicable("zero_census", why));
            run_census(r, config, *grid);
        });
        guarded("symmetry", [&] {
            if (!effectively_real(rec.lambda)) {
                return r.checks.push_back(not_applicable("pt_symmetry", "requires real lambda"));
            }
            const GridRect& gr = grid->rect();
            if (std::abs(gr.x_lo + gr.x_hi) > 1e-12 * (gr.x_hi - gr.x_lo)) {
                return r.checks.push_back(not_applicable("pt_symmetry", "grid is not symmetric about Re z = 0"));
            }
            const SymmetryReport s = pt_symmetry_residual(*grid);
            r.checks.push_back(summary("pt_symmetry", s.checked, s.max_relative_error < 1e-6 ? 0 : 1,
                                       1e-6 - s.max_relative_error));
            const double d = conjugation_defect(eigenvalues);
            r.checks.push_back(summary("eigenvalue_conjugation", static_cast<long>(eigenvalues.size()),
                                       d <= 1e-8 ? 0 : 1, 1e-8 - d));
        });
        guarded("convexity", [&] { run_convexity(r, rows_grid()); });
        guarded("ortho", [&] {
            if (!is_pure_cubic(spec)) return r.checks.push_back(not_applicable("orthogonality", why));
            run_ortho(r, config, rows_grid());
        });

        log << std::left << std::setw(44) << "check" << std::right << std::setw(10) << "checked" << std::setw(12)
            << "violations" << std::setw(14) << "worst margin\n";
        for (const auto& c : r.checks) {
            log << std::left << std::setw(44) << c.id << std::right;
            if (!c.applicable) {
                log << "  not applicable (" << c.note << ")\n";
                continue;
            }
            log << std::setw(10) << c.checked << std::setw(12) << c.violations << std::setw(14) << std::setprecision(3)
                << c.worst_margin << '\n';
        }
    } catch (const Error& e) {
        r.errors.push_back(e.what());
    }
    return finish(r, config, log);
}

}  // namespace ptspectra
