#include "ptspectra/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace ptspectra {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- numbers

json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
        if (s == "nan") return std::nan("");
    }
    throw SchemaError("expected a number, got " + j.dump());
}

namespace {

/// Reads one JSON object, tracking the field path for diagnostics and
/// rejecting keys nobody asked for.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    /// Rejects every key that was not read.
    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!used_.count(k)) fail(where(k), "unknown field");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void read(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        out = convert<T>(j_.at(key), where(key));
    }

    const json* child(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw SchemaError("config field '" + path + "': " + what);
    }

    template <class T>
    static T convert(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, double>) {
            try {
                return number_from_json(v);
            } catch (const SchemaError&) {
                fail(path, "expected a number");
            }
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(path, "expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(path, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(path, "expected a string");
            return v.get<std::string>();
        } else {
            if (!v.is_array()) fail(path, "expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
            }
            return out;
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void read_rect(const json& j, const std::string& path, GridRect& r) {
    const auto v = Reader::convert<std::vector<double>>(j, path);
    if (v.size() != 4) Reader::fail(path, "expected [x_lo, x_hi, y_lo, y_hi]");
    r = {v[0], v[1], v[2], v[3]};
    if (!(r.x_hi > r.x_lo) || !(r.y_hi >= r.y_lo)) Reader::fail(path, "empty rectangle");
}

void read_grid(const json& j, const std::string& path, GridBlock& g) {
    Reader r(j, path);
    if (const json* rect = r.child("rect")) read_rect(*rect, r.where("rect"), g.rect);
    r.read("nx", g.nx);
    r.read("ny", g.ny);
    std::string fill = g.fill == GridFill::rows ? "rows" : "hybrid";
    r.read("fill", fill);
    if (fill == "rows") {
        g.fill = GridFill::rows;
    } else if (fill == "hybrid") {
        g.fill = GridFill::hybrid;
    } else {
        Reader::fail(r.where("fill"), "expected \"hybrid\" or \"rows\"");
    }
    r.finish();
    if (g.nx < 9 || g.ny < 9) Reader::fail(path, "nx and ny must be at least 9");
}

json grid_to_json(const GridBlock& g) {
    return {{"rect", {g.rect.x_lo, g.rect.x_hi, g.rect.y_lo, g.rect.y_hi}},
            {"nx", g.nx},
            {"ny", g.ny},
            {"fill", g.fill == GridFill::rows ? "rows" : "hybrid"}};
}

void require_positive(double v, const std::string& path) {
    if (!(v > 0.0)) Reader::fail(path, "must be positive");
}

void read_potential(const json& j, const std::string& path, PotentialBlock& p) {
    Reader r(j, path);
    r.read("n", p.n);
    r.read("a", p.a);
    r.read("b", p.b);
    r.read("g", p.g);
    r.read("shift_imag", p.shift_imag);
    r.finish();
    if (p.n < 1) Reader::fail(r.where("n"), "must be at least 1");
    if (p.a.empty() != p.b.empty()) Reader::fail(path, "give both a and b, or neither");
}

json potential_to_json(const PotentialBlock& p) {
    return {{"n", p.n}, {"a", p.a}, {"b", p.b}, {"g", p.g}, {"shift_imag", p.shift_imag}};
}

}  // namespace

// ----------------------------------------------------------------- config

PotentialSpec RunConfig::spec() const {
    PotentialSpec s = PotentialSpec::canonical(potential.n);
    // A missing list keeps its canonical value.
    if (!potential.a.empty()) s.a = potential.a;
    if (!potential.b.empty()) s.b = potential.b;
    s.g = potential.g;
    s.xi = {0.0, potential.shift_imag};
    s.validate();
    return s;
}

SearchOptions RunConfig::search_options() const {
    SearchOptions o;
    o.count.shooting.L = solver.L;
    o.count.shooting.tol = solver.tol;
    o.refine.shooting = o.count.shooting;
    o.sector_prune = solver.sector_prune;
    o.sector_slack = solver.sector_slack;
    o.max_eigenvalues = solver.max_eigenvalues;
    return o;
}

bool RunConfig::wants(const std::string& format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Reader top(j, "");
    if (const json* p = top.child("potential")) read_potential(*p, "potential", c.potential);
    if (const json* s = top.child("solver")) {
        Reader r(*s, "solver");
        r.read("L", c.solver.L);
        r.read("tol", c.solver.tol);
        if (const json* box = r.child("box")) {
            const auto v = Reader::convert<std::vector<double>>(*box, "solver.box");
            if (v.size() != 4) Reader::fail("solver.box", "expected [re_lo, re_hi, im_lo, im_hi]");
            c.solver.box.re_lo = v[0];
            c.solver.box.re_hi = v[1];
            c.solver.box.im_lo = v[2];
            c.solver.box.im_hi = v[3];
            if (c.solver.box.degenerate()) Reader::fail("solver.box", "empty box");
        }
        r.read("samples_per_edge", c.solver.box.samples_per_edge);
        r.read("max_eigenvalues", c.solver.max_eigenvalues);
        r.read("sector_prune", c.solver.sector_prune);
        r.read("sector_slack", c.solver.sector_slack);
        r.read("strip_width", c.solver.strip_width);
        r.finish();
        require_positive(c.solver.tol, "solver.tol");
        require_positive(c.solver.strip_width, "solver.strip_width");
        if (c.solver.sector_slack < 0.0) Reader::fail("solver.sector_slack", "must be nonnegative");
        if (c.solver.box.samples_per_edge < 2) Reader::fail("solver.samples_per_edge", "must be at least 2");
    }
    if (const json* g = top.child("grid")) read_grid(*g, "grid", c.grid);
    if (const json* v = top.child("verification")) {
        Reader r(*v, "verification");
        r.read("suites", c.verification.suites);
        static const std::set<std::string> known{"green", "signs", "monotonicity", "convexity",
                                                 "census", "symmetry", "ortho", "sector"};
        for (const auto& s : c.verification.suites) {
            if (!known.count(s)) Reader::fail("verification.suites", "unknown suite \"" + s + "\"");
        }
        r.read("eigenvalue_index", c.verification.eigenvalue_index);
        r.read("green_paths", c.verification.green_paths);
        r.read("seed", c.verification.seed);
        r.read("green_tol", c.verification.green_tol);
        if (const json* g = r.child("rows_grid")) read_grid(*g, "verification.rows_grid", c.verification.rows_grid);
        r.read("census_heights", c.verification.census_heights);
        r.read("ortho_depth", c.verification.ortho_depth);
        r.read("ortho_degree_cap", c.verification.ortho_degree_cap);
        r.read("ortho_y_values", c.verification.ortho_y_values);
        r.read("ortho_tol", c.verification.ortho_tol);
        r.finish();
        require_positive(c.verification.green_tol, "verification.green_tol");
        require_positive(c.verification.ortho_tol, "verification.ortho_tol");
        if (c.verification.eigenvalue_index < 0) Reader::fail("verification.eigenvalue_index", "must be nonnegative");
        if (c.verification.green_paths < 0) Reader::fail("verification.green_paths", "must be nonnegative");
        if (c.verification.ortho_depth < 0) Reader::fail("verification.ortho_depth", "must be nonnegative");
    }
    if (const json* o = top.child("output")) {
        Reader r(*o, "output");
        r.read("directory", c.output.directory);
        r.read("formats", c.output.formats);
        r.finish();
        for (const auto& f : c.output.formats) {
            if (f != "json" && f != "csv") Reader::fail("output.formats", "unknown format \"" + f + "\"");
        }
    }
    top.finish();
    try {
        (void)c.spec();
    } catch (const PreconditionError& e) {
        Reader::fail("potential", e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    const auto& s = c.solver;
    const auto& v = c.verification;
    return {{"potential", potential_to_json(c.potential)},
            {"solver",
             {{"L", s.L},
              {"tol", s.tol},
              {"box", {s.box.re_lo, s.box.re_hi, s.box.im_lo, s.box.im_hi}},
              {"samples_per_edge", s.box.samples_per_edge},
              {"max_eigenvalues", s.max_eigenvalues},
              {"sector_prune", s.sector_prune},
              {"sector_slack", s.sector_slack},
              {"strip_width", s.strip_width}}},
            {"grid", grid_to_json(c.grid)},
            {"verification",
             {{"suites", v.suites},
              {"eigenvalue_index", v.eigenvalue_index},
              {"green_paths", v.green_paths},
              {"seed", v.seed},
              {"green_tol", v.green_tol},
              {"rows_grid", grid_to_json(v.rows_grid)},
              {"census_heights", v.census_heights},
              {"ortho_depth", v.ortho_depth},
              {"ortho_degree_cap", v.ortho_degree_cap},
              {"ortho_y_values", v.ortho_y_values},
              {"ortho_tol", v.ortho_tol}}},
            {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t at = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(at), '\n');
        const std::size_t nl = text.rfind('\n', at == 0 ? 0 : at - 1);
        const std::size_t column = nl == std::string::npos ? at + 1 : at - nl;
        std::ostringstream msg;
        msg << path.string() << ":" << line << ":" << column << ": JSON syntax error";
        throw SchemaError(msg.str());
    }
}

void require_schema(const json& j, const fs::path& path) {
    if (!j.is_object() || !j.contains("schema")) {
        throw SchemaError(path.string() + ": missing schema version (expected " + kSchemaVersion + ")");
    }
    const json& s = j.at("schema");
    if (!s.is_string() || s.get<std::string>() != kSchemaVersion) {
        throw SchemaError(path.string() + ": schema " + s.dump() + " is not supported (expected " + kSchemaVersion +
                          ")");
    }
}

}  // namespace

json read_json_file(const fs::path& path) { return parse_json_file(path); }

RunConfig load_config(const fs::path& path) {
    const json j = parse_json_file(path);
    try {
        return config_from_json(j);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

// ----------------------------------------------------------------- report

long RunReport::violations() const {
    long v = 0;
    for (const auto& c : checks) v += c.violations;
    return v;
}

int RunReport::exit_code() const {
    if (!errors.empty()) return 1;
    return violations() > 0 ? 2 : 0;
}

json to_json(const EigenvalueRecord& r) {
    return {{"lambda_re", number_to_json(r.lambda.real())},
            {"lambda_im", number_to_json(r.lambda.imag())},
            {"residual", number_to_json(r.wronskian_residual)},
            {"sector_margin", number_to_json(r.sector_margin)},
            {"index", r.index},
            {"iterations", r.iterations}};
}

EigenvalueRecord record_from_json(const json& j) {
    try {
        EigenvalueRecord r;
        r.lambda = {number_from_json(j.at("lambda_re")), number_from_json(j.at("lambda_im"))};
        r.wronskian_residual = number_from_json(j.at("residual"));
        r.sector_margin = number_from_json(j.at("sector_margin"));
        r.index = j.at("index").get<int>();
        r.iterations = j.at("iterations").get<int>();
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("eigenvalue record: ") + e.what());
    }
}

json to_json(const CheckSummary& c) {
    return {{"id", c.id},
            {"checked", c.checked},
            {"violations", c.violations},
            {"worst_margin", number_to_json(c.worst_margin)},
            {"applicable", c.applicable},
            {"note", c.note}};
}

CheckSummary check_from_json(const json& j) {
    try {
        CheckSummary c;
        c.id = j.at("id").get<std::string>();
        c.checked = j.at("checked").get<long>();
        c.violations = j.at("violations").get<long>();
        c.worst_margin = number_from_json(j.at("worst_margin"));
        c.applicable = j.at("applicable").get<bool>();
        c.note = j.at("note").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("check summary: ") + e.what());
    }
}

json to_json(const RunReport& r) {
    json eig = json::array(), checks = json::array();
    for (const auto& e : r.eigenvalues) eig.push_back(to_json(e));
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    json timings = json::object();
    for (const auto& [k, v] : r.timings) timings[k] = number_to_json(v);
    return {{"schema", kSchemaVersion},
            {"command", r.command},
            {"config", r.config},
            {"eigenvalues", eig},
            {"checks", checks},
            {"violations", r.violations()},
            {"errors", r.errors},
            {"artifacts", r.artifacts},
            {"results", r.extra},
            {"timings", timings},
            {"exit_code", r.exit_code()}};
}

RunReport report_from_json(const json& j) {
    try {
        RunReport r;
        r.command = j.at("command").get<std::string>();
        r.config = j.at("config");
        for (const auto& e : j.at("eigenvalues")) r.eigenvalues.push_back(record_from_json(e));
        for (const auto& c : j.at("checks")) r.checks.push_back(check_from_json(c));
        r.errors = j.at("errors").get<std::vector<std::string>>();
        r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
        r.extra = j.at("results");
        for (const auto& [k, v] : j.at("timings").items()) r.timings[k] = number_from_json(v);
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("report: ") + e.what());
    }
}

// ------------------------------------------------------------ persistence

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SchemaError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw SchemaError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void save_eigenvalues(const fs::path& path, const PotentialBlock& potential,
                      const std::vector<EigenvalueRecord>& records) {
    json eig = json::array();
    for (const auto& r : records) eig.push_back(to_json(r));
    const json j = {{"schema", kSchemaVersion}, {"potential", potential_to_json(potential)}, {"eigenvalues", eig}};
    write_atomic(path, j.dump(2) + "\n");
}

EigenvalueFile load_eigenvalues(const fs::path& path) {
    const json j = parse_json_file(path);
    require_schema(j, path);
    EigenvalueFile f;
    try {
        read_potential(j.at("potential"), "potential", f.potential);
        for (const auto& e : j.at("eigenvalues")) f.records.push_back(record_from_json(e));
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return f;
}

void save_report(const fs::path& path, const RunReport& report) { write_atomic(path, to_json(report).dump(2) + "\n"); }

RunReport load_report(const fs::path& path) {
    const json j = parse_json_file(path);
    require_schema(j, path);
    return report_from_json(j);
}

// -------------------------------------------------------------------- CSV

namespace {

/// Shortest decimal form that reads back to the same double.
std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string field_csv(const FieldGrid& grid) {
    std::ostringstream out;
    out << "x,y,re_u,im_u,re_q,im_q\n";
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const SolutionState& s = grid.at(i, j);
            const cplx u = s.u * std::exp(s.log_scale);
            out << fmt(grid.x(i)) << ',' << fmt(grid.y(j)) << ',' << fmt(u.real()) << ',' << fmt(u.imag()) << ','
                << fmt(grid.re_q(i, j)) << ',' << fmt(grid.im_q(i, j)) << '\n';
        }
    }
    return out.str();
}

std::string zeros_csv(const std::vector<ZeroRecord>& zeros) {
    std::ostringstream out;
    out << "kind,x,y,winding,a_region,b_region\n";
    for (const auto& z : zeros) {
        out << to_string(z.which) << ',' << fmt(z.z.real()) << ',' << fmt(z.z.imag()) << ',' << z.winding << ',';
        if (z.regions) {
            out << to_string(z.regions->a_region) << ',' << to_string(z.regions->b_region);
        } else {
            out << ',';
        }
        out << '\n';
    }
    return out.str();
}

std::string regions_csv(cplx lambda, GridRect rect, int nx, int ny) {
    if (nx < 2 || ny < 2) throw PreconditionError("regions_csv: need at least 2x2 samples");
    const double dx = (rect.x_hi - rect.x_lo) / (nx - 1), dy = (rect.y_hi - rect.y_lo) / (ny - 1);
    std::ostringstream out;
    out << "curve,x0,y0,x1,y1\n";
    for (int part = 0; part < 2; ++part) {
        auto f = [&](int i, int j) {
            const cplx z{rect.x_lo + i * dx, rect.y_lo + j * dy};
            const cplx w = kI * z * z * z - lambda;
            return part == 0 ? w.real() : w.imag();
        };
        const char* name = part == 0 ? "re_w" : "im_w";
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i + 1 < nx; ++i) {
                const int ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
                double v[4];
                for (int k = 0; k < 4; ++k) v[k] = f(ci[k], cj[k]);
                std::vector<cplx> hits;
                for (int k = 0; k < 4; ++k) {
                    const int l = (k + 1) % 4;
                    if ((v[k] < 0.0) != (v[l] < 0.0)) {
                        const double t = v[k] / (v[k] - v[l]);
                        const cplx a{rect.x_lo + ci[k] * dx, rect.y_lo + cj[k] * dy};
                        const cplx b{rect.x_lo + ci[l] * dx, rect.y_lo + cj[l] * dy};
                        hits.push_back(a + t * (b - a));
                    }
                }
                // Two crossings form one segment; four (a saddle) form two,
                // paired by the sign at the cell centre.
                if (hits.size() == 4) {
                    const double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if ((centre < 0.0) != (v[0] < 0.0)) std::swap(hits[1], hits[3]);
                }
                for (std::size_t k = 0; k + 1 < hits.size(); k += 2) {
                    out << name << ',' << fmt(hits[k].real()) << ',' << fmt(hits[k].imag()) << ','
                        << fmt(hits[k + 1].real()) << ',' << fmt(hits[k + 1].imag()) << '\n';
                }
            }
        }
    }
    return out.str();
}

std::string stokes_angles_csv(int n) {
    std::ostringstream out;
    out << "index,theta,theta_over_pi\n";
    const auto t = critical_angles(n);
    for (std::size_t k = 0; k < t.size(); ++k) out << k << ',' << fmt(t[k]) << ',' << fmt(t[k] / kPi) << '\n';
    return out.str();
}

std::string stokes_rays_csv(int n, double r) {
    std::ostringstream out;
    out << "index,x0,y0,x1,y1\n";
    const auto t = critical_angles(n);
    for (std::size_t k = 0; k < t.size(); ++k) {
        out << k << ",0,0," << fmt(r * std::cos(t[k])) << ',' << fmt(r * std::sin(t[k])) << '\n';
    }
    return out.str();
}

}  // namespace ptspectra
