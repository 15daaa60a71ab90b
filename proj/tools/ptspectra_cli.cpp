// Command-line front end: spectrum, zeros, regions, ortho, verify, stokes.
// Exit codes: 0 all checks pass, 2 violations found, 1 operational error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ptspectra/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ptspectra;

namespace {

/// Flag values that overlay the config file. Unset flags leave the file alone.
struct Overrides {
    std::string config_path;
    std::optional<std::string> output;
    std::optional<std::vector<std::string>> formats;

    std::optional<int> n;
    std::optional<std::vector<double>> a, b;
    std::optional<double> g, shift_imag;

    std::optional<std::vector<double>> box;
    std::optional<double> tol, L, strip_width;
    std::optional<std::size_t> max_eigenvalues;
    bool no_sector_prune = false;

    std::optional<std::vector<double>> rect;
    std::optional<int> nx, ny;
    std::optional<std::string> fill;

    std::optional<std::vector<std::string>> suites;
    std::optional<int> index;
    std::optional<unsigned> seed;
    std::optional<int> green_paths;

    std::optional<std::string> eigenvalues_path;
    std::optional<std::vector<double>> lambda;

    std::vector<std::string> rules;
    std::optional<std::vector<double>> y_values;
    std::optional<int> depth, degree_cap;
};

bool touches_potential(const Overrides& o) { return o.n || o.a || o.b || o.g || o.shift_imag; }

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

/// Reads the config file (or defaults) and applies the flags, so both go
/// through the same validation.
json merged_config(const Overrides& o) {
    json j = o.config_path.empty() ? json::object() : read_json_file(o.config_path);
    if (!j.is_object()) throw SchemaError(o.config_path + ": expected a JSON object at the top level");
    auto block = [&](const char* name) -> json& {
        json& b = j[name];
        if (b.is_null()) b = json::object();
        return b;
    };
    if (touches_potential(o)) {
        json& p = block("potential");
        put(p, "n", o.n);
        put(p, "a", o.a);
        put(p, "b", o.b);
        put(p, "g", o.g);
        put(p, "shift_imag", o.shift_imag);
    }
    if (o.box || o.tol || o.L || o.strip_width || o.max_eigenvalues || o.no_sector_prune) {
        json& s = block("solver");
        put(s, "box", o.box);
        put(s, "tol", o.tol);
        put(s, "L", o.L);
        put(s, "strip_width", o.strip_width);
        put(s, "max_eigenvalues", o.max_eigenvalues);
        if (o.no_sector_prune) s["sector_prune"] = false;
    }
    if (o.rect || o.nx || o.ny || o.fill) {
        json& g = block("grid");
        put(g, "rect", o.rect);
        put(g, "nx", o.nx);
        put(g, "ny", o.ny);
        put(g, "fill", o.fill);
    }
    if (o.suites || o.index || o.seed || o.green_paths || o.y_values || o.depth || o.degree_cap) {
        json& v = block("verification");
        put(v, "suites", o.suites);
        put(v, "eigenvalue_index", o.index);
        put(v, "seed", o.seed);
        put(v, "green_paths", o.green_paths);
        put(v, "ortho_y_values", o.y_values);
        put(v, "ortho_depth", o.depth);
        put(v, "ortho_degree_cap", o.degree_cap);
    }
    if (o.output || o.formats) {
        json& out = block("output");
        put(out, "directory", o.output);
        put(out, "formats", o.formats);
    }
    return j;
}

RunConfig resolve_config(const Overrides& o) {
    const json j = merged_config(o);
    try {
        return config_from_json(j);
    } catch (const SchemaError& e) {
        if (o.config_path.empty()) throw;
        throw SchemaError(o.config_path + ": " + e.what());
    }
}

/// Eigenvalues from --eigenvalues, else from <output>/eigenvalues.json.
/// The file's potential is adopted when neither the config nor the flags
/// name one; otherwise the two must agree.
std::optional<std::vector<EigenvalueRecord>> find_eigenvalues_file(const Overrides& o, RunConfig& config,
                                                                   bool config_has_potential) {
    fs::path path;
    if (o.eigenvalues_path) {
        path = *o.eigenvalues_path;
    } else {
        path = fs::path(config.output.directory) / "eigenvalues.json";
        if (!fs::exists(path)) return std::nullopt;
    }
    EigenvalueFile file = load_eigenvalues(path);
    RunConfig theirs = config;
    theirs.potential = file.potential;
    if (!config_has_potential) {
        config.potential = file.potential;
    } else if (to_json(theirs)["potential"] != to_json(config)["potential"]) {
        throw PreconditionError(path.string() + " was computed for a different potential than the config");
    }
    return file.records;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", o.output, "Output directory");
    cmd->add_option("--formats", o.formats, "Output formats (json, csv)");
    cmd->add_option("--n", o.n, "Potential degree parameter: -(iz)^(2n+1)");
    cmd->add_option("--coeffs-a", o.a, "Coefficients a_0..a_{n-1} of P(w^2)");
    cmd->add_option("--coeffs-b", o.b, "Coefficients b_0..b_n of Q(w^2)");
    cmd->add_option("--g", o.g, "Coupling of the odd part");
    cmd->add_option("--shift-imag", o.shift_imag, "Imaginary shift: w = z - i*shift");
    cmd->add_option("--L", o.L, "Real-axis start radius (<= 0 selects the default)");
}

void add_eigen_input(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--eigenvalues", o.eigenvalues_path, "eigenvalues.json from `ptspectra spectrum`");
    cmd->add_option("--index", o.index, "Eigenvalue index in |lambda| order");
}

void add_grid(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--rect", o.rect, "Grid rectangle x_lo x_hi y_lo y_hi")->expected(4);
    cmd->add_option("--nx", o.nx, "Grid samples along x");
    cmd->add_option("--ny", o.ny, "Grid samples along y");
    cmd->add_option("--fill", o.fill, "Grid fill: hybrid or rows");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra and eigenfunctions of PT-symmetric oscillators -u'' + [P(x^2) - (ix)^(2n+1)]u = lambda u"};
    app.require_subcommand(1);
    Overrides o;

    auto* spectrum = app.add_subcommand("spectrum", "Find eigenvalues in a box and check the sector bound");
    add_common(spectrum, o);
    spectrum->add_option("--box", o.box, "Search box re_lo re_hi im_lo im_hi")->expected(4);
    spectrum->add_option("--tol", o.tol, "Integration and refinement tolerance");
    spectrum->add_option("--max-eigenvalues", o.max_eigenvalues, "Stop after this many eigenvalues");
    spectrum->add_option("--strip-width", o.strip_width, "Width in Re lambda of independently searched strips");
    spectrum->add_flag("--no-sector-prune", o.no_sector_prune, "Search outside the sector as well");

    auto* zeros = app.add_subcommand("zeros", "Locate zeros of u and u' on a grid");
    add_common(zeros, o);
    add_eigen_input(zeros, o);
    add_grid(zeros, o);

    auto* regions = app.add_subcommand("regions", "Level curves of Re and Im of iz^3 - lambda as CSV segments");
    add_common(regions, o);
    add_eigen_input(regions, o);
    add_grid(regions, o);
    regions->add_option("--lambda", o.lambda, "lambda as re im (instead of an eigenvalue file)")->expected(2);

    auto* ortho = app.add_subcommand("ortho", "Generate polynomials orthogonal to |u|^2 and test them");
    add_common(ortho, o);
    add_eigen_input(ortho, o);
    ortho->add_option("--rules", o.rules, "Composition scripts such as \"iii(iv(base))\"");
    ortho->add_option("--y-values", o.y_values, "Rows Im z = y to test");
    ortho->add_option("--depth", o.depth, "Composition depth of the enumerated family");
    ortho->add_option("--degree-cap", o.degree_cap, "Largest total degree of the enumerated family");

    auto* verify = app.add_subcommand("verify", "Run the verification suites on one eigenfunction");
    add_common(verify, o);
    add_eigen_input(verify, o);
    add_grid(verify, o);
    verify->add_option("--suites", o.suites,
                       "Suites: green signs monotonicity convexity census symmetry ortho sector");
    verify->add_option("--seed", o.seed, "Seed for the random Green paths");
    verify->add_option("--green-paths", o.green_paths, "Number of random Green paths");

    auto* stokes = app.add_subcommand("stokes", "Critical ray angles and rays as CSV");
    add_common(stokes, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version exit 0; usage errors are operational errors.
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        // The config is fully validated before anything is written.
        RunConfig config = resolve_config(o);
        const bool config_has_potential =
            touches_potential(o) || (!o.config_path.empty() && read_json_file(o.config_path).contains("potential"));
        std::ostream& log = std::cout;
        RunReport report;

        if (spectrum->parsed()) {
            report = cmd_spectrum(config, log);
        } else if (zeros->parsed() || verify->parsed()) {
            auto records = find_eigenvalues_file(o, config, config_has_potential);
            if (!records) {
                throw PreconditionError("no eigenvalues given; run `ptspectra spectrum` first or pass --eigenvalues");
            }
            report = zeros->parsed() ? cmd_zeros(config, *records, log) : cmd_verify(config, *records, log);
        } else if (regions->parsed()) {
            cplx lambda;
            if (o.lambda) {
                lambda = {(*o.lambda)[0], (*o.lambda)[1]};
            } else {
                auto records = find_eigenvalues_file(o, config, config_has_potential);
                if (!records) throw PreconditionError("pass --lambda or an eigenvalue file");
                lambda = select_eigenvalue(*records, config.verification.eigenvalue_index).lambda;
            }
            report = cmd_regions(config, lambda, log);
        } else if (ortho->parsed()) {
            OrthoRequest req;
            req.recipes = o.rules;
            req.depth = config.verification.ortho_depth;
            req.degree_cap = config.verification.ortho_degree_cap;
            req.y_values = config.verification.ortho_y_values;
            const auto records = find_eigenvalues_file(o, config, config_has_potential);
            report = cmd_ortho(config, req, records, log);
        } else if (stokes->parsed()) {
            report = cmd_stokes(config, log);
        }
        return report.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "ptspectra: " << e.what() << '\n';
        return 1;
    }
}
