#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptspectra/eigenfunction_analysis.hpp"
#include "ptspectra/spectrum.hpp"

namespace ptspectra {

inline constexpr const char* kSchemaVersion = "pt-spectra/v1";

/// V(z) = P(w²) + i·g·w·Q(w²) with w = z − i·shift_imag.
struct PotentialBlock {
    int n = 1;
    std::vector<double> a;  // empty: canonical −(iz)^{2n+1}
    std::vector<double> b;
    double g = 1.0;
    double shift_imag = 0.0;
};

struct SolverBlock {
    double L = 0.0;
    double tol = 1e-12;
    SearchBox box{0.5, 12.0, -1.0, 1.0, 12};
    std::size_t max_eigenvalues = 1000;
    bool sector_prune = true;
    double sector_slack = 0.05;
    /// The box is searched in strips at most this wide in Re λ; a failing
    /// strip is recorded and the others continue.
    double strip_width = 10.0;
};

struct GridBlock {
    GridRect rect{-6.0, 6.0, -6.0, 6.0};
    int nx = 241;
    int ny = 241;
    GridFill fill = GridFill::hybrid;
};

struct VerificationBlock {
    std::vector<std::string> suites{"green",    "signs",    "monotonicity", "convexity",
                                    "census",   "symmetry", "ortho",        "sector"};
    /// Index of the eigenvalue (ordered by |λ|) the eigenfunction suites use.
    int eigenvalue_index = 0;
    int green_paths = 10;
    unsigned seed = 2024;
    double green_tol = 1e-7;
    /// Wide rows for the row integrals (convexity, orthogonality).
    GridBlock rows_grid{{-8.0, 8.0, -2.0, 2.0}, 641, 81, GridFill::rows};
    std::vector<double> census_heights;  // empty: 0.6·y_hi and y_hi
    int ortho_depth = 3;
    int ortho_degree_cap = 16;
    std::vector<double> ortho_y_values{-1.0, 0.0, 1.0};
    double ortho_tol = 1e-5;
};

struct OutputBlock {
    std::string directory = "ptspectra_out";
    std::vector<std::string> formats{"json", "csv"};
};

struct RunConfig {
    PotentialBlock potential;
    SolverBlock solver;
    GridBlock grid;
    VerificationBlock verification;
    OutputBlock output;

    PotentialSpec spec() const;
    SearchOptions search_options() const;
    bool wants(const std::string& format) const;
};

/// Reads a config object; unknown keys and wrong types are SchemaErrors
/// naming the field path. Missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
/// Parses a JSON file; syntax errors are SchemaErrors with line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Parses a JSON config file; syntax errors report line and column.
RunConfig load_config(const std::filesystem::path& path);

struct RunReport {
    std::string command;
    nlohmann::json config;
    std::vector<EigenvalueRecord> eigenvalues;
    std::vector<CheckSummary> checks;
    std::vector<std::string> errors;
    std::vector<std::string> artifacts;
    std::map<std::string, double> timings;
    /// Command-specific results.
    nlohmann::json extra = nlohmann::json::object();

    long violations() const;
    /// 0 when every check passes, 2 when any check has violations, 1 when
    /// an operational error was recorded.
    int exit_code() const;
};

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EigenvalueRecord& r);
EigenvalueRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CheckSummary& c);
CheckSummary check_from_json(const nlohmann::json& j);

/// Finite doubles as JSON numbers (shortest round-trip form); ±inf and
/// NaN as the strings "inf", "-inf" and "nan".
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// {"schema", "potential", "eigenvalues"}; load rejects other schemas.
void save_eigenvalues(const std::filesystem::path& path, const PotentialBlock& potential,
                      const std::vector<EigenvalueRecord>& records);
struct EigenvalueFile {
    PotentialBlock potential;
    std::vector<EigenvalueRecord> records;
};
EigenvalueFile load_eigenvalues(const std::filesystem::path& path);

void save_report(const std::filesystem::path& path, const RunReport& report);
RunReport load_report(const std::filesystem::path& path);

/// x, y, Re u, Im u, re_q, im_q for every sample, row-major.
std::string field_csv(const FieldGrid& grid);
/// kind, x, y, winding, a_region, b_region.
std::string zeros_csv(const std::vector<ZeroRecord>& zeros);
/// Line segments of the level curves Re(iz³ − λ) = 0 and Im(iz³ − λ) = 0.
std::string regions_csv(cplx lambda, GridRect rect, int nx, int ny);
/// Critical ray angles of −(iz)^{2n+1}.
std::string stokes_angles_csv(int n);
/// Each critical ray as a segment from the origin to radius r.
std::string stokes_rays_csv(int n, double r);

}  // namespace ptspectra
