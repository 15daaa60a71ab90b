#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptspectra/io.hpp"

namespace ptspectra {

/// Each command computes, prints a short table to `log`, writes its
/// artifacts and report.json into config.output.directory, and returns the
/// report. Operational failures are recorded in report.errors.

RunReport cmd_spectrum(const RunConfig& config, std::ostream& log);

/// The eigenfunction commands use the record at
/// config.verification.eigenvalue_index (records ordered by |λ|).
RunReport cmd_zeros(const RunConfig& config, const std::vector<EigenvalueRecord>& eigenvalues, std::ostream& log);
RunReport cmd_verify(const RunConfig& config, const std::vector<EigenvalueRecord>& eigenvalues, std::ostream& log);

RunReport cmd_regions(const RunConfig& config, cplx lambda, std::ostream& log);

struct OrthoRequest {
    /// Composition scripts; empty means the enumerated family.
    std::vector<std::string> recipes;
    int depth = 3;
    int degree_cap = 16;
    std::vector<double> y_values{-1.0, 0.0, 1.0};
};

/// Prints the requested polynomials; with eigenvalues, also tests their
/// orthogonality against |u|² on config.verification.rows_grid.
RunReport cmd_ortho(const RunConfig& config, const OrthoRequest& request,
                    const std::optional<std::vector<EigenvalueRecord>>& eigenvalues, std::ostream& log);

RunReport cmd_stokes(const RunConfig& config, std::ostream& log);

/// The record at `index` in |λ| order; throws PreconditionError otherwise.
const EigenvalueRecord& select_eigenvalue(const std::vector<EigenvalueRecord>& records, int index);

}  // namespace ptspectra
