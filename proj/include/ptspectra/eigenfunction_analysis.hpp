#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptspectra/spectrum.hpp"
#include "ptspectra/stokes_geometry.hpp"

namespace ptspectra {

struct GridRect {
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
};

/// How the off-axis samples are filled.
///
/// `hybrid` integrates each column upward from the real axis and fills the
/// lower half plane row by row from the far ends of the row. `rows` fills
/// every row from its far ends; use it for wide rows where columns would
/// start deep inside the decaying sectors.
enum class GridFill { hybrid, rows };

struct GridOptions {
    double tol = 1e-12;
    GridFill fill = GridFill::hybrid;
    /// Real-axis start radius; ≤ 0 selects default_start_radius.
    double L = 0.0;
    /// Largest |normalized W| at the origin accepted as an eigenfunction.
    double match_tolerance = 1e-6;
    /// Decay exponent accumulated between a row start and the grid edge.
    double row_decay_exponent = 25.0;
};

/// Evaluates (u, u′) anywhere and u″ from (z, u).
struct FieldSource {
    std::function<SolutionState(cplx)> state;
    std::function<cplx(cplx, cplx)> second;
};

/// Samples of u and u′ on a uniform rectangle, stored log-scaled.
/// Sample (i, j) sits at x_lo + i·dx + i(y_lo + j·dy).
class FieldGrid {
public:
    /// Samples are row-major: index j·nx + i.
    FieldGrid(GridRect rect, int nx, int ny, std::shared_ptr<const std::vector<SolutionState>> samples,
              FieldSource source);

    /// Grid of a closed-form field; `f` returns (u, u′) and `f2` returns u″.
    static FieldGrid from_function(GridRect rect, int nx, int ny, std::function<std::pair<cplx, cplx>(cplx)> f,
                                   std::function<cplx(cplx)> f2);

    const GridRect& rect() const noexcept { return rect_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    double dx() const noexcept;
    double dy() const noexcept;
    double x(int i) const noexcept { return rect_.x_lo + i * dx(); }
    double y(int j) const noexcept { return rect_.y_lo + j * dy(); }
    cplx z(int i, int j) const noexcept { return {x(i), y(j)}; }

    const SolutionState& at(int i, int j) const { return (*samples_)[static_cast<std::size_t>(j) * nx_ + i]; }
    const std::vector<SolutionState>& samples() const noexcept { return *samples_; }

    /// u′ū in the sample's own units; the true value is q·e^{2·log_scale}.
    cplx q_scaled(int i, int j) const;
    /// True Re(u′ū) and Im(u′ū); may overflow for very large log scales.
    double re_q(int i, int j) const;
    double im_q(int i, int j) const;

    /// (u, u′) at an arbitrary point, integrated from the nearest sample.
    SolutionState probe(cplx z) const { return source_.state(z); }
    cplx second_derivative(cplx z, cplx u) const { return source_.second(z, u); }

    /// Set for grids built from an eigenvalue record.
    const std::optional<PotentialSpec>& spec() const noexcept { return spec_; }
    cplx lambda() const noexcept { return lambda_; }
    /// Largest relative mismatch where separately integrated pieces meet.
    double seam_defect() const noexcept { return seam_defect_; }
    /// |normalized W| at the origin measured during construction.
    double origin_mismatch() const noexcept { return origin_mismatch_; }

private:
    friend FieldGrid build_grid(const PotentialSpec&, const EigenvalueRecord&, GridRect, int, int,
                                const GridOptions&);

    GridRect rect_;
    int nx_, ny_;
    std::shared_ptr<const std::vector<SolutionState>> samples_;
    FieldSource source_;
    std::optional<PotentialSpec> spec_;
    cplx lambda_{};
    double seam_defect_ = 0.0;
    double origin_mismatch_ = 0.0;
};

/// Eigenfunction grid normalized by u(0) = 1 (or u′(0) = 1 when u(0) = 0).
/// Throws PreconditionError when the record's λ does not match both decay
/// conditions, and IntegrationError annotated with the grid position.
FieldGrid build_grid(const PotentialSpec& spec, const EigenvalueRecord& record, GridRect rect, int nx, int ny,
                     const GridOptions& options = {});

enum class ZeroKind { zero_of_u, zero_of_du };

std::string_view to_string(ZeroKind k);

struct ZeroRecord {
    cplx z;
    int winding = 1;
    ZeroKind which = ZeroKind::zero_of_u;
    /// Present for the pure cubic with Re λ > 0.
    std::optional<CubicRegionLabel> regions;
};

struct ZeroOptions {
    /// Phase jumps above this between boundary samples force resampling.
    double max_phase_jump = 0.99 * kPi;
    int max_resample = 3;
    double merge_distance = 1e-8;
    int newton_iterations = 60;
};

/// Zeros of u and u′ located by cell winding numbers and Newton polishing,
/// sorted by (kind, Im z, Re z).
std::vector<ZeroRecord> find_zeros(const FieldGrid& grid, const ZeroOptions& options = {});

/// One family of pointwise checks.
struct CheckSummary {
    std::string id;
    long checked = 0;
    long violations = 0;
    /// Smallest normalized margin seen; positive means the predicted sign holds.
    double worst_margin = HUGE_VAL;
    bool applicable = true;
    std::string note;
};

struct GreenResidual {
    double real_residual = 0.0;
    double imag_residual = 0.0;
    /// Both sides in units of e^{2·log_scale} at the path end.
    double lhs_real = 0.0, rhs_real = 0.0, lhs_imag = 0.0, rhs_imag = 0.0;
    /// ∫|z′|(|u′|² + |V − λ||u|²), same units.
    double scale = 0.0;
};

/// Both sides of the Green's transform along a polyline, computed by fresh
/// integration of (u, u′) and the path quadratures from the grid value at
/// the first waypoint. A path of coincident points returns zeros.
GreenResidual green_residual(const FieldGrid& grid, const std::vector<cplx>& waypoints, double tol = 1e-12);

/// V(z) = iz³ exactly: the potential the zero-free region results describe.
bool is_pure_cubic(const PotentialSpec& spec);

/// Region predictions for u′ū of the pure cubic eigenfunction at z.
struct SignPrediction {
    std::string id;
    /// true: Re(u′ū); false: Im(u′ū).
    bool real_part = false;
    int sign = 0;
};

/// Every strict-sign region containing z. For real λ this covers the
/// degenerate sectors; for Im λ < 0 the regions are mirrored.
std::vector<SignPrediction> sign_predictions(cplx z, cplx lambda);

/// True if λ is treated as real by the sign checks.
bool effectively_real(cplx lambda);

/// Checks every sample against sign_predictions with tolerance
/// tol·|u|(|u| + |u′|). Requires a pure cubic grid.
std::vector<CheckSummary> verify_sign_theorems(const FieldGrid& grid, double tol = 1e-10);

/// Monotonicity of re_q along sign-constant columns and along rows in A1,
/// the orderings of the level sets of re_q and im_q, and the odd symmetry
/// of re_q on the imaginary axis.
std::vector<CheckSummary> verify_monotonicity(const FieldGrid& grid, double tol = 1e-8);

/// Crossing points of the zero level set of a sampled scalar field along
/// the grid edges (marching squares with linear interpolation).
std::vector<cplx> zero_level_points(const FieldGrid& grid, const std::function<double(int, int)>& field);

/// |u|² along row j, scaled: true value = abs2[i]·e^{log_scale}.
struct RowDensity {
    std::vector<double> abs2;
    std::vector<double> abs2_du;
    double log_scale = 0.0;
};

RowDensity row_density(const FieldGrid& grid, int j);

/// Composite trapezoid rule on the row spacing.
double trapezoid(const std::vector<double>& f, double h);

/// Bound m(x) ≤ C₁ exp(−|x|^{C₂}) for m = |u| + |u′| on |x| ≥ x_max/2,
/// with C₂ ≥ 1 chosen to make the tail estimate smallest.
struct DecayEnvelope {
    double log_c1 = 0.0;
    double c2 = 0.0;
    /// Envelope tail of ∫|u|² beyond the row, relative to the row integral.
    double relative_tail = 0.0;
    bool holds = false;
};

DecayEnvelope decay_envelope(const FieldGrid& grid, int j);

struct ConvexityReport {
    std::vector<double> y;
    std::vector<double> F;
    /// min over rows of F(y−h) − 2F(y) + F(y+h), divided by max F.
    double worst_second_difference = 0.0;
    /// Largest |F″ − 4∫|u_x|²| / (4∫|u_x|²) over rows; F″ comes
    /// from 5-point stencils on log F.
    double second_derivative_mismatch = 0.0;
    double worst_tail = 0.0;
    bool convex = false;
};

/// Convexity of F(y) = ∫|u(x+iy)|²dx over the grid rows. Throws
/// PreconditionError for fewer than three rows or when the decay tail
/// exceeds tail_budget.
ConvexityReport convexity_check(const FieldGrid& grid, double tail_budget = 1e-10);

struct ZeroCensus {
    long upper_u_zeros = 0;
    long lower_zeros = 0;
    /// Upper-half-plane u-zeros off the positive imaginary axis above ∛λ
    /// (real λ) or outside A1 (otherwise).
    long misplaced_upper = 0;
    /// Zeros of u or u′ inside a strict-sign region.
    long in_certified = 0;
    /// Lower-half-plane zeros outside the non-excluded region.
    long misplaced_lower = 0;
    /// Ordering failures of lower-half-plane zeros in A4∩B3 and A4∩B4.
    long ordering_violations = 0;
    /// Upper-half-plane u-zeros with Im z ≤ height.
    std::vector<std::pair<double, long>> counts_by_height;
    bool count_grows = false;
    /// For Im λ ≠ 0: zeros in A1 on the side excluded by the sign of
    /// Re(u′ū) along the imaginary axis.
    bool axis_rule_applicable = false;
    long axis_rule_violations = 0;
    /// Smallest distance between a u-zero and a u′-zero.
    double min_separation = HUGE_VAL;
};

ZeroCensus zero_census(const FieldGrid& grid, const std::vector<ZeroRecord>& zeros,
                       const std::vector<double>& heights, double axis_tol = 1e-6);

/// max |u(z) − e^{iφ} conj(u(−z̄))| / (|u| + |u′|) over samples with a
/// mirror partner; φ fixed at the sample closest to the origin.
struct SymmetryReport {
    double phase = 0.0;
    double max_relative_error = 0.0;
    long checked = 0;
};

SymmetryReport pt_symmetry_residual(const FieldGrid& grid);

/// Central-difference checks at interior samples within `window`:
/// −½∂_y|u|² vs Im(u′ū), ∂_x Im(u′ū) vs Im(V−λ)|u|², and
/// ∂_x Re(u′ū) vs |u′|² + Re(V−λ)|u|², each relative to (|u| + |u′|)².
struct DifferenceReport {
    double im_q_error = 0.0;
    double im_diff_error = 0.0;
    double real_diff_error = 0.0;
    long checked = 0;
};

DifferenceReport finite_difference_check(const FieldGrid& grid, GridRect window);

}  // namespace ptspectra
