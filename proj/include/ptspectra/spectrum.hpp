#pragma once

#include <vector>

#include "ptspectra/ode_engine.hpp"

namespace ptspectra {

struct ShootingOptions {
    /// Start radius; ≤ 0 selects default_start_radius.
    double L = 0.0;
    double tol = 1e-12;
    /// Real part of the matching point. Its imaginary part sits between the
    /// turning points that govern the eigenvalue condition.
    double x_match = 0.0;
    double min_potential_ratio = 100.0;
};

/// W = u_L u_R′ − u_L′ u_R at the matching point.
struct WronskianValue {
    /// W / ((|u_L| + |u_L′|)(|u_R| + |u_R′|)); same argument as the analytic W.
    cplx normalized;
    /// Analytic W = scaled · e^{log_scale}.
    cplx scaled;
    double log_scale = 0.0;
};

/// Shoots the decaying solutions inward from ∓L and forms W at the
/// matching point.
WronskianValue wronskian_miss(const PotentialSpec& spec, cplx lambda, const ShootingOptions& options = {});

struct EigenvalueRecord {
    cplx lambda;
    /// |normalized W| at lambda.
    double wronskian_residual = 0.0;
    /// π/(2n+3) − |arg λ|.
    double sector_margin = 0.0;
    /// Position in the list ordered by |λ|; 0 until assigned.
    int index = 0;
    int iterations = 0;
};

/// Rectangle [re_lo, re_hi] × [im_lo, im_hi] in the λ-plane.
struct SearchBox {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;
    /// Initial samples per edge before adaptive refinement.
    int samples_per_edge = 12;

    bool degenerate() const { return !(re_hi > re_lo) || !(im_hi > im_lo); }
    bool contains(cplx z) const {
        return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
    }
};

struct CountOptions {
    ShootingOptions shooting;
    /// Minimum |normalized W| allowed on the contour.
    double min_boundary_w = 1e-6;
    /// Largest argument jump between neighbouring samples.
    double max_phase_step = kPi / 3.0;
    int max_refinements = 14;
};

/// Winding number of W around the box. Throws ContourError if W is too
/// small on the boundary or the phase cannot be resolved.
int count_in_box(const PotentialSpec& spec, const SearchBox& box, const CountOptions& options = {});

struct RefineOptions {
    ShootingOptions shooting;
    int max_iterations = 60;
    double step_tol = 1e-12;
    /// Largest |normalized W| accepted at a converged iterate.
    double capture = 1e-6;
};

/// Secant iteration on W with a Muller fallback. Throws
/// ConvergenceError (message carries the iteration trace).
EigenvalueRecord refine(const PotentialSpec& spec, cplx lambda0, const RefineOptions& options = {});

struct SearchOptions {
    CountOptions count;
    RefineOptions refine;
    /// Skip sub-boxes lying entirely outside |arg λ| ≤ π/(2n+3) + slack.
    bool sector_prune = true;
    double sector_slack = 0.05;
    std::size_t max_eigenvalues = 1000;
    int max_depth = 24;
};

/// Eigenvalues in the box, sorted by (Re λ, Im λ) with index set by |λ|.
/// `total_count` receives the winding number of the full box.
std::vector<EigenvalueRecord> find_eigenvalues(const PotentialSpec& spec, const SearchBox& box,
                                               const SearchOptions& options = {},
                                               int* total_count = nullptr);

struct SectorReport {
    double abs_arg = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    bool violation = false;
};

inline constexpr double kSectorTol = 1e-9;

/// Checks Re λ > 0 and |arg λ| ≤ π/(2n+3) + tol.
SectorReport verify_sector(const EigenvalueRecord& record, int n, double tol = kSectorTol);

struct SufficientTerm {
    int k = 0;
    double coefficient = 0.0;  // c_k at θ = π/(2(2n+3))
    double lhs = 0.0;          // c_k b_k²
    double rhs = 0.0;          // factor · a_k a_{k+1}
    double factor = 0.0;
    bool holds = false;
};

struct SufficientReport {
    std::vector<SufficientTerm> terms;
    bool holds = false;
};

/// c_k = sin²((2n−2k)θ) / [cos((2n−2k+1)θ) cos((2n−2k−1)θ)].
double sufficient_coefficient(int n, int k);

/// Per-k discriminant test for the odd coefficients (g folded into b).
/// Throws PreconditionError for a negative a_k.
SufficientReport sufficient_condition(const PotentialSpec& spec);

struct SignConditionReport {
    double minimum = 0.0;
    double r_at_minimum = 0.0;
    double theta_at_minimum = 0.0;
    double r_max = 0.0;
};

/// Grid minimum of Re[e^{−i(2n+1)θ} P(r² e^{2iθ})] over 0 ≤ r ≤ r_max,
/// |θ| ≤ π/(2(2n+3)).
SignConditionReport sign_condition_check(const PotentialSpec& spec, int nr = 800, int ntheta = 201);

/// The critical |c| for P(s) = s³ + c s² + s with n = 3.
double sign_condition_critical_c();

/// Cubic spec for v(z) = u(z + ai).
PotentialSpec shift_cubic(double a);

/// Largest distance from a member of the set to the conjugate of its
/// nearest partner.
double conjugation_defect(const std::vector<EigenvalueRecord>& records);

}  // namespace ptspectra
