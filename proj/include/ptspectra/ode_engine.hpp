#pragma once

#include <vector>

#include "ptspectra/common.hpp"
#include "ptspectra/stokes_geometry.hpp"

namespace ptspectra {

/// V(z) = P(w²) + i·g·w·Q(w²), w = z − ξ, with P(s) = Σ a_k s^k and
/// Q(s) = Σ b_k s^k. The eigenproblem is u″ = (V − λ)u.
struct PotentialSpec {
    int n = 1;
    std::vector<double> a;
    std::vector<double> b;
    double g = 1.0;
    cplx xi{0.0, 0.0};
    /// Disables the odd-part requirement; only for closed-form checks.
    bool test_adapter = false;

    /// −(iz)^{2n+1}: b_n = (−1)^{n+1}, every other coefficient zero.
    static PotentialSpec canonical(int n);
    /// V = z², outside the PT class; used to validate the pipeline.
    static PotentialSpec harmonic_test_adapter();

    /// Throws PreconditionError on inconsistent sizes, b_n = 0, g = 0 or
    /// non-finite coefficients.
    void validate() const;
    /// Polynomial degree of V in z.
    int degree() const;
    /// Coefficient of w^{degree} in V.
    cplx leading_coefficient() const;
};

/// Precomputed monomial form of V for fast repeated evaluation.
class Potential {
public:
    explicit Potential(const PotentialSpec& spec);

    cplx operator()(cplx z) const noexcept;
    cplx derivative(cplx z) const noexcept;
    cplx shift() const noexcept { return xi_; }
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    cplx leading_coefficient() const noexcept { return c_.back(); }

private:
    std::vector<cplx> c_;  // V = Σ c_m (z − ξ)^m
    cplx xi_;
};

cplx potential_eval(const PotentialSpec& spec, cplx z);
cplx potential_derivative(const PotentialSpec& spec, cplx z);

/// Stokes chart of the spec's leading odd term, centred on ξ.
/// Throws PreconditionError for the test adapter.
StokesChart stokes_chart(const PotentialSpec& spec, double epsilon);

/// Default ε for sector membership tests: a fifth of the sector width.
double default_sector_epsilon(int n);

/// Polyline through the complex plane; the parameter runs first to last.
class ComplexPath {
public:
    /// Throws PreconditionError for fewer than two points or repeated
    /// consecutive points.
    explicit ComplexPath(std::vector<cplx> waypoints);

    static ComplexPath segment(cplx from, cplx to) { return ComplexPath({from, to}); }

    const std::vector<cplx>& waypoints() const noexcept { return pts_; }
    cplx front() const noexcept { return pts_.front(); }
    cplx back() const noexcept { return pts_.back(); }
    double length() const noexcept;
    ComplexPath reversed() const;

private:
    std::vector<cplx> pts_;
};

/// (u, u′) at z; the true values are u·e^{log_scale}, du·e^{log_scale}.
struct SolutionState {
    cplx z;
    cplx u;
    cplx du;
    double log_scale = 0.0;

    cplx true_u() const { return u * std::exp(log_scale); }
    cplx true_du() const { return du * std::exp(log_scale); }
};

enum class AsymptoticMode { decaying, growing };

struct InitOptions {
    /// Required ratio |V(z0)| / |λ|.
    double min_potential_ratio = 100.0;
    /// Angular margin from critical rays; ≤ 0 selects default_sector_epsilon.
    double sector_epsilon = 0.0;
    /// Outward direction used to tell decay from growth; zero means radial
    /// from ξ.
    cplx outward{0.0, 0.0};
};

/// Local WKB start u = 1, u′/u = ±√(V−λ) − V′/(4(V−λ)).
/// Throws PreconditionError if z0 is too close to a critical ray or |V(z0)|
/// is too small.
SolutionState asymptotic_init(const PotentialSpec& spec, cplx lambda, cplx z0,
                              AsymptoticMode mode = AsymptoticMode::decaying,
                              const InitOptions& options = {});

/// Radius where the decaying WKB exponent reaches ~200, |V| ≥ ratio·|λ| and
/// L ≥ 2(40 + |λ|)^{2/(d+2)} all hold.
double default_start_radius(const PotentialSpec& spec, cplx lambda,
                            double min_potential_ratio = 100.0);

struct IntegrateOptions {
    double tol = 1e-12;
    double rescale_log_threshold = 30.0;
    double max_step_fraction = 1.0 / 16.0;
    /// Record the state after every accepted step.
    bool dense = false;
};

struct IntegrationResult {
    SolutionState final_state;
    /// State at every waypoint, including the first.
    std::vector<SolutionState> waypoint_states;
    /// Accepted steps, only when IntegrateOptions::dense is set.
    std::vector<SolutionState> samples;
    long steps = 0;
};

/// Propagates (u, u′)′ = (u′, (V − λ)u) along `path`.
/// Throws PreconditionError if init.z is not the first waypoint and
/// IntegrationError on step underflow or non-finite values.
IntegrationResult integrate(const PotentialSpec& spec, cplx lambda, const ComplexPath& path,
                            const SolutionState& init, const IntegrateOptions& options = {});

/// Same, reusing a prebuilt potential.
IntegrationResult integrate(const Potential& potential, cplx lambda, const ComplexPath& path,
                            const SolutionState& init, const IntegrateOptions& options = {});

}  // namespace ptspectra
