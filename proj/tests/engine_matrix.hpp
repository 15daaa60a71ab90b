#pragma once

// Seeded test matrix for the integrator invariants, shared by the unit and
// acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ptspectra/ode_engine.hpp"

namespace ptspectra::testing {

/// Relative distance of two log-scaled states.
inline double state_distance(const SolutionState& p, const SolutionState& q) {
    const double shift = std::exp(q.log_scale - p.log_scale);
    const double num = std::max(std::abs(p.u - q.u * shift), std::abs(p.du - q.du * shift));
    return num / std::max(std::abs(p.u), std::abs(p.du));
}

struct EngineCase {
    cplx lambda;
    ComplexPath path;
    SolutionState first;
    SolutionState second;
};

/// Largest/smallest magnitude ratio of max(|u|, |u'|) over a dense run.
inline double growth_factor(const IntegrationResult& r) {
    double lo = HUGE_VAL, hi = 0.0;
    for (const auto& s : r.samples) {
        const double m = std::log(std::max(std::abs(s.u), std::abs(s.du))) + s.log_scale;
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    return std::exp(hi - lo);
}

/// Random λ with 0.5 ≤ Re λ ≤ 20, three-point paths in [−2.5, 2.5]² and a
/// pair of independent starting states. Paths along which either solution
/// changes magnitude by more than `max_growth` are redrawn: there the drift
/// measures the conditioning of the problem rather than the integrator.
inline std::vector<EngineCase> engine_matrix(const PotentialSpec& spec, int count, unsigned seed,
                                             double max_growth = 20.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-2.5, 2.5), lam(0.5, 20.0), lam_im(-3.0, 3.0),
        phase(0.0, 2 * kPi);
    std::vector<EngineCase> out;
    IntegrateOptions probe;
    probe.tol = 1e-8;
    probe.dense = true;
    while (static_cast<int>(out.size()) < count) {
        const cplx lambda{lam(rng), lam_im(rng)};
        std::vector<cplx> pts{cplx{c(rng), c(rng)}, cplx{c(rng), c(rng)}, cplx{c(rng), c(rng)}};
        ComplexPath path(pts);
        const SolutionState s1{pts[0], cplx{1.0, 0.0}, cplx{c(rng), c(rng)}};
        const SolutionState s2{pts[0], cplx{0.0, 0.0}, std::polar(1.0, phase(rng))};
        if (growth_factor(integrate(spec, lambda, path, s1, probe)) > max_growth) continue;
        if (growth_factor(integrate(spec, lambda, path, s2, probe)) > max_growth) continue;
        out.push_back(EngineCase{lambda, std::move(path), s1, s2});
    }
    return out;
}

}  // namespace ptspectra::testing
