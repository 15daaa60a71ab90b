#include "ptspectra/ode_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptspectra/detail/dopri5.hpp"

namespace ptspectra {

PotentialSpec PotentialSpec::canonical(int n) {
    if (n < 1) throw PreconditionError("canonical potential: n must be >= 1");
    PotentialSpec spec;
    spec.n = n;
    spec.a.assign(n + 1, 0.0);
    spec.b.assign(n + 1, 0.0);
    spec.b[n] = (n % 2 == 1) ? 1.0 : -1.0;
    return spec;
}

PotentialSpec PotentialSpec::harmonic_test_adapter() {
    PotentialSpec spec;
    spec.n = 1;
    spec.a = {0.0, 1.0};
    spec.b = {0.0, 0.0};
    spec.test_adapter = true;
    return spec;
}

void PotentialSpec::validate() const {
    if (n < 1) throw PreconditionError("potential: n must be >= 1");
    if (a.size() != static_cast<std::size_t>(n + 1) || b.size() != static_cast<std::size_t>(n + 1)) {
        std::ostringstream msg;
        msg << "potential: expected " << n + 1 << " coefficients of P and Q, got " << a.size()
            << " and " << b.size();
        throw PreconditionError(msg.str());
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite) ||
        !std::isfinite(g) || !std::isfinite(xi.real()) || !std::isfinite(xi.imag())) {
        throw PreconditionError("potential: non-finite coefficient");
    }
    if (test_adapter) return;
    if (b[n] == 0.0) throw PreconditionError("potential: leading odd coefficient b_n must be nonzero");
    if (g == 0.0) throw PreconditionError("potential: scaling g must be nonzero");
}

int PotentialSpec::degree() const { return Potential(*this).degree(); }

cplx PotentialSpec::leading_coefficient() const { return Potential(*this).leading_coefficient(); }

Potential::Potential(const PotentialSpec& spec) : xi_(spec.xi) {
    spec.validate();
    c_.assign(2 * spec.n + 2, cplx{});
    for (int k = 0; k <= spec.n; ++k) {
        c_[2 * k] += spec.a[k];
        c_[2 * k + 1] += kI * spec.g * spec.b[k];
    }
    while (c_.size() > 1 && c_.back() == cplx{}) c_.pop_back();
}

cplx Potential::operator()(cplx z) const noexcept {
    const cplx w = z - xi_;
    cplx acc = c_.back();
    for (auto it = c_.rbegin() + 1; it != c_.rend(); ++it) acc = acc * w + *it;
    return acc;
}

cplx Potential::derivative(cplx z) const noexcept {
    const cplx w = z - xi_;
    cplx acc{};
    for (std::size_t m = c_.size() - 1; m >= 1; --m) acc = acc * w + static_cast<double>(m) * c_[m];
    return acc;
}

cplx potential_eval(const PotentialSpec& spec, cplx z) { return Potential(spec)(z); }

cplx potential_derivative(const PotentialSpec& spec, cplx z) { return Potential(spec).derivative(z); }

double default_sector_epsilon(int n) { return 0.2 * kPi / (2 * n + 3); }

StokesChart stokes_chart(const PotentialSpec& spec, double epsilon) {
    spec.validate();
    if (spec.test_adapter) throw PreconditionError("stokes_chart: test adapter has no odd leading term");
    const double canonical_sign = (spec.n % 2 == 1) ? 1.0 : -1.0;
    const bool rotated = (spec.g * spec.b[spec.n]) * canonical_sign < 0.0;
    return StokesChart(spec.n, epsilon, rotated);
}

ComplexPath::ComplexPath(std::vector<cplx> waypoints) : pts_(std::move(waypoints)) {
    if (pts_.size() < 2) throw PreconditionError("path: at least two waypoints required");
    for (std::size_t i = 1; i < pts_.size(); ++i) {
        if (pts_[i] == pts_[i - 1]) throw PreconditionError("path: consecutive waypoints coincide");
    }
}

double ComplexPath::length() const noexcept {
    double len = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) len += std::abs(pts_[i] - pts_[i - 1]);
    return len;
}

ComplexPath ComplexPath::reversed() const {
    return ComplexPath(std::vector<cplx>(pts_.rbegin(), pts_.rend()));
}

SolutionState asymptotic_init(const PotentialSpec& spec, cplx lambda, cplx z0, AsymptoticMode mode,
                              const InitOptions& options) {
    const Potential pot(spec);
    const cplx w0 = z0 - pot.shift();
    if (w0 == cplx{}) throw PreconditionError("asymptotic_init: start point coincides with the shift");

    if (!spec.test_adapter) {
        const double eps = options.sector_epsilon > 0.0 ? options.sector_epsilon : default_sector_epsilon(spec.n);
        const StokesChart chart = stokes_chart(spec, eps);
        const RegionIndex idx = region_index(chart, w0);
        if (idx.on_critical_ray || !idx.in_shrunk_sector) {
            std::ostringstream msg;
            msg << "asymptotic_init: start point " << z0 << " lies within " << eps
                << " rad of a critical ray";
            throw PreconditionError(msg.str());
        }
    }

    const cplx v = pot(z0);
    if (std::abs(v) < options.min_potential_ratio * std::abs(lambda)) {
        std::ostringstream msg;
        msg << "asymptotic_init: |V(z0)| = " << std::abs(v) << " is below " << options.min_potential_ratio
            << "*|lambda| = " << options.min_potential_ratio * std::abs(lambda) << "; increase the start radius";
        throw PreconditionError(msg.str());
    }

    const cplx q = v - lambda;
    if (q == cplx{}) throw PreconditionError("asymptotic_init: start point is a turning point");
    const cplx k = std::sqrt(q);
    const cplx outward = options.outward != cplx{} ? options.outward / std::abs(options.outward)
                                                   : w0 / std::abs(w0);
    double s = (k * outward).real() < 0.0 ? 1.0 : -1.0;
    if (mode == AsymptoticMode::growing) s = -s;
    const cplx dlog = s * k - pot.derivative(z0) / (4.0 * q);
    return SolutionState{z0, cplx{1.0, 0.0}, dlog, 0.0};
}

double default_start_radius(const PotentialSpec& spec, cplx lambda, double min_potential_ratio) {
    const Potential pot(spec);
    const int d = pot.degree();
    if (d < 1) throw PreconditionError("default_start_radius: constant potential");
    const double c = std::abs(pot.leading_coefficient());
    const double half = 0.5 * (d + 2);
    double L = std::pow(200.0 * half / std::sqrt(c), 1.0 / half);
    L = std::max(L, 2.0 * std::pow(40.0 + std::abs(lambda), 1.0 / half));
    const double need = min_potential_ratio * std::abs(lambda);
    for (int iter = 0; iter < 200; ++iter) {
        const double vr = std::abs(pot(pot.shift() + L));
        const double vl = std::abs(pot(pot.shift() - L));
        if (std::min(vr, vl) >= need) break;
        L *= 1.05;
    }
    return L;
}

IntegrationResult integrate(const PotentialSpec& spec, cplx lambda, const ComplexPath& path,
                            const SolutionState& init, const IntegrateOptions& options) {
    return integrate(Potential(spec), lambda, path, init, options);
}

IntegrationResult integrate(const Potential& potential, cplx lambda, const ComplexPath& path,
                            const SolutionState& init, const IntegrateOptions& options) {
    if (!(options.tol > 0.0)) throw PreconditionError("integrate: tol must be positive");
    if (std::abs(init.z - path.front()) > 1e-14 * (1.0 + std::abs(path.front()))) {
        throw PreconditionError("integrate: initial state is not at the first waypoint");
    }
    if (init.u == cplx{} && init.du == cplx{}) {
        throw PreconditionError("integrate: trivial initial state");
    }

    auto rhs = [&](cplx z, const detail::CVec<2>& y) {
        return detail::CVec<2>{y[1], (potential(z) - lambda) * y[0]};
    };
    detail::StepControl ctl;
    ctl.tol = options.tol;
    ctl.rescale_log_threshold = options.rescale_log_threshold;
    ctl.max_step_fraction = options.max_step_fraction;
    detail::SegmentIntegrator<2, decltype(rhs)> stepper(rhs, {1, 1}, ctl);

    IntegrationResult result;
    detail::CVec<2> y{init.u, init.du};
    double log_scale = init.log_scale;
    const auto& pts = path.waypoints();
    result.waypoint_states.reserve(pts.size());
    result.waypoint_states.push_back(SolutionState{pts.front(), y[0], y[1], log_scale});
    if (options.dense) result.samples.push_back(result.waypoint_states.back());

    for (std::size_t i = 1; i < pts.size(); ++i) {
        stepper.advance(pts[i - 1], pts[i], y, log_scale, [&](cplx z, const detail::CVec<2>& s, double ls) {
            if (options.dense) result.samples.push_back(SolutionState{z, s[0], s[1], ls});
        });
        result.waypoint_states.push_back(SolutionState{pts[i], y[0], y[1], log_scale});
    }
    result.final_state = result.waypoint_states.back();
    result.steps = stepper.steps_taken();
    return result;
}

}  // namespace ptspectra
