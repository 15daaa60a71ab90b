#pragma once

// Dormand–Prince 5(4) integrator for complex-valued systems along a straight
// segment of the complex plane, with PI step control and log-scale
// renormalization of the solution components.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "ptspectra/common.hpp"

namespace ptspectra::detail {

template <std::size_t N>
using CVec = std::array<cplx, N>;

struct StepControl {
    double tol = 1e-12;
    /// Components are renormalized once their magnitude leaves e^{±threshold}.
    double rescale_log_threshold = 30.0;
    /// Largest step as a fraction of the segment length.
    double max_step_fraction = 1.0 / 16.0;
    double min_step_fraction = 1e-14;
    long max_steps = 20'000'000;
};

/// Integrates y' = F(z, y) for z moving along [za, zb].
///
/// `degree[i]` is the homogeneity of component i in the solution u:
/// 1 for u and u', 2 for accumulated quadratic forms such as ∫|u|², 0 for
/// components that must never be rescaled. Renormalization divides each
/// component by s^degree and adds log s to the shared log scale.
template <std::size_t N, class Rhs>
class SegmentIntegrator {
public:
    SegmentIntegrator(Rhs rhs, std::array<int, N> degree, StepControl control)
        : rhs_(std::move(rhs)), degree_(degree), ctl_(control) {}

    long steps_taken() const noexcept { return steps_; }

    template <class Observer>
    void advance(cplx za, cplx zb, CVec<N>& y, double& log_scale, Observer&& observe) {
        const cplx dz = zb - za;
        if (dz == cplx{0.0, 0.0}) return;
        const double seg_len = std::abs(dz);

        auto f = [&](double t, const CVec<N>& state) {
            CVec<N> d = rhs_(za + t * dz, state);
            for (auto& v : d) v *= dz;
            return d;
        };

        double t = 0.0;
        CVec<N> k1 = f(t, y);
        double h = initial_step(y, k1);
        if (last_step_length_ > 0.0) h = std::min(h, last_step_length_ / seg_len);
        h = std::min(h, ctl_.max_step_fraction);
        double err_prev = 1e-4;

        while (t < 1.0) {
            if (++steps_ > ctl_.max_steps) {
                throw IntegrationError("integrate: step budget exhausted", za + t * dz);
            }
            bool last = false;
            if (t + h >= 1.0) {
                h = 1.0 - t;
                last = true;
            }

            CVec<N> ytmp, k2, k3, k4, k5, k6, k7, ynew;
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
            k2 = f(t + c2 * h, ytmp);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            k3 = f(t + c3 * h, ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = f(t + c4 * h, ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = f(t + c5 * h, ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            k6 = f(t + h, ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            const double t_new = last ? 1.0 : t + h;
            k7 = f(t_new, ynew);

            double lin_scale = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                if (degree_[i] == 1) lin_scale = std::max({lin_scale, std::abs(y[i]), std::abs(ynew[i])});
            }
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double floor = 0.0;
                if (degree_[i] == 1) floor = 1e-2 * lin_scale;
                if (degree_[i] == 2) floor = 1e-2 * lin_scale * lin_scale;
                const double sc = ctl_.tol * std::max({std::abs(y[i]), std::abs(ynew[i]), floor,
                                                       std::numeric_limits<double>::min()});
                err = std::max(err, std::abs(e) / sc);
            }
            if (!std::isfinite(err)) {
                throw IntegrationError("integrate: non-finite solution values", za + t * dz);
            }

            if (err <= 1.0) {
                t = t_new;
                y = ynew;
                k1 = k7;
                if (renormalize(y, log_scale)) k1 = f(t, y);
                last_step_length_ = h * seg_len;
                observe(za + t * dz, y, log_scale);
                const double fac = std::clamp(std::pow(err, -kExpo) * std::pow(err_prev, kBeta) * kSafety, 0.2, 10.0);
                err_prev = std::max(err, 1e-4);
                h = std::min(h * fac, ctl_.max_step_fraction);
            } else {
                const double fac = std::max(0.2, kSafety * std::pow(err, -kExpo));
                h *= fac;
                last = false;
            }
            if (t < 1.0 && h < ctl_.min_step_fraction) {
                throw IntegrationError("integrate: step size underflow", za + t * dz);
            }
        }
    }

private:
    double initial_step(const CVec<N>& y, const CVec<N>& dy) const {
        double ymag = 0.0, dmag = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (degree_[i] != 1) continue;
            ymag += std::abs(y[i]);
            dmag += std::abs(dy[i]);
        }
        if (ymag == 0.0 || dmag == 0.0) return ctl_.max_step_fraction;
        return std::min(ctl_.max_step_fraction, 0.02 * ymag / dmag);
    }

    bool renormalize(CVec<N>& y, double& log_scale) const {
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (degree_[i] == 1) m = std::max(m, std::abs(y[i]));
        }
        if (m == 0.0) throw IntegrationError("integrate: solution vanished identically", cplx{});
        const double lm = std::log(m);
        if (std::abs(lm) <= ctl_.rescale_log_threshold) return false;
        for (std::size_t i = 0; i < N; ++i) {
            if (degree_[i] == 1) y[i] /= m;
            if (degree_[i] == 2) y[i] /= m * m;
        }
        log_scale += lm;
        return true;
    }

    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double kBeta = 0.04;
    static constexpr double kExpo = 0.2 - 0.75 * kBeta;
    static constexpr double kSafety = 0.9;

    Rhs rhs_;
    std::array<int, N> degree_;
    StepControl ctl_;
    double last_step_length_ = 0.0;
    long steps_ = 0;
};

}  // namespace ptspectra::detail
