#include "ptspectra/stokes_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ptspectra {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kRayTol = 1e-12;

}  // namespace

double normalize_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    return t;
}

std::vector<double> critical_angles(int n) {
    if (n < 1) throw PreconditionError("critical_angles: degree index n must be >= 1");
    const double denom = 2.0 * n + 3.0;
    const double offset = (n % 2 == 0) ? -kPi / 2.0 : kPi / 2.0;
    std::vector<double> thetas(static_cast<std::size_t>(2 * n + 3));
    for (int j = 0; j < 2 * n + 3; ++j) {
        thetas[static_cast<std::size_t>(j)] = normalize_angle((kTwoPi * j + offset) / denom);
    }
    return thetas;
}

StokesChart::StokesChart(int n, double epsilon, bool rotated)
    : n_(n), epsilon_(epsilon), rotated_(rotated), thetas_(critical_angles(n)) {
    if (!(epsilon > 0.0 && epsilon < kPi / (2.0 * n + 3.0))) {
        throw PreconditionError("StokesChart: epsilon must lie in (0, pi/(2n+3))");
    }
    if (rotated_) {
        for (double& t : thetas_) t = normalize_angle(t + kPi);
    }
}

double StokesChart::sector_width() const noexcept { return kTwoPi / sector_count(); }

int StokesChart::sector_of_angle(double angle) const {
    const double a = normalize_angle(angle);
    const double width = sector_width();
    int best = 0;
    double best_offset = kTwoPi;
    for (int j = 0; j < sector_count(); ++j) {
        const double d = normalize_angle(a - thetas_[static_cast<std::size_t>(j)]);
        if (d < width && d < best_offset) {
            best = j;
            best_offset = d;
        }
    }
    return best;
}

double StokesChart::sector_center(int j) const {
    const int m = ((j % sector_count()) + sector_count()) % sector_count();
    return normalize_angle(thetas_[static_cast<std::size_t>(m)] + 0.5 * sector_width());
}

double StokesChart::margin_in_sector(int j, double angle) const {
    const int m = ((j % sector_count()) + sector_count()) % sector_count();
    const double width = sector_width();
    const double d = normalize_angle(angle - thetas_[static_cast<std::size_t>(m)]);
    if (d <= width) return std::min(d, width - d);
    return -std::min(d - width, kTwoPi - d);
}

RegionIndex region_index(const StokesChart& chart, cplx z) {
    if (z == cplx{0.0, 0.0}) throw PreconditionError("region_index: z = 0 has no sector");
    const double a = normalize_angle(std::arg(z));
    RegionIndex out;
    out.sector = chart.sector_of_angle(a);
    for (double t : chart.thetas()) {
        const double d = normalize_angle(a - t);
        if (std::min(d, kTwoPi - d) <= kRayTol) out.on_critical_ray = true;
    }
    out.in_shrunk_sector =
        !out.on_critical_ray && chart.margin_in_sector(out.sector, a) > chart.epsilon();
    return out;
}

std::string_view to_string(ARegion r) {
    switch (r) {
        case ARegion::A1: return "A1";
        case ARegion::A2: return "A2";
        case ARegion::A3: return "A3";
        case ARegion::A4: return "A4";
        case ARegion::boundary: return "boundary";
    }
    return "boundary";
}

std::string_view to_string(BRegion r) {
    switch (r) {
        case BRegion::B1: return "B1";
        case BRegion::B2: return "B2";
        case BRegion::B3: return "B3";
        case BRegion::B4: return "B4";
        case BRegion::boundary: return "boundary";
    }
    return "boundary";
}

CubicRegionLabel classify_cubic_regions(cplx z, cplx lambda, double boundary_tol) {
    if (!(lambda.real() > 0.0)) {
        throw PreconditionError("classify_cubic_regions: requires Re(lambda) > 0");
    }
    if (lambda.imag() < 0.0) {
        CubicRegionLabel mirrored = classify_cubic_regions(-std::conj(z), std::conj(lambda), boundary_tol);
        mirrored.reflected = true;
        return mirrored;
    }

    const double r = std::abs(z);
    const cplx w = kI * z * z * z - lambda;
    const double tol = boundary_tol * (1.0 + r * r * r + std::abs(lambda));
    const double theta = normalize_angle(std::arg(z));
    const double sixth = kPi / 3.0;

    CubicRegionLabel label;
    if (std::abs(w.real()) < tol) {
        label.a_region = ARegion::boundary;
    } else if (w.real() < 0.0) {
        label.a_region = ARegion::A4;
    } else {
        // Re w > 0 forces sin 3θ < 0: θ in (π/3, 2π/3), (π, 4π/3) or (5π/3, 2π).
        switch (static_cast<int>(std::floor(theta / sixth))) {
            case 1: label.a_region = ARegion::A1; break;
            case 3: label.a_region = ARegion::A2; break;
            case 5: label.a_region = ARegion::A3; break;
            default: label.a_region = ARegion::boundary; break;
        }
    }

    if (std::abs(w.imag()) < tol) {
        label.b_region = BRegion::boundary;
    } else if (w.imag() < 0.0) {
        label.b_region = BRegion::B4;
    } else {
        // Im w > 0 forces cos 3θ > 0: θ in (−π/6, π/6), (π/2, 5π/6) or (7π/6, 3π/2).
        const double shifted = normalize_angle(theta + kPi / 6.0);
        switch (static_cast<int>(std::floor(shifted / sixth))) {
            case 0: label.b_region = BRegion::B1; break;
            case 2: label.b_region = BRegion::B2; break;
            case 4: label.b_region = BRegion::B3; break;
            default: label.b_region = BRegion::boundary; break;
        }
    }
    return label;
}

std::array<cplx, 3> cubic_turning_points(cplx lambda) {
    if (lambda == cplx{0.0, 0.0}) throw PreconditionError("cubic_turning_points: lambda = 0");
    const cplx rhs = -kI * lambda;  // z³ = −iλ
    const double radius = std::cbrt(std::abs(rhs));
    const double base = std::arg(rhs) / 3.0;
    std::array<cplx, 3> roots;
    for (int k = 0; k < 3; ++k) roots[static_cast<std::size_t>(k)] = std::polar(radius, base + 2.0 * kPi * k / 3.0);
    auto key = [](cplx z) {
        const double a = normalize_angle(std::arg(z));
        return a > kTwoPi - kRayTol ? 0.0 : a;
    };
    std::sort(roots.begin(), roots.end(), [&](cplx a, cplx b) { return key(a) < key(b); });
    return roots;
}

}  // namespace ptspectra
