#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "ptspectra/common.hpp"

namespace ptspectra {

/// Normalizes an angle into [0, 2π).
double normalize_angle(double theta);

/// Critical ray angles θ_j, j = 0..2n+2, for the potential −(iz)^{2n+1},
/// each normalized to [0, 2π). Throws PreconditionError for n < 1.
std::vector<double> critical_angles(int n);

/// Stokes sector geometry of an odd-degree polynomial potential.
///
/// Sector j is the open wedge between θ_j and θ_{j+1} (indices mod 2n+3).
/// `rotated` shifts every ray by π; this is the geometry when the leading
/// odd coefficient has the opposite sign to the canonical −(iz)^{2n+1}.
class StokesChart {
public:
    /// Throws PreconditionError unless n >= 1 and 0 < epsilon < π/(2n+3).
    StokesChart(int n, double epsilon, bool rotated = false);

    int n() const noexcept { return n_; }
    int sector_count() const noexcept { return 2 * n_ + 3; }
    double epsilon() const noexcept { return epsilon_; }
    bool rotated() const noexcept { return rotated_; }
    double sector_width() const noexcept;
    std::span<const double> thetas() const noexcept { return thetas_; }

    /// Index of the sector that contains the direction `angle` under the
    /// half-open convention [θ_j, θ_{j+1}).
    int sector_of_angle(double angle) const;
    /// The sectors containing the positive and negative real axis.
    int right_hand_sector() const { return sector_of_angle(0.0); }
    int left_hand_sector() const { return sector_of_angle(kPi); }
    /// Bisector direction of sector j, in [0, 2π).
    double sector_center(int j) const;
    /// Signed angular distance of `angle` from the nearest ray of sector j
    /// (positive inside the sector).
    double margin_in_sector(int j, double angle) const;

private:
    int n_;
    double epsilon_;
    bool rotated_;
    std::vector<double> thetas_;
};

struct RegionIndex {
    int sector = 0;
    /// arg z coincides with a critical ray (within 1e-12 rad).
    bool on_critical_ray = false;
    /// z lies in the shrunken sector S_{j,ε}.
    bool in_shrunk_sector = false;
};

/// Locates z in the chart. Throws PreconditionError for z = 0.
RegionIndex region_index(const StokesChart& chart, cplx z);

enum class ARegion { A1, A2, A3, A4, boundary };
enum class BRegion { B1, B2, B3, B4, boundary };

std::string_view to_string(ARegion r);
std::string_view to_string(BRegion r);

/// Labels of the cubic level-set decomposition for w = iz³ − λ.
///
/// A-labels follow the sign of Re w (A4 negative, A1 around the upper
/// imaginary direction, A2 lower left, A3 lower right); B-labels follow
/// Im w (B4 negative, B1 around the positive real axis, B2 upper left,
/// B3 lower left). For Im λ < 0 the labels are those of the mirror point
/// −z̄ for λ̄, and `reflected` is set; the B-side sign then flips.
struct CubicRegionLabel {
    ARegion a_region = ARegion::boundary;
    BRegion b_region = BRegion::boundary;
    bool reflected = false;
};

/// Default relative width of the level-curve band reported as boundary.
inline constexpr double kRegionBoundaryTol = 1e-9;

/// Classifies z for the cubic eigenproblem. Requires Re λ > 0.
CubicRegionLabel classify_cubic_regions(cplx z, cplx lambda,
                                        double boundary_tol = kRegionBoundaryTol);

/// The three roots of iz³ = λ sorted by argument in [0, 2π).
/// Throws PreconditionError for λ = 0.
std::array<cplx, 3> cubic_turning_points(cplx lambda);

}  // namespace ptspectra
