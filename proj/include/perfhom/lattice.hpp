// ============================================================
// lattice.hpp -- perforation lattice geometry
// ============================================================
//
// A periodic torus [-m*eps/2, m*eps/2)^d carries one hole per lattice
// cell: cell k (k integer vector) is centered at eps*k and holds the
// solid obstacle  eps*(x0 + k) + a_eps*T,  where T is a fixed model
// shape contained in the ball of radius delta2 < 1/2.  The regime of
// the family (eps, a_eps) is measured by the ratio
//
//   sigma_eps = sqrt(eps^d / a_eps^(d-2))        (d = 3)
//   sigma_eps = eps * sqrt(|log(a_eps / eps)|)   (d = 2)
//
// which tends to 0 (holes dominate), a positive constant, or infinity
// (holes negligible) along a schedule a_eps = a(eps).
//
// Masks are rasterized by center sampling: a cell is solid iff its
// center lies inside some obstacle.  Faces inherit solidity from
// either adjacent cell (see face_mask_from_cells).

#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "perfhom/errors.hpp"
#include "perfhom/grid.hpp"

namespace perfhom {

enum class HoleShape { Ball, Superellipse };

// Model hole T in unit coordinates.  Ball: |y| <= r.  Superellipse:
// sum_a |y_a / semi_a|^power <= 1 (power >= 2).  delta1/delta2 pin the
// required sandwich B(0, delta1) <= T <= B(0, delta2), delta2 < 1/2.
struct HoleModel {
  HoleShape shape = HoleShape::Ball;
  double r = 0.25;
  std::array<double, 3> semi{0.25, 0.25, 0.25};
  double power = 2.0;
  double delta1 = 0.2;
  double delta2 = 0.3;

  bool inside(const std::array<double, 3>& y, int d) const;
  double r_in(int d) const;   // radius of the largest centered ball inside T
  double r_out(int d) const;  // radius of the smallest centered ball containing T
  double semi_extent(int axis) const;  // half-width of T along an axis
};

void validate(const HoleModel& hole, int d);

// Full description of one perforated torus.
struct PerforationConfig {
  int d = 2;
  double eps = 0.25;
  double a_eps = 0.0625;
  std::array<double, 3> x0{0.0, 0.0, 0.0};  // hole-center offset, in (-1/2,1/2)^d
  HoleModel hole;
  int m = 4;                 // lattice cells per axis; torus side L = m*eps
  int n = 16;                // grid cells per lattice cell; N = m*n
  long min_hole_cells = 8;   // resolution floor (grid cells across a_eps*delta2)

  GridSpec grid() const { return GridSpec{d, m * n, m * eps}; }
  double h() const { return eps / n; }
};

// Everything except the resolution floor (shape sandwich, parities,
// ranges).  Throws BadConfig.
void validate_geometry(const PerforationConfig& cfg);
// Geometry plus the resolution floor; throws ResolutionError when the
// hole is too small for the grid.
void validate(const PerforationConfig& cfg);
// True iff the floor holds (a_eps*delta2 >= min_hole_cells*h and the
// per-axis hole extent covers min_hole_cells cells).
bool holes_resolved(const PerforationConfig& cfg);

enum class RegimeLabel { Supercritical, Critical, Subcritical };

struct RegimeReport {
  double sigma_eps = 0.0;  // value at the smallest probed eps
  RegimeLabel label = RegimeLabel::Critical;
  double sigma_star = 0.0;  // finite positive limit; meaningful iff Critical
};

double sigma_eps(int d, double eps, double a_eps);

// Probe a schedule a(eps) at >= 4 strictly decreasing eps values and
// classify by the trend of sigma_eps: relative variation < 1e-6 means
// Critical (sigma_star = mean); strict decrease means Supercritical;
// strict increase means Subcritical.  Throws AmbiguousRegime otherwise.
RegimeReport classify_regime(int d, const std::function<double(double)>& a_of_eps,
                             const std::vector<double>& probe_eps);

// Rasterized solid masks.  Center cell solid iff its center lies in a
// (periodically wrapped) obstacle; faces solid iff either neighbor cell
// is.  Throws ResolutionError below the floor or if the solid set
// rasterizes empty.
CellMask build_cell_mask(const PerforationConfig& cfg);
std::pair<CellMask, FaceMask> build_masks(const PerforationConfig& cfg);

struct SourceVerdict {
  bool valid = true;
  std::string reason;
};

// In the subcritical planar regime the limit problem only sees mean-free
// compactly supported forcing; elsewhere any bounded grid field is fine.
// "Compact" here: at least one empty cell layer against the torus seam.
SourceVerdict validate_source(const ScalarField& f, const RegimeReport& regime,
                              int d);
SourceVerdict validate_source(const StaggeredField& f, const RegimeReport& regime,
                              int d);

// Diagnostics used by tests: mean solid volume fraction per lattice
// cell, and the number of connected solid components (face adjacency,
// periodic wrap) -- a resolved perforation has exactly m^d.
double solid_fraction_per_lattice_cell(const CellMask& mask,
                                       const PerforationConfig& cfg);
long solid_component_count(const CellMask& mask);

}  // namespace perfhom
