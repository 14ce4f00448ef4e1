// ============================================================
// pressure.hpp -- velocity restriction, pressure extension, frequency split
// ============================================================
//
// restrict_velocity maps a torus velocity field into the perforated domain.
// Away from the lattice of balls B(eps*(x0+k), delta2*eps) the field is kept
// as is; inside each ball the annulus (ball minus obstacle) is re-solved as a
// local Stokes problem with no-slip data on the obstacle, the original trace
// on the ball boundary, and the compensated divergence
//     div w = div u + (1/|annulus|) * sum over obstacle cells of div u,
// which restores the compatibility the no-slip data removed.  delta2 < 1/2
// keeps the balls pairwise disjoint, so the per-hole solves are independent;
// they share the MINRES saddle kernel of the global Stokes solver.
//
// extend_pressure fills each obstacle with the mean of the surrounding
// annulus pressure.  The pair (restriction, extension) realizes the duality
// <grad p~, phi> ~= <grad p, R(phi)> only up to the annulus discretization
// error; extension_duality_residual reports that defect per run rather than
// assuming it small.
//
// freq_split cuts a pressure field at a spectral scale s > 0 using physical
// wavenumbers |xi| = 2*pi*|k|/L and a fixed C^2 quintic-smoothstep profile:
// the low part keeps everything below |xi| = 1/s exactly and nothing above
// 2/s exactly.  The parts partition the input to round-off; their norms feed
// pressure_bounds_report, which checks the regime scaling laws on a ladder.

#ifndef PERFHOM_PRESSURE_HPP
#define PERFHOM_PRESSURE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "perfhom/grid.hpp"
#include "perfhom/lattice.hpp"

namespace perfhom {

struct RestrictionResult {
  StaggeredField v;   // R(u): u outside the balls, local re-solves inside,
                      // zero on all solid faces
  long holes = 0;
  long shortcut_holes = 0;  // holes whose local data already carried no-slip
                            // exactly, so R(u) = u there without a solve
  std::vector<double> local_residual;  // true relative residual per hole
  double max_local_residual = 0.0;
  long iters = 0;  // MINRES iterations summed over all holes

  double norm_l2_in = 0.0;    // ||u||
  double norm_grad_in = 0.0;  // ||grad u||
  double norm_grad_out = 0.0; // ||grad R(u)|| of the zero-extended field
  double norm_div_in = 0.0;   // ||div u|| on the whole torus
  double norm_div_out = 0.0;  // ||div R(u)|| over fluid cells
  double sigma = 0.0;         // sigma_eps of the configuration
  // ||grad R(u)|| / (||grad u|| + ||u|| / sigma); bounded along eps-ladders.
  double bound_ratio = 0.0;
};

// tol is the relative MINRES target per hole; the accepted true residual is
// 10 * tol.  Throws ResolutionError when the annulus spans fewer than 8 cells
// radially or ball patches touch, LocalSolveFailure when a hole's solve
// stalls.
RestrictionResult restrict_velocity(const StaggeredField& u,
                                    const PerforationConfig& cfg,
                                    double tol = 1e-10);

// p~ = p on fluid cells; each obstacle is filled with the mean of p over its
// annulus.  p should be zero-mean over the fluid (not enforced).
ScalarField extend_pressure(const ScalarField& p, const PerforationConfig& cfg);

// | <grad p~, phi> - <grad p, R(phi)> | / (||phi||_W12 * ||p||_2), the
// a-posteriori defect of the extension duality for one test field.
double extension_duality_residual(const ScalarField& p,
                                  const PerforationConfig& cfg,
                                  const StaggeredField& phi);

// Deterministic band-limited test field: per component, six random waves with
// integer wavevectors |k_a| <= kmax, amplitudes damped by 1/(1+|k|^2).
StaggeredField random_smooth_field(const GridSpec& g, std::uint64_t seed,
                                   int kmax = 2);
ScalarField random_smooth_scalar(const GridSpec& g, std::uint64_t seed,
                                 int kmax = 2);

// Spectral projection onto MAC-divergence-free fields on the periodic torus
// (least-squares, componentwise FFT with the exact staggered symbols).
StaggeredField project_div_free(const StaggeredField& v);

struct PressureSplit {
  ScalarField p1;  // low-frequency part, band-limited to |xi| <= 2/s
  ScalarField p2;  // remainder, no energy at |xi| <= 1/s
  double cutoff_scale = 0.0;   // s
  double norm_grad_p1 = 0.0;   // spectral, physical symbol: == sobolev[0]
  double norm_p2 = 0.0;
  // sobolev[m]^2 = sum (1+|xi|^2)^m |xi|^2 |F p|^2 chi(s|xi|)^2, m = 0..3
  std::array<double, 4> sobolev{0.0, 0.0, 0.0, 0.0};
};

// chi(t) = 1 for t <= 1, 0 for t >= 2, quintic smoothstep between; the
// argument is t = s * |xi|.
double freq_cutoff(double t);

PressureSplit freq_split(const ScalarField& p, double s);

struct PressureBoundsReport {
  RegimeLabel label = RegimeLabel::Critical;
  bool pass = false;
  // Scaling branch: supercritical fits log||p2|| against log sigma,
  // subcritical fits log||grad p1|| against log(1/sigma); unused (0) for
  // critical ladders.
  double slope = 0.0;
  double slope_residual = 0.0;
  // Bounded branch max/min: ||grad p1|| (supercritical) or ||p2|| (else).
  double bounded_ratio = 0.0;
  // Critical only: max/min of sobolev[m] across the ladder.
  std::array<double, 4> sobolev_ratio{0.0, 0.0, 0.0, 0.0};
  std::string detail;
};

// Scaling verdict over an eps-ladder of splits (>= 4 rungs).  Pass bands:
// fitted slope within 1 +- 0.3, bounded branches max/min <= 3, critical
// Sobolev ratios <= 5.  All-zero ladders pass trivially.
PressureBoundsReport pressure_bounds_report(
    const std::vector<PressureSplit>& splits, const std::vector<double>& sigma,
    RegimeLabel label);

}  // namespace perfhom

#endif
