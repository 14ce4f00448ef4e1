// ============================================================================
// Direct solves of the perforated torus problems, with the energy and
// Poincare diagnostics used by the scaling studies.
//
//   -Delta u = f,          u = 0 on every hole        (scalar)
//   -Delta v + grad p = g, div v = 0, v = 0 on holes  (Stokes)
//
// Holes enter by exact elimination of solid unknowns, never penalization:
// the scaling studies read sigma_eps exponents off these solutions and a
// penalty term would contaminate them.
//
// Sources: the canonical test sources are a radial C^2 bump and a mirrored
// bump dipole.  The dipole is exactly mean-free and stays compactly
// supported, which is what the borderline two-dimensional regime and every
// hole-free degenerate solve require.
// ============================================================================
#pragma once

#include "perfhom/grid.hpp"
#include "perfhom/lattice.hpp"
#include "perfhom/solvers.hpp"

namespace perfhom {

struct MicroSolution {
  PerforationConfig config;
  bool stokes = true;
  bool holes = true;  // false: degenerate hole-free solve

  StaggeredField v;  // Stokes; zero on solid faces
  ScalarField p;     // Stokes; zero mean over fluid cells
  ScalarField u;     // Poisson; zero on solid cells

  double sigma = 0.0;        // sigma_eps of the config
  double l2 = 0.0;           // ||v|| or ||u||
  double grad = 0.0;         // ||grad v|| or ||grad u||
  double p_l2 = 0.0;         // Stokes only
  double source_norm = 0.0;  // ||g|| or ||f||
  double residual = 0.0;     // relative solver residual
  double div_rel = 0.0;      // Stokes only
  // Weak-form identity |<grad sol, grad sol> - <source, sol>| relative to
  // <source, sol>; solver-tolerance small, recorded on every solve.
  double energy_gap = 0.0;
  long iters = 0;
};

// Solve the perforated problems on cfg's torus grid.  `regime`, when given,
// runs the regime-specific source admissibility checks (SourceInvalid on
// failure); a single config cannot determine its limit regime, so the caller
// supplies the ladder's classification.  `degenerate_hole_free` opts into
// the convention that a hole pattern below the resolution floor means no
// holes at all; without it an unresolved config throws ResolutionError.
MicroSolution solve_perforated_poisson(const PerforationConfig& cfg,
                                       const ScalarField& f,
                                       const RegimeReport* regime = nullptr,
                                       double tol = 1e-11,
                                       bool degenerate_hole_free = false);
MicroSolution solve_perforated_stokes(const PerforationConfig& cfg,
                                      const StaggeredField& g,
                                      const RegimeReport* regime = nullptr,
                                      const StokesOptions& opt = {},
                                      bool degenerate_hole_free = false);

// Largest ||u||/||grad u|| over fluid fields vanishing on the holes:
// 1/sqrt(lambda_min) of the masked Laplacian, by inverse power iteration
// (tolerance on the Rayleigh quotient).  Hole-free configs have the
// constant mode in the kernel: returns an infinite sentinel.
struct PoincareResult {
  double c_p = 0.0;
  double lambda_min = 0.0;
  long iters = 0;
};
PoincareResult poincare_constant(const PerforationConfig& cfg,
                                 double tol = 1e-8, long max_iters = 500);

// Scaled norms against the regime bounds; `flagged` trips when a ratio that
// the bounds say is O(1) exceeds `cap`.
struct EnergyReport {
  double sigma = 0.0;
  double grad_norm = 0.0;
  double l2 = 0.0;
  double v_over_sigma = 0.0;   // sigma^-1 ||v||
  double v_over_sigma2 = 0.0;  // sigma^-2 ||v||
  double l_sobolev = 0.0;      // d = 3: L^6 norm at cell centers, else 0
  double energy_gap = 0.0;
  double source_norm = 0.0;
  double ratio_grad = 0.0;  // ||grad v|| / ((1+sigma)||source||)
  double ratio_l2 = 0.0;    // ||v|| / (sigma(1+sigma)||source||)
  bool flagged = false;
};
EnergyReport energy_report(const MicroSolution& sol, double cap = 100.0);

// Radial C^2 bump (1 - (r/R)^2)^3 of support radius R about `center`,
// sampled at cell centers (scalar) or at the face centers of component
// `axis` (vector).  R defaults to 0.3 L.
ScalarField bump_scalar(const GridSpec& g, double R = -1.0,
                        const std::array<double, 3>& center = {0, 0, 0});
StaggeredField bump_vector(const GridSpec& g, int axis, double R = -1.0,
                           const std::array<double, 3>& center = {0, 0, 0});

// Mirrored-pair dipole: bump at +shift minus bump at -shift along axis 0,
// radius R (default 0.15 L, shift 0.175 L); exactly antisymmetric samples,
// so the discrete mean vanishes to round-off.
ScalarField dipole_scalar(const GridSpec& g, double R = -1.0,
                          double shift = -1.0);
StaggeredField dipole_vector(const GridSpec& g, int axis, double R = -1.0,
                             double shift = -1.0);

}  // namespace perfhom
