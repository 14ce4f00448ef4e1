// ============================================================
// cell.hpp -- unit-cell correctors and the effective tensor
// ============================================================
//
// On the unit cell Q0 = (-1/2, 1/2)^d with the obstacle eta*T removed,
// the corrector problems
//
//   -Delta w^i + grad q^i = c_eta^2 e^i,  div w^i = 0,  w^i = 0 on eta*T
//   (Stokes), and  -Delta w = c_eta^2, w = 0 on eta*T  (Poisson variant),
//
// with c_eta = |log eta|^{-1/2} (d = 2), eta^{(d-2)/2} (d = 3), have
// periodic solutions whose cell averages define the effective tensor
//
//   A(eta)_ij = c_eta^{-2} <grad w^i, grad w^j> = integral (w^i)_j .
//
// Both routes are computed; their agreement (a discrete weak-form
// identity, exact up to solver tolerance) is enforced.  As eta -> 0 the
// tensors converge; an eta-ladder with Aitken extrapolation estimates
// the limit.  Rescaling x -> x/eps tiles the corrector over a
// perforated torus where it solves the same system with momentum source
// sigma_eps^{-2} e^i and pressure gradient eps^{-1} grad q.

#pragma once

#include <array>
#include <vector>

#include "perfhom/grid.hpp"
#include "perfhom/lattice.hpp"
#include "perfhom/solvers.hpp"

namespace perfhom {

// Scaling constant of the modified cell problem.
// pre: 0 < eta < 1 for d = 2 (log degenerates at 1); 0 < eta <= 1 for d = 3.
double c_eta(int d, double eta);

struct CellSolution {
  int d = 2;
  bool stokes = true;
  double eta = 0.0;
  double c_eta = 0.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};  // hole center in Q0
  GridSpec g;  // unit-cell grid: L = 1, N = n
  CellMask cmask;
  FaceMask fmask;

  std::array<StaggeredField, 3> w;  // correctors (Stokes), i < d
  std::array<ScalarField, 3> q;     // pressures, zero mean over fluid cells
  ScalarField w_scalar;             // corrector (Poisson)

  Mat3 A_energy{};  // c_eta^{-2} <grad w^i, grad w^j>
  Mat3 A_avg{};     // integral (w^i)_j
  Mat3 A{};         // mean of the two routes
  std::array<double, 3> qbar{};  // integral of c_eta^{-1} q^i
  double wbar_scalar = 0.0;      // integral of w (Poisson)
  double A_energy_scalar = 0.0;  // c_eta^{-2} <grad w, grad w> (Poisson)
  double A_scalar = 0.0;         // mean of the two scalar routes

  // Size ratios expected to stay O(1) along an eta-ladder:
  // |grad w|/c_eta, |w|, |q|/c_eta per corrector (L2 norms).
  std::array<double, 3> grad_ratio{}, w_norm{}, q_ratio{};
  double discrepancy = 0.0;  // max relative gap between the two A routes
  long iters = 0;
};

// Solve the corrector problems on an n^d unit-cell grid.  `min_cells`
// is the resolution floor (grid cells across the hole diameter; the
// default matches build_masks); pass a smaller value deliberately when
// measuring convergence from under-resolved grids.  `center` moves the
// hole off the origin (e.g. by 1/(2n) to align a tiny hole with a cell
// center on an even grid).  Throws ResolutionError / NonConvergence.
CellSolution solve_cell_stokes(int d, double eta, const HoleModel& hole, int n,
                               const StokesOptions& opt = {},
                               long min_cells = 8,
                               const std::array<double, 3>& center = {0, 0, 0});
CellSolution solve_cell_poisson(int d, double eta, const HoleModel& hole, int n,
                                double tol = 1e-11, long min_cells = 8,
                                const std::array<double, 3>& center = {0, 0, 0});

// Mask of the single centered obstacle eta*T on the unit-cell grid.
CellMask build_unit_cell_mask(int d, double eta, const HoleModel& hole, int n,
                              long min_cells = 8,
                              const std::array<double, 3>& center = {0, 0, 0});

// Re-derive the tensor from a solution, enforcing route agreement.
// Throws DiscrepancyError if the two formulas differ by > 1e-4 relative.
struct Permeability {
  Mat3 A{};
  double scalar = 0.0;
  double discrepancy = 0.0;
};
Permeability permeability(const CellSolution& sol);

// Solve along a decreasing eta-ladder at fixed n and extrapolate the
// limit tensor (Aitken on the last three rungs; falls back to the last
// value when the differences do not contract).
struct TensorLimit {
  std::vector<double> etas;
  std::vector<Mat3> A_eta;
  std::vector<double> wbar_eta;  // Poisson path
  Mat3 A{};
  double wbar = 0.0;
  double extrap_gap = 0.0;  // |A_last - A_limit| / |A_limit|
  bool monotone = true;     // successive differences shrink along the ladder
};
TensorLimit extrapolate_tensor(int d, const HoleModel& hole, int n,
                               const std::vector<double>& etas, bool stokes,
                               long min_cells = 8);

// Tile a unit-cell solution over the torus of `cfg`:
// w_out(x) = w(x/eps - k), matching the perforation lattice.  Requires
// cfg.n == sol.g.N and an integer tiling offset
// n*((1 - m)/2 - x0 + center) per axis (this is what makes torus grid
// cells land on cell grid cells; note m even with n odd misaligns even
// for x0 = center = 0); throws GridMismatch otherwise.
struct LatticeCorrector {
  std::array<StaggeredField, 3> w;
  std::array<ScalarField, 3> q;
  ScalarField w_scalar;
};
LatticeCorrector rescale_corrector(const CellSolution& sol,
                                   const PerforationConfig& cfg);

}  // namespace perfhom
