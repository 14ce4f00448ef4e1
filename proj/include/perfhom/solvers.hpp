// Iterative solvers for the masked MAC systems.
//
// solve_spd: preconditioned conjugate gradients for symmetric positive
// (semi-)definite operators given as callbacks.  Masked operators keep solid
// entries identically zero, so the iteration lives on the fluid subspace
// automatically; singular directions (means) are handled by an optional
// projection folded into the preconditioner step.
//
// solve_stokes_masked: preconditioned MINRES on the symmetric indefinite MAC
// Stokes system
//     [ -lap   grad ] [v]   [g]
//     [ grad^T  0   ] [p] = [0],    grad^T = -div,
// with homogeneous Dirichlet data on the solid set imposed by elimination.
// Preconditioner: block diagonal, FFT inverse of the periodic shifted
// Laplacian per velocity component and identity on the pressure.  The shift
// stands in for the Dirichlet spectral gap of the perforation (1/sigma_eps^2
// scale); callers that know sigma pass it.

#ifndef PERFHOM_SOLVERS_HPP
#define PERFHOM_SOLVERS_HPP

#include <functional>
#include <vector>

#include "perfhom/grid.hpp"

namespace perfhom {

using VecOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;
using VecProj = std::function<void(std::vector<double>&)>;

struct SolveStats {
  long iters = 0;
  double residual = 0.0;  // relative to ||b||
  bool converged = false;
};

struct SpdOptions {
  double tol = 1e-10;
  long max_iters = 1000;
  VecOp precond;    // SPD approximation of A^{-1}; empty = identity
  VecProj project;  // applied to b and to preconditioned residuals
  bool throw_on_fail = true;
};

SolveStats solve_spd(const VecOp& A, const std::vector<double>& b,
                     std::vector<double>& x, const SpdOptions& opt);

// FFT-diagonal inverse of (-lap_periodic + tau) on one component lattice,
// zeroing solid entries afterwards.  SPD on the fluid subspace.
VecOp make_fft_shifted_inverse(const GridSpec& g, double tau,
                               const std::vector<std::uint8_t>* solid);

// Remove the mean of entries where solid == 0 (whole vector if null).
void remove_fluid_mean(std::vector<double>& x,
                       const std::vector<std::uint8_t>* solid);

struct PoissonResult {
  ScalarField u;
  SolveStats stats;
};

// -lap u = f on fluid cells, u = 0 on solid cells.  With an empty mask the
// operator is singular on constants: f must then be mean-free (checked) and
// the mean-free solution is returned.
PoissonResult solve_poisson_masked(const CellMask& mask, const ScalarField& f,
                                   double tol, double precond_shift,
                                   long max_iters = 0, bool throw_on_fail = true);

struct StokesOptions {
  double tol = 1e-11;        // MINRES relative preconditioned-residual target
  double tol_div = 1e-10;    // post-check: ||div v|| <= tol_div * ||v|| (h-norms)
  double tol_mom = 1e-9;     // post-check: ||momentum residual|| <= tol_mom * ||g||
  long max_iters = 0;        // 0 = 60 * N
  double precond_shift = -1.0;  // tau; < 0 = (2 pi / L)^2
  bool throw_on_fail = true;
};

struct StokesSolveResult {
  StaggeredField v;  // zero on solid faces
  ScalarField p;     // zero on solid cells, zero mean over fluid cells
  long iters = 0;
  double div_rel = 0.0;
  double mom_rel = 0.0;
  bool converged = false;
};

StokesSolveResult solve_stokes_masked(const CellMask& cmask, const FaceMask& fmask,
                                      const StaggeredField& gforce,
                                      const StokesOptions& opt);

// One preconditioned-MINRES cycle on a symmetric (possibly indefinite)
// operator K with a symmetric positive (semi-)definite preconditioner Minv,
// continuing from the incoming x.  Stops when the preconditioned residual
// estimate drops below tol relative to its value at entry to the cycle, or
// when `iters` (accumulated across cycles) reaches maxit.  Returns the final
// relative estimate; callers verify true residuals themselves.  This is the
// saddle-point kernel shared by the global Stokes solve and the per-hole
// restriction solves.
double minres_cycle(const VecOp& K, const VecOp& Minv, const std::vector<double>& b,
                    std::vector<double>& x, double tol, long maxit, long& iters);

}  // namespace perfhom

#endif
