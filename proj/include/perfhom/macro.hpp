// ============================================================================
// Constant-coefficient limit systems on the periodic torus, solved spectrally.
//
// Every system here has constant coefficients, so diagonalizing the discrete
// operators in Fourier space solves it to round-off.  The solvers use the MAC
// difference symbols (grad_sym / lap_sym from fft.hpp), not the continuum
// wavenumbers: this makes the discrete divergence of every vector solution
// vanish identically and lets hole-free direct solves agree with these to
// round-off rather than to discretization error.
//
// Systems:
//   Darcy            v = A(g - grad p),  div v = 0
//   Stokes-Brinkman  -lap v + grad p + s^-2 A^-1 v = g,  div v = 0
//   Stokes           -lap v + grad p = g,  div v = 0
//   Laplace-Brinkman -lap u + s^-2 wbar^-1 u = f
//   Poisson          -lap u = f          (mean-free f, zero-mean u)
//   pointwise        u = wbar f
//
// Tensor convention: a d x d coefficient matrix acts on a staggered field
// index-aligned, component arrays combined at equal multi-index.  This
// commutes with the per-array FFT, which is what makes the per-mode systems
// block-diagonal.
//
// Torus zero mode: gradient fields have no zero mode, so the mean of a
// momentum source must be carried by the remaining terms.  Darcy and
// Brinkman absorb it (v(0) = A g(0) resp. s^2 A g(0)); Stokes and the
// Poisson solve cannot, and reject sources whose mean is non-negligible
// with ZeroModeError.  A round-off-level mean is projected away and its
// magnitude recorded in the result; the Brinkman-type solves apply the
// same clamp before amplifying the mean by s^2 so that accumulation noise
// in a nominally mean-free source cannot surface as a spurious constant.
// ============================================================================
#pragma once

#include "perfhom/grid.hpp"

namespace perfhom {

enum class MacroSystem {
  Darcy,
  StokesBrinkman,
  Stokes,
  PoissonPointwise,
  LaplaceBrinkman,
  Poisson,
};

struct MacroSolution {
  GridSpec g;
  MacroSystem system = MacroSystem::Poisson;
  bool vector = false;  // true: (v, p) populated; false: u populated

  StaggeredField v;
  ScalarField p;  // exact zero-mean gauge
  ScalarField u;  // Poisson branch: exact zero mean

  // Post-solve checks, measured with the discrete operators in h-weighted
  // norms: ||div v|| / ||v|| and ||residual|| / ||source||.
  double div_rel = 0.0;
  double residual_rel = 0.0;
  // Magnitude of the source mean that was projected out (per-component max);
  // nonzero only when a round-off-level incompatible mean was dropped.
  double zero_mode_dropped = 0.0;
};

// ---------------------------------------------------------------------------
// Vector systems.  A is used through its leading d x d block and must be
// symmetric positive definite (BadConfig otherwise).

// Darcy: p solves -div(A grad p) = -div(A g), then v = A(g - grad p).
// Mean flow v(0) = A g(0) is allowed; div v = 0 to round-off.
MacroSolution solve_darcy(const Mat3& A, const StaggeredField& g);

// Stokes-Brinkman: -lap v + grad p + sigma_star^-2 A^-1 v = g, div v = 0.
// Per mode k != 0 a (d+1) x (d+1) complex system; v(0) = sigma_star^2 A g(0).
MacroSolution solve_brinkman(const Mat3& A, double sigma_star,
                             const StaggeredField& g);

// Stokes: -lap v + grad p = g, div v = 0, v(0) = 0 by gauge.
// ZeroModeError if the source mean (its divergence-free zero mode) is
// non-negligible relative to ||g||.
MacroSolution solve_stokes_macro(const StaggeredField& g);

// ---------------------------------------------------------------------------
// Scalar systems.

// -lap u + sigma_star^-2 wbar^-1 u = f.  Invertible zero mode:
// u(0) = sigma_star^2 wbar f(0).
MacroSolution solve_laplace_brinkman(double wbar, double sigma_star,
                                     const ScalarField& f);

// -lap u = f with zero-mean gauge; ZeroModeError on non-mean-free f.
MacroSolution solve_poisson_macro(const ScalarField& f);

// Pointwise limit u = wbar f (no equation to solve).
MacroSolution poisson_pointwise(double wbar, const ScalarField& f);

}  // namespace perfhom
