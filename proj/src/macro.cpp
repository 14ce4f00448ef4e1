// ============================================================================
// Spectral solvers for the constant-coefficient limit systems.
//
// All solves diagonalize the MAC difference symbols per Fourier mode; the
// only per-mode coupling is the (d+1) x (d+1) saddle system of the Brinkman
// solve, factored densely.  Coefficient matrices act index-aligned on the
// component arrays, which commutes with the per-array transforms.
// ============================================================================
#include "perfhom/macro.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>

#include "perfhom/errors.hpp"
#include "perfhom/fft.hpp"
#include "perfhom/operators.hpp"

namespace perfhom {

namespace {

using cplx = std::complex<double>;

// Relative tolerance on an incompatible source mean: below it the mean is
// projected out and recorded, above it the solve refuses.
constexpr double kMeanTol = 1e-10;

// A source mean this small (relative to the source RMS) is accumulation
// round-off, not data.  The Brinkman-type zero modes multiply the mean by
// sigma_star^2, which would amplify that noise into a visible spurious
// constant, so means below this threshold are dropped and recorded.
constexpr double kNoiseMeanTol = 1e-13;

void require_finite(const std::vector<double>& x, const char* where) {
  for (double t : x)
    if (!std::isfinite(t))
      throw SourceInvalid(std::string(where) + ": source has non-finite values");
}

void require_finite(const StaggeredField& f, const char* where) {
  for (int a = 0; a < f.g.d; ++a) require_finite(f.comp[a], where);
}

// Leading d x d block as an Eigen matrix, validated symmetric positive
// definite.
Eigen::MatrixXd spd_block(const Mat3& A, int d, const char* where) {
  Eigen::MatrixXd M(d, d);
  double amax = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      M(a, b) = A[a][b];
      amax = std::max(amax, std::fabs(A[a][b]));
    }
  if (amax == 0.0) throw BadConfig(std::string(where) + ": zero tensor");
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (std::fabs(M(a, b) - M(b, a)) > 1e-12 * amax)
        throw BadConfig(std::string(where) + ": tensor not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw BadConfig(std::string(where) + ": tensor not positive definite");
  return M;
}

double component_mean(const std::vector<double>& x) {
  return x.empty() ? 0.0 : pairwise_sum(x) / static_cast<double>(x.size());
}

SpectralField forward_comp(const GridSpec& gs, const std::vector<double>& x) {
  ScalarField t(gs);
  t.v = x;
  return fft_forward(t);
}

// Exact zero-mean gauge after the inverse transform.
void subtract_mean(ScalarField& f) {
  const double m = component_mean(f.v);
  for (double& t : f.v) t -= m;
}

// Momentum residual of -lap v + grad p + B v = g in the h-weighted norm,
// relative to ||g||.  B acts index-aligned; pass a 0x0 matrix for none.
double momentum_residual(const StaggeredField& v, const ScalarField& p,
                         const Eigen::MatrixXd& B, const StaggeredField& g) {
  const GridSpec& gs = v.g;
  StaggeredField lv(gs), gp(gs);
  lap(v, nullptr, lv);
  grad(p, nullptr, gp);
  StaggeredField r(gs);
  const long n = gs.cells();
  for (int a = 0; a < gs.d; ++a)
    for (long i = 0; i < n; ++i) {
      double br = 0.0;
      if (B.size() > 0)
        for (int b = 0; b < gs.d; ++b) br += B(a, b) * v.comp[b][i];
      r.comp[a][i] = -lv.comp[a][i] + gp.comp[a][i] + br - g.comp[a][i];
    }
  const double gn = l2_norm(g);
  const double rn = l2_norm(r);
  return (gn > 0.0) ? rn / gn : rn;
}

void finish_vector(MacroSolution& sol, const StaggeredField& g,
                   const Eigen::MatrixXd& B) {
  ScalarField dv(sol.g);
  divergence(sol.v, nullptr, dv);
  const double vn = l2_norm(sol.v);
  const double dn = l2_norm(dv);
  sol.div_rel = (vn > 0.0) ? dn / vn : dn;
  sol.residual_rel = momentum_residual(sol.v, sol.p, B, g);
}

// Checks the source mean against the incompatibility tolerance, removes it,
// and returns the projected copy used for solving and residuals.
StaggeredField drop_mean_or_throw(const StaggeredField& g, double& dropped,
                                  const char* where) {
  const GridSpec& gs = g.g;
  const double rms = l2_norm(g) / std::pow(gs.L, 0.5 * gs.d);
  StaggeredField out = g;
  dropped = 0.0;
  for (int a = 0; a < gs.d; ++a) {
    const double m = component_mean(g.comp[a]);
    dropped = std::max(dropped, std::fabs(m));
    for (double& t : out.comp[a]) t -= m;
  }
  if (dropped > kMeanTol * std::max(rms, std::numeric_limits<double>::min()))
    throw ZeroModeError(std::string(where) +
                        ": source mean (divergence-free zero mode) is not "
                        "negligible; no torus solution with zero mean flow");
  return out;
}

}  // namespace

// ----------------------------------------------------------------------------
// Darcy: per mode p = (G* A g) / (G* A G), v = A(g - G p).

MacroSolution solve_darcy(const Mat3& A, const StaggeredField& g) {
  const GridSpec& gs = g.g;
  require_finite(g, "solve_darcy");
  const Eigen::MatrixXd Ad = spd_block(A, gs.d, "solve_darcy");
  const int d = gs.d;

  SpectralField ghat[3], vhat[3];
  for (int a = 0; a < d; ++a) {
    ghat[a] = forward_comp(gs, g.comp[a]);
    vhat[a] = SpectralField(gs);
  }
  SpectralField phat(gs);

  for_each_mode(gs, [&](const ModeInfo& m) {
    cplx gh[3], p(0.0, 0.0);
    for (int a = 0; a < d; ++a) gh[a] = ghat[a].c[m.idx];
    if (m.idx != 0) {
      cplx num(0.0, 0.0);
      double den = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          num += std::conj(m.grad_sym[a]) * Ad(a, b) * gh[b];
          den += std::real(std::conj(m.grad_sym[a]) * Ad(a, b) *
                           m.grad_sym[b]);
        }
      if (!(den > 0.0))
        throw LocalSolveFailure("solve_darcy: degenerate mode symbol");
      p = num / den;
    }
    phat.c[m.idx] = p;
    for (int a = 0; a < d; ++a) {
      cplx va(0.0, 0.0);
      for (int b = 0; b < d; ++b)
        va += Ad(a, b) * (gh[b] - m.grad_sym[b] * p);
      vhat[a].c[m.idx] = va;
    }
  });

  MacroSolution sol;
  sol.g = gs;
  sol.system = MacroSystem::Darcy;
  sol.vector = true;
  sol.v = StaggeredField(gs);
  for (int a = 0; a < d; ++a) sol.v.comp[a] = fft_inverse(vhat[a]).v;
  sol.p = fft_inverse(phat);
  subtract_mean(sol.p);

  ScalarField dv(gs);
  divergence(sol.v, nullptr, dv);
  const double vn = l2_norm(sol.v);
  const double dn = l2_norm(dv);
  sol.div_rel = (vn > 0.0) ? dn / vn : dn;
  // Substituting p back, the equation residual *is* div v; scale it by the
  // data term div(A g).
  StaggeredField Ag(gs);
  for (int a = 0; a < d; ++a)
    for (long i = 0; i < gs.cells(); ++i) {
      double t = 0.0;
      for (int b = 0; b < d; ++b) t += Ad(a, b) * g.comp[b][i];
      Ag.comp[a][i] = t;
    }
  ScalarField dAg(gs);
  divergence(Ag, nullptr, dAg);
  const double scale = std::max(l2_norm(dAg), vn / gs.L);
  sol.residual_rel = (scale > 0.0) ? dn / scale : dn;
  return sol;
}

// ----------------------------------------------------------------------------
// Stokes-Brinkman: dense (d+1) x (d+1) saddle per nonzero mode.

MacroSolution solve_brinkman(const Mat3& A, double sigma_star,
                             const StaggeredField& g) {
  const GridSpec& gs = g.g;
  require_finite(g, "solve_brinkman");
  if (!(sigma_star > 0.0) || !std::isfinite(sigma_star))
    throw BadConfig("solve_brinkman: sigma_star must be positive");
  const Eigen::MatrixXd Ad = spd_block(A, gs.d, "solve_brinkman");
  const Eigen::MatrixXd Ainv = Ad.inverse();
  const double s2inv = 1.0 / (sigma_star * sigma_star);
  const int d = gs.d;

  SpectralField ghat[3], vhat[3];
  for (int a = 0; a < d; ++a) {
    ghat[a] = forward_comp(gs, g.comp[a]);
    vhat[a] = SpectralField(gs);
  }
  SpectralField phat(gs);

  // Clamp round-off-level means before they hit the sigma_star^2 zero mode.
  const double rms = l2_norm(g) / std::pow(gs.L, 0.5 * gs.d);
  const double nd = static_cast<double>(gs.cells());
  double dropped = 0.0;
  for (int a = 0; a < d; ++a) {
    const double mean = std::real(ghat[a].c[0]) / nd;
    if (std::fabs(mean) <=
        kNoiseMeanTol * std::max(rms, std::numeric_limits<double>::min())) {
      dropped = std::max(dropped, std::fabs(mean));
      ghat[a].c[0] = 0.0;
    }
  }

  Eigen::MatrixXcd M(d + 1, d + 1);
  Eigen::VectorXcd rhs(d + 1), x(d + 1);
  for_each_mode(gs, [&](const ModeInfo& m) {
    if (m.idx == 0) {
      // Equation at the zero mode reduces to s^-2 A^-1 v = g.
      Eigen::VectorXd g0(d);
      for (int a = 0; a < d; ++a) g0(a) = std::real(ghat[a].c[0]);
      const Eigen::VectorXd v0 = (Ad * g0) / s2inv;
      for (int a = 0; a < d; ++a) vhat[a].c[0] = v0(a);
      phat.c[0] = 0.0;
      return;
    }
    M.setZero();
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) M(a, b) = s2inv * Ainv(a, b);
      M(a, a) += m.lap_sym;
      M(a, d) = m.grad_sym[a];
      M(d, a) = std::conj(m.grad_sym[a]);
      rhs(a) = ghat[a].c[m.idx];
    }
    rhs(d) = 0.0;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
    if (!lu.isInvertible())
      throw LocalSolveFailure("solve_brinkman: singular mode system");
    x = lu.solve(rhs);
    for (int a = 0; a < d; ++a) vhat[a].c[m.idx] = x(a);
    phat.c[m.idx] = x(d);
  });

  MacroSolution sol;
  sol.g = gs;
  sol.system = MacroSystem::StokesBrinkman;
  sol.vector = true;
  sol.v = StaggeredField(gs);
  for (int a = 0; a < d; ++a) sol.v.comp[a] = fft_inverse(vhat[a]).v;
  sol.p = fft_inverse(phat);
  subtract_mean(sol.p);
  sol.zero_mode_dropped = dropped;
  finish_vector(sol, g, s2inv * Ainv);
  return sol;
}

// ----------------------------------------------------------------------------
// Stokes: discrete Leray projection.

MacroSolution solve_stokes_macro(const StaggeredField& g) {
  const GridSpec& gs = g.g;
  require_finite(g, "solve_stokes_macro");
  const int d = gs.d;

  MacroSolution sol;
  sol.g = gs;
  sol.system = MacroSystem::Stokes;
  sol.vector = true;
  const StaggeredField gp =
      drop_mean_or_throw(g, sol.zero_mode_dropped, "solve_stokes_macro");

  SpectralField ghat[3], vhat[3];
  for (int a = 0; a < d; ++a) {
    ghat[a] = forward_comp(gs, gp.comp[a]);
    vhat[a] = SpectralField(gs);
  }
  SpectralField phat(gs);

  for_each_mode(gs, [&](const ModeInfo& m) {
    if (m.idx == 0) {
      for (int a = 0; a < d; ++a) vhat[a].c[0] = 0.0;
      phat.c[0] = 0.0;
      return;
    }
    cplx num(0.0, 0.0);
    for (int a = 0; a < d; ++a)
      num += std::conj(m.grad_sym[a]) * ghat[a].c[m.idx];
    const cplx p = num / m.lap_sym;
    phat.c[m.idx] = p;
    for (int a = 0; a < d; ++a)
      vhat[a].c[m.idx] = (ghat[a].c[m.idx] - m.grad_sym[a] * p) / m.lap_sym;
  });

  sol.v = StaggeredField(gs);
  for (int a = 0; a < d; ++a) sol.v.comp[a] = fft_inverse(vhat[a]).v;
  sol.p = fft_inverse(phat);
  subtract_mean(sol.p);
  finish_vector(sol, gp, Eigen::MatrixXd());
  return sol;
}

// ----------------------------------------------------------------------------
// Scalar systems.

MacroSolution solve_laplace_brinkman(double wbar, double sigma_star,
                                     const ScalarField& f) {
  require_finite(f.v, "solve_laplace_brinkman");
  if (!(wbar > 0.0) || !std::isfinite(wbar))
    throw BadConfig("solve_laplace_brinkman: wbar must be positive");
  if (!(sigma_star > 0.0) || !std::isfinite(sigma_star))
    throw BadConfig("solve_laplace_brinkman: sigma_star must be positive");
  const double shift = 1.0 / (sigma_star * sigma_star * wbar);

  MacroSolution sol;
  sol.g = f.g;
  sol.system = MacroSystem::LaplaceBrinkman;

  SpectralField fh = fft_forward(f);
  // Same round-off-mean clamp as the vector Brinkman zero mode.
  const double rms = l2_norm(f) / std::pow(f.g.L, 0.5 * f.g.d);
  const double mean = std::real(fh.c[0]) / static_cast<double>(f.g.cells());
  if (std::fabs(mean) <=
      kNoiseMeanTol * std::max(rms, std::numeric_limits<double>::min())) {
    sol.zero_mode_dropped = std::fabs(mean);
    fh.c[0] = 0.0;
  }
  for_each_mode(f.g, [&](const ModeInfo& m) {
    fh.c[m.idx] /= (m.lap_sym + shift);
  });
  sol.u = fft_inverse(fh);

  ScalarField lu_(f.g);
  lap(sol.u, nullptr, lu_);
  ScalarField r(f.g);
  for (long i = 0; i < f.g.cells(); ++i)
    r.v[i] = -lu_.v[i] + shift * sol.u.v[i] - f.v[i];
  const double fn = l2_norm(f);
  const double rn = l2_norm(r);
  sol.residual_rel = (fn > 0.0) ? rn / fn : rn;
  return sol;
}

MacroSolution solve_poisson_macro(const ScalarField& f) {
  require_finite(f.v, "solve_poisson_macro");
  const GridSpec& gs = f.g;

  MacroSolution sol;
  sol.g = gs;
  sol.system = MacroSystem::Poisson;

  const double m = component_mean(f.v);
  const double rms = l2_norm(f) / std::pow(gs.L, 0.5 * gs.d);
  sol.zero_mode_dropped = std::fabs(m);
  if (sol.zero_mode_dropped >
      kMeanTol * std::max(rms, std::numeric_limits<double>::min()))
    throw ZeroModeError(
        "solve_poisson_macro: source must be mean-free on the torus");
  ScalarField fp = f;
  for (double& t : fp.v) t -= m;

  SpectralField fh = fft_forward(fp);
  for_each_mode(gs, [&](const ModeInfo& m2) {
    fh.c[m2.idx] = (m2.idx == 0) ? 0.0 : fh.c[m2.idx] / m2.lap_sym;
  });
  sol.u = fft_inverse(fh);
  subtract_mean(sol.u);

  ScalarField lu_(gs);
  lap(sol.u, nullptr, lu_);
  ScalarField r(gs);
  for (long i = 0; i < gs.cells(); ++i) r.v[i] = -lu_.v[i] - fp.v[i];
  const double fn = l2_norm(fp);
  const double rn = l2_norm(r);
  sol.residual_rel = (fn > 0.0) ? rn / fn : rn;
  return sol;
}

MacroSolution poisson_pointwise(double wbar, const ScalarField& f) {
  require_finite(f.v, "poisson_pointwise");
  if (!(wbar > 0.0) || !std::isfinite(wbar))
    throw BadConfig("poisson_pointwise: wbar must be positive");
  MacroSolution sol;
  sol.g = f.g;
  sol.system = MacroSystem::PoissonPointwise;
  sol.u = f;
  for (double& t : sol.u.v) t *= wbar;
  return sol;
}

}  // namespace perfhom
