// ============================================================================
// Perforated-torus direct solves, Poincare measurement, energy diagnostics.
// ============================================================================

#include "perfhom/micro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "perfhom/errors.hpp"
#include "perfhom/operators.hpp"

namespace perfhom {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw SourceInvalid(std::string(what) + ": non-finite entry");
}

void check_source(const ScalarField& f, const PerforationConfig& cfg,
                  const RegimeReport* regime) {
  require_same_grid(f.g, cfg.grid(), "solve_perforated_poisson");
  require_finite(f.v, "source");
  if (regime) {
    const SourceVerdict sv = validate_source(f, *regime, cfg.d);
    if (!sv.valid) throw SourceInvalid(sv.reason);
  }
}

void check_source(const StaggeredField& f, const PerforationConfig& cfg,
                  const RegimeReport* regime) {
  require_same_grid(f.g, cfg.grid(), "solve_perforated_stokes");
  for (int a = 0; a < f.g.d; ++a) require_finite(f.comp[a], "source");
  if (regime) {
    const SourceVerdict sv = validate_source(f, *regime, cfg.d);
    if (!sv.valid) throw SourceInvalid(sv.reason);
  }
}

// Decide between resolved holes and the degenerate hole-free convention.
// Returns true iff holes are active (and fills the masks).
bool resolve_masks(const PerforationConfig& cfg, bool degenerate_hole_free,
                   CellMask& cmask, FaceMask& fmask, bool want_faces) {
  validate_geometry(cfg);
  if (holes_resolved(cfg)) {
    if (want_faces) {
      auto mk = build_masks(cfg);
      cmask = std::move(mk.first);
      fmask = std::move(mk.second);
    } else {
      cmask = build_cell_mask(cfg);
    }
    return true;
  }
  if (!degenerate_hole_free) validate(cfg);  // throws ResolutionError
  const GridSpec g = cfg.grid();
  cmask = CellMask(g);
  if (want_faces) fmask = FaceMask(g);
  return false;
}

// Preconditioner shift: the Dirichlet spectral gap of the perforation sits
// at the 1/sigma^2 scale; never below the first periodic eigenvalue.
double precond_shift_for(const GridSpec& g, double sigma) {
  const double base = (2.0 * M_PI / g.L) * (2.0 * M_PI / g.L);
  const double gap = 1.0 / (sigma * sigma);
  return std::isfinite(gap) ? std::max(base, gap) : base;
}

double relative_gap(double e, double f) {
  const double den = std::max(std::max(std::abs(e), std::abs(f)), 1e-300);
  return std::abs(e - f) / den;
}

double wrap_len(double x, double L) { return x - L * std::round(x / L); }

double bump_of_r2(double r2, double R) {
  const double s = 1.0 - r2 / (R * R);
  if (s <= 0.0) return 0.0;
  return s * s * s;
}

// Index-mirroring i -> N-1-i on the center lattice, i -> (N-i) mod N on a
// face lattice along its own axis; both realize x -> -x exactly.
long mirror_flat(const GridSpec& g, long flat, int face_axis) {
  long out = 0;
  long t = flat;
  for (int a = 0; a < g.d; ++a) {
    const long i = t % g.N;
    t /= g.N;
    const long j = (a == face_axis) ? (g.N - i) % g.N : g.N - 1 - i;
    out += j * g.stride(a);
  }
  return out;
}

}  // namespace

MicroSolution solve_perforated_poisson(const PerforationConfig& cfg,
                                       const ScalarField& f,
                                       const RegimeReport* regime, double tol,
                                       bool degenerate_hole_free) {
  check_source(f, cfg, regime);
  CellMask cmask;
  FaceMask unused;
  const bool holes = resolve_masks(cfg, degenerate_hole_free, cmask, unused,
                                   /*want_faces=*/false);
  const double sigma = sigma_eps(cfg.d, cfg.eps, cfg.a_eps);
  PoissonResult r = solve_poisson_masked(cmask, f, tol,
                                         precond_shift_for(cfg.grid(), sigma));

  MicroSolution sol;
  sol.config = cfg;
  sol.stokes = false;
  sol.holes = holes;
  sol.u = std::move(r.u);
  sol.sigma = sigma;
  sol.l2 = l2_norm(sol.u);
  const double energy = dirichlet_inner(sol.u, sol.u, holes ? &cmask : nullptr);
  sol.grad = std::sqrt(std::max(energy, 0.0));
  sol.source_norm = l2_norm(f);
  sol.residual = r.stats.residual;
  sol.energy_gap = relative_gap(energy, l2_inner(f, sol.u));
  sol.iters = r.stats.iters;
  return sol;
}

MicroSolution solve_perforated_stokes(const PerforationConfig& cfg,
                                      const StaggeredField& g,
                                      const RegimeReport* regime,
                                      const StokesOptions& opt,
                                      bool degenerate_hole_free) {
  check_source(g, cfg, regime);
  CellMask cmask;
  FaceMask fmask;
  const bool holes = resolve_masks(cfg, degenerate_hole_free, cmask, fmask,
                                   /*want_faces=*/true);
  const double sigma = sigma_eps(cfg.d, cfg.eps, cfg.a_eps);
  StokesOptions o = opt;
  if (o.precond_shift < 0.0 && holes)
    o.precond_shift = precond_shift_for(cfg.grid(), sigma);
  StokesSolveResult r = solve_stokes_masked(cmask, fmask, g, o);

  MicroSolution sol;
  sol.config = cfg;
  sol.stokes = true;
  sol.holes = holes;
  sol.v = std::move(r.v);
  sol.p = std::move(r.p);
  sol.sigma = sigma;
  sol.l2 = l2_norm(sol.v);
  const double energy = dirichlet_inner(sol.v, sol.v, holes ? &fmask : nullptr);
  sol.grad = std::sqrt(std::max(energy, 0.0));
  sol.p_l2 = l2_norm(sol.p);
  sol.source_norm = l2_norm(g);
  sol.residual = r.mom_rel;
  sol.div_rel = r.div_rel;
  sol.energy_gap = relative_gap(energy, l2_inner(g, sol.v));
  sol.iters = r.iters;
  return sol;
}

PoincareResult poincare_constant(const PerforationConfig& cfg, double tol,
                                 long max_iters) {
  validate_geometry(cfg);
  if (!(tol > 0.0)) throw BadConfig("poincare_constant: tol must be positive");
  if (!holes_resolved(cfg)) {
    // No solid set: constants are admissible and the quotient is unbounded.
    PoincareResult res;
    res.c_p = std::numeric_limits<double>::infinity();
    res.lambda_min = 0.0;
    return res;
  }
  const GridSpec g = cfg.grid();
  const CellMask cmask = build_cell_mask(cfg);
  const double sigma = sigma_eps(cfg.d, cfg.eps, cfg.a_eps);
  const double shift = precond_shift_for(g, sigma);
  const double inner_tol = std::min(1e-10, 1e-2 * tol);

  // Inverse power iteration on the masked -lap; Rayleigh quotients converge
  // monotonically from above to lambda_min.
  ScalarField x(g);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (long i = 0; i < g.cells(); ++i)
    x.v[i] = cmask.solid[i] ? 0.0 : uni(rng);
  scale(1.0 / l2_norm(x), x);

  double lam = 0.0;
  double lam_prev = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= max_iters; ++it) {
    PoissonResult r = solve_poisson_masked(cmask, x, inner_tol, shift);
    ScalarField y = std::move(r.u);
    const double yn = l2_norm(y);
    if (!(yn > 0.0))
      throw NonConvergence("poincare_constant: iterate collapsed", it, 0.0);
    scale(1.0 / yn, y);
    lam = dirichlet_inner(y, y, &cmask);  // Rayleigh: <grad y, grad y> / 1
    x = std::move(y);
    if (std::abs(lam - lam_prev) <= tol * std::abs(lam)) {
      PoincareResult res;
      res.lambda_min = lam;
      res.c_p = 1.0 / std::sqrt(lam);
      res.iters = it;
      return res;
    }
    lam_prev = lam;
  }
  throw NonConvergence("poincare_constant: Rayleigh quotient did not settle",
                       max_iters, std::abs(lam - lam_prev));
}

EnergyReport energy_report(const MicroSolution& sol, double cap) {
  EnergyReport rep;
  rep.sigma = sol.sigma;
  rep.grad_norm = sol.grad;
  rep.l2 = sol.l2;
  rep.v_over_sigma = sol.l2 / sol.sigma;
  rep.v_over_sigma2 = sol.l2 / (sol.sigma * sol.sigma);
  rep.energy_gap = sol.energy_gap;
  rep.source_norm = sol.source_norm;

  const GridSpec& g = sol.stokes ? sol.v.g : sol.u.g;
  if (g.d == 3) {
    std::array<ScalarField, 3> comps;
    if (sol.stokes) {
      for (int a = 0; a < 3; ++a) comps[a] = face_to_center(sol.v, a);
    } else {
      comps[0] = sol.u;
      comps[1] = ScalarField(g);
      comps[2] = ScalarField(g);
    }
    rep.l_sobolev = lp_norm_centers(comps, 3, 6.0);
  }

  const double src = std::max(rep.source_norm, 1e-300);
  rep.ratio_grad = rep.grad_norm / ((1.0 + rep.sigma) * src);
  rep.ratio_l2 = rep.l2 / (rep.sigma * (1.0 + rep.sigma) * src);
  rep.flagged = rep.ratio_grad > cap || rep.ratio_l2 > cap;
  return rep;
}

ScalarField bump_scalar(const GridSpec& g, double R,
                        const std::array<double, 3>& center) {
  if (R <= 0.0) R = 0.3 * g.L;
  ScalarField f(g);
  const long n = g.cells();
  for (long i = 0; i < n; ++i) {
    long t = i;
    double r2 = 0.0;
    for (int a = 0; a < g.d; ++a) {
      const long ia = t % g.N;
      t /= g.N;
      const double dx = wrap_len(center_coord(g, ia) - center[a], g.L);
      r2 += dx * dx;
    }
    f.v[i] = bump_of_r2(r2, R);
  }
  return f;
}

StaggeredField bump_vector(const GridSpec& g, int axis, double R,
                           const std::array<double, 3>& center) {
  if (axis < 0 || axis >= g.d) throw BadConfig("bump_vector: bad axis");
  if (R <= 0.0) R = 0.3 * g.L;
  StaggeredField f(g);
  const long n = g.cells();
  const double half = 0.5 * g.h();
  for (long i = 0; i < n; ++i) {
    long t = i;
    double r2 = 0.0;
    for (int a = 0; a < g.d; ++a) {
      const long ia = t % g.N;
      t /= g.N;
      double x = center_coord(g, ia);
      if (a == axis) x -= half;  // face center of component `axis`
      const double dx = wrap_len(x - center[a], g.L);
      r2 += dx * dx;
    }
    f.comp[axis][i] = bump_of_r2(r2, R);
  }
  return f;
}

// Dipoles are built as  b(x) - b(-x)  with one radial bump b displaced along
// axis 0; index mirroring realizes x -> -x exactly, so the discrete mean
// cancels pair by pair (up to summation round-off).
ScalarField dipole_scalar(const GridSpec& g, double R, double shift) {
  if (R <= 0.0) R = 0.15 * g.L;
  if (shift <= 0.0) shift = 0.175 * g.L;
  if (R + shift >= 0.5 * g.L)
    throw BadConfig("dipole_scalar: support reaches the torus seam");
  const ScalarField b = bump_scalar(g, R, {shift, 0.0, 0.0});
  ScalarField f(g);
  const long n = g.cells();
  for (long i = 0; i < n; ++i) f.v[i] = b.v[i] - b.v[mirror_flat(g, i, -1)];
  return f;
}

StaggeredField dipole_vector(const GridSpec& g, int axis, double R,
                             double shift) {
  if (axis < 0 || axis >= g.d) throw BadConfig("dipole_vector: bad axis");
  if (R <= 0.0) R = 0.15 * g.L;
  if (shift <= 0.0) shift = 0.175 * g.L;
  if (R + shift >= 0.5 * g.L)
    throw BadConfig("dipole_vector: support reaches the torus seam");
  const StaggeredField b = bump_vector(g, axis, R, {shift, 0.0, 0.0});
  StaggeredField f(g);
  const long n = g.cells();
  for (long i = 0; i < n; ++i)
    f.comp[axis][i] = b.comp[axis][i] - b.comp[axis][mirror_flat(g, i, axis)];
  return f;
}

}  // namespace perfhom
