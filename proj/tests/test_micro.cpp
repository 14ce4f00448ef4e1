// Perforated-torus direct solves: Poincare constant against a dense
// eigensolve, the supercritical Poincare/sigma band, hole-free degenerate
// crossings with the spectral limit solvers, energy identities, source
// admissibility, and lattice-translation symmetry.
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "perfhom/errors.hpp"
#include "perfhom/grid.hpp"
#include "perfhom/lattice.hpp"
#include "perfhom/macro.hpp"
#include "perfhom/micro.hpp"
#include "perfhom/operators.hpp"

using namespace perfhom;

namespace {

double rel(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

PerforationConfig mk2(double eps, double a, int m, int n, long floor_) {
  PerforationConfig c;
  c.d = 2;
  c.eps = eps;
  c.a_eps = a;
  c.m = m;
  c.n = n;
  c.min_hole_cells = floor_;
  return c;
}

// Smallest eigenvalue of the masked -Laplacian, assembled dense.  Fluid
// cells only; solid neighbors contribute nothing off-diagonal, which is the
// eliminated Dirichlet condition.
double dense_lambda_min(const PerforationConfig& cfg) {
  const GridSpec g = cfg.grid();
  CellMask cm = build_cell_mask(cfg);
  std::vector<long> id(g.cells(), -1);
  long nf = 0;
  for (long i = 0; i < g.cells(); ++i)
    if (!cm.solid[i]) id[i] = nf++;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf, nf);
  const double ih2 = 1.0 / (g.h() * g.h());
  const int N = g.N;
  for (long i = 0; i < g.cells(); ++i) {
    if (cm.solid[i]) continue;
    const long r = id[i];
    A(r, r) = 2.0 * g.d * ih2;
    long t = i;
    long coord[3] = {0, 0, 0};
    for (int a = 0; a < g.d; ++a) {
      coord[a] = t % N;
      t /= N;
    }
    for (int a = 0; a < g.d; ++a) {
      for (int s = -1; s <= 1; s += 2) {
        long c2[3] = {coord[0], coord[1], coord[2]};
        c2[a] = (c2[a] + s + N) % N;
        long j = 0;
        for (int b = 0; b < g.d; ++b) j += c2[b] * g.stride(b);
        if (!cm.solid[j]) A(r, id[j]) -= ih2;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("poincare constant matches a dense eigensolve") {
  PerforationConfig cfg = mk2(0.25, 0.1, 4, 8, 1);
  const double lam = dense_lambda_min(cfg);
  PoincareResult pr = poincare_constant(cfg);
  CHECK(rel(pr.c_p, 1.0 / std::sqrt(lam)) < 1e-6);
  CHECK(rel(pr.lambda_min, lam) < 1e-5);
  CHECK(rel(pr.c_p, 0.11101325405927755) < 1e-8);
  CHECK(pr.iters > 0);
}

TEST_CASE("poincare constant settles from above under refinement") {
  // Same torus, one hole pattern, finer grids.  While the rasterized hole is
  // only a few cells wide the value wobbles; once resolved it decreases
  // toward the continuum limit (discrete Dirichlet eigenvalues increase
  // under refinement, so c_p comes down).
  const int ns[5] = {8, 16, 32, 64, 128};
  const double frozen[5] = {0.075088805009180887, 0.080648491442178422,
                            0.077607071490009158, 0.07450491992584779,
                            0.074240929918928555};
  double cp[5];
  for (int k = 0; k < 5; ++k) {
    PerforationConfig cfg = mk2(0.25, 0.2, 4, ns[k], 3);
    cp[k] = poincare_constant(cfg).c_p;
    CHECK(rel(cp[k], frozen[k]) < 1e-8);
  }
  CHECK(cp[2] > cp[3]);
  CHECK(cp[3] > cp[4]);
}

TEST_CASE("poincare over a planar supercritical ladder tracks sigma") {
  // a = eps^1.5 with the torus fixed: sigma_eps -> 0 and c_p must follow it
  // within a mesh-independent factor.  The band here is far tighter than the
  // factor-3 acceptance bound.
  const int ms[4] = {4, 6, 8, 12};
  const int ns[4] = {12, 16, 18, 22};
  const double frozen_cp[4] = {0.12655322492819443, 0.071218424641989686,
                               0.055841454552520216, 0.039876826682873061};
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double eps = 1.0 / ms[k];
    const double a = std::pow(eps, 1.5);
    PerforationConfig cfg = mk2(eps, a, ms[k], ns[k], 3);
    PoincareResult pr = poincare_constant(cfg);
    CHECK(rel(pr.c_p, frozen_cp[k]) < 1e-8);
    const double ratio = pr.c_p / sigma_eps(2, eps, a);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 3.0);
  CHECK(hi / lo < 1.5);  // observed 1.42; regression margin
}

TEST_CASE("poincare on an unresolved config returns the infinite sentinel") {
  PerforationConfig cfg = mk2(0.25, 1e-6, 4, 16, 8);
  PoincareResult pr = poincare_constant(cfg);
  CHECK(std::isinf(pr.c_p));
  CHECK(pr.lambda_min == 0.0);
}

TEST_CASE("hole-free degenerate solves match the spectral limit solvers") {
  PerforationConfig cfg = mk2(0.25, 1e-6, 4, 16, 8);
  const GridSpec g = cfg.grid();

  ScalarField f = dipole_scalar(g);
  MicroSolution mp = solve_perforated_poisson(cfg, f, nullptr, 1e-12, true);
  CHECK(!mp.holes);
  MacroSolution Mp = solve_poisson_macro(f);
  double gap = 0.0;
  for (long i = 0; i < g.cells(); ++i)
    gap = std::max(gap, std::fabs(mp.u.v[i] - Mp.u.v[i]));
  CHECK(gap <= 1e-8 * max_abs(mp.u));

  StaggeredField gf = dipole_vector(g, 0);
  MicroSolution ms = solve_perforated_stokes(cfg, gf, nullptr, {}, true);
  CHECK(!ms.holes);
  MacroSolution Ms = solve_stokes_macro(gf);
  double vgap = 0.0;
  for (int a = 0; a < 2; ++a)
    for (long i = 0; i < g.cells(); ++i)
      vgap = std::max(vgap, std::fabs(ms.v.comp[a][i] - Ms.v.comp[a][i]));
  CHECK(vgap <= 1e-8 * max_abs(ms.v));
  CHECK(ms.div_rel <= 1e-9);
  CHECK(ms.energy_gap <= 1e-8);
}

TEST_CASE("unresolved holes throw without the degenerate opt-in") {
  PerforationConfig cfg = mk2(0.25, 1e-6, 4, 16, 8);
  const GridSpec g = cfg.grid();
  ScalarField f = dipole_scalar(g);
  CHECK_THROWS_AS(solve_perforated_poisson(cfg, f), ResolutionError);
  StaggeredField gf = dipole_vector(g, 0);
  CHECK_THROWS_AS(solve_perforated_stokes(cfg, gf), ResolutionError);
}

TEST_CASE("perforated stokes: frozen norms, energy identity, zero on solid") {
  PerforationConfig cfg = mk2(0.25, 0.1, 4, 64, 8);
  const GridSpec g = cfg.grid();
  MicroSolution ms = solve_perforated_stokes(cfg, bump_vector(g, 0));
  CHECK(ms.holes);
  CHECK(rel(ms.sigma, 0.23930769052024778) < 1e-12);
  CHECK(rel(ms.l2, 0.0006421155116741223) < 1e-9);
  CHECK(rel(ms.grad, 0.0089575789149501095) < 1e-9);
  CHECK(ms.energy_gap <= 1e-8);
  CHECK(ms.div_rel <= 1e-9);
  CHECK(ms.residual <= 1e-9);
  CHECK(ms.p_l2 > 0.0);

  auto mk = build_masks(cfg);
  double on_solid = 0.0;
  for (int a = 0; a < g.d; ++a)
    for (long i = 0; i < g.cells(); ++i)
      if (mk.second.solid[a][i])
        on_solid = std::max(on_solid, std::fabs(ms.v.comp[a][i]));
  CHECK(on_solid == 0.0);  // eliminated unknowns, bit-exact

  EnergyReport er = energy_report(ms);
  CHECK(rel(er.ratio_grad, ms.grad / ((1.0 + ms.sigma) * ms.source_norm)) <
        1e-12);
  CHECK(rel(er.ratio_l2,
            ms.l2 / (ms.sigma * (1.0 + ms.sigma) * ms.source_norm)) < 1e-12);
  CHECK(rel(er.v_over_sigma2, ms.l2 / (ms.sigma * ms.sigma)) < 1e-12);
  CHECK(!er.flagged);
  CHECK(energy_report(ms, 1e-9).flagged);  // absurd cap must trip
}

TEST_CASE("perforated poisson: frozen norms and hole support") {
  PerforationConfig cfg = mk2(0.25, 0.1, 4, 64, 8);
  const GridSpec g = cfg.grid();
  MicroSolution mp = solve_perforated_poisson(cfg, bump_scalar(g));
  CHECK(rel(mp.l2, 0.001382236646376175) < 1e-9);
  CHECK(rel(mp.grad, 0.015310252370060284) < 1e-9);
  CHECK(mp.energy_gap <= 1e-8);
  CHECK(mp.residual <= 1e-9);

  CellMask cm = build_cell_mask(cfg);
  double on_solid = 0.0;
  for (long i = 0; i < g.cells(); ++i)
    if (cm.solid[i]) on_solid = std::max(on_solid, std::fabs(mp.u.v[i]));
  CHECK(on_solid == 0.0);
}

TEST_CASE("constant forcing gives a lattice-periodic flow") {
  // The hole pattern is n-periodic on the index torus, so with a constant
  // source the solution must repeat across lattice cells.
  PerforationConfig cfg = mk2(0.25, 0.05, 4, 32, 3);
  const GridSpec g = cfg.grid();
  StaggeredField one(g);
  for (double& t : one.comp[0]) t = 1.0;
  MicroSolution ms = solve_perforated_stokes(cfg, one);
  const int N = g.N, n = cfg.n;
  double gap = 0.0;
  for (int a = 0; a < 2; ++a)
    for (long i1 = 0; i1 < N; ++i1)
      for (long i0 = 0; i0 < N; ++i0) {
        const long i = i0 + N * i1;
        const long j = ((i0 + n) % N) + N * ((i1 + n) % N);
        gap = std::max(gap, std::fabs(ms.v.comp[a][i] - ms.v.comp[a][j]));
      }
  CHECK(gap <= 1e-10 * max_abs(ms.v));
}

TEST_CASE("dipole sources are mean-free and pass the planar subcritical gate") {
  const GridSpec g = mk2(0.25, 0.05, 4, 24, 2).grid();
  ScalarField fd = dipole_scalar(g);
  double sum = 0.0, l1 = 0.0;
  for (double t : fd.v) {
    sum += t;
    l1 += std::fabs(t);
  }
  CHECK(std::fabs(sum) <= 1e-12 * l1);

  RegimeReport sub;
  sub.label = RegimeLabel::Subcritical;
  sub.sigma_eps = 10.0;
  CHECK(validate_source(fd, sub, 2).valid);
  CHECK(validate_source(bump_scalar(g), sub, 2).valid == false);  // mean != 0
  // Support running into the torus seam trips the compactness clause; the
  // dipole builders refuse to construct such a field, so build one by hand.
  ScalarField seam(g);
  seam.v[0] = 1.0;                          // cell on the seam layer
  seam.v[g.N / 2 + g.N * (g.N / 2)] = -1.0;  // mean-free partner inside
  CHECK(validate_source(seam, sub, 2).valid == false);
  CHECK_THROWS_AS(dipole_scalar(g, 0.45 * g.L, 0.3 * g.L), BadConfig);

  StaggeredField gd = dipole_vector(g, 0);
  CHECK(validate_source(gd, sub, 2).valid);

  // The solver runs the same gate when handed the regime.
  PerforationConfig cfg = mk2(0.25, 0.05, 4, 24, 2);
  CHECK_THROWS_AS(
      solve_perforated_poisson(cfg, bump_scalar(cfg.grid()), &sub),
      SourceInvalid);
  MicroSolution ok = solve_perforated_poisson(cfg, fd, &sub);
  CHECK(ok.l2 > 0.0);
}

TEST_CASE("micro solves reject fields on a mismatched grid") {
  PerforationConfig cfg = mk2(0.25, 0.1, 4, 16, 1);
  GridSpec other = cfg.grid();
  other.N = cfg.grid().N + 4;
  CHECK_THROWS_AS(solve_perforated_poisson(cfg, ScalarField(other)),
                  GridMismatch);
  CHECK_THROWS_AS(solve_perforated_stokes(cfg, StaggeredField(other)),
                  GridMismatch);
}
