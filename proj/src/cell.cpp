// ============================================================================
// Unit-cell corrector solves and effective-tensor assembly.
//
// The two tensor routes (energy form and cell average) are computed from
// independent reductions; their agreement is a weak-form identity that holds
// to solver tolerance on the staggered grid because summation by parts is
// exact there.  Rescaling tiles the discrete solution index-for-index, so
// the tiled field satisfies the rescaled equations with no additional
// discretization error.
// ============================================================================
#include "perfhom/cell.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perfhom/operators.hpp"

namespace perfhom {

double c_eta(int d, double eta) {
  if (d == 2) {
    if (!(eta > 0.0 && eta < 1.0))
      throw BadConfig("c_eta: d = 2 needs 0 < eta < 1");
    return 1.0 / std::sqrt(std::fabs(std::log(eta)));
  }
  if (d >= 3) {
    if (!(eta > 0.0 && eta <= 1.0))
      throw BadConfig("c_eta: need 0 < eta <= 1");
    return std::pow(eta, 0.5 * (d - 2));
  }
  throw BadConfig("c_eta: d must be >= 2");
}

namespace {

void check_cell_config(int d, double eta, const HoleModel& hole, int n,
                       long min_cells) {
  if (d != 2 && d != 3) throw BadConfig("cell: d must be 2 or 3");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw BadConfig("cell: eta must be positive");
  if (n < 8) throw BadConfig("cell: need n >= 8");
  validate(hole, d);
  if (!(eta * hole.delta2 < 0.5))
    throw BadConfig("cell: hole eta*T must fit strictly inside the unit cell");
  // Per-axis hole diameter must span at least min_cells grid cells.
  const double h = 1.0 / n;
  for (int a = 0; a < d; ++a)
    if (2.0 * hole.semi_extent(a) * eta < min_cells * h)
      throw ResolutionError("cell: hole below the resolution floor");
}

double cell_integral(const GridSpec& g, const std::vector<double>& x) {
  double hw = 1.0;
  for (int a = 0; a < g.d; ++a) hw *= g.h();
  return hw * pairwise_sum(x);
}

}  // namespace

CellMask build_unit_cell_mask(int d, double eta, const HoleModel& hole, int n,
                              long min_cells,
                              const std::array<double, 3>& center) {
  check_cell_config(d, eta, hole, n, min_cells);
  GridSpec g{d, n, 1.0};
  CellMask cm(g);

  const long nc = g.cells();
  for (long i = 0; i < nc; ++i) {
    std::array<double, 3> y{0.0, 0.0, 0.0};
    long r = i;
    for (int a = 0; a < d; ++a) {
      double dx = center_coord(g, r % n) - center[a];
      dx -= std::round(dx);  // nearest periodic image
      y[a] = dx / eta;
      r /= n;
    }
    if (hole.inside(y, d)) cm.solid[i] = 1;
  }
  if (cm.solid_count() == 0)
    throw ResolutionError("cell: hole rasterized to zero cells");
  return cm;
}

CellSolution solve_cell_stokes(int d, double eta, const HoleModel& hole, int n,
                               const StokesOptions& opt, long min_cells,
                               const std::array<double, 3>& center) {
  CellSolution sol;
  sol.d = d;
  sol.stokes = true;
  sol.eta = eta;
  sol.c_eta = c_eta(d, eta);
  sol.center = center;
  sol.cmask = build_unit_cell_mask(d, eta, hole, n, min_cells, center);
  sol.g = sol.cmask.g;
  sol.fmask = face_mask_from_cells(sol.cmask);

  const double c2 = sol.c_eta * sol.c_eta;
  for (int i = 0; i < d; ++i) {
    StaggeredField rhs(sol.g);
    for (double& t : rhs.comp[i]) t = c2;
    StokesSolveResult r = solve_stokes_masked(sol.cmask, sol.fmask, rhs, opt);
    sol.w[i] = r.v;
    sol.q[i] = r.p;
    sol.iters += r.iters;
  }

  // Tensor, both routes: energy form and cell average of the corrector.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      sol.A_energy[i][j] =
          dirichlet_inner(sol.w[i], sol.w[j], &sol.fmask) / c2;
      sol.A_avg[i][j] = cell_integral(sol.g, sol.w[i].comp[j]);
      sol.A[i][j] = 0.5 * (sol.A_energy[i][j] + sol.A_avg[i][j]);
    }
  double amax = 0.0, gap = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      amax = std::max(amax, std::fabs(sol.A[i][j]));
      gap = std::max(gap, std::fabs(sol.A_energy[i][j] - sol.A_avg[i][j]));
    }
  sol.discrepancy = (amax > 0.0) ? gap / amax : gap;

  for (int i = 0; i < d; ++i) {
    sol.grad_ratio[i] =
        std::sqrt(std::max(0.0, dirichlet_inner(sol.w[i], sol.w[i],
                                                &sol.fmask))) /
        sol.c_eta;
    sol.w_norm[i] = l2_norm(sol.w[i]);
    sol.q_ratio[i] = l2_norm(sol.q[i]) / sol.c_eta;
    sol.qbar[i] = cell_integral(sol.g, sol.q[i].v) / sol.c_eta;
  }
  return sol;
}

CellSolution solve_cell_poisson(int d, double eta, const HoleModel& hole,
                                int n, double tol, long min_cells,
                                const std::array<double, 3>& center) {
  CellSolution sol;
  sol.d = d;
  sol.stokes = false;
  sol.eta = eta;
  sol.c_eta = c_eta(d, eta);
  sol.center = center;
  sol.cmask = build_unit_cell_mask(d, eta, hole, n, min_cells, center);
  sol.g = sol.cmask.g;
  sol.fmask = face_mask_from_cells(sol.cmask);

  const double c2 = sol.c_eta * sol.c_eta;
  ScalarField rhs(sol.g);
  for (double& t : rhs.v) t = c2;
  PoissonResult r = solve_poisson_masked(sol.cmask, rhs, tol, -1.0);
  sol.w_scalar = r.u;
  sol.iters = r.stats.iters;

  sol.wbar_scalar = cell_integral(sol.g, sol.w_scalar.v);
  sol.A_energy_scalar =
      dirichlet_inner(sol.w_scalar, sol.w_scalar, &sol.cmask) / c2;
  sol.A_scalar = 0.5 * (sol.A_energy_scalar + sol.wbar_scalar);
  const double amax = std::max(std::fabs(sol.A_scalar), 0.0);
  sol.discrepancy =
      (amax > 0.0)
          ? std::fabs(sol.A_energy_scalar - sol.wbar_scalar) / amax
          : std::fabs(sol.A_energy_scalar - sol.wbar_scalar);

  sol.grad_ratio[0] =
      std::sqrt(
          std::max(0.0, dirichlet_inner(sol.w_scalar, sol.w_scalar,
                                        &sol.cmask))) /
      sol.c_eta;
  sol.w_norm[0] = l2_norm(sol.w_scalar);
  return sol;
}

Permeability permeability(const CellSolution& sol) {
  Permeability out;
  if (sol.stokes) {
    const int d = sol.d;
    const double c2 = sol.c_eta * sol.c_eta;
    Mat3 Ae{}, Aa{};
    double amax = 0.0, gap = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Ae[i][j] = dirichlet_inner(sol.w[i], sol.w[j], &sol.fmask) / c2;
        Aa[i][j] = cell_integral(sol.g, sol.w[i].comp[j]);
        out.A[i][j] = 0.5 * (Ae[i][j] + Aa[i][j]);
        amax = std::max(amax, std::fabs(out.A[i][j]));
        gap = std::max(gap, std::fabs(Ae[i][j] - Aa[i][j]));
      }
    out.discrepancy = (amax > 0.0) ? gap / amax : gap;
  } else {
    const double c2 = sol.c_eta * sol.c_eta;
    const double e =
        dirichlet_inner(sol.w_scalar, sol.w_scalar, &sol.cmask) / c2;
    const double a = cell_integral(sol.g, sol.w_scalar.v);
    out.scalar = 0.5 * (e + a);
    out.discrepancy =
        (out.scalar != 0.0) ? std::fabs(e - a) / std::fabs(out.scalar)
                            : std::fabs(e - a);
  }
  if (out.discrepancy > 1e-4)
    throw DiscrepancyError(
        "permeability: energy and average routes disagree by " +
        std::to_string(out.discrepancy));
  return out;
}

TensorLimit extrapolate_tensor(int d, const HoleModel& hole, int n,
                               const std::vector<double>& etas, bool stokes,
                               long min_cells) {
  if (etas.size() < 2)
    throw InsufficientLadder("extrapolate_tensor: need at least 2 rungs");
  for (size_t k = 1; k < etas.size(); ++k)
    if (!(etas[k] < etas[k - 1]))
      throw BadConfig("extrapolate_tensor: etas must decrease strictly");

  TensorLimit lim;
  lim.etas = etas;
  for (double eta : etas) {
    if (stokes) {
      CellSolution s = solve_cell_stokes(d, eta, hole, n, {}, min_cells);
      lim.A_eta.push_back(s.A);
    } else {
      CellSolution s = solve_cell_poisson(d, eta, hole, n, 1e-11, min_cells);
      lim.wbar_eta.push_back(s.wbar_scalar);
    }
  }

  // Entrywise Aitken on the last three rungs; plain tail value when the
  // differences do not contract enough to divide by.
  auto aitken = [](double x0, double x1, double x2) {
    const double d1 = x1 - x0, d2 = x2 - x1;
    const double den = d2 - d1;
    const double scale = std::max({std::fabs(x0), std::fabs(x1),
                                   std::fabs(x2), 1e-300});
    if (std::fabs(den) <= 1e-12 * scale) return x2;
    return x2 - d2 * d2 / den;
  };

  auto diffs_shrink = [](const std::vector<double>& dn) {
    for (size_t k = 1; k < dn.size(); ++k)
      if (dn[k] > dn[k - 1] * (1.0 + 1e-12)) return false;
    return true;
  };

  if (stokes) {
    const size_t m = lim.A_eta.size();
    if (m >= 3) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          lim.A[i][j] = aitken(lim.A_eta[m - 3][i][j], lim.A_eta[m - 2][i][j],
                               lim.A_eta[m - 1][i][j]);
    } else {
      lim.A = lim.A_eta.back();
    }
    double gap = 0.0, amax = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        gap = std::max(gap,
                       std::fabs(lim.A_eta.back()[i][j] - lim.A[i][j]));
        amax = std::max(amax, std::fabs(lim.A[i][j]));
      }
    lim.extrap_gap = (amax > 0.0) ? gap / amax : gap;
    std::vector<double> dn;
    for (size_t k = 1; k < m; ++k) {
      double dmax = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          dmax = std::max(dmax, std::fabs(lim.A_eta[k][i][j] -
                                          lim.A_eta[k - 1][i][j]));
      dn.push_back(dmax);
    }
    lim.monotone = diffs_shrink(dn);
  } else {
    const size_t m = lim.wbar_eta.size();
    lim.wbar = (m >= 3) ? aitken(lim.wbar_eta[m - 3], lim.wbar_eta[m - 2],
                                 lim.wbar_eta[m - 1])
                        : lim.wbar_eta.back();
    lim.extrap_gap =
        (lim.wbar != 0.0)
            ? std::fabs(lim.wbar_eta.back() - lim.wbar) / std::fabs(lim.wbar)
            : std::fabs(lim.wbar_eta.back() - lim.wbar);
    std::vector<double> dn;
    for (size_t k = 1; k < m; ++k)
      dn.push_back(std::fabs(lim.wbar_eta[k] - lim.wbar_eta[k - 1]));
    lim.monotone = diffs_shrink(dn);
  }
  return lim;
}

LatticeCorrector rescale_corrector(const CellSolution& sol,
                                   const PerforationConfig& cfg) {
  validate(cfg);
  if (cfg.d != sol.d) throw GridMismatch("rescale_corrector: dimension");
  const double eta_cfg = cfg.a_eps / cfg.eps;
  if (std::fabs(eta_cfg - sol.eta) > 1e-12 * std::max(sol.eta, 1e-300))
    throw GridMismatch("rescale_corrector: lattice eta differs from the cell");
  if (cfg.n != sol.g.N)
    throw GridMismatch("rescale_corrector: per-cell resolution differs");

  // Alignment: torus fine-grid index i maps to cell index (i + delta) mod n
  // along each axis; delta must be integral or the two rasters interleave.
  const int n = cfg.n;
  long delta[3] = {0, 0, 0};
  for (int a = 0; a < cfg.d; ++a) {
    const double df =
        n * (0.5 * (1.0 - cfg.m) - cfg.x0[a] + sol.center[a]);
    delta[a] = std::llround(df);
    if (std::fabs(df - static_cast<double>(delta[a])) > 1e-9)
      throw GridMismatch(
          "rescale_corrector: cell and torus grids are misaligned (axis " +
          std::to_string(a) + ")");
    delta[a] = ((delta[a] % n) + n) % n;
  }

  const GridSpec tg = cfg.grid();
  const int d = cfg.d;
  const long tn = tg.cells();

  // Precompute the per-axis index maps, then tile index-for-index.
  std::vector<long> map0(tg.N), map1(tg.N), map2(tg.N);
  for (int i = 0; i < tg.N; ++i) {
    map0[i] = (i + delta[0]) % n;
    map1[i] = (i + delta[1]) % n;
    map2[i] = (d > 2) ? (i + delta[2]) % n : 0;
  }
  auto cell_index = [&](long it) {
    long j = map0[it % tg.N];
    it /= tg.N;
    j += n * map1[it % tg.N];
    it /= tg.N;
    if (d > 2) j += static_cast<long>(n) * n * map2[it % tg.N];
    return j;
  };

  // The torus rasterization must reproduce the tiled cell rasterization
  // exactly, otherwise the corrector would not vanish on the torus holes.
  CellMask torus_mask = build_cell_mask(cfg);
  for (long i = 0; i < tn; ++i)
    if (torus_mask.solid[i] != sol.cmask.solid[cell_index(i)])
      throw GridMismatch(
          "rescale_corrector: torus and tiled cell rasterizations differ");

  LatticeCorrector out;
  if (sol.stokes) {
    for (int c = 0; c < d; ++c) {
      out.w[c] = StaggeredField(tg);
      out.q[c] = ScalarField(tg);
      for (long i = 0; i < tn; ++i) {
        const long j = cell_index(i);
        for (int b = 0; b < d; ++b) out.w[c].comp[b][i] = sol.w[c].comp[b][j];
        out.q[c].v[i] = sol.q[c].v[j];
      }
    }
  } else {
    out.w_scalar = ScalarField(tg);
    for (long i = 0; i < tn; ++i)
      out.w_scalar.v[i] = sol.w_scalar.v[cell_index(i)];
  }
  return out;
}

}  // namespace perfhom
