#include "perfhom/solvers.hpp"

#include <cmath>
#include <cstring>
#include <memory>

#include "perfhom/fft.hpp"
#include "perfhom/operators.hpp"

namespace perfhom {

SolveStats solve_spd(const VecOp& A, const std::vector<double>& b,
                     std::vector<double>& x, const SpdOptions& opt) {
  const long n = (long)b.size();
  if (x.size() != b.size()) x.assign(n, 0.0);

  std::vector<double> r(b), z(n), p(n), Ap(n);
  if (opt.project) opt.project(r);
  const double bnorm = std::sqrt(pairwise_dot(r, r));
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    return {0, 0.0, true};
  }

  bool x_zero = true;
  for (double v : x)
    if (v != 0.0) {
      x_zero = false;
      break;
    }
  if (!x_zero) {
    A(x, Ap);
    for (long i = 0; i < n; ++i) r[i] -= Ap[i];
    if (opt.project) opt.project(r);
  }

  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (opt.precond)
      opt.precond(in, out);
    else
      out = in;
    if (opt.project) opt.project(out);
  };

  apply_precond(r, z);
  p = z;
  double rz = pairwise_dot(r, z);
  double rnorm = std::sqrt(pairwise_dot(r, r));

  SolveStats st;
  while (rnorm > opt.tol * bnorm && st.iters < opt.max_iters) {
    A(p, Ap);
    double pAp = pairwise_dot(p, Ap);
    if (pAp <= 0.0) break;  // positivity lost: fall through to failure path
    double alpha = rz / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    apply_precond(r, z);
    double rz_new = pairwise_dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (long i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = std::sqrt(pairwise_dot(r, r));
    ++st.iters;
  }
  st.residual = rnorm / bnorm;
  st.converged = rnorm <= opt.tol * bnorm;
  if (!st.converged && opt.throw_on_fail)
    throw NonConvergence("solve_spd: CG hit iteration cap", st.iters, st.residual);
  if (opt.project) opt.project(x);
  return st;
}

void remove_fluid_mean(std::vector<double>& x,
                       const std::vector<std::uint8_t>* solid) {
  const long n = (long)x.size();
  if (!solid) {
    double m = pairwise_sum(x) / (double)n;
    for (double& v : x) v -= m;
    return;
  }
  double s = 0.0;
  long cnt = 0;
  for (long i = 0; i < n; ++i)
    if (!(*solid)[i]) {
      s += x[i];
      ++cnt;
    }
  if (cnt == 0) return;
  double m = s / (double)cnt;
  for (long i = 0; i < n; ++i)
    if (!(*solid)[i]) x[i] -= m;
}

VecOp make_fft_shifted_inverse(const GridSpec& g, double tau,
                               const std::vector<std::uint8_t>* solid) {
  // Precompute the inverse symbol once; each apply is two transforms.
  auto inv_symbol = std::make_shared<std::vector<double>>(SpectralField::modes(g));
  for_each_mode(g, [&](const ModeInfo& m) {
    double s = m.lap_sym + tau;
    (*inv_symbol)[m.idx] = (s > 0.0) ? 1.0 / s : 0.0;  // s == 0 only at k = 0 with tau = 0
  });
  const std::vector<std::uint8_t>* sol = solid;
  GridSpec gg = g;
  return [gg, inv_symbol, sol](const std::vector<double>& in,
                               std::vector<double>& out) {
    ScalarField f(gg);
    f.v = in;
    SpectralField s = fft_forward(f);
    const auto& isym = *inv_symbol;
    for (size_t i = 0; i < s.c.size(); ++i) s.c[i] *= isym[i];
    ScalarField u = fft_inverse(s);
    out = std::move(u.v);
    if (sol) {
      const long n = (long)out.size();
      for (long i = 0; i < n; ++i)
        if ((*sol)[i]) out[i] = 0.0;
    }
  };
}

PoissonResult solve_poisson_masked(const CellMask& mask, const ScalarField& f,
                                   double tol, double precond_shift,
                                   long max_iters, bool throw_on_fail) {
  const GridSpec& g = f.g;
  const bool has_solid = mask.solid_count() > 0;
  const std::vector<std::uint8_t>* sol = has_solid ? &mask.solid : nullptr;

  std::vector<double> b(f.v);
  if (sol)
    for (long i = 0; i < (long)b.size(); ++i)
      if ((*sol)[i]) b[i] = 0.0;

  if (!has_solid) {
    double tot = pairwise_sum(b);
    double abs_tot = 0.0;
    for (double v : b) abs_tot += std::fabs(v);
    if (std::fabs(tot) > 1e-10 * (abs_tot + 1e-300))
      throw ZeroModeError(
          "solve_poisson_masked: hole-free problem needs a mean-free source");
  }

  double tau = precond_shift;
  if (tau < 0.0) {
    double t = 2.0 * M_PI / g.L;
    tau = has_solid ? t * t : 0.0;
  }

  SpdOptions opt;
  opt.tol = tol;
  opt.max_iters = (max_iters > 0) ? max_iters : 50L * g.N;
  opt.throw_on_fail = throw_on_fail;
  opt.precond = make_fft_shifted_inverse(g, tau, sol);
  if (!has_solid)
    opt.project = [](std::vector<double>& x) { remove_fluid_mean(x, nullptr); };

  VecOp A = [&g, sol](const std::vector<double>& x, std::vector<double>& y) {
    neg_lap_component(g, x, sol, y);
  };

  PoissonResult res;
  res.u = ScalarField(g);
  res.stats = solve_spd(A, b, res.u.v, opt);
  return res;
}

// ============================================================
// Preconditioned MINRES for the Stokes saddle system
// ============================================================

namespace {

struct SaddleLayout {
  int d;
  long nc;  // entries per component lattice
  double* vpart(std::vector<double>& x, int a) const { return x.data() + (long)a * nc; }
  const double* vpart(const std::vector<double>& x, int a) const {
    return x.data() + (long)a * nc;
  }
  double* ppart(std::vector<double>& x) const { return x.data() + (long)d * nc; }
  const double* ppart(const std::vector<double>& x) const {
    return x.data() + (long)d * nc;
  }
};

}  // namespace

double minres_cycle(const VecOp& K, const VecOp& Minv, const std::vector<double>& b,
                    std::vector<double>& x, double tol, long maxit, long& iters) {
  const long n = (long)b.size();
  std::vector<double> r1(n), r2(n), y(n), w(n, 0.0), w2(n, 0.0), v(n), Kx(n);
  K(x, Kx);
  for (long i = 0; i < n; ++i) r1[i] = b[i] - Kx[i];
  Minv(r1, y);
  double beta1 = std::sqrt(std::max(0.0, pairwise_dot(r1, y)));
  if (beta1 == 0.0) return 0.0;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  r2 = r1;
  for (long it = 0; iters < maxit; ++it) {
    double ib = 1.0 / beta;
    for (long i = 0; i < n; ++i) v[i] = y[i] * ib;
    K(v, y);
    if (it >= 1) axpy(-beta / oldb, r1, y);
    double alfa = pairwise_dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1 = r2;
    r2 = y;
    Minv(r2, y);
    oldb = beta;
    beta = std::sqrt(std::max(0.0, pairwise_dot(r2, y)));
    double oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    if (gamma < 1e-300) gamma = 1e-300;
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;
    for (long i = 0; i < n; ++i) {
      double wn = (v[i] - oldeps * w2[i] - delta * w[i]) / gamma;
      w2[i] = w[i];
      w[i] = wn;
      x[i] += phi * wn;
    }
    ++iters;
    if (phibar <= tol * beta1 || beta == 0.0) break;
  }
  return phibar / beta1;
}

StokesSolveResult solve_stokes_masked(const CellMask& cmask, const FaceMask& fmask,
                                      const StaggeredField& gforce,
                                      const StokesOptions& opt) {
  const GridSpec& g = gforce.g;
  require_same_grid(cmask.g, g, "solve_stokes_masked");
  const int d = g.d;
  const long nc = g.cells();
  const SaddleLayout lay{d, nc};
  const long n = (long)(d + 1) * nc;
  const double hw = std::pow(g.h(), d);

  std::array<const std::vector<std::uint8_t>*, 3> fsol{nullptr, nullptr, nullptr};
  std::array<bool, 3> comp_has_solid{false, false, false};
  for (int a = 0; a < d; ++a) {
    long c = 0;
    for (auto s : fmask.solid[a]) c += s;
    comp_has_solid[a] = c > 0;
    fsol[a] = comp_has_solid[a] ? &fmask.solid[a] : nullptr;
  }
  const bool cell_has_solid = cmask.solid_count() > 0;
  const std::vector<std::uint8_t>* csol = cell_has_solid ? &cmask.solid : nullptr;

  // K x = [ -lap v + grad p ; -div v ]
  ScalarField p_tmp(g), div_tmp(g);
  StaggeredField v_tmp(g), gp_tmp(g);
  std::vector<double> nl;
  auto K = [&](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(n);
    for (int a = 0; a < d; ++a)
      std::memcpy(v_tmp.comp[a].data(), lay.vpart(x, a), nc * sizeof(double));
    std::memcpy(p_tmp.v.data(), lay.ppart(x), nc * sizeof(double));
    grad(p_tmp, &fmask, gp_tmp);
    divergence(v_tmp, csol ? &cmask : nullptr, div_tmp);
    for (int a = 0; a < d; ++a) {
      neg_lap_component(g, v_tmp.comp[a], fsol[a], nl);
      double* ya = lay.vpart(y, a);
      const double* gpa = gp_tmp.comp[a].data();
      for (long i = 0; i < nc; ++i) ya[i] = nl[i] + gpa[i];
    }
    double* yp = lay.ppart(y);
    for (long i = 0; i < nc; ++i) yp[i] = -div_tmp.v[i];
  };

  double tau = opt.precond_shift;
  if (tau < 0.0) {
    double t = 2.0 * M_PI / g.L;
    tau = t * t;
  }
  std::array<VecOp, 3> vel_prec;
  for (int a = 0; a < d; ++a) vel_prec[a] = make_fft_shifted_inverse(g, tau, fsol[a]);

  std::vector<double> pin(nc), pout(nc);
  auto Minv = [&](const std::vector<double>& x, std::vector<double>& y) {
    y.resize(n);
    for (int a = 0; a < d; ++a) {
      std::memcpy(pin.data(), lay.vpart(x, a), nc * sizeof(double));
      vel_prec[a](pin, pout);
      if (!comp_has_solid[a]) remove_fluid_mean(pout, nullptr);
      std::memcpy(lay.vpart(y, a), pout.data(), nc * sizeof(double));
    }
    std::memcpy(pin.data(), lay.ppart(x), nc * sizeof(double));
    if (csol) {
      const auto& s = *csol;
      for (long i = 0; i < nc; ++i)
        if (s[i]) pin[i] = 0.0;
    }
    remove_fluid_mean(pin, csol);
    std::memcpy(lay.ppart(y), pin.data(), nc * sizeof(double));
  };

  // rhs: masked g in the velocity slots (mean-removed on hole-free components,
  // where a constant velocity is a nullspace direction), zero divergence slot.
  std::vector<double> b(n, 0.0);
  for (int a = 0; a < d; ++a) {
    double* ba = lay.vpart(b, a);
    std::memcpy(ba, gforce.comp[a].data(), nc * sizeof(double));
    if (fsol[a]) {
      const auto& s = *fsol[a];
      for (long i = 0; i < nc; ++i)
        if (s[i]) ba[i] = 0.0;
    } else {
      std::vector<double> tmp(ba, ba + nc);
      remove_fluid_mean(tmp, nullptr);
      std::memcpy(ba, tmp.data(), nc * sizeof(double));
    }
  }
  const double gnorm_h = std::sqrt(hw * pairwise_dot(b, b));

  const long maxit = (opt.max_iters > 0) ? opt.max_iters : 2500;

  StokesSolveResult res;
  res.v = StaggeredField(g);
  res.p = ScalarField(g);
  std::vector<double> x(n, 0.0);
  if (gnorm_h == 0.0) {
    res.converged = true;
    return res;
  }

  const VecOp Kop = K;
  const VecOp Mop = Minv;
  std::vector<double> Kx(n);
  double minres_tol = opt.tol;
  long iters_total = 0;
  for (int attempt = 0; attempt < 5 && iters_total < maxit; ++attempt) {
    minres_cycle(Kop, Mop, b, x, minres_tol, maxit, iters_total);

    // True residuals against the solve contracts.
    for (int a = 0; a < d; ++a)
      std::memcpy(res.v.comp[a].data(), lay.vpart(x, a), nc * sizeof(double));
    std::memcpy(res.p.v.data(), lay.ppart(x), nc * sizeof(double));
    mask_zero(res.v, fmask);
    if (csol) mask_zero(res.p, cmask);
    remove_fluid_mean(res.p.v, csol);

    divergence(res.v, csol ? &cmask : nullptr, div_tmp);
    double divn = l2_norm(div_tmp);
    double vn = l2_norm(res.v);
    K(x, Kx);
    double mom2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double* ka = lay.vpart(Kx, a);
      const double* ba = lay.vpart(b, a);
      for (long i = 0; i < nc; ++i) {
        double rr = ba[i] - ka[i];
        mom2 += rr * rr;
      }
    }
    double momn = std::sqrt(hw * mom2);
    res.div_rel = (vn > 0) ? divn / vn : divn;
    res.mom_rel = momn / gnorm_h;
    res.iters = iters_total;
    if (res.div_rel <= opt.tol_div && res.mom_rel <= opt.tol_mom) {
      res.converged = true;
      break;
    }
    minres_tol *= 1e-3;
    if (minres_tol < 1e-16) minres_tol = 1e-16;
  }

  if (!res.converged && opt.throw_on_fail)
    throw NonConvergence(
        "solve_stokes_masked: MINRES did not meet div/momentum targets",
        res.iters, std::max(res.div_rel, res.mom_rel));
  return res;
}

}  // namespace perfhom
