// Spectral limit-system solvers: regime algebra, residual contracts, and
// cross-checks against the direct hole-free solvers.
#include <cmath>
#include <complex>
#include <cstring>
#include <random>

#include "doctest.h"
#include "perfhom/errors.hpp"
#include "perfhom/fft.hpp"
#include "perfhom/grid.hpp"
#include "perfhom/macro.hpp"
#include "perfhom/operators.hpp"
#include "perfhom/solvers.hpp"

using namespace perfhom;

namespace {

void remove_mean(std::vector<double>& x) {
  const double m = pairwise_sum(x) / static_cast<double>(x.size());
  for (double& t : x) t -= m;
}

// Random rough staggered source, component means removed.
StaggeredField rough_source(const GridSpec& gs, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  StaggeredField g(gs);
  for (int a = 0; a < gs.d; ++a) {
    for (double& t : g.comp[a]) t = U(rng);
    remove_mean(g.comp[a]);
  }
  return g;
}

// Superposition of a few exact lattice modes |k| <= 3: spectrally compact,
// so iterative solvers converge tightly on it.
std::vector<double> smooth_array(const GridSpec& gs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> K(-3, 3);
  std::vector<double> v(gs.cells(), 0.0);
  const int N = gs.N;
  for (int w = 0; w < 4; ++w) {
    const double amp = U(rng), ph = 3.0 * U(rng);
    int k[3] = {K(rng), K(rng), K(rng)};
    for (long i = 0; i < gs.cells(); ++i) {
      long r = i;
      double arg = ph;
      for (int a = 0; a < gs.d; ++a) {
        arg += 2.0 * M_PI * k[a] * static_cast<double>(r % N) / N;
        r /= N;
      }
      v[i] += amp * std::cos(arg);
    }
  }
  remove_mean(v);
  return v;
}

StaggeredField smooth_source(const GridSpec& gs, unsigned seed) {
  std::mt19937_64 rng(seed);
  StaggeredField g(gs);
  for (int a = 0; a < gs.d; ++a) g.comp[a] = smooth_array(gs, rng);
  return g;
}

ScalarField smooth_scalar(const GridSpec& gs, unsigned seed) {
  std::mt19937_64 rng(seed);
  ScalarField f(gs);
  f.v = smooth_array(gs, rng);
  return f;
}

Mat3 spd2() {
  return Mat3{{{2.0, 0.3, 0.0}, {0.3, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}
Mat3 spd3() {
  return Mat3{{{2.0, 0.3, 0.1}, {0.3, 1.5, 0.2}, {0.1, 0.2, 1.0}}};
}
Mat3 iso(double a) {
  return Mat3{{{a, 0.0, 0.0}, {0.0, a, 0.0}, {0.0, 0.0, a}}};
}

double vec_gap(const StaggeredField& a, const StaggeredField& b) {
  StaggeredField r = a;
  axpy(-1.0, b, r);
  return l2_norm(r);
}

}  // namespace

TEST_CASE("darcy absorbs gradient sources into the pressure") {
  for (int d : {2, 3}) {
    GridSpec gs{d, d == 2 ? 16 : 8, 2.0};
    ScalarField q = smooth_scalar(gs, 11u + d);
    StaggeredField g(gs);
    grad(q, nullptr, g);

    MacroSolution sol = solve_darcy(d == 2 ? spd2() : spd3(), g);
    CHECK(l2_norm(sol.v) <= 1e-12 * l2_norm(g));
    ScalarField diff = sol.p;
    axpy(-1.0, q, diff);  // q already mean-free
    CHECK(l2_norm(diff) <= 1e-11 * l2_norm(q));
  }
}

TEST_CASE("darcy passes a discretely divergence-free mode through A = aI") {
  GridSpec gs{2, 12, 1.5};
  const int N = gs.N;
  const double h = gs.h();
  // Hand-built single lattice mode with zero discrete divergence: coefficient
  // orthogonal to the backward-difference symbol G_a = (1 - e^{-i theta_a})/h.
  const int k0 = 3, k1 = 2;
  const std::complex<double> I(0.0, 1.0);
  const double th0 = 2.0 * M_PI * k0 / N, th1 = 2.0 * M_PI * k1 / N;
  const std::complex<double> G0 = (1.0 - std::exp(-I * th0)) / h;
  const std::complex<double> G1 = (1.0 - std::exp(-I * th1)) / h;
  const std::complex<double> c0 = std::conj(G1), c1 = -std::conj(G0);

  StaggeredField g(gs);
  for (long i = 0; i < gs.cells(); ++i) {
    const long i0 = i % N, i1 = i / N;
    const std::complex<double> ph = std::exp(I * (th0 * i0 + th1 * i1));
    g.comp[0][i] = std::real(c0 * ph);
    g.comp[1][i] = std::real(c1 * ph);
  }
  ScalarField dv(gs);
  divergence(g, nullptr, dv);
  REQUIRE(l2_norm(dv) <= 1e-11 * l2_norm(g) / h);

  const double a = 0.7;
  MacroSolution sol = solve_darcy(iso(a), g);
  StaggeredField want = g;
  scale(a, want);
  CHECK(vec_gap(sol.v, want) <= 1e-12 * l2_norm(want));
  CHECK(l2_norm(sol.p) <= 1e-12 * gs.L * l2_norm(g));
}

TEST_CASE("darcy random sources: divergence and residual contracts") {
  for (int d : {2, 3}) {
    GridSpec gs{d, d == 2 ? 16 : 8, 1.0};
    StaggeredField g = rough_source(gs, 21u + d);
    // Random sources have nonzero component means; Darcy must accept them.
    g.comp[0][0] += 0.5;
    MacroSolution sol = solve_darcy(d == 2 ? spd2() : spd3(), g);

    ScalarField dv(gs);
    divergence(sol.v, nullptr, dv);
    CHECK(l2_norm(dv) <= 1e-12);
    CHECK(sol.div_rel <= 1e-12);
    CHECK(sol.residual_rel <= 1e-10);
  }
}

TEST_CASE("darcy rejects bad tensors") {
  GridSpec gs{2, 8, 1.0};
  StaggeredField g = rough_source(gs, 5);
  CHECK_THROWS_AS(
      solve_darcy(Mat3{{{1.0, 0.5, 0.0}, {-0.5, 1.0, 0.0}, {0.0, 0.0, 1.0}}},
                  g),
      BadConfig);
  CHECK_THROWS_AS(solve_darcy(iso(-1.0), g), BadConfig);
  CHECK_THROWS_AS(solve_darcy(Mat3{}, g), BadConfig);
  StaggeredField bad = g;
  bad.comp[0][3] = std::nan("");
  CHECK_THROWS_AS(solve_darcy(spd2(), bad), SourceInvalid);
}

TEST_CASE("brinkman: zero source, constant source, contracts") {
  GridSpec gs{2, 16, 2.0};
  const Mat3 A = spd2();

  StaggeredField zero(gs);
  MacroSolution s0 = solve_brinkman(A, 1.0, zero);
  CHECK(max_abs(s0.v) == 0.0);
  CHECK(max_abs(s0.p) == 0.0);

  // Constant source: every derivative term vanishes, so s^-2 A^-1 v = c.
  const double sstar = 1.7, c0 = 0.4, c1 = -0.9;
  StaggeredField cf(gs);
  for (long i = 0; i < gs.cells(); ++i) {
    cf.comp[0][i] = c0;
    cf.comp[1][i] = c1;
  }
  MacroSolution sc = solve_brinkman(A, sstar, cf);
  const double s2 = sstar * sstar;
  const double w0 = s2 * (A[0][0] * c0 + A[0][1] * c1);
  const double w1 = s2 * (A[1][0] * c0 + A[1][1] * c1);
  for (long i = 0; i < gs.cells(); i += 37) {
    CHECK(sc.v.comp[0][i] == doctest::Approx(w0).epsilon(1e-12));
    CHECK(sc.v.comp[1][i] == doctest::Approx(w1).epsilon(1e-12));
  }
  CHECK(max_abs(sc.p) <= 1e-12 * std::max(std::fabs(w0), std::fabs(w1)));

  for (int d : {2, 3}) {
    GridSpec gd{d, d == 2 ? 16 : 8, 1.0};
    MacroSolution sr =
        solve_brinkman(d == 2 ? spd2() : spd3(), 2.5, rough_source(gd, 31u + d));
    CHECK(sr.residual_rel <= 1e-10);
    CHECK(sr.div_rel <= 1e-12);
  }

  CHECK_THROWS_AS(solve_brinkman(A, 0.0, zero), BadConfig);
  CHECK_THROWS_AS(solve_brinkman(A, -2.0, zero), BadConfig);
}

TEST_CASE("brinkman interpolates between stokes and darcy") {
  GridSpec gs{2, 16, 2.0};
  const Mat3 A = spd2();
  StaggeredField g = rough_source(gs, 77);

  MacroSolution stokes = solve_stokes_macro(g);
  // Large sigma_star: Brinkman term negligible.
  MacroSolution b6 = solve_brinkman(A, 1e6, g);
  const double gap6 = vec_gap(b6.v, stokes.v) / l2_norm(stokes.v);
  CHECK(gap6 <= 1e-4);

  // Monotone approach from below.
  MacroSolution b1 = solve_brinkman(A, 10.0, g);
  MacroSolution b3 = solve_brinkman(A, 1e3, g);
  const double gap1 = vec_gap(b1.v, stokes.v) / l2_norm(stokes.v);
  const double gap3 = vec_gap(b3.v, stokes.v) / l2_norm(stokes.v);
  CHECK(gap3 < gap1);
  CHECK(gap6 < gap3);

  // Small sigma_star: s^-2 v approaches the Darcy flux A(g - grad p).
  MacroSolution darcy = solve_darcy(A, g);
  MacroSolution b0 = solve_brinkman(A, 1e-3, g);
  StaggeredField vd = b0.v;
  scale(1e6, vd);  // sigma_star^-2
  CHECK(vec_gap(vd, darcy.v) / l2_norm(darcy.v) <= 1e-2);
}

TEST_CASE("stokes macro: gauge, projection identities, zero-mode policy") {
  GridSpec gs{2, 16, 2.0};

  ScalarField q = smooth_scalar(gs, 41);
  StaggeredField gq(gs);
  grad(q, nullptr, gq);
  MacroSolution sg = solve_stokes_macro(gq);
  CHECK(l2_norm(sg.v) <= 1e-12 * l2_norm(gq));
  ScalarField dp = sg.p;
  axpy(-1.0, q, dp);
  CHECK(l2_norm(dp) <= 1e-11 * l2_norm(q));

  StaggeredField g = rough_source(gs, 43);
  MacroSolution s = solve_stokes_macro(g);
  StaggeredField lv(gs), gp(gs);
  lap(s.v, nullptr, lv);
  grad(s.p, nullptr, gp);
  StaggeredField r = g;
  for (int a = 0; a < gs.d; ++a)
    for (long i = 0; i < gs.cells(); ++i)
      r.comp[a][i] = -lv.comp[a][i] + gp.comp[a][i] - g.comp[a][i];
  CHECK(l2_norm(r) <= 1e-12 * l2_norm(g));
  CHECK(s.div_rel <= 1e-12);
  CHECK(std::fabs(pairwise_sum(s.p.v)) / gs.cells() <=
        1e-13 * (l2_norm(s.p) + 1e-300));

  StaggeredField gm = rough_source(gs, 47);
  for (double& t : gm.comp[0]) t += 0.5;
  CHECK_THROWS_AS(solve_stokes_macro(gm), ZeroModeError);

  // A round-off-level mean is projected, not rejected, and gets recorded.
  StaggeredField gt = rough_source(gs, 53);
  for (double& t : gt.comp[0]) t += 1e-14;
  MacroSolution st = solve_stokes_macro(gt);
  CHECK(st.zero_mode_dropped >= 1e-15);
  CHECK(st.zero_mode_dropped <= 1e-13);
}

TEST_CASE("stokes macro reproduces the hand-built single-mode solution") {
  GridSpec gs{2, 12, 1.5};
  const int N = gs.N;
  const double h = gs.h();
  const int k0 = 3, k1 = 2;
  const std::complex<double> I(0.0, 1.0);
  const double th0 = 2.0 * M_PI * k0 / N, th1 = 2.0 * M_PI * k1 / N;
  const std::complex<double> G0 = (1.0 - std::exp(-I * th0)) / h;
  const std::complex<double> G1 = (1.0 - std::exp(-I * th1)) / h;
  const std::complex<double> c0 = std::conj(G1), c1 = -std::conj(G0);
  const double lam = std::norm(G0) + std::norm(G1);  // MAC -lap symbol

  StaggeredField g(gs);
  for (long i = 0; i < gs.cells(); ++i) {
    const long i0 = i % N, i1 = i / N;
    const std::complex<double> ph = std::exp(I * (th0 * i0 + th1 * i1));
    g.comp[0][i] = std::real(c0 * ph);
    g.comp[1][i] = std::real(c1 * ph);
  }
  MacroSolution s = solve_stokes_macro(g);
  StaggeredField want = g;
  scale(1.0 / lam, want);
  CHECK(vec_gap(s.v, want) <= 1e-12 * l2_norm(want));
  CHECK(l2_norm(s.p) <= 1e-12 * gs.L * l2_norm(g));
}

TEST_CASE("hole-free direct solves agree with the spectral solvers") {
  // Stokes.
  {
    GridSpec gs{2, 24, 2.0};
    StaggeredField g = smooth_source(gs, 61);
    MacroSolution mac = solve_stokes_macro(g);

    CellMask cm(gs);
    FaceMask fm = face_mask_from_cells(cm);
    StokesOptions opt;
    opt.tol = 1e-12;
    StokesSolveResult dir = solve_stokes_masked(cm, fm, g, opt);

    const double scale_vp = l2_norm(mac.v) + l2_norm(mac.p);
    CHECK(vec_gap(dir.v, mac.v) <= 1e-8 * scale_vp);
    ScalarField dp = dir.p;
    axpy(-1.0, mac.p, dp);
    CHECK(l2_norm(dp) <= 1e-8 * scale_vp);
  }
  // Poisson.
  {
    GridSpec gs{2, 24, 2.0};
    ScalarField f = smooth_scalar(gs, 67);
    MacroSolution mac = solve_poisson_macro(f);

    CellMask cm(gs);
    PoissonResult dir = solve_poisson_masked(cm, f, 1e-12, -1.0);
    ScalarField du = dir.u;
    axpy(-1.0, mac.u, du);
    CHECK(l2_norm(du) <= 1e-8 * l2_norm(mac.u));
  }
}

TEST_CASE("laplace-brinkman and the poisson limits") {
  GridSpec gs{2, 8, 1.0};

  // Constant source: u = sigma_star^2 wbar c everywhere.
  ScalarField fc(gs);
  for (double& t : fc.v) t = 3.2;
  MacroSolution lb = solve_laplace_brinkman(0.5, 2.0, fc);
  for (long i = 0; i < gs.cells(); i += 11)
    CHECK(lb.u.v[i] == doctest::Approx(4.0 * 0.5 * 3.2).epsilon(1e-13));
  CHECK(lb.residual_rel <= 1e-10);

  // Rough source residual, checked independently.
  ScalarField f(gs);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& t : f.v) t = U(rng);
  const double wbar = 0.37, sstar = 1.3;
  MacroSolution lr = solve_laplace_brinkman(wbar, sstar, f);
  ScalarField lu(gs);
  lap(lr.u, nullptr, lu);
  ScalarField resid(gs);
  const double shift = 1.0 / (sstar * sstar * wbar);
  for (long i = 0; i < gs.cells(); ++i)
    resid.v[i] = -lu.v[i] + shift * lr.u.v[i] - f.v[i];
  CHECK(l2_norm(resid) <= 1e-10 * l2_norm(f));

  // Large sigma_star collapses onto the mean-free Poisson solve.
  ScalarField fm = f;
  remove_mean(fm.v);
  MacroSolution pois = solve_poisson_macro(fm);
  CHECK(pois.residual_rel <= 1e-10);
  CHECK(std::fabs(pairwise_sum(pois.u.v)) / gs.cells() <=
        1e-13 * l2_norm(pois.u));
  MacroSolution lb8 = solve_laplace_brinkman(1.0, 1e8, fm);
  ScalarField du = lb8.u;
  axpy(-1.0, pois.u, du);
  CHECK(l2_norm(du) <= 1e-8 * l2_norm(pois.u));

  CHECK_THROWS_AS(solve_poisson_macro(fc), ZeroModeError);
  CHECK_THROWS_AS(solve_laplace_brinkman(0.0, 1.0, f), BadConfig);
  CHECK_THROWS_AS(solve_laplace_brinkman(1.0, 0.0, f), BadConfig);

  // Pointwise limit: exact product, no equation.
  MacroSolution pw = poisson_pointwise(0.5, f);
  for (long i = 0; i < gs.cells(); ++i) CHECK(pw.u.v[i] == 0.5 * f.v[i]);
  CHECK_THROWS_AS(poisson_pointwise(-0.5, f), BadConfig);

  ScalarField z(gs);
  CHECK(max_abs(solve_laplace_brinkman(1.0, 1.0, z).u) == 0.0);
  CHECK(max_abs(solve_poisson_macro(z).u) == 0.0);
  CHECK(max_abs(poisson_pointwise(1.0, z).u) == 0.0);
}

TEST_CASE("macro solves are bit-reproducible") {
  GridSpec gs{2, 12, 1.0};
  StaggeredField g = rough_source(gs, 83);
  MacroSolution a = solve_brinkman(spd2(), 2.0, g);
  MacroSolution b = solve_brinkman(spd2(), 2.0, g);
  for (int c = 0; c < gs.d; ++c)
    CHECK(std::memcmp(a.v.comp[c].data(), b.v.comp[c].data(),
                      sizeof(double) * a.v.comp[c].size()) == 0);
  CHECK(std::memcmp(a.p.v.data(), b.p.v.data(),
                    sizeof(double) * a.p.v.size()) == 0);
}
