#include "perfhom/fft.hpp"

#include <fftw3.h>

#include <cmath>

namespace perfhom {

SpectralField fft_forward(const ScalarField& f) {
  const GridSpec& g = f.g;
  SpectralField out(g);
  int n[3] = {g.N, g.N, g.N};
  // Out-of-place r2c preserves its input, but FFTW's planner is allowed to
  // touch the arrays, so plan with FFTW_ESTIMATE on the live buffers.
  std::vector<double> in(f.v);
  fftw_plan plan = fftw_plan_dft_r2c(
      g.d, n, in.data(), reinterpret_cast<fftw_complex*>(out.c.data()),
      FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

ScalarField fft_inverse(const SpectralField& s) {
  const GridSpec& g = s.g;
  ScalarField out(g);
  int n[3] = {g.N, g.N, g.N};
  // Multi-dimensional c2r destroys its input; work on a copy.
  std::vector<std::complex<double>> tmp(s.c);
  fftw_plan plan = fftw_plan_dft_c2r(
      g.d, n, reinterpret_cast<fftw_complex*>(tmp.data()), out.v.data(),
      FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  double inv = 1.0 / (double)g.cells();
  for (double& x : out.v) x *= inv;
  return out;
}

void for_each_mode(const GridSpec& g,
                   const std::function<void(const ModeInfo&)>& fn) {
  const int N = g.N;
  const int Nc = N / 2 + 1;
  const double two_pi_over_L = 2.0 * M_PI / g.L;
  const double h = g.h();
  const bool even = (N % 2 == 0);

  // The real fields store axis 0 fastest, which FFTW sees as its last
  // (row-major) dimension: the complex array therefore halves axis 0 and
  // keeps it fastest-varying.
  ModeInfo m{};
  int lim[3] = {Nc, 1, 1};
  for (int a = 1; a < g.d; ++a) lim[a] = N;

  long idx = 0;
  for (int k2 = 0; k2 < lim[2]; ++k2) {
    for (int k1 = 0; k1 < lim[1]; ++k1) {
      for (int k0 = 0; k0 < lim[0]; ++k0) {
        int kk[3] = {k0, k1, k2};
        m.idx = idx++;
        m.xi2 = 0.0;
        m.lap_sym = 0.0;
        for (int a = 0; a < g.d; ++a) {
          m.k[a] = kk[a];
          int sm = signed_mode(kk[a], N);
          m.xi[a] = two_pi_over_L * sm;
          m.xi2 += m.xi[a] * m.xi[a];
          double th = 2.0 * M_PI * kk[a] / N;
          std::complex<double> G =
              (1.0 - std::complex<double>(std::cos(th), -std::sin(th))) / h;
          m.grad_sym[a] = G;
          m.lap_sym += std::norm(G);
        }
        for (int a = g.d; a < 3; ++a) {
          m.k[a] = 0;
          m.xi[a] = 0.0;
          m.grad_sym[a] = 0.0;
        }
        m.herm_w = (k0 == 0 || (even && k0 == N / 2)) ? 1.0 : 2.0;
        fn(m);
      }
    }
  }
}

void apply_multiplier(SpectralField& s,
                      const std::function<double(const ModeInfo&)>& mult) {
  for_each_mode(s.g, [&](const ModeInfo& m) { s.c[m.idx] *= mult(m); });
}

double spectral_l2sq(const SpectralField& s) {
  // ||f||^2 = h^d / N^d * sum_k w_k |f_k|^2 with Hermitian weights.
  std::vector<double> terms;
  terms.reserve(s.c.size());
  for_each_mode(s.g, [&](const ModeInfo& m) {
    terms.push_back(m.herm_w * std::norm(s.c[m.idx]));
  });
  double w = std::pow(s.g.h(), s.g.d) / (double)s.g.cells();
  return w * pairwise_sum(terms);
}

}  // namespace perfhom
