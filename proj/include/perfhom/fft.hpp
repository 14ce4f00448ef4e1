// FFT layer (FFTW backend) and discrete symbol utilities.
//
// Forward transform is the plain unnormalized DFT sum; the inverse divides by
// N^d, so inverse(forward(f)) == f to round-off.  Real fields use the
// real-to-complex compact layout: axis 0 (fastest-varying in memory) stores
// only k = 0 .. N/2 (length N/2 + 1); the omitted modes are the Hermitian
// mirrors.
//
// Two symbol calculi appear throughout:
//  * physical wavenumbers xi_a = (2 pi / L) k_a with k_a wrapped to
//    (-N/2, N/2] -- used for frequency cutoffs and Sobolev weights;
//  * MAC difference symbols G_a = (1 - e^{-i theta_a}) / h with
//    theta_a = 2 pi k_a / N -- the exact diagonalization of the staggered
//    grad/div/Laplacian stencils, used by the direct constant-coefficient
//    solvers.  div = -adjoint(grad), so D_a = -conj(G_a) and the scalar
//    Laplacian symbol is sum_a |G_a|^2.

#ifndef PERFHOM_FFT_HPP
#define PERFHOM_FFT_HPP

#include <complex>
#include <functional>
#include <vector>

#include "perfhom/grid.hpp"

namespace perfhom {

struct SpectralField {
  GridSpec g;  // grid of the real-space field this spectrum came from
  std::vector<std::complex<double>> c;  // compact r2c layout

  SpectralField() = default;
  explicit SpectralField(const GridSpec& gs) : g(gs), c(modes(gs)) {}

  static long modes(const GridSpec& gs) {
    long m = gs.N / 2 + 1;  // axis 0 halved
    for (int a = 1; a < gs.d; ++a) m *= gs.N;
    return m;
  }
};

SpectralField fft_forward(const ScalarField& f);
ScalarField fft_inverse(const SpectralField& s);

// Wrap an axis index to the signed mode number in (-N/2, N/2].
inline int signed_mode(int k, int N) { return (k <= N / 2) ? k : k - N; }

struct ModeInfo {
  long idx;          // flat index into SpectralField::c
  int k[3];          // raw axis indices, 0 <= k[a] < N (axis 0: k <= N/2)
  double xi[3];      // physical wavenumbers (2 pi / L) * signed mode
  double xi2;        // |xi|^2
  double herm_w;     // 2 if the conjugate mirror is omitted by r2c, else 1
  std::complex<double> grad_sym[3];  // MAC gradient symbol per axis
  double lap_sym;    // sum |grad_sym|^2  (MAC minus-Laplacian symbol)
};

// Visit every stored mode of an r2c spectrum on grid g.
void for_each_mode(const GridSpec& g, const std::function<void(const ModeInfo&)>& fn);

// Multiply a spectrum in place by a scalar transfer function of the mode.
void apply_multiplier(SpectralField& s,
                      const std::function<double(const ModeInfo&)>& mult);

// Parseval sum: ||f||_{L2}^2 computed in spectral space (h^d quadrature).
double spectral_l2sq(const SpectralField& s);

}  // namespace perfhom

#endif
