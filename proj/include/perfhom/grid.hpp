// Core containers for the periodic MAC discretization.
//
// Every field lives on a d-dimensional periodic box of side L sampled with N
// uniform cells per axis (d = 2 or 3).  Cell centers sit at
//   x_i = -L/2 + (i + 1/2) h,   h = L / N,
// and the a-component of a staggered (face) field sits on the lower face of
// cell i along axis a, i.e. at center(i) - (h/2) e_a.  With periodic wrap
// each component therefore holds exactly N^d values, stored flat with axis 0
// fastest: flat = i_0 + N i_1 + N^2 i_2.

#ifndef PERFHOM_GRID_HPP
#define PERFHOM_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "perfhom/errors.hpp"

namespace perfhom {

// Small dense tensor; only the leading d x d block is meaningful in dimension d.
using Mat3 = std::array<std::array<double, 3>, 3>;

struct GridSpec {
  int d = 2;   // spatial dimension, 2 or 3
  int N = 0;   // cells per axis
  double L = 1.0;  // box side length

  double h() const { return L / N; }
  long cells() const {
    long c = 1;
    for (int a = 0; a < d; ++a) c *= N;
    return c;
  }
  // Flat-index stride of axis a (axis 0 fastest).
  long stride(int a) const {
    long s = 1;
    for (int b = 0; b < a; ++b) s *= N;
    return s;
  }
  bool operator==(const GridSpec& o) const {
    return d == o.d && N == o.N && L == o.L;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* where) {
  if (a != b) throw GridMismatch(std::string(where) + ": grids differ");
}

struct ScalarField {
  GridSpec g;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& gs) : g(gs), v(gs.cells(), 0.0) {}
};

struct StaggeredField {
  GridSpec g;
  // comp[a] is used for a < g.d; the rest stay empty.
  std::array<std::vector<double>, 3> comp;

  StaggeredField() = default;
  explicit StaggeredField(const GridSpec& gs) : g(gs) {
    for (int a = 0; a < g.d; ++a) comp[a].assign(g.cells(), 0.0);
  }
};

// Cell-centered solid indicator: 1 = solid (inside a hole), 0 = fluid.
struct CellMask {
  GridSpec g;
  std::vector<std::uint8_t> solid;

  CellMask() = default;
  explicit CellMask(const GridSpec& gs) : g(gs), solid(gs.cells(), 0) {}
  long solid_count() const {
    long c = 0;
    for (auto s : solid) c += s;
    return c;
  }
};

// Face-centered solid indicator per component; a face is solid iff either
// adjacent cell is solid.
struct FaceMask {
  GridSpec g;
  std::array<std::vector<std::uint8_t>, 3> solid;

  FaceMask() = default;
  explicit FaceMask(const GridSpec& gs) : g(gs) {
    for (int a = 0; a < g.d; ++a) solid[a].assign(g.cells(), 0);
  }
};

FaceMask face_mask_from_cells(const CellMask& cm);

// ============================================================
// Deterministic reductions
// ============================================================

// Pairwise-recursive summation; fixed association order independent of any
// chunking, so results are bit-reproducible.
double pairwise_sum(const double* x, long n);
double pairwise_dot(const std::vector<double>& a, const std::vector<double>& b);
double pairwise_sum(const std::vector<double>& a);

// ============================================================
// Inner products and norms (h^d quadrature weights)
// ============================================================

// Least-squares slope of log y against log x, with the rms log-space misfit.
// All entries must be positive and the x values not all equal.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

double l2_inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& a);
double l2_inner(const StaggeredField& a, const StaggeredField& b);
double l2_norm(const StaggeredField& a);

double max_abs(const ScalarField& a);
double max_abs(const StaggeredField& a);

// y += s * x
void axpy(double s, const std::vector<double>& x, std::vector<double>& y);
void axpy(double s, const ScalarField& x, ScalarField& y);
void axpy(double s, const StaggeredField& x, StaggeredField& y);
void scale(double s, std::vector<double>& x);
void scale(double s, ScalarField& x);
void scale(double s, StaggeredField& x);

}  // namespace perfhom

#endif
