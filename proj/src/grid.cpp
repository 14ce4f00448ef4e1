#include "perfhom/grid.hpp"

#include <algorithm>
#include <cmath>

namespace perfhom {

FaceMask face_mask_from_cells(const CellMask& cm) {
  const GridSpec& g = cm.g;
  FaceMask fm(g);
  const long n = g.cells();
  for (int a = 0; a < g.d; ++a) {
    const long str = g.stride(a);
    const int N = g.N;
    // Face a of cell i sits between cells i - e_a and i.
    for (long i = 0; i < n; ++i) {
      long ia = (i / str) % N;
      long im = (ia > 0) ? i - str : i + (long)(N - 1) * str;
      fm.solid[a][i] = (cm.solid[i] || cm.solid[im]) ? 1 : 0;
    }
  }
  return fm;
}

double pairwise_sum(const double* x, long n) {
  if (n <= 16) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += x[i];
    return s;
  }
  long half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& a) {
  return pairwise_sum(a.data(), (long)a.size());
}

namespace {
double pairwise_dot_rec(const double* a, const double* b, long n) {
  if (n <= 16) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  long half = n / 2;
  return pairwise_dot_rec(a, b, half) + pairwise_dot_rec(a + half, b + half, n - half);
}
}  // namespace

double pairwise_dot(const std::vector<double>& a, const std::vector<double>& b) {
  return pairwise_dot_rec(a.data(), b.data(), (long)std::min(a.size(), b.size()));
}

double l2_inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.g, b.g, "l2_inner");
  double w = std::pow(a.g.h(), a.g.d);
  return w * pairwise_dot(a.v, b.v);
}

double l2_norm(const ScalarField& a) { return std::sqrt(l2_inner(a, a)); }

double l2_inner(const StaggeredField& a, const StaggeredField& b) {
  require_same_grid(a.g, b.g, "l2_inner");
  double w = std::pow(a.g.h(), a.g.d);
  double s = 0.0;
  for (int c = 0; c < a.g.d; ++c) s += pairwise_dot(a.comp[c], b.comp[c]);
  return w * s;
}

double l2_norm(const StaggeredField& a) { return std::sqrt(l2_inner(a, a)); }

double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::fabs(x));
  return m;
}

double max_abs(const StaggeredField& a) {
  double m = 0.0;
  for (int c = 0; c < a.g.d; ++c)
    for (double x : a.comp[c]) m = std::max(m, std::fabs(x));
  return m;
}

void axpy(double s, const std::vector<double>& x, std::vector<double>& y) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

void axpy(double s, const ScalarField& x, ScalarField& y) { axpy(s, x.v, y.v); }

void axpy(double s, const StaggeredField& x, StaggeredField& y) {
  for (int c = 0; c < y.g.d; ++c) axpy(s, x.comp[c], y.comp[c]);
}

void scale(double s, std::vector<double>& x) {
  for (double& v : x) v *= s;
}

void scale(double s, ScalarField& x) { scale(s, x.v); }

void scale(double s, StaggeredField& x) {
  for (int c = 0; c < x.g.d; ++c) scale(s, x.comp[c]);
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw BadConfig("fit_loglog: need >= 2 matched samples");
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw BadConfig("fit_loglog: samples must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = pairwise_sum(lx) / (double)n;
  double my = pairwise_sum(ly) / (double)n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw BadConfig("fit_loglog: x values all equal");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double e = ly[i] - (f.intercept + f.slope * lx[i]);
    r2 += e * e;
  }
  f.residual = std::sqrt(r2 / (double)n);
  return f;
}

}  // namespace perfhom
