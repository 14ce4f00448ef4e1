#include "perfhom/operators.hpp"

#include <cmath>

namespace perfhom {

namespace {

// Flat-offset helpers for periodic +/- neighbors along an axis with stride s.
inline long off_plus(int idx, int N, long s) {
  return (idx + 1 < N) ? s : s - (long)N * s;
}
inline long off_minus(int idx, int N, long s) {
  return (idx > 0) ? -s : (long)(N - 1) * s;
}

}  // namespace

void neg_lap_component(const GridSpec& g, const std::vector<double>& x,
                       const std::vector<std::uint8_t>* solid,
                       std::vector<double>& y) {
  const int N = g.N;
  const double ih2 = 1.0 / (g.h() * g.h());
  y.resize(x.size());
  const double* p = x.data();
  double* q = y.data();
  if (g.d == 2) {
    const long s0 = N, s1 = 1;
    long i = 0;
    for (int a = 0; a < N; ++a) {
      const long ap = off_plus(a, N, s0), am = off_minus(a, N, s0);
      for (int b = 0; b < N; ++b, ++i) {
        const long bp = off_plus(b, N, s1), bm = off_minus(b, N, s1);
        q[i] = ih2 * (4.0 * p[i] - p[i + ap] - p[i + am] - p[i + bp] - p[i + bm]);
      }
    }
  } else {
    const long s0 = (long)N * N, s1 = N, s2 = 1;
    long i = 0;
    for (int a = 0; a < N; ++a) {
      const long ap = off_plus(a, N, s0), am = off_minus(a, N, s0);
      for (int b = 0; b < N; ++b) {
        const long bp = off_plus(b, N, s1), bm = off_minus(b, N, s1);
        for (int c = 0; c < N; ++c, ++i) {
          const long cp = off_plus(c, N, s2), cm = off_minus(c, N, s2);
          q[i] = ih2 * (6.0 * p[i] - p[i + ap] - p[i + am] - p[i + bp] -
                        p[i + bm] - p[i + cp] - p[i + cm]);
        }
      }
    }
  }
  if (solid) {
    const auto& s = *solid;
    const long n = (long)y.size();
    for (long i = 0; i < n; ++i)
      if (s[i]) q[i] = 0.0;
  }
}

namespace {

// out[i] = (f[i] - f[i - e_axis]) * scale
void diff_minus(const GridSpec& g, int axis, double sc,
                const std::vector<double>& f, std::vector<double>& out) {
  const int N = g.N;
  const long str = g.stride(axis);
  const long n = g.cells();
  out.resize(n);
  for (long i = 0; i < n; ++i) {
    int ia = (int)((i / str) % N);
    long im = i + off_minus(ia, N, str);
    out[i] = sc * (f[i] - f[im]);
  }
}

// out[i] += (f[i + e_axis] - f[i]) * scale
void diff_plus_acc(const GridSpec& g, int axis, double sc,
                   const std::vector<double>& f, std::vector<double>& out) {
  const int N = g.N;
  const long str = g.stride(axis);
  const long n = g.cells();
  for (long i = 0; i < n; ++i) {
    int ia = (int)((i / str) % N);
    long ip = i + off_plus(ia, N, str);
    out[i] += sc * (f[ip] - f[i]);
  }
}

}  // namespace

void grad(const ScalarField& p, const FaceMask* mask, StaggeredField& out) {
  const GridSpec& g = p.g;
  if (out.g != g) out = StaggeredField(g);
  const double ih = 1.0 / g.h();
  for (int a = 0; a < g.d; ++a) {
    diff_minus(g, a, ih, p.v, out.comp[a]);
    if (mask) {
      const auto& s = mask->solid[a];
      for (long i = 0; i < (long)s.size(); ++i)
        if (s[i]) out.comp[a][i] = 0.0;
    }
  }
}

void divergence(const StaggeredField& v, const CellMask* mask, ScalarField& out) {
  const GridSpec& g = v.g;
  if (out.g != g) out = ScalarField(g);
  const double ih = 1.0 / g.h();
  std::fill(out.v.begin(), out.v.end(), 0.0);
  for (int a = 0; a < g.d; ++a) diff_plus_acc(g, a, ih, v.comp[a], out.v);
  if (mask) {
    const auto& s = mask->solid;
    for (long i = 0; i < (long)s.size(); ++i)
      if (s[i]) out.v[i] = 0.0;
  }
}

void lap(const ScalarField& u, const CellMask* mask, ScalarField& out) {
  if (out.g != u.g) out = ScalarField(u.g);
  neg_lap_component(u.g, u.v, mask ? &mask->solid : nullptr, out.v);
  for (double& x : out.v) x = -x;
}

void lap(const StaggeredField& u, const FaceMask* mask, StaggeredField& out) {
  if (out.g != u.g) out = StaggeredField(u.g);
  for (int a = 0; a < u.g.d; ++a) {
    neg_lap_component(u.g, u.comp[a], mask ? &mask->solid[a] : nullptr,
                      out.comp[a]);
    for (double& x : out.comp[a]) x = -x;
  }
}

double dirichlet_inner(const ScalarField& u, const ScalarField& v,
                       const CellMask* mask) {
  ScalarField Au(u.g);
  neg_lap_component(u.g, u.v, mask ? &mask->solid : nullptr, Au.v);
  return l2_inner(Au, v);
}

double dirichlet_inner(const StaggeredField& u, const StaggeredField& v,
                       const FaceMask* mask) {
  double s = 0.0;
  std::vector<double> scratch;
  const double w = std::pow(u.g.h(), u.g.d);
  for (int a = 0; a < u.g.d; ++a) {
    neg_lap_component(u.g, u.comp[a], mask ? &mask->solid[a] : nullptr, scratch);
    s += w * pairwise_dot(scratch, v.comp[a]);
  }
  return s;
}

void mask_zero(ScalarField& u, const CellMask& mask) {
  for (long i = 0; i < (long)u.v.size(); ++i)
    if (mask.solid[i]) u.v[i] = 0.0;
}

void mask_zero(StaggeredField& u, const FaceMask& mask) {
  for (int a = 0; a < u.g.d; ++a)
    for (long i = 0; i < (long)u.comp[a].size(); ++i)
      if (mask.solid[a][i]) u.comp[a][i] = 0.0;
}

ScalarField face_to_center(const StaggeredField& v, int a) {
  const GridSpec& g = v.g;
  ScalarField out(g);
  const int N = g.N;
  const long str = g.stride(a);
  const long n = g.cells();
  for (long i = 0; i < n; ++i) {
    int ia = (int)((i / str) % N);
    long ip = i + off_plus(ia, N, str);
    out.v[i] = 0.5 * (v.comp[a][i] + v.comp[a][ip]);
  }
  return out;
}

ScalarField block_average(const ScalarField& f, int block) {
  const GridSpec& g = f.g;
  if (g.N % block != 0) throw GridMismatch("block_average: N % block != 0");
  GridSpec cg{g.d, g.N / block, g.L};
  ScalarField out(cg);
  const double inv = 1.0 / std::pow((double)block, g.d);
  const int N = g.N, M = cg.N;
  if (g.d == 2) {
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        out.v[(long)(a / block) * M + (b / block)] += f.v[(long)a * N + b];
  } else {
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        for (int c = 0; c < N; ++c)
          out.v[((long)(a / block) * M + (b / block)) * M + (c / block)] +=
              f.v[((long)a * N + b) * N + c];
  }
  for (double& x : out.v) x *= inv;
  return out;
}

double l2_norm_box(const ScalarField& f, double khalf) {
  const GridSpec& g = f.g;
  const int N = g.N;
  std::vector<char> in(N);
  for (int i = 0; i < N; ++i)
    in[i] = (std::fabs(center_coord(g, i)) <= khalf + 1e-14) ? 1 : 0;
  std::vector<double> terms;
  terms.reserve(f.v.size());
  if (g.d == 2) {
    for (int a = 0; a < N; ++a) {
      if (!in[a]) continue;
      for (int b = 0; b < N; ++b)
        if (in[b]) terms.push_back(f.v[(long)a * N + b] * f.v[(long)a * N + b]);
    }
  } else {
    for (int a = 0; a < N; ++a) {
      if (!in[a]) continue;
      for (int b = 0; b < N; ++b) {
        if (!in[b]) continue;
        for (int c = 0; c < N; ++c)
          if (in[c]) {
            double x = f.v[((long)a * N + b) * N + c];
            terms.push_back(x * x);
          }
      }
    }
  }
  return std::sqrt(std::pow(g.h(), g.d) * pairwise_sum(terms.data(), (long)terms.size()));
}

double lp_norm_centers(const std::array<ScalarField, 3>& comps, int d, double p) {
  const GridSpec& g = comps[0].g;
  const long n = g.cells();
  std::vector<double> terms(n);
  for (long i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int a = 0; a < d; ++a) m2 += comps[a].v[i] * comps[a].v[i];
    terms[i] = std::pow(m2, 0.5 * p);
  }
  return std::pow(std::pow(g.h(), d) * pairwise_sum(terms), 1.0 / p);
}

}  // namespace perfhom
