#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "perfhom/grid.hpp"

using namespace perfhom;

TEST_CASE("grid spec basics") {
  GridSpec g{2, 12, 3.0};
  CHECK(g.h() == doctest::Approx(0.25));
  CHECK(g.cells() == 144);
  CHECK(g.stride(0) == 1);
  CHECK(g.stride(1) == 12);
  GridSpec g3{3, 8, 1.0};
  CHECK(g3.cells() == 512);
  CHECK(g3.stride(2) == 64);
  CHECK(g == GridSpec{2, 12, 3.0});
  CHECK(g != g3);
}

TEST_CASE("pairwise summation is accurate on adversarial data") {
  // Alternating large/small entries defeat naive left-to-right accumulation
  // at ~1e-12 relative; pairwise recovers close to long-double truth.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const long n = 100001;
  std::vector<double> x(n);
  long double exact = 0.0L;
  for (long i = 0; i < n; ++i) {
    x[i] = uni(rng) + ((i % 2) ? 1e8 : -1e8);
    exact += (long double)x[i];
  }
  double got = pairwise_sum(x);
  CHECK(std::fabs(got - (double)exact) <= 1e-6 * 1e8);

  // dot against long double on benign data
  std::vector<double> a(12345), b(12345);
  long double dot = 0.0L;
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = uni(rng);
    b[i] = uni(rng);
    dot += (long double)a[i] * b[i];
  }
  CHECK(pairwise_dot(a, b) == doctest::Approx((double)dot).epsilon(1e-13));
}

TEST_CASE("l2 inner products carry the h^d quadrature weight") {
  GridSpec g{2, 8, 2.0};
  ScalarField one(g);
  for (auto& v : one.v) v = 1.0;
  // ||1||^2 over the torus = L^d
  CHECK(l2_norm(one) == doctest::Approx(2.0));
  CHECK(l2_inner(one, one) == doctest::Approx(4.0));

  StaggeredField w(g);
  for (int a = 0; a < 2; ++a)
    for (auto& v : w.comp[a]) v = 3.0;
  // two components of constant 3: ||w||^2 = 2 * 9 * L^d
  CHECK(l2_inner(w, w) == doctest::Approx(72.0));
  CHECK(l2_norm(w) == doctest::Approx(std::sqrt(72.0)));
  CHECK(max_abs(w) == doctest::Approx(3.0));
}

TEST_CASE("face mask marks both cells adjacent to a solid cell") {
  GridSpec g{2, 6, 1.0};
  CellMask cm(g);
  auto at = [&](int i, int j) -> std::uint8_t& { return cm.solid[j * 6 + i]; };
  at(2, 3) = 1;
  at(0, 0) = 1;  // exercises the periodic wrap on both axes
  FaceMask fm = face_mask_from_cells(cm);

  // Face a of cell (i,j) sits between cells (i,j)-e_a and (i,j).
  auto fx = [&](int i, int j) { return fm.solid[0][j * 6 + i]; };
  auto fy = [&](int i, int j) { return fm.solid[1][j * 6 + i]; };
  CHECK(fx(2, 3) == 1);  // left face of the solid cell
  CHECK(fx(3, 3) == 1);  // left face of its right neighbor
  CHECK(fy(2, 3) == 1);
  CHECK(fy(2, 4) == 1);
  CHECK(fx(4, 3) == 0);
  CHECK(fy(2, 2) == 0);  // the bottom face of (2,3) is fy(2,3), not fy(2,2)
  // wrap: cell (0,0) solid -> face 0 of cell (0,0) and of (1,0); face 0 of
  // cell (0,0) borders cell (5,0)
  CHECK(fx(0, 0) == 1);
  CHECK(fx(1, 0) == 1);
  CHECK(fy(0, 0) == 1);
  CHECK(fy(0, 1) == 1);
  CHECK(cm.solid_count() == 2);

  long nx = 0, ny = 0;
  for (auto s : fm.solid[0]) nx += s;
  for (auto s : fm.solid[1]) ny += s;
  CHECK(nx == 4);  // two faces per solid cell per axis, no overlap here
  CHECK(ny == 4);
}

TEST_CASE("axpy and scale") {
  std::vector<double> x{1.0, 2.0, 3.0}, y{1.0, 1.0, 1.0};
  axpy(2.0, x, y);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[2] == doctest::Approx(7.0));
  scale(0.5, y);
  CHECK(y[1] == doctest::Approx(2.5));
}
