// Grid-refinement study of the d = 3 ball-obstacle permeability: frozen
// values on a refinement triple, observed convergence order, and a drag
// sanity band from the simple-cubic Stokes-flow literature.
#include <array>
#include <cmath>

#include "doctest.h"
#include "perfhom/cell.hpp"
#include "perfhom/grid.hpp"

using namespace perfhom;

namespace {

double rel(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

double aitken3(double x0, double x1, double x2) {
  const double d1 = x1 - x0, d2 = x2 - x1;
  const double den = d2 - d1;
  if (std::fabs(den) <= 1e-12 * std::fabs(x2)) return x2;
  return x2 - d2 * d2 / den;
}

}  // namespace

TEST_CASE("d3 ball permeability refinement triple") {
  HoleModel hole;  // ball, r = 0.25; with eta = 0.25 the obstacle radius
                   // is 1/16 of the cell, so n = 32 resolves 4 cells.
  const double eta = 0.25;
  const std::array<int, 3> ns{32, 64, 128};
  const std::array<double, 3> frozen{0.19641956434443211, 0.17852717451630601,
                                     0.17615969933901415};

  std::array<double, 3> a{};
  for (int k = 0; k < 3; ++k) {
    CellSolution sol = solve_cell_stokes(3, eta, hole, ns[k], {}, 4);
    a[k] = sol.A[0][0];
    CHECK(rel(a[k], frozen[k]) < 1e-9);
    CHECK(rel(sol.A[1][1], sol.A[0][0]) < 1e-9);  // coordinate permutation
    CHECK(rel(sol.A[2][2], sol.A[0][0]) < 1e-9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::fabs(sol.A[i][j]) < 1e-12);
    CHECK(sol.discrepancy < 1e-6);
    CHECK(sol.A[0][0] > 0.0);
  }

  // Differences contract under refinement; observed order at least 1.
  const double d1 = std::fabs(a[1] - a[0]);
  const double d2 = std::fabs(a[2] - a[1]);
  CHECK(d2 < d1);
  const double order = std::log2(d1 / d2);
  CHECK(order >= 1.0);
  CHECK(order <= 4.0);

  // Extrapolated value against the dilute simple-cubic drag expansion
  // (Hasimoto): settling mobility of a sphere of radius rho in a unit cell,
  //   U = S / (6 pi rho),  S = 1 - 1.7601 c^(1/3) + c - 1.5593 c^2,
  // with c the solid volume fraction; the tensor carries a factor eta.
  const double extrap = aitken3(a[0], a[1], a[2]);
  const double rho = eta * hole.r;
  const double c = 4.0 * M_PI / 3.0 * rho * rho * rho;
  const double S =
      1.0 - 1.7601 * std::cbrt(c) + c - 1.5593 * c * c;
  const double a_ref = eta * S / (6.0 * M_PI * rho);
  CHECK(rel(extrap, a_ref) < 0.05);
}
