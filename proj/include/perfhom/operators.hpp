// Staggered (MAC) difference operators on the periodic torus, with optional
// solid masks.
//
// Conventions:
//   grad:  (grad p)_a[i] = (p[i] - p[i - e_a]) / h          (cell -> face)
//   div:   (div v)[i]    = sum_a (v_a[i + e_a] - v_a[i]) / h (face -> cell)
//   lap:   standard 2d+1 point stencil, componentwise on faces.
// These satisfy <grad p, v> = -<p, div v> exactly in the h^d inner product.
//
// Masked variants implement homogeneous Dirichlet data on the solid set by
// elimination: masked input fields are zero on solid entries, neighbor reads
// need no mask lookup, and outputs are zeroed on solid entries.  The masked
// -lap is then symmetric positive (semi-)definite on the fluid subspace and
// <(-lap) u, v> equals the bond sum of gradient differences of the
// zero-extended fields.

#ifndef PERFHOM_OPERATORS_HPP
#define PERFHOM_OPERATORS_HPP

#include <array>

#include "perfhom/grid.hpp"

namespace perfhom {

// mask == nullptr means no solid set.
void grad(const ScalarField& p, const FaceMask* mask, StaggeredField& out);
void divergence(const StaggeredField& v, const CellMask* mask, ScalarField& out);

// Laplacian (negative semi-definite sign convention: lap == Delta).
void lap(const ScalarField& u, const CellMask* mask, ScalarField& out);
void lap(const StaggeredField& u, const FaceMask* mask, StaggeredField& out);

// Raw-array versions used by the solvers: y = (-Delta) x on one component
// lattice, with Dirichlet elimination against `solid` (may be null).
void neg_lap_component(const GridSpec& g, const std::vector<double>& x,
                       const std::vector<std::uint8_t>* solid,
                       std::vector<double>& y);

// Dirichlet energy <grad u, grad v> of zero-extended masked fields, computed
// as <(-lap) u, v>; exact bond-sum identity when u, v vanish on the solid set.
double dirichlet_inner(const ScalarField& u, const ScalarField& v,
                       const CellMask* mask);
double dirichlet_inner(const StaggeredField& u, const StaggeredField& v,
                       const FaceMask* mask);

// Zero all solid entries.
void mask_zero(ScalarField& u, const CellMask& mask);
void mask_zero(StaggeredField& u, const FaceMask& mask);

// Component a averaged from faces to cell centers:
// c[i] = (v_a[i] + v_a[i + e_a]) / 2.
ScalarField face_to_center(const StaggeredField& v, int a);

// Average over disjoint blocks of `block` cells per axis (N % block == 0);
// returns the coarse field on GridSpec{d, N/block, L}.
ScalarField block_average(const ScalarField& f, int block);

// Coordinate of cell center i along an axis.
inline double center_coord(const GridSpec& g, long axis_index) {
  return -0.5 * g.L + (axis_index + 0.5) * g.h();
}

// L2 norm over the sub-box K = { |x_a| <= khalf for all a } (cell centers).
double l2_norm_box(const ScalarField& f, double khalf);

// l^p norm (p >= 1) of the pointwise magnitude of a center-sampled vector.
double lp_norm_centers(const std::array<ScalarField, 3>& comps, int d, double p);

}  // namespace perfhom

#endif
