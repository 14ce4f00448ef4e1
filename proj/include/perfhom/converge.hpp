// ============================================================================
// Ladder studies: direct perforated solves along a decreasing-epsilon ladder,
// rescaled per regime and compared against the constant-coefficient limit
// systems, plus the corrector test-function identity evaluated term by term.
//
// A study fixes the torus (m * eps constant), walks eps down a ladder of at
// least four rungs, and records for every rung the micro norms, the regime
// error against the limit field, and the pressure-split norms.  The regime
// decides the comparison:
//
//   sigma -> 0        ||sigma^-2 v_eps - v_limit||_L2(K)   (K a centered box)
//   sigma -> sigma_*  ||v_eps - v_limit||_L2(K)
//   sigma -> inf      ||grad(v_eps - v_ref)||_L2(torus)
//
// The subcritical branch runs hole-free (the degenerate convention) and its
// reference is a fine-grid solve resampled down to each rung: the spectral
// limit solvers share the grid's difference symbols, so a same-grid compare
// would measure round-off, not convergence.  Hole-free rungs switch the
// source to the mirrored dipole, which is mean-free by construction — the
// torus problem without holes cannot absorb a mean force.
//
// Error sequences must decrease strictly along the ladder (ties below a
// 1e-10 relative noise floor are tolerated); NonDecreasingError carries the
// whole table otherwise.  Reports are deterministic: the same spec produces
// a bit-identical CSV.
//
// The corrector identity takes the tiled cell corrector pair (w, q) as a
// test function against a micro solution and evaluates each term of the
// product-rule expansion separately; the imbalance of the expanded identity
// is the reported residual and shrinks at first order under grid refinement
// at fixed eps.  The weak form itself, evaluated with the matched discrete
// operators, holds to solver tolerance and is reported alongside as a
// sanity channel.
// ============================================================================
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "perfhom/cell.hpp"
#include "perfhom/grid.hpp"
#include "perfhom/lattice.hpp"
#include "perfhom/macro.hpp"
#include "perfhom/micro.hpp"

namespace perfhom {

enum class StudyProblem { Poisson, Stokes };

// How the hole size follows eps down the ladder.
//   PowerLaw      a = eps^alpha
//   FixedEta      a = eta * eps              (supercritical; resolution-stable)
//   CriticalSigma a chosen so sigma_eps == sigma_star at every rung
//   HoleFree      a below every floor; rungs run the degenerate convention
enum class HoleSchedule { PowerLaw, FixedEta, CriticalSigma, HoleFree };

struct StudySpec {
  StudyProblem problem = StudyProblem::Stokes;
  int d = 3;
  HoleSchedule schedule = HoleSchedule::PowerLaw;
  double alpha = 2.0;   // PowerLaw exponent
  double eta = 0.0;     // FixedEta ratio
  double sigma_star = 0.0;  // CriticalSigma target (d=3: a = eps^3/sigma_*^2)

  std::vector<double> ladder;      // eps per rung, strictly decreasing, >= 4
  std::vector<int> cells_per_eps;  // n per rung; a single entry is uniform
  std::vector<int> periods;        // m per rung; m * eps must stay constant

  long min_hole_cells = 1;
  HoleModel hole;
  std::array<double, 3> x0{0.0, 0.0, 0.0};

  int source_axis = 0;        // Stokes bump component
  double source_radius = 0.0; // 0: the bump default (0.3 L)
  double k_half = 0.0;        // comparison box half-width; 0: L/4

  Mat3 tensor{};       // Darcy / Brinkman coefficient (Stokes limits)
  double wbar = 0.0;   // Poisson limit coefficient
  int reference_cells = 0;  // HoleFree: fine-reference grid size (0: 160)

  std::string csv_path;  // empty: the CSV stays in the report only
};

struct StudyRow {
  double eps = 0.0;
  double a_eps = 0.0;
  double sigma = 0.0;
  long grid_n = 0;  // cells per axis of the rung torus
  double micro_l2 = 0.0;
  double micro_grad = 0.0;
  double micro_p = 0.0;     // Stokes only
  double err = 0.0;         // regime error norm against the limit
  double rel_err = 0.0;     // err / limit norm
  double grad_p1 = 0.0;     // pressure split norms (Stokes, resolved holes)
  double p2 = 0.0;
  double energy_gap = 0.0;  // | ||grad v_eps||^2 - <g, v_limit> |  (Stokes)
};

struct ConvergenceReport {
  StudyProblem problem = StudyProblem::Stokes;
  RegimeLabel label = RegimeLabel::Critical;
  double sigma_star = 0.0;     // meaningful iff label == Critical
  std::vector<StudyRow> rows;  // sorted by decreasing eps
  SlopeFit err_slope;          // log-log err against eps; recorded, not gated
  double final_rel = 0.0;
  double limit_norm = 0.0;     // denominator of the relative errors
  // Relative | ||grad v||^2 - <g, v> | of the limit solve itself; the
  // spectral solves satisfy it to round-off.  Stokes only.
  double macro_energy_residual = 0.0;
  std::string csv;
};

// Ladder/schedule coherence checks (throws BadConfig); the per-rung solver
// preconditions are enforced by the solves themselves.
void validate_study(const StudySpec& spec);

// The perforation config of one rung.
PerforationConfig rung_config(const StudySpec& spec, size_t rung);

// Run the ladder.  Throws NonDecreasingError (with the full table in the
// message) when the error sequence fails to decrease.
ConvergenceReport run_study(const StudySpec& spec);

// Energy identity chain of the subcritical limit: ||grad v_eps||^2 must
// approach <g, v_limit> monotonically and the limit must satisfy its own
// identity to 1e-8 relative.  g lives on the limit's grid.
struct StrongConvergence {
  bool pass = false;
  std::vector<double> gap;  // | ||grad v_eps||^2 - <g, v_limit> | per rung
  double pairing = 0.0;     // <g, v_limit>
  double macro_residual = 0.0;
  std::string detail;
};
StrongConvergence strong_convergence_check(const std::vector<MicroSolution>& rungs,
                                           const MacroSolution& limit,
                                           const StaggeredField& g);

// Fourier resampling between two grids of the same torus: mode truncation
// (or zero-padding), with unmatched band edges zeroed; staggered components
// carry their half-cell phase so faces land on faces.
ScalarField resample_centers(const ScalarField& f, int n_dst);
StaggeredField resample_faces(const StaggeredField& f, int n_dst);

// Periodic tiling of a unit-cell field, `periods` copies per axis.
ScalarField tile_centers(const ScalarField& cell_field, int periods);
StaggeredField tile_faces(const StaggeredField& cell_field, int periods);

// Every term of the expanded test-function identity, evaluated discretely.
// The corrector pair is tiled from `cell` (which must share the rung's n and
// hole raster; the tiled corrector has to vanish on the micro solid faces or
// the test function is inadmissible — DiscrepancyError).  phi is the radial
// C^2 bump of radius phi_radius (0: k_half default L/4) sampled analytically;
// split_scale feeds the pressure split (sigma_eps, or 1 in the critical
// regime).
struct CorrectorIdentityRecord {
  int axis = 0;
  double sigma = 0.0;
  double grad_cross = 0.0;     // int grad v : (w (x) grad phi)
  double transport = 0.0;      // int (grad phi (x) v) : grad w
  double cell_pressure = 0.0;  // eps^-1 int div(phi v) q
  double friction = 0.0;       // sigma^-2 int phi v . e_axis
  double p1_term = 0.0;        // -int grad p1 . (w phi)
  double p2_term = 0.0;        // int p2 grad phi . w
  double source = 0.0;         // <g, w phi>
  double lhs_direct = 0.0;     // <grad v, grad(w phi)> - <p, div(w phi)>
  double scale = 0.0;          // max |term|
  double residual = 0.0;       // expanded identity imbalance / scale
  double direct_residual = 0.0;  // weak-form imbalance / scale
};
CorrectorIdentityRecord corrector_test_identity(const MicroSolution& micro,
                                                const CellSolution& cell,
                                                const StaggeredField& g,
                                                int axis, double split_scale,
                                                double phi_radius = 0.0);

}  // namespace perfhom
