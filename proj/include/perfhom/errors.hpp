// Error types thrown across the library.  Each carries a human-readable
// message; the few that are routinely caught programmatically also carry
// the offending numbers.

#ifndef PERFHOM_ERRORS_HPP
#define PERFHOM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace perfhom {

struct BadConfig : std::runtime_error {
  explicit BadConfig(const std::string& m) : std::runtime_error(m) {}
};

// Hole too small for the grid (fewer cells across than the configured floor).
struct ResolutionError : std::runtime_error {
  explicit ResolutionError(const std::string& m) : std::runtime_error(m) {}
};

// Source field rejected for the active regime (see validate_source).
struct SourceInvalid : std::runtime_error {
  explicit SourceInvalid(const std::string& m) : std::runtime_error(m) {}
};

// Iterative solver failed to reach tolerance within its iteration cap.
struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, long iters_, double residual_)
      : std::runtime_error(what), iters(iters_), residual(residual_) {}
  long iters;
  double residual;
};

// Two independent routes to the same quantity disagree beyond tolerance.
struct DiscrepancyError : std::runtime_error {
  explicit DiscrepancyError(const std::string& m) : std::runtime_error(m) {}
};

// Fields on incompatible grids combined.
struct GridMismatch : std::runtime_error {
  explicit GridMismatch(const std::string& m) : std::runtime_error(m) {}
};

// Forcing has a nonzero mean where the periodic problem cannot absorb one.
struct ZeroModeError : std::runtime_error {
  explicit ZeroModeError(const std::string& m) : std::runtime_error(m) {}
};

// Regime classification found no monotone trend in the probe ratios.
struct AmbiguousRegime : std::runtime_error {
  explicit AmbiguousRegime(const std::string& m) : std::runtime_error(m) {}
};

// A ladder study needs more rungs than it was given.
struct InsufficientLadder : std::runtime_error {
  explicit InsufficientLadder(const std::string& m) : std::runtime_error(m) {}
};

// A per-hole local boundary-value solve failed.
struct LocalSolveFailure : std::runtime_error {
  explicit LocalSolveFailure(const std::string& m) : std::runtime_error(m) {}
};

// A ladder error sequence failed to decrease; the message carries the rows.
struct NonDecreasingError : std::runtime_error {
  explicit NonDecreasingError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace perfhom

#endif
