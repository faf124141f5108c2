#pragma once

#include "core/lmi.hpp"

namespace dissent {

// Bundled primal-dual interior-point solver on the homogeneous self-dual
// embedding, Nesterov-Todd scaling, Mehrotra predictor-corrector. Handles
// the nonnegative orthant, second-order cones, and dense PSD cones (svec
// storage), plus a leading equality block.
class HsdeSolver : public ConeSolver {
 public:
  Caps caps() const override { return Caps{true, true, true}; }
  SolveReport solve_lowered(const LoweredConic& p, const SolverOptions& o) const override;
};

}  // namespace dissent
