#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pqrl/param.hpp"
#include "pqrl/tape.hpp"

namespace pqrl {

// Finite-difference gradient checker. `build` must reconstruct the recorded
// computation from the current parameter values on the given tape and return
// a scalar (1x1) root node. Central differences with step h per entry;
// error metric is |analytic - numeric| / max(1, |analytic|, |numeric|).
struct GradCheckReport {
  struct PerTensor {
    std::string name;
    double max_err = 0.0;
  };
  std::vector<PerTensor> tensors;
  double max_err = 0.0;
  double tol = 0.0;

  bool pass() const { return max_err <= tol; }
};

GradCheckReport grad_check(const std::function<NodeId(Tape&)>& build,
                           const std::vector<ParamTensor*>& params, double tol,
                           double step = 1e-5);

}  // namespace pqrl
