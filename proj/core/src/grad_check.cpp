#include "pqrl/grad_check.hpp"

#include <cmath>

namespace pqrl {

namespace {
double scalar_eval(const std::function<NodeId(Tape&)>& build) {
  Tape t;
  NodeId root = build(t);
  const Mat& v = t.value(root);
  if (v.rows() != 1 || v.cols() != 1)
    throw ContractError("grad_check: computation must be scalar-valued, got " + v.shape_str());
  return v(0, 0);
}
}  // namespace

GradCheckReport grad_check(const std::function<NodeId(Tape&)>& build,
                           const std::vector<ParamTensor*>& params, double tol, double step) {
  GradCheckReport report;
  report.tol = tol;

  // Analytic pass.
  for (auto* p : params) p->zero_grad();
  {
    Tape t;
    NodeId root = build(t);
    const Mat& v = t.value(root);
    if (v.rows() != 1 || v.cols() != 1)
      throw ContractError("grad_check: computation must be scalar-valued, got " + v.shape_str());
    t.backward(root);
  }

  for (auto* p : params) {
    GradCheckReport::PerTensor pt;
    pt.name = p->name;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double saved = p->value.at_flat(i);
      p->value.at_flat(i) = saved + step;
      double up = scalar_eval(build);
      p->value.at_flat(i) = saved - step;
      double down = scalar_eval(build);
      p->value.at_flat(i) = saved;
      double numeric = (up - down) / (2.0 * step);
      double analytic = p->grad.at_flat(i);
      double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      pt.max_err = std::max(pt.max_err, std::fabs(analytic - numeric) / denom);
    }
    report.max_err = std::max(report.max_err, pt.max_err);
    report.tensors.push_back(std::move(pt));
  }
  return report;
}

}  // namespace pqrl
