#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "acase/errors.hpp"
#include "acase/nn/model.hpp"

namespace acase::nn {

// Loss of a model on some fixed input. With backprop=true it must also add
// the analytic gradients into the parameters' grad fields.
using Objective = std::function<double(ModelState&, bool backprop)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  Index worst_entry = 0;
  std::size_t entries_checked = 0;
};

// Central differences over every parameter entry against the analytic
// gradient. Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheckResult finite_diff_check(ModelState& m, const Objective& f, double eps, double floor = 1e-6) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw InvalidSpec("finite-difference step must lie in [1e-7, 1e-3]");
  m.zero_grad();
  f(m, true);
  std::vector<Matrix> analytic;
  for (const auto& p : m.params) analytic.push_back(p.grad);
  m.zero_grad();

  GradCheckResult r;
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    Matrix& v = m.params[k].value;
    for (Index e = 0; e < v.size(); ++e) {
      double& x = v.data()[e];
      const double orig = x;
      x = orig + eps;
      const double fp = f(m, false);
      x = orig - eps;
      const double fm = f(m, false);
      x = orig;
      const double num = (fp - fm) / (2.0 * eps);
      const double a = analytic[k].data()[e];
      const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), floor});
      ++r.entries_checked;
      if (rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst_param = k;
        r.worst_entry = e;
      }
    }
  }
  return r;
}

}  // namespace acase::nn
