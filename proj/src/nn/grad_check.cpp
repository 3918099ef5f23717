// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kombo/error.hpp"
#include "kombo/nn/rng.hpp"

namespace kombo::nn {
namespace {

double evaluate(const std::function<Var<double>()>& loss) {
  const Var<double> out = loss();
  if (out.value().size() != 1) throw Error(ErrorKind::ShapeError, "grad_check loss must be a scalar");
  const double v = out.value()[0];
  if (!std::isfinite(v)) throw Error(ErrorKind::OracleFailure, "loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Var<double>()>& loss, const std::vector<NamedVar>& inputs,
                           const GradCheckOptions& options) {
  for (const auto& in : inputs) in.var.shared()->grad = Tensor<double>();
  const Var<double> root = loss();
  if (!std::isfinite(root.value()[0])) throw Error(ErrorKind::OracleFailure, "loss is not finite");
  backward(root);

  std::vector<Tensor<double>> analytic;
  for (const auto& in : inputs) analytic.push_back(in.var.grad());

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Var<double> var = inputs[t].var;
    const std::size_t n = var.value().size();
    std::vector<std::size_t> coords;
    if (options.max_coords_per_tensor == 0 || options.max_coords_per_tensor >= n) {
      coords.resize(n);
      std::iota(coords.begin(), coords.end(), 0);
    } else {
      coords = rng.sample_without_replacement(n, options.max_coords_per_tensor);
    }
    for (std::size_t i : coords) {
      double& slot = var.mutable_value()[i];
      const double saved = slot;
      slot = saved + options.epsilon;
      const double up = evaluate(loss);
      slot = saved - options.epsilon;
      const double down = evaluate(loss);
      slot = saved;
      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_error || report.worst_tensor.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, rel);
        report.worst_tensor = inputs[t].name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace kombo::nn
