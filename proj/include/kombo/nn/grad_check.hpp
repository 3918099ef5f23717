// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kombo/nn/autograd.hpp"

namespace kombo::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// Coordinates probed per tensor; 0 checks every coordinate.
  std::size_t max_coords_per_tensor = 0;
  /// Denominator floor for the relative error. Gradients that are exactly
  /// zero (a key bias under softmax, say) show ~1e-10 of roundoff in the
  /// central difference; the floor keeps that from reading as a mismatch.
  double floor = 1e-5;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

struct NamedVar {
  std::string name;
  Var<double> var;
};

/// Compares backward() of `loss` against central differences for each input.
/// rel = |a - n| / max(|a|, |n|, floor). A non-finite loss throws OracleFailure.
GradCheckReport grad_check(const std::function<Var<double>()>& loss, const std::vector<NamedVar>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace kombo::nn
