// Copyright 2026 The AWI Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "awi/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "awi/errors.h"

namespace awi {

std::vector<Tensor> finite_diff_gradient(const std::function<double()>& f,
                                         std::span<Tensor* const> inputs,
                                         double step) {
  if (!(step > 0.0)) throw DomainError("finite_diff_gradient: step must be > 0");
  auto eval = [&f]() {
    const double v = f();
    if (!std::isfinite(v)) {
      throw NumericError("finite_diff_gradient: objective is not finite");
    }
    return v;
  };

  std::vector<Tensor> grads;
  grads.reserve(inputs.size());
  for (Tensor* t : inputs) {
    Tensor g(t->rows(), t->cols());
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double saved = (*t)[i];
      auto at = [&](double offset) {
        (*t)[i] = saved + offset;
        return eval();
      };
      const double up1 = at(step);
      const double down1 = at(-step);
      const double up2 = at(2.0 * step);
      const double down2 = at(-2.0 * step);
      (*t)[i] = saved;
      g[i] = (8.0 * (up1 - down1) - (up2 - down2)) / (12.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double relative_error(double a, double b, double floor) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_relative_error: " + a.shape_string() + " vs " +
                         b.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, relative_error(a[i], b[i], floor));
  }
  return worst;
}

}  // namespace awi
