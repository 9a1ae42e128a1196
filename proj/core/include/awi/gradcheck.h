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

#ifndef AWI_GRADCHECK_H_
#define AWI_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "awi/tensor.h"

namespace awi {

// Fourth-order central-difference estimate
//   (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h
// for every element of every tensor in `inputs`. `f` must read the tensors through the same
// pointers; each element is restored bit-exactly after probing.
//
// Throws DomainError for step <= 0 and NumericError if f is ever non-finite.
std::vector<Tensor> finite_diff_gradient(const std::function<double()>& f,
                                         std::span<Tensor* const> inputs,
                                         double step);

// |a - b| / max(|a|, |b|, floor). The floor keeps gradients that are zero up
// to rounding from dominating the comparison.
double relative_error(double a, double b, double floor = 1e-8);

// Worst relative_error over matching elements of two tensors.
double max_relative_error(const Tensor& a, const Tensor& b,
                          double floor = 1e-8);

}  // namespace awi

#endif  // AWI_GRADCHECK_H_
