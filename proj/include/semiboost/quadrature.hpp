// SPDX-License-Identifier: MIT
#pragma once

#include <functional>

namespace semiboost {

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace semiboost
