// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <vector>

namespace graphcap {

class InsufficientPointsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Least squares through the origin: y = c * x.
inline double origin_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double sxy = 0;
  double sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  return sxy / sxx;
}

// ||predicted - observed||_2 / ||observed||_2.
double relative_residual(const std::vector<double>& predicted, const std::vector<double>& observed);

}  // namespace graphcap
