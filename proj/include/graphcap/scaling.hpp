// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Power-law learning-curve and model-size projections: generalization error
// scales as eps(m) = alpha * m^beta_g over dataset size m, and the
// parameters needed to fit m samples scale as p(m) = sigma * m^beta_p.
// Solving these for a target error yields dataset and model growth factors.

#pragma once

#include <string>
#include <vector>

#include "graphcap/numerics.hpp"

namespace graphcap {

class NonPositiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroExponentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutsidePowerLawRegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearningCurve {
  double alpha = 1.0;    // > 0
  double beta_g = -0.1;  // in [-0.5, 0]
  std::string metric_name;
  bool lower_is_better = true;

  void check() const;
  double error_at(double samples) const;  // alpha * m^beta_g
};

struct ModelSizeCurve {
  double sigma = 1.0;   // > 0
  double beta_p = 0.7;  // in [0.5, 1)

  void check() const;
};

struct DomainConstants {
  std::string domain;
  double current_sota = 0;
  double desired_sota = 0;
  double current_samples = 0;  // dataset size behind current_sota
  std::string sample_unit;
  double current_gb = 0;
  double current_params = 0;  // parameter count behind current_sota
  LearningCurve learning_curve;
  ModelSizeCurve model_size;
  // Reference growth factors from the published study, for side-by-side
  // reporting. Zero when not available.
  double ref_data_multiplier = 0;
  double ref_model_multiplier = 0;
  std::string notes;  // per-row unit caveats
};

// The five studied domains with their published constants.
const std::vector<DomainConstants>& default_domains();
const DomainConstants& domain_constants(const std::string& name);

// Dataset growth factor to move current SOTA error to the target:
// (eps_now / eps_target)^(1 / |beta_g|). The alpha prefactor cancels.
double required_data_multiplier(const DomainConstants& dc);

// Model growth for a given dataset growth: data_mult^beta_p.
double required_model_multiplier(double data_mult, const ModelSizeCurve& msc);

// Absolute dataset size for a target error via the alpha-anchored curve:
// m = (eps / alpha)^(1 / beta_g). Requires eps < alpha.
double solve_data_for_error(const LearningCurve& lc, double eps);

struct PowerLawFit {
  double coef = 0;
  double exponent = 0;
  double r2 = 0;
};

// Log-log least squares on positive points (x, y).
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct ProjectionReport {
  std::string domain;
  double data_multiplier = 0;
  double model_multiplier = 0;
  double target_samples = 0;
  double target_params = 0;
  double ref_data_multiplier = 0;
  double ref_model_multiplier = 0;
  // Set when the computed multiplier disagrees with the reference by more
  // than 10%; the computed value is always the one reported.
  bool diverges = false;
  std::string divergence_note;
};

ProjectionReport project_domain(const DomainConstants& dc);

}  // namespace graphcap
