// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Derives a training-step graph (forward + backward + weight updates) from
// a validated forward graph using per-op-type backward cost rules:
// matrix/convolution ops cost 2x forward in backward, pointwise ops 1x,
// embedding lookups scatter with zero FLOPs, and each weight receives one
// update op of 2 FLOPs and 3 passes per element.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "graphcap/graph.hpp"

namespace graphcap {

class MissingWeightError : public GraphError {
 public:
  using GraphError::GraphError;
};

class ZeroForwardFlopsError : public GraphError {
 public:
  using GraphError::GraphError;
};

struct TrainingStepGraph {
  ComputeGraph graph;  // validated forward + backward + update graph
  std::vector<std::string> forward_ops;
  std::map<std::string, std::vector<std::string>> grad_ops_of;  // forward op -> grad ops
  std::vector<std::string> update_ops;

  DimExpr forward_flops() const;
  DimExpr total_flops() const;
};

struct TrainingOptions {
  // Multipliers on the weight-update cost for heavier optimizers
  // (plain SGD at 1; e.g. Adam roughly 5 / 2).
  DimExpr update_flops_multiplier = DimExpr(1);
  DimExpr update_bytes_multiplier = DimExpr(1);
};

// Forward graph must be validated and contain at least one weight tensor.
TrainingStepGraph derive_training_graph(const ComputeGraph& fwd, const TrainingOptions& opt = {});

// Total training FLOPs divided by forward FLOPs under a full binding.
double training_flops_ratio(const TrainingStepGraph& g, const Binding& b);

}  // namespace graphcap
