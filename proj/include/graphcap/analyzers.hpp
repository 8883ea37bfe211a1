// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Graph-level cost aggregation: algorithmic FLOP/byte totals, operational
// intensity, algorithmic IO, minimal memory footprint via traversal
// simulation, model-size sweeps and first-order requirement-model fits.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "graphcap/autodiff.hpp"
#include "graphcap/graph.hpp"
#include "graphcap/numerics.hpp"

namespace graphcap {

class TooLargeForExhaustiveError : public GraphError {
 public:
  using GraphError::GraphError;
};

struct OpCostRow {
  std::string op_id;
  OpType type = OpType::kIdentity;
  DimExpr flops;
  DimExpr bytes;
};

struct CostReport {
  DimExpr total_flops;
  DimExpr total_bytes;
  DimExpr io_bytes;
  std::vector<OpCostRow> per_op;

  double flops(const Binding& b) const { return total_flops.evaluate(b); }
  double bytes(const Binding& b) const { return total_bytes.evaluate(b); }
  double io(const Binding& b) const { return io_bytes.evaluate(b); }
  double op_intensity(const Binding& b) const;
};

CostReport analyze(const ComputeGraph& g, const ByteCountOptions& opt = {});
CostReport analyze(const TrainingStepGraph& g, const ByteCountOptions& opt = {});

enum class FootprintMode { kHeuristic, kExhaustive };

struct FootprintOptions {
  FootprintMode mode = FootprintMode::kHeuristic;
  // Opt-in: pointwise/identity outputs reuse their input allocation.
  bool in_place_pointwise = false;
  // Exhaustive search is exponential in op count.
  size_t exhaustive_op_limit = 12;
};

// Peak allocated bytes over a topological traversal: op outputs are
// allocated before execution, tensors are freed once every consumer has
// run, weights persist (weight + gradient + optimizer slots as marked on
// the tensor), and graph inputs are allocated at start but freeable.
// Heuristic mode executes the ready op with the smallest alloc-minus-freed
// delta (ties by op id); exhaustive mode minimizes the peak over all
// topological orders.
double min_footprint(const ComputeGraph& g, const Binding& b, const FootprintOptions& opt = {});

// Bytes of designated input and output tensors; proportional to batch size.
double algorithmic_io(const ComputeGraph& g, const Binding& b);
DimExpr algorithmic_io_expr(const ComputeGraph& g);

struct SweepInput {
  TrainingStepGraph graph;
  Binding binding;
  double batch = 1.0;
  DimExpr params;
};

struct SweepRow {
  double axis_value = 0;
  double params = 0;
  double flops_per_sample = 0;
  double bytes_per_step = 0;
  double intensity = 0;
  double footprint_bytes = 0;
};

struct SweepTable {
  std::string axis;
  std::vector<SweepRow> rows;
  // Fixed column order: p,flops_per_sample,bytes_per_step,intensity,footprint_bytes
  std::string to_csv() const;
};

SweepTable sweep(const std::function<SweepInput(double)>& build, const std::string& axis,
                 const std::vector<double>& values);

struct RequirementFit {
  double gamma = 0;   // FLOPs per parameter per sample
  double lambda = 0;  // bytes per parameter
  double mu = 0;      // bytes per (sample * sqrt(parameter))
  double delta = 0;   // footprint bytes per parameter
  double gamma_residual = 0;  // ||y - fit|| / ||y||
  double bytes_residual = 0;
  double delta_residual = 0;
};

// Least-squares fits of c=gamma*p, a=lambda*p+mu*b*sqrt(p), f=delta*p.
// Needs >=5 points spanning >=2 decades of p; `batch` is the subbatch the
// sweep was taken at.
RequirementFit fit_requirement_models(const SweepTable& table, double batch);

}  // namespace graphcap
