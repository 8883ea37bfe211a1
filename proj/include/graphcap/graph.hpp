// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Framework-independent compute-graph representation. Ops carry symbolic
// attribute dimensions; per-op cost rules express algorithmic FLOPs (the
// mathematical calculation only) and algorithmic bytes (input bytes read
// plus output bytes written) as DimExpr.

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphcap/symexpr.hpp"

namespace graphcap {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateIdError : public GraphError {
 public:
  explicit DuplicateIdError(const std::string& id) : GraphError("duplicate id: " + id) {}
};

class UnknownTensorError : public GraphError {
 public:
  explicit UnknownTensorError(const std::string& id) : GraphError("unknown tensor: " + id) {}
};

class CycleError : public GraphError {
 public:
  explicit CycleError(const std::string& path) : GraphError("cycle detected: " + path) {}
};

class ShapeMismatchError : public GraphError {
 public:
  ShapeMismatchError(const std::string& op_id, const std::string& detail)
      : GraphError("shape mismatch in op " + op_id + ": " + detail) {}
};

enum class TensorKind { kWeight, kActivation, kInput, kOutput, kGradient };

enum class OpType {
  kMatMul,
  kConv2D,
  kPointwise,
  kEmbeddingLookup,
  kReduction,
  kSoftmax,
  kBatchNorm,
  kConcat,
  kSplit,
  kPool,
  kWeightUpdate,
  kIdentity,
};

const char* op_type_name(OpType t);
OpType op_type_from_name(const std::string& name);
const char* tensor_kind_name(TensorKind k);
TensorKind tensor_kind_from_name(const std::string& name);

struct TensorSpec {
  std::string id;
  std::vector<DimExpr> shape;
  int dtype_bytes = 4;
  TensorKind kind = TensorKind::kActivation;

  // Copies counted by footprint analysis while the tensor is live. Builders
  // set this to the unroll count for activations that backprop needs from
  // every recurrent step, and leave 1 for per-step transients. 0 marks
  // tensors whose storage is already accounted elsewhere (weight gradients
  // live in the persistent gradient slot).
  DimExpr footprint_mult = DimExpr(1);

  // Persistent copies a weight contributes to the training footprint
  // (weight + gradient + optimizer state for densely updated weights).
  // Set by derive_training_graph; forward-only analysis keeps 1.
  int footprint_slots = 1;

  DimExpr num_elements() const;
  DimExpr bytes() const;
};

struct OpNode {
  std::string id;
  OpType type = OpType::kIdentity;
  std::map<std::string, DimExpr> attrs;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  // Times this op executes in one graph traversal (recurrent segments).
  DimExpr unroll_count = DimExpr(1);

  const DimExpr& attr(const std::string& name) const;
  DimExpr attr_or(const std::string& name, const DimExpr& fallback) const;
};

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> notes;
};

class ComputeGraph {
 public:
  void declare_symbol(const std::string& name, std::optional<double> default_value = {});
  TensorSpec& add_tensor(TensorSpec t);
  OpNode& add_op(OpNode op);

  // Checks acyclicity, arities, single-producer rule and per-type shape
  // consistency. The graph is immutable once validation succeeds.
  ValidationReport validate();
  bool validated() const { return validated_; }

  const TensorSpec& tensor(const std::string& id) const;
  const OpNode& op(const std::string& id) const;
  bool has_tensor(const std::string& id) const { return tensors_.count(id) != 0; }
  const std::vector<std::string>& tensor_ids() const { return tensor_order_; }
  const std::vector<std::string>& op_ids() const { return op_order_; }
  size_t num_ops() const { return op_order_.size(); }

  // Kahn's algorithm; ready ops are taken in id order so the result is
  // deterministic.
  std::vector<std::string> topological_order() const;

  // Producer op id of a tensor, empty if the tensor is a graph input/weight.
  const std::string& producer_of(const std::string& tensor_id) const;
  const std::vector<std::string>& consumers_of(const std::string& tensor_id) const;

  const std::map<std::string, std::optional<double>>& symbols() const { return symbols_; }
  Binding default_binding() const;

 private:
  void require_mutable() const;
  void check_shapes(const OpNode& op) const;

  std::map<std::string, TensorSpec> tensors_;
  std::map<std::string, OpNode> ops_;
  std::vector<std::string> tensor_order_;
  std::vector<std::string> op_order_;
  std::map<std::string, std::optional<double>> symbols_;
  std::map<std::string, std::string> producer_;
  std::map<std::string, std::vector<std::string>> consumers_;
  bool validated_ = false;
};

struct ByteCountOptions {
  // Algorithmic bytes of unrolled ops count weight inputs once per
  // traversal by default; the flag switches to once per unrolled step.
  bool weights_per_unroll_step = false;
  // EmbeddingLookup reads only the gathered rows by default; the flag
  // charges the whole table per lookup instead.
  bool embedding_reads_full_table = false;
};

// FLOPs of the mathematical calculation, times unroll_count.
DimExpr op_alg_flops(const ComputeGraph& g, const OpNode& op);

// Input bytes read plus output bytes written, times unroll_count.
DimExpr op_alg_bytes(const ComputeGraph& g, const OpNode& op, const ByteCountOptions& opt = {});

}  // namespace graphcap
