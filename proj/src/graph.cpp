// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphcap/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

namespace graphcap {

namespace {

struct OpTypeName {
  OpType type;
  const char* name;
};

constexpr OpTypeName kOpTypeNames[] = {
    {OpType::kMatMul, "MatMul"},
    {OpType::kConv2D, "Conv2D"},
    {OpType::kPointwise, "Pointwise"},
    {OpType::kEmbeddingLookup, "EmbeddingLookup"},
    {OpType::kReduction, "Reduction"},
    {OpType::kSoftmax, "Softmax"},
    {OpType::kBatchNorm, "BatchNorm"},
    {OpType::kConcat, "Concat"},
    {OpType::kSplit, "Split"},
    {OpType::kPool, "Pool"},
    {OpType::kWeightUpdate, "WeightUpdate"},
    {OpType::kIdentity, "Identity"},
};

constexpr std::pair<TensorKind, const char*> kTensorKindNames[] = {
    {TensorKind::kWeight, "weight"},       {TensorKind::kActivation, "activation"},
    {TensorKind::kInput, "input"},         {TensorKind::kOutput, "output"},
    {TensorKind::kGradient, "gradient"},
};

}  // namespace

const char* op_type_name(OpType t) {
  for (const auto& e : kOpTypeNames) {
    if (e.type == t) return e.name;
  }
  return "?";
}

OpType op_type_from_name(const std::string& name) {
  for (const auto& e : kOpTypeNames) {
    if (name == e.name) return e.type;
  }
  throw GraphError("unknown op type: " + name);
}

const char* tensor_kind_name(TensorKind k) {
  for (const auto& e : kTensorKindNames) {
    if (e.first == k) return e.second;
  }
  return "?";
}

TensorKind tensor_kind_from_name(const std::string& name) {
  for (const auto& e : kTensorKindNames) {
    if (name == e.second) return e.first;
  }
  throw GraphError("unknown tensor kind: " + name);
}

DimExpr TensorSpec::num_elements() const {
  DimExpr n(1);
  for (const auto& d : shape) n *= d;
  return n;
}

DimExpr TensorSpec::bytes() const { return num_elements() * DimExpr(dtype_bytes); }

const DimExpr& OpNode::attr(const std::string& name) const {
  auto it = attrs.find(name);
  if (it == attrs.end()) {
    throw GraphError("op " + id + " (" + op_type_name(type) + ") missing attr " + name);
  }
  return it->second;
}

DimExpr OpNode::attr_or(const std::string& name, const DimExpr& fallback) const {
  auto it = attrs.find(name);
  return it == attrs.end() ? fallback : it->second;
}

void ComputeGraph::require_mutable() const {
  if (validated_) throw GraphError("graph is immutable after validate()");
}

void ComputeGraph::declare_symbol(const std::string& name, std::optional<double> default_value) {
  require_mutable();
  symbols_[name] = default_value;
}

TensorSpec& ComputeGraph::add_tensor(TensorSpec t) {
  require_mutable();
  if (tensors_.count(t.id) != 0) throw DuplicateIdError(t.id);
  tensor_order_.push_back(t.id);
  consumers_[t.id];
  return tensors_.emplace(t.id, std::move(t)).first->second;
}

OpNode& ComputeGraph::add_op(OpNode op) {
  require_mutable();
  if (ops_.count(op.id) != 0) throw DuplicateIdError(op.id);
  for (const auto& in : op.inputs) {
    if (tensors_.count(in) == 0) throw UnknownTensorError(in);
  }
  for (const auto& out : op.outputs) {
    if (tensors_.count(out) == 0) throw UnknownTensorError(out);
    auto it = producer_.find(out);
    if (it != producer_.end()) {
      throw GraphError("tensor " + out + " already produced by op " + it->second);
    }
    producer_[out] = op.id;
  }
  for (const auto& in : op.inputs) consumers_[in].push_back(op.id);
  op_order_.push_back(op.id);
  return ops_.emplace(op.id, std::move(op)).first->second;
}

const TensorSpec& ComputeGraph::tensor(const std::string& id) const {
  auto it = tensors_.find(id);
  if (it == tensors_.end()) throw UnknownTensorError(id);
  return it->second;
}

const OpNode& ComputeGraph::op(const std::string& id) const {
  auto it = ops_.find(id);
  if (it == ops_.end()) throw GraphError("unknown op: " + id);
  return it->second;
}

const std::string& ComputeGraph::producer_of(const std::string& tensor_id) const {
  static const std::string kNone;
  auto it = producer_.find(tensor_id);
  return it == producer_.end() ? kNone : it->second;
}

const std::vector<std::string>& ComputeGraph::consumers_of(const std::string& tensor_id) const {
  static const std::vector<std::string> kNone;
  auto it = consumers_.find(tensor_id);
  return it == consumers_.end() ? kNone : it->second;
}

Binding ComputeGraph::default_binding() const {
  Binding b;
  for (const auto& [name, value] : symbols_) {
    if (value) b.set(name, *value);
  }
  return b;
}

std::vector<std::string> ComputeGraph::topological_order() const {
  std::map<std::string, int> indegree;
  for (const auto& id : op_order_) indegree[id] = 0;
  for (const auto& [op_id, op] : ops_) {
    for (const auto& in : op.inputs) {
      if (!producer_of(in).empty()) ++indegree[op_id];
    }
  }
  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<std::string> order;
  order.reserve(op_order_.size());
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& out : ops_.at(id).outputs) {
      for (const auto& consumer : consumers_of(out)) {
        if (--indegree[consumer] == 0) ready.insert(consumer);
      }
    }
  }
  return order;
}

namespace {

std::string shape_str(const TensorSpec& t) {
  std::string s = "[";
  for (size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += ", ";
    s += t.shape[i].str();
  }
  return s + "]";
}

}  // namespace

void ComputeGraph::check_shapes(const OpNode& op) const {
  auto expect_arity = [&](size_t in, size_t out) {
    if (op.inputs.size() != in || op.outputs.size() != out) {
      throw ShapeMismatchError(op.id, std::string(op_type_name(op.type)) + " expects " +
                                          std::to_string(in) + " inputs / " + std::to_string(out) +
                                          " outputs");
    }
  };
  auto dims_equal = [](const DimExpr& a, const DimExpr& b) { return a == b; };

  switch (op.type) {
    case OpType::kMatMul: {
      expect_arity(2, 1);
      const TensorSpec& a = tensor(op.inputs[0]);
      const TensorSpec& b = tensor(op.inputs[1]);
      const TensorSpec& c = tensor(op.outputs[0]);
      if (a.shape.size() != 2 || b.shape.size() != 2 || c.shape.size() != 2) {
        throw ShapeMismatchError(op.id, "MatMul operands must be rank 2");
      }
      const DimExpr& m = op.attr("m");
      const DimExpr& n = op.attr("n");
      const DimExpr& k = op.attr("k");
      bool ta = !op.attr_or("transpose_a", DimExpr(0)).is_zero();
      bool tb = !op.attr_or("transpose_b", DimExpr(0)).is_zero();
      const DimExpr& a0 = ta ? k : m;
      const DimExpr& a1 = ta ? m : k;
      const DimExpr& b0 = tb ? n : k;
      const DimExpr& b1 = tb ? k : n;
      if (!dims_equal(a.shape[0], a0) || !dims_equal(a.shape[1], a1)) {
        throw ShapeMismatchError(op.id, "lhs " + shape_str(a) + " != [" + a0.str() + ", " + a1.str() + "]");
      }
      if (!dims_equal(b.shape[0], b0) || !dims_equal(b.shape[1], b1)) {
        throw ShapeMismatchError(op.id, "rhs " + shape_str(b) + " != [" + b0.str() + ", " + b1.str() + "]");
      }
      if (!dims_equal(c.shape[0], m) || !dims_equal(c.shape[1], n)) {
        throw ShapeMismatchError(op.id, "out " + shape_str(c) + " != [" + m.str() + ", " + n.str() + "]");
      }
      break;
    }
    case OpType::kConv2D: {
      expect_arity(2, 1);
      if (!op.attr_or("backward", DimExpr(0)).is_zero()) break;
      const TensorSpec& w = tensor(op.inputs[1]);
      if (w.shape.size() != 4) throw ShapeMismatchError(op.id, "filter must be rank 4");
      const char* names[] = {"kh", "kw", "cin", "cout"};
      for (int i = 0; i < 4; ++i) {
        if (!dims_equal(w.shape[i], op.attr(names[i]))) {
          throw ShapeMismatchError(op.id, std::string("filter dim ") + names[i] + " mismatch");
        }
      }
      break;
    }
    case OpType::kPointwise:
    case OpType::kSoftmax:
    case OpType::kBatchNorm:
    case OpType::kIdentity: {
      if (op.inputs.empty() || op.outputs.size() != 1) {
        throw ShapeMismatchError(op.id, "expects >=1 inputs and exactly 1 output");
      }
      const TensorSpec& in = tensor(op.inputs[0]);
      const TensorSpec& out = tensor(op.outputs[0]);
      if (!dims_equal(in.num_elements(), out.num_elements())) {
        throw ShapeMismatchError(op.id, "element count changes across elementwise op");
      }
      break;
    }
    case OpType::kEmbeddingLookup: {
      expect_arity(2, 1);
      const TensorSpec& table = tensor(op.inputs[0]);
      const TensorSpec& out = tensor(op.outputs[0]);
      if (table.shape.size() != 2) throw ShapeMismatchError(op.id, "table must be rank 2");
      if (out.shape.empty() || !dims_equal(out.shape.back(), table.shape[1])) {
        throw ShapeMismatchError(op.id, "output width != table width");
      }
      break;
    }
    case OpType::kConcat: {
      if (op.inputs.empty() || op.outputs.size() != 1) {
        throw ShapeMismatchError(op.id, "Concat expects >=1 inputs, 1 output");
      }
      DimExpr total;
      for (const auto& in : op.inputs) total += tensor(in).num_elements();
      if (!dims_equal(total, tensor(op.outputs[0]).num_elements())) {
        throw ShapeMismatchError(op.id, "input elements != output elements");
      }
      break;
    }
    case OpType::kSplit: {
      if (op.inputs.size() != 1 || op.outputs.empty()) {
        throw ShapeMismatchError(op.id, "Split expects 1 input, >=1 outputs");
      }
      DimExpr total;
      for (const auto& out : op.outputs) total += tensor(out).num_elements();
      if (!dims_equal(total, tensor(op.inputs[0]).num_elements())) {
        throw ShapeMismatchError(op.id, "output elements != input elements");
      }
      break;
    }
    case OpType::kPool: {
      expect_arity(1, 1);
      break;
    }
    case OpType::kWeightUpdate: {
      if (op.inputs.size() != 2 || !op.outputs.empty()) {
        throw ShapeMismatchError(op.id, "WeightUpdate expects [weight, gradient], no outputs");
      }
      const TensorSpec& w = tensor(op.inputs[0]);
      const TensorSpec& g = tensor(op.inputs[1]);
      bool sparse = !op.attr_or("sparse", DimExpr(0)).is_zero();
      if (!sparse && !dims_equal(w.num_elements(), g.num_elements())) {
        throw ShapeMismatchError(op.id, "gradient size != weight size");
      }
      break;
    }
  }
}

ValidationReport ComputeGraph::validate() {
  ValidationReport report;

  for (const auto& [id, t] : tensors_) {
    bool needs_producer = t.kind == TensorKind::kActivation || t.kind == TensorKind::kOutput ||
                          t.kind == TensorKind::kGradient;
    bool has_producer = producer_.count(id) != 0;
    if (needs_producer && !has_producer) {
      throw GraphError("tensor " + id + " (" + tensor_kind_name(t.kind) + ") has no producer");
    }
    if (!needs_producer && has_producer) {
      throw GraphError("tensor " + id + " (" + tensor_kind_name(t.kind) +
                       ") must not have a producer");
    }
  }

  for (const auto& [id, op] : ops_) check_shapes(op);

  std::vector<std::string> order = topological_order();
  if (order.size() != op_order_.size()) {
    // Recover one cycle for the error message: walk producer edges among
    // the unresolved ops until an op repeats.
    std::set<std::string> placed(order.begin(), order.end());
    std::string start;
    for (const auto& id : op_order_) {
      if (placed.count(id) == 0) {
        start = id;
        break;
      }
    }
    std::vector<std::string> path;
    std::set<std::string> seen;
    std::string cur = start;
    while (seen.insert(cur).second) {
      path.push_back(cur);
      const OpNode& o = ops_.at(cur);
      std::string next;
      for (const auto& in : o.inputs) {
        const std::string& p = producer_of(in);
        if (!p.empty() && placed.count(p) == 0) {
          next = p;
          break;
        }
      }
      if (next.empty()) break;
      cur = next;
    }
    path.push_back(cur);
    std::ostringstream os;
    for (size_t i = 0; i < path.size(); ++i) os << (i ? " <- " : "") << path[i];
    throw CycleError(os.str());
  }

  validated_ = true;
  report.ok = true;
  report.notes.push_back(std::to_string(op_order_.size()) + " ops, " +
                         std::to_string(tensor_order_.size()) + " tensors");
  return report;
}

DimExpr op_alg_flops(const ComputeGraph& g, const OpNode& op) {
  DimExpr flops;
  switch (op.type) {
    case OpType::kMatMul:
      flops = DimExpr(2) * op.attr("m") * op.attr("n") * op.attr("k");
      break;
    case OpType::kConv2D: {
      DimExpr batch = op.attr_or("batch", g.tensor(op.inputs[0]).shape[0]);
      flops = DimExpr(2) * op.attr("kh") * op.attr("kw") * op.attr("cin") * op.attr("cout") *
              op.attr("hout") * op.attr("wout") * batch;
      break;
    }
    case OpType::kPointwise:
      flops = op.attr_or("flops_per_element", DimExpr(1)) * g.tensor(op.outputs[0]).num_elements();
      break;
    case OpType::kSoftmax:
      flops = op.attr_or("flops_per_element", DimExpr(5)) * g.tensor(op.outputs[0]).num_elements();
      break;
    case OpType::kBatchNorm:
      flops = op.attr_or("flops_per_element", DimExpr(5)) * g.tensor(op.outputs[0]).num_elements();
      break;
    case OpType::kReduction:
      flops = op.attr_or("flops_per_element", DimExpr(1)) * g.tensor(op.inputs[0]).num_elements();
      break;
    case OpType::kPool:
      flops = op.attr_or("window", DimExpr(1)) * g.tensor(op.outputs[0]).num_elements();
      break;
    case OpType::kWeightUpdate:
      // Multiply-accumulate per weight.
      flops = DimExpr(2) * g.tensor(op.inputs[0]).num_elements() *
              op.attr_or("flops_multiplier", DimExpr(1));
      break;
    case OpType::kEmbeddingLookup:  // table lookup, no algorithmic FLOPs
    case OpType::kConcat:
    case OpType::kSplit:
    case OpType::kIdentity:
      flops = DimExpr(0);
      break;
  }
  return flops * op.unroll_count;
}

DimExpr op_alg_bytes(const ComputeGraph& g, const OpNode& op, const ByteCountOptions& opt) {
  if (op.type == OpType::kWeightUpdate) {
    // Read weight, read gradient, write weight. The full table is touched
    // even when the producing lookup was sparse.
    return DimExpr(3) * g.tensor(op.inputs[0]).bytes() * op.unroll_count *
           op.attr_or("bytes_multiplier", DimExpr(1));
  }

  DimExpr per_step;
  DimExpr once;
  if (op.type == OpType::kEmbeddingLookup) {
    const TensorSpec& table = g.tensor(op.inputs[0]);
    const TensorSpec& indices = g.tensor(op.inputs[1]);
    const TensorSpec& out = g.tensor(op.outputs[0]);
    DimExpr gathered = opt.embedding_reads_full_table ? table.bytes() : out.bytes();
    per_step = indices.bytes() + gathered + out.bytes();
  } else {
    for (const auto& in : op.inputs) {
      const TensorSpec& t = g.tensor(in);
      if (t.kind == TensorKind::kWeight && !opt.weights_per_unroll_step) {
        once += t.bytes();
      } else {
        per_step += t.bytes();
      }
    }
    for (const auto& out : op.outputs) per_step += g.tensor(out).bytes();
  }
  return per_step * op.unroll_count + once;
}

}  // namespace graphcap
