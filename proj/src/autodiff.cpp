// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphcap/autodiff.hpp"

#include <algorithm>
#include <set>

namespace graphcap {

namespace {

bool is_differentiable_input(const TensorSpec& t) {
  // Raw model inputs (token ids, images, labels) receive no gradient.
  return t.kind != TensorKind::kInput;
}

std::string grad_id(const std::string& tensor_id) { return "g:" + tensor_id; }

}  // namespace

DimExpr TrainingStepGraph::forward_flops() const {
  DimExpr total;
  for (const auto& id : forward_ops) total += op_alg_flops(graph, graph.op(id));
  return total;
}

DimExpr TrainingStepGraph::total_flops() const {
  DimExpr total;
  for (const auto& id : graph.op_ids()) total += op_alg_flops(graph, graph.op(id));
  return total;
}

TrainingStepGraph derive_training_graph(const ComputeGraph& fwd, const TrainingOptions& opt) {
  if (!fwd.validated()) throw GraphError("derive_training_graph needs a validated graph");

  bool has_weight = false;
  for (const auto& tid : fwd.tensor_ids()) {
    if (fwd.tensor(tid).kind == TensorKind::kWeight) has_weight = true;
  }
  if (!has_weight) throw MissingWeightError("forward graph declares no weight tensors");

  TrainingStepGraph out;
  ComputeGraph& g = out.graph;
  for (const auto& [name, def] : fwd.symbols()) g.declare_symbol(name, def);

  for (const auto& tid : fwd.tensor_ids()) {
    TensorSpec t = fwd.tensor(tid);
    if (t.kind == TensorKind::kWeight) {
      // Densely updated weights persist as weight + gradient + optimizer
      // state; embedding tables (sparse scatter updates) as weight only.
      bool sparse = false;
      for (const auto& consumer : fwd.consumers_of(tid)) {
        if (fwd.op(consumer).type == OpType::kEmbeddingLookup) sparse = true;
      }
      t.footprint_slots = sparse ? 1 : 3;
    }
    g.add_tensor(t);
  }
  for (const auto& oid : fwd.op_ids()) {
    g.add_op(fwd.op(oid));
    out.forward_ops.push_back(oid);
  }

  // How many gradient contributions each tensor receives, so fan-out can be
  // routed through an explicit accumulation op.
  std::map<std::string, int> contributions;
  for (const auto& oid : fwd.op_ids()) {
    const OpNode& op = fwd.op(oid);
    for (const auto& in : op.inputs) {
      if (op.type == OpType::kEmbeddingLookup && in != op.inputs[0]) continue;  // indices
      if (is_differentiable_input(fwd.tensor(in))) ++contributions[in];
    }
  }
  std::map<std::string, int> arrivals;  // contributions emitted so far
  std::map<std::string, std::vector<std::string>> pieces;  // tensor -> partial grad ids

  // Seed gradients for sink tensors. The loss is folded into the final op,
  // so its output gradient is a free input of the backward pass.
  std::vector<std::string> order = fwd.topological_order();
  for (const auto& tid : fwd.tensor_ids()) {
    const TensorSpec& t = fwd.tensor(tid);
    if (t.kind == TensorKind::kWeight || t.kind == TensorKind::kInput) continue;
    if (fwd.consumers_of(tid).empty()) {
      TensorSpec seed;
      seed.id = grad_id(tid);
      seed.shape = t.shape;
      seed.dtype_bytes = t.dtype_bytes;
      seed.kind = TensorKind::kInput;
      seed.footprint_mult = t.footprint_mult;
      g.add_tensor(seed);
    }
  }

  auto add_grad_tensor = [&](const std::string& for_tensor, const std::string& piece_suffix,
                             const std::vector<DimExpr>& shape, int dtype_bytes,
                             const DimExpr& mult) -> std::string {
    std::string id = grad_id(for_tensor) + piece_suffix;
    TensorSpec t;
    t.id = id;
    t.shape = shape;
    t.dtype_bytes = dtype_bytes;
    t.kind = TensorKind::kGradient;
    t.footprint_mult = mult;
    g.add_tensor(t);
    return id;
  };

  // Emits the gradient piece for `input` of `op`; returns the tensor id the
  // grad op must produce.
  auto grad_output_for = [&](const OpNode& op, const std::string& input) -> std::string {
    const TensorSpec& t = fwd.tensor(input);
    std::string suffix;
    if (contributions[input] > 1) {
      suffix = "#" + op.id;
    }
    DimExpr mult = DimExpr(1);
    if (t.kind == TensorKind::kWeight) mult = DimExpr(0);  // lives in the persistent slot
    std::string id = add_grad_tensor(input, suffix, t.shape, t.dtype_bytes, mult);
    pieces[input].push_back(id);
    ++arrivals[input];
    return id;
  };

  // Once every contribution to `input` exists, fan-in pieces with a
  // one-FLOP-per-element accumulation.
  auto finish_grad = [&](const OpNode& op, const std::string& input) {
    if (contributions[input] <= 1 || arrivals[input] != contributions[input]) return;
    const TensorSpec& t = fwd.tensor(input);
    DimExpr mult = t.kind == TensorKind::kWeight ? DimExpr(0) : DimExpr(1);
    add_grad_tensor(input, "", t.shape, t.dtype_bytes, mult);
    OpNode sum;
    sum.id = "gsum:" + input;
    sum.type = OpType::kPointwise;
    sum.attrs["flops_per_element"] = DimExpr(1);
    sum.inputs = pieces[input];
    sum.outputs = {grad_id(input)};
    sum.unroll_count = op.unroll_count;
    g.add_op(sum);
    out.grad_ops_of[op.id].push_back(sum.id);
  };

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const OpNode& op = fwd.op(*it);
    auto& gops = out.grad_ops_of[op.id];

    auto incoming = [&](size_t i) { return grad_id(op.outputs[i]); };

    switch (op.type) {
      case OpType::kMatMul: {
        const TensorSpec& a = fwd.tensor(op.inputs[0]);
        const TensorSpec& b = fwd.tensor(op.inputs[1]);
        const DimExpr& m = op.attr("m");
        const DimExpr& n = op.attr("n");
        const DimExpr& k = op.attr("k");
        if (is_differentiable_input(a)) {
          OpNode da;
          da.id = "g:" + op.id + ":lhs";
          da.type = OpType::kMatMul;
          da.attrs["m"] = m;
          da.attrs["n"] = k;
          da.attrs["k"] = n;
          da.attrs["transpose_b"] = DimExpr(1);
          da.inputs = {incoming(0), op.inputs[1]};
          da.outputs = {grad_output_for(op, op.inputs[0])};
          da.unroll_count = op.unroll_count;
          g.add_op(da);
          gops.push_back(da.id);
          finish_grad(op, op.inputs[0]);
        }
        if (is_differentiable_input(b)) {
          OpNode db;
          db.id = "g:" + op.id + ":rhs";
          db.type = OpType::kMatMul;
          db.attrs["m"] = k;
          db.attrs["n"] = n;
          db.attrs["k"] = m;
          db.attrs["transpose_a"] = DimExpr(1);
          db.inputs = {op.inputs[0], incoming(0)};
          db.outputs = {grad_output_for(op, op.inputs[1])};
          db.unroll_count = op.unroll_count;
          g.add_op(db);
          gops.push_back(db.id);
          finish_grad(op, op.inputs[1]);
        }
        break;
      }
      case OpType::kConv2D: {
        const TensorSpec& x = fwd.tensor(op.inputs[0]);
        for (int side = 0; side < 2; ++side) {
          const std::string& in = op.inputs[side];
          if (side == 0 && !is_differentiable_input(x)) continue;
          OpNode gop;
          gop.id = "g:" + op.id + (side == 0 ? ":data" : ":filter");
          gop.type = OpType::kConv2D;
          gop.attrs = op.attrs;
          gop.attrs["backward"] = DimExpr(1);
          gop.inputs = {op.inputs[side == 0 ? 1 : 0], incoming(0)};
          gop.outputs = {grad_output_for(op, in)};
          gop.unroll_count = op.unroll_count;
          g.add_op(gop);
          gops.push_back(gop.id);
          finish_grad(op, in);
        }
        break;
      }
      case OpType::kEmbeddingLookup: {
        // Scatter-add of the gathered-row gradient; a table lookup in
        // reverse, so zero algorithmic FLOPs and row-sized traffic.
        const TensorSpec& outt = fwd.tensor(op.outputs[0]);
        OpNode scatter;
        scatter.id = "g:" + op.id;
        scatter.type = OpType::kIdentity;
        scatter.inputs = {incoming(0)};
        std::string rows = grad_id(op.inputs[0]);
        TensorSpec t;
        t.id = rows;
        t.shape = outt.shape;  // gathered rows, not the full table
        t.dtype_bytes = outt.dtype_bytes;
        t.kind = TensorKind::kGradient;
        g.add_tensor(t);
        pieces[op.inputs[0]].push_back(rows);
        scatter.outputs = {rows};
        scatter.unroll_count = op.unroll_count;
        g.add_op(scatter);
        gops.push_back(scatter.id);
        break;
      }
      case OpType::kConcat: {
        OpNode split;
        split.id = "g:" + op.id;
        split.type = OpType::kSplit;
        split.inputs = {incoming(0)};
        for (const auto& in : op.inputs) {
          if (!is_differentiable_input(fwd.tensor(in))) continue;
          split.outputs.push_back(grad_output_for(op, in));
        }
        split.unroll_count = op.unroll_count;
        g.add_op(split);
        gops.push_back(split.id);
        for (const auto& in : op.inputs) finish_grad(op, in);
        break;
      }
      case OpType::kSplit: {
        OpNode cat;
        cat.id = "g:" + op.id;
        cat.type = OpType::kConcat;
        for (size_t i = 0; i < op.outputs.size(); ++i) cat.inputs.push_back(incoming(i));
        cat.outputs = {grad_output_for(op, op.inputs[0])};
        cat.unroll_count = op.unroll_count;
        g.add_op(cat);
        gops.push_back(cat.id);
        finish_grad(op, op.inputs[0]);
        break;
      }
      case OpType::kWeightUpdate:
        throw GraphError("forward graph must not contain WeightUpdate ops");
      default: {
        // Pointwise-family backward costs 1x the forward op. The cost is
        // split evenly across the per-input grad ops so the aggregate rule
        // holds whatever the fan-in. Saved forward tensors are read by the
        // grad ops, which keeps them live for footprint analysis.
        std::vector<std::string> diff_inputs;
        for (const auto& in : op.inputs) {
          if (is_differentiable_input(fwd.tensor(in))) diff_inputs.push_back(in);
        }
        if (diff_inputs.empty()) break;
        DimExpr fwd_fpe;
        switch (op.type) {
          case OpType::kSoftmax:
          case OpType::kBatchNorm:
            fwd_fpe = op.attr_or("flops_per_element", DimExpr(5));
            break;
          case OpType::kPool:
            fwd_fpe = op.attr_or("window", DimExpr(1));
            break;
          case OpType::kIdentity:
            fwd_fpe = DimExpr(0);
            break;
          default:
            fwd_fpe = op.attr_or("flops_per_element", DimExpr(1));
            break;
        }
        // For same-shaped pointwise inputs the backward cost is split so the
        // total stays 1x forward; reduction-style ops keep the full rate on
        // each (differently sized) gradient, which the largest dominates.
        DimExpr share = fwd_fpe;
        if (op.type == OpType::kPointwise && diff_inputs.size() > 1) {
          share = fwd_fpe * DimExpr(Rational(1, static_cast<std::int64_t>(diff_inputs.size())));
        }
        int idx = 0;
        for (const auto& in : diff_inputs) {
          OpNode gop;
          gop.id = "g:" + op.id + ":" + std::to_string(idx++);
          gop.type = OpType::kPointwise;
          gop.attrs["flops_per_element"] = share;
          gop.inputs.push_back(in);  // first input fixes the output shape
          gop.inputs.push_back(incoming(0));
          gop.inputs.push_back(op.outputs[0]);
          gop.outputs = {grad_output_for(op, in)};
          gop.unroll_count = op.unroll_count;
          g.add_op(gop);
          gops.push_back(gop.id);
          finish_grad(op, in);
        }
        break;
      }
    }
  }

  // One update per weight tensor.
  for (const auto& tid : fwd.tensor_ids()) {
    const TensorSpec& t = fwd.tensor(tid);
    if (t.kind != TensorKind::kWeight) continue;
    auto it = pieces.find(tid);
    if (it == pieces.end() || it->second.empty()) {
      throw MissingWeightError("weight " + tid + " received no gradient");
    }
    OpNode upd;
    upd.id = "upd:" + tid;
    upd.type = OpType::kWeightUpdate;
    upd.inputs = {tid, contributions[tid] > 1 ? grad_id(tid) : it->second.front()};
    if (g.tensor(upd.inputs[1]).num_elements() != t.num_elements()) {
      upd.attrs["sparse"] = DimExpr(1);
    }
    upd.attrs["flops_multiplier"] = opt.update_flops_multiplier;
    upd.attrs["bytes_multiplier"] = opt.update_bytes_multiplier;
    g.add_op(upd);
    out.update_ops.push_back(upd.id);
  }

  g.validate();
  return out;
}

double training_flops_ratio(const TrainingStepGraph& g, const Binding& b) {
  double fwd = g.forward_flops().evaluate(b);
  if (fwd == 0.0) throw ZeroForwardFlopsError("forward graph has zero FLOPs");
  return g.total_flops().evaluate(b) / fwd;
}

}  // namespace graphcap
