// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphcap/perf_model.hpp"

#include <algorithm>
#include <cmath>

namespace graphcap {

void AcceleratorConfig::check() const {
  if (peak_flops <= 0 || mem_bw <= 0 || cache_bytes <= 0 || mem_capacity <= 0 ||
      interconnect_bw <= 0) {
    throw std::domain_error("accelerator parameters must be positive");
  }
  if (achievable_compute_frac <= 0 || achievable_compute_frac > 1 || achievable_bw_frac <= 0 ||
      achievable_bw_frac > 1) {
    throw std::domain_error("achievable fractions must lie in (0, 1]");
  }
}

AcceleratorConfig default_accelerator() { return AcceleratorConfig{}; }

RidgePoints ridge_point(const AcceleratorConfig& acc) {
  acc.check();
  return {acc.peak_flops / acc.mem_bw, acc.usable_flops() / acc.usable_bw()};
}

StepTimeReport roofline_step_time(double flops, double bytes, const AcceleratorConfig& acc) {
  acc.check();
  if (flops < 0 || bytes < 0) throw std::domain_error("costs must be nonnegative");
  StepTimeReport report;
  report.alg_flops = flops;
  report.algorithmic_bytes = bytes;
  report.modeled_bytes = bytes;
  report.compute_seconds = flops / acc.usable_flops();
  report.memory_seconds = bytes / acc.usable_bw();
  report.step_seconds = std::max(report.compute_seconds, report.memory_seconds);
  report.bound =
      report.compute_seconds >= report.memory_seconds ? BoundKind::kCompute : BoundKind::kMemory;
  report.utilization =
      report.step_seconds > 0 ? flops / (report.step_seconds * acc.peak_flops) : 0.0;
  return report;
}

double cache_aware_matmul_bytes(double m, double n, double k, int dtype_bytes, double cache_bytes,
                                const TilePolicy& policy) {
  if (m <= 0 || n <= 0 || k <= 0) throw std::domain_error("matmul dims must be positive");
  double s = dtype_bytes;
  double algorithmic = s * (m * k + k * n + m * n);
  if (algorithmic <= cache_bytes) return algorithmic;
  double tile = std::floor(std::sqrt(cache_bytes / (policy.operands_in_cache * s)));
  if (tile < 1) throw ZeroTileError("cache too small for a single tile");
  double row_blocks = std::ceil(m / tile);
  double col_blocks = std::ceil(n / tile);
  if (policy.pad_partial_tiles) {
    double k_blocks = std::ceil(k / tile);
    return s * (2.0 * tile * tile * row_blocks * col_blocks * k_blocks + 2.0 * m * n);
  }
  return s * (m * k * col_blocks + k * n * row_blocks + 2.0 * m * n);
}

namespace {

// (m, n, k) of the op as a dense multiply; convolutions lower to the usual
// im2col GEMM.
bool matmul_dims(const ComputeGraph& g, const OpNode& op, const Binding& b, double* m, double* n,
                 double* k) {
  if (op.type == OpType::kMatMul) {
    *m = op.attr("m").evaluate(b);
    *n = op.attr("n").evaluate(b);
    *k = op.attr("k").evaluate(b);
    return true;
  }
  if (op.type == OpType::kConv2D) {
    double batch = op.attr_or("batch", g.tensor(op.inputs[0]).shape[0]).evaluate(b);
    *m = batch * op.attr("hout").evaluate(b) * op.attr("wout").evaluate(b);
    *n = op.attr("cout").evaluate(b);
    *k = op.attr("kh").evaluate(b) * op.attr("kw").evaluate(b) * op.attr("cin").evaluate(b);
    return true;
  }
  return false;
}

// Physical bytes of one launch: every operand moves, weights included.
double per_launch_bytes(const ComputeGraph& g, const OpNode& op, const Binding& b) {
  if (op.type == OpType::kWeightUpdate) {
    return 3.0 * g.tensor(op.inputs[0]).bytes().evaluate(b) *
           op.attr_or("bytes_multiplier", DimExpr(1)).evaluate(b);
  }
  if (op.type == OpType::kEmbeddingLookup) {
    double rows = g.tensor(op.outputs[0]).bytes().evaluate(b);
    return g.tensor(op.inputs[1]).bytes().evaluate(b) + 2.0 * rows;
  }
  double total = 0;
  for (const auto& in : op.inputs) total += g.tensor(in).bytes().evaluate(b);
  for (const auto& out : op.outputs) total += g.tensor(out).bytes().evaluate(b);
  return total;
}

}  // namespace

double cache_aware_op_bytes(const ComputeGraph& g, const OpNode& op, const Binding& b,
                            double cache_bytes, const TilePolicy& policy) {
  double m = 0, n = 0, k = 0;
  if (matmul_dims(g, op, b, &m, &n, &k)) {
    int dtype = g.tensor(op.outputs[0]).dtype_bytes;
    return cache_aware_matmul_bytes(m, n, k, dtype, cache_bytes, policy);
  }
  return per_launch_bytes(g, op, b);
}

double cache_aware_op_seconds(const ComputeGraph& g, const OpNode& op, const Binding& b,
                              const AcceleratorConfig& acc, const TilePolicy& policy) {
  double unroll = op.unroll_count.evaluate(b);
  if (unroll == 0) return 0;
  double flops = op_alg_flops(g, op).evaluate(b) / unroll;
  double bytes = cache_aware_op_bytes(g, op, b, acc.cache_bytes, policy);
  double compute = flops / acc.usable_flops();
  double memory = bytes / acc.usable_bw();
  // A working set that fits in cache overlaps compute with the single
  // streaming pass; a spilling op serializes them.
  double alg = per_launch_bytes(g, op, b);
  double instance = alg <= acc.cache_bytes ? std::max(compute, memory) : compute + memory;
  return instance * unroll;
}

StepTimeReport cache_aware_step_time(const ComputeGraph& g, const Binding& b,
                                     const AcceleratorConfig& acc, const TilePolicy& policy) {
  acc.check();
  StepTimeReport report;
  CostReport alg = analyze(g);
  report.alg_flops = alg.flops(b);
  report.algorithmic_bytes = alg.bytes(b);
  for (const auto& id : g.op_ids()) {
    const OpNode& op = g.op(id);
    double unroll = op.unroll_count.evaluate(b);
    if (unroll == 0) continue;
    report.step_seconds += cache_aware_op_seconds(g, op, b, acc, policy);
    report.modeled_bytes += cache_aware_op_bytes(g, op, b, acc.cache_bytes, policy) * unroll;
    report.compute_seconds += op_alg_flops(g, op).evaluate(b) / acc.usable_flops();
  }
  report.memory_seconds = report.modeled_bytes / acc.usable_bw();
  report.bound =
      report.compute_seconds >= report.memory_seconds ? BoundKind::kCompute : BoundKind::kMemory;
  report.utilization =
      report.step_seconds > 0 ? report.alg_flops / (report.step_seconds * acc.peak_flops) : 0.0;
  return report;
}

const std::vector<DomainRates>& default_rates() {
  static const std::vector<DomainRates> kRates = {
      {"word_lm", 481, 1755, 30784, 3.65, 64, 11.94},
      {"char_lm", 900, 3510, 102980, 3.9, 114, 12.47},
      {"nmt", 149, 533, 22653, 3.6, 151, 10.32},
      {"speech", 775, 3100, 162750, 4.0, 210, 32.94},
      {"image", 1111, 66.7, 268862, 0.06, 242, 42.57},
  };
  return kRates;
}

const DomainRates& rates_for(const std::string& domain) {
  for (const auto& r : default_rates()) {
    if (r.domain == domain) return r;
  }
  throw std::out_of_range("no rate model for domain: " + domain);
}

double rate_flops_per_step(const DomainRates& r, double params, double batch) {
  return r.flops_per_param * batch * params;
}

double rate_bytes_per_step(const DomainRates& r, double params, double batch) {
  return r.bytes_per_param * params + r.bytes_per_param_sqrt * batch * std::sqrt(params);
}

const std::vector<TargetRequirements>& default_requirements() {
  static const std::vector<TargetRequirements> kReqs = {
      {"word_lm", 23.8e9, 128, 1444, 41.5, 272, 115, 31000, 77e9, "words", 26},
      {"char_lm", 146e9, 96, 12618, 488.1, 1703, 1007, 3.5e6, 3.4e12, "chars", 118},
      {"nmt", 18.9e9, 96, 499, 18.4, 185, 39.8, 16000, 97.4e9, "word pieces", 29},
      {"speech", 727e6, 128, 72, 2.8, 30, 5.8, 93, 14e9, "chars", 79},
      {"image", 732e6, 32, 28, 0.4, 34, 2.3, 84, 103e6, "images", 1},
  };
  return kReqs;
}

const TargetRequirements& requirements_for(const std::string& domain) {
  for (const auto& r : default_requirements()) {
    if (r.domain == domain) return r;
  }
  throw std::out_of_range("no target requirements for domain: " + domain);
}

SubbatchChoice choose_subbatch(const DomainRates& rates, double params,
                               const AcceleratorConfig& acc, std::vector<double> candidates,
                               double tolerance) {
  if (candidates.empty()) throw EmptyCandidatesError("no subbatch candidates");
  std::sort(candidates.begin(), candidates.end());
  SubbatchChoice choice;
  double best = std::numeric_limits<double>::infinity();
  for (double cand : candidates) {
    double flops = rate_flops_per_step(rates, params, cand);
    double bytes = rate_bytes_per_step(rates, params, cand);
    StepTimeReport rt = roofline_step_time(flops, bytes, acc);
    SubbatchPoint point;
    point.subbatch = cand;
    point.step_seconds = rt.step_seconds;
    point.per_sample_seconds = rt.step_seconds / cand;
    point.intensity = flops / bytes;
    choice.points.push_back(point);
    best = std::min(best, point.per_sample_seconds);
  }
  for (const auto& point : choice.points) {
    if (point.per_sample_seconds <= (1.0 + tolerance) * best) {
      choice.chosen = point.subbatch;
      choice.per_sample_seconds = point.per_sample_seconds;
      break;
    }
  }

  // Batch at which graph-level intensity crosses the achievable ridge:
  // gamma * b * p / (lambda * p + mu * b * sqrt(p)) == ridge.
  double ridge = ridge_point(acc).achievable;
  double denom = rates.flops_per_param - ridge * rates.bytes_per_param_sqrt / std::sqrt(params);
  if (denom > 0) {
    choice.ridge_crossing_batch = ridge * rates.bytes_per_param / denom;
    if (choice.ridge_crossing_batch > 0) {
      choice.crossing_ratio = choice.chosen / choice.ridge_crossing_batch;
    }
  }
  return choice;
}

}  // namespace graphcap
