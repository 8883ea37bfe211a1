// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Maps algorithmic costs to time on a configurable accelerator. The
// best-case estimate is a whole-graph Roofline; the cache-hierarchy-aware
// estimate reprices each matrix op with tiled-multiply memory traffic and
// serializes compute with memory for ops whose working set spills the
// on-chip cache.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "graphcap/analyzers.hpp"

namespace graphcap {

class ZeroTileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCandidatesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AcceleratorConfig {
  std::string name = "accel-15.67tf-898gbs-32gb";
  double peak_flops = 15.67e12;   // 32-bit FLOP/s
  double mem_bw = 898e9;          // B/s
  double cache_bytes = 6e6;       // on-chip cache
  double mem_capacity = 32e9;     // B per device
  double interconnect_bw = 56e9;  // B/s between devices
  double achievable_compute_frac = 0.80;
  double achievable_bw_frac = 0.70;

  void check() const;
  double usable_flops() const { return achievable_compute_frac * peak_flops; }
  double usable_bw() const { return achievable_bw_frac * mem_bw; }
};

AcceleratorConfig default_accelerator();

struct RidgePoints {
  double raw = 0;         // peak_flops / mem_bw
  double achievable = 0;  // usable_flops / usable_bw
};

RidgePoints ridge_point(const AcceleratorConfig& acc);

enum class BoundKind { kCompute, kMemory };

struct StepTimeReport {
  double step_seconds = 0;
  BoundKind bound = BoundKind::kCompute;
  double compute_seconds = 0;
  double memory_seconds = 0;
  double alg_flops = 0;
  double algorithmic_bytes = 0;
  double modeled_bytes = 0;  // cache-aware traffic; == algorithmic for the best case
  double utilization = 0;    // alg_flops / (step_seconds * peak_flops)
};

// Best-case whole-graph Roofline: max of the compute and memory terms at
// achievable fractions of peak.
StepTimeReport roofline_step_time(double flops, double bytes, const AcceleratorConfig& acc);

struct TilePolicy {
  // Square tiles with this many operands sharing the cache.
  double operands_in_cache = 3;
  // Charge full T x T tiles on ragged edges instead of exact remainders.
  bool pad_partial_tiles = false;
};

// Off-chip traffic of a tiled (m x k)(k x n) multiply against a cache of
// `cache_bytes`: inputs restream once per tile row/column of the output,
// the output is written once. Cache-resident multiplies pay algorithmic
// bytes only.
double cache_aware_matmul_bytes(double m, double n, double k, int dtype_bytes, double cache_bytes,
                                const TilePolicy& policy = {});

// Cache-aware time of one op instance (one unrolled step), seconds.
double cache_aware_op_seconds(const ComputeGraph& g, const OpNode& op, const Binding& b,
                              const AcceleratorConfig& acc, const TilePolicy& policy = {});

// Per-op cache-aware bytes of one instance (matmul/conv repriced by the
// tile model, everything else at physical per-launch bytes).
double cache_aware_op_bytes(const ComputeGraph& g, const OpNode& op, const Binding& b,
                            double cache_bytes, const TilePolicy& policy = {});

// Sums per-op cache-aware times over the whole graph (no inter-op overlap);
// an op whose working set fits in cache keeps the per-op Roofline max, a
// spilling op serializes its compute and memory phases.
StepTimeReport cache_aware_step_time(const ComputeGraph& g, const Binding& b,
                                     const AcceleratorConfig& acc, const TilePolicy& policy = {});

// First-order per-parameter rates for the studied domains, from the
// published characterization (per training sample where batched).
struct DomainRates {
  std::string domain;
  double flops_per_param = 0;        // x batch
  double bytes_per_param = 0;        // batch-independent term
  double bytes_per_param_sqrt = 0;   // x batch / sqrt(p)
  double intensity_denom_p = 0;      // reference intensity denominators
  double intensity_denom_b = 0;
  double footprint_per_param = 0;    // bytes
};

const std::vector<DomainRates>& default_rates();
const DomainRates& rates_for(const std::string& domain);

double rate_flops_per_step(const DomainRates& r, double params, double batch);
double rate_bytes_per_step(const DomainRates& r, double params, double batch);

// Published per-step requirements of the target-scale models, used for
// plan baselines and report reference columns.
struct TargetRequirements {
  std::string domain;
  double params = 0;
  double subbatch = 0;
  double tflops_per_step = 0;
  double tb_per_step = 0;
  double footprint_gb = 0;
  double step_seconds = 0;  // reference step time
  double epoch_days = 0;    // reference epoch time
  double dataset_tokens = 0;
  std::string sample_unit;
  double tokens_per_sample = 1;
};

const std::vector<TargetRequirements>& default_requirements();
const TargetRequirements& requirements_for(const std::string& domain);

struct SubbatchPoint {
  double subbatch = 0;
  double step_seconds = 0;
  double per_sample_seconds = 0;
  double intensity = 0;
};

struct SubbatchChoice {
  double chosen = 0;
  double per_sample_seconds = 0;
  // Smallest batch whose graph-level intensity reaches the achievable
  // ridge point, and chosen / crossing.
  double ridge_crossing_batch = 0;
  double crossing_ratio = 0;
  std::vector<SubbatchPoint> points;
};

// Smallest candidate whose per-sample Roofline step time is within
// `tolerance` of the best candidate, using the per-parameter rate model.
SubbatchChoice choose_subbatch(const DomainRates& rates, double params,
                               const AcceleratorConfig& acc, std::vector<double> candidates,
                               double tolerance = 0.05);

}  // namespace graphcap
