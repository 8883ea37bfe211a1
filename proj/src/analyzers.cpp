// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphcap/analyzers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace graphcap {

double CostReport::op_intensity(const Binding& b) const {
  double by = bytes(b);
  if (by <= 0) throw std::domain_error("operational intensity needs positive bytes");
  return flops(b) / by;
}

CostReport analyze(const ComputeGraph& g, const ByteCountOptions& opt) {
  if (!g.validated()) throw GraphError("analyze needs a validated graph");
  CostReport report;
  for (const auto& id : g.op_ids()) {
    const OpNode& op = g.op(id);
    OpCostRow row;
    row.op_id = id;
    row.type = op.type;
    row.flops = op_alg_flops(g, op);
    row.bytes = op_alg_bytes(g, op, opt);
    report.total_flops += row.flops;
    report.total_bytes += row.bytes;
    report.per_op.push_back(std::move(row));
  }
  report.io_bytes = algorithmic_io_expr(g);
  return report;
}

CostReport analyze(const TrainingStepGraph& g, const ByteCountOptions& opt) {
  return analyze(g.graph, opt);
}

DimExpr algorithmic_io_expr(const ComputeGraph& g) {
  DimExpr io;
  for (const auto& tid : g.tensor_ids()) {
    const TensorSpec& t = g.tensor(tid);
    if (t.kind == TensorKind::kInput || t.kind == TensorKind::kOutput) io += t.bytes();
  }
  return io;
}

double algorithmic_io(const ComputeGraph& g, const Binding& b) {
  return algorithmic_io_expr(g).evaluate(b);
}

namespace {

// Shared state for the traversal simulation.
struct SimGraph {
  std::vector<double> op_alloc;                 // bytes allocated when op runs
  std::vector<std::vector<int>> op_frees;       // tensor indices this op may free
  std::vector<std::vector<int>> op_inputs_from; // producing ops (dedup'd)
  std::vector<std::vector<int>> op_successors;  // consumer ops (dedup'd)
  std::vector<int> indegree;
  std::vector<double> tensor_size;
  std::vector<int> consumer_count;
  double persistent = 0;
  double initial_live = 0;
  size_t n = 0;
  std::vector<std::string> op_ids;
};

SimGraph build_sim(const ComputeGraph& g, const Binding& b, const FootprintOptions& opt) {
  SimGraph sim;
  sim.op_ids = g.op_ids();
  std::sort(sim.op_ids.begin(), sim.op_ids.end());
  sim.n = sim.op_ids.size();
  std::map<std::string, int> op_index;
  for (size_t i = 0; i < sim.n; ++i) op_index[sim.op_ids[i]] = static_cast<int>(i);

  std::map<std::string, int> tensor_index;
  for (const auto& tid : g.tensor_ids()) {
    const TensorSpec& t = g.tensor(tid);
    if (t.kind == TensorKind::kWeight) {
      sim.persistent += t.bytes().evaluate(b) * t.footprint_slots;
      continue;
    }
    int idx = static_cast<int>(sim.tensor_size.size());
    tensor_index[tid] = idx;
    sim.tensor_size.push_back(t.bytes().evaluate(b) * t.footprint_mult.evaluate(b));
    sim.consumer_count.push_back(0);  // filled from deduped per-op reads below
    if (g.producer_of(tid).empty()) sim.initial_live += sim.tensor_size.back();
  }

  sim.op_alloc.assign(sim.n, 0.0);
  sim.op_frees.assign(sim.n, {});
  sim.op_inputs_from.assign(sim.n, {});
  sim.op_successors.assign(sim.n, {});
  sim.indegree.assign(sim.n, 0);

  for (size_t i = 0; i < sim.n; ++i) {
    const OpNode& op = g.op(sim.op_ids[i]);
    bool in_place = opt.in_place_pointwise &&
                    (op.type == OpType::kPointwise || op.type == OpType::kIdentity);
    for (const auto& out : op.outputs) {
      auto it = tensor_index.find(out);
      if (it != tensor_index.end() && !in_place) sim.op_alloc[i] += sim.tensor_size[it->second];
    }
    std::set<int> preds;
    std::set<int> reads;
    for (const auto& in : op.inputs) {
      auto it = tensor_index.find(in);
      if (it != tensor_index.end()) reads.insert(it->second);
      const std::string& p = g.producer_of(in);
      if (!p.empty()) preds.insert(op_index.at(p));
    }
    for (int t : reads) {
      sim.op_frees[i].push_back(t);
      ++sim.consumer_count[t];
    }
    for (int p : preds) {
      sim.op_inputs_from[i].push_back(p);
      sim.op_successors[p].push_back(static_cast<int>(i));
      ++sim.indegree[i];
    }
  }
  return sim;
}

double heuristic_footprint(const SimGraph& sim) {
  std::vector<int> indegree = sim.indegree;
  std::vector<int> remaining = sim.consumer_count;
  std::set<int> ready;
  for (size_t i = 0; i < sim.n; ++i) {
    if (indegree[i] == 0) ready.insert(static_cast<int>(i));
  }
  double live = sim.initial_live;
  double peak = live;
  for (size_t step = 0; step < sim.n; ++step) {
    // Pick the ready op with the smallest alloc-minus-freed delta.
    int best = -1;
    double best_delta = std::numeric_limits<double>::infinity();
    for (int cand : ready) {
      double freed = 0;
      for (int t : sim.op_frees[cand]) {
        if (remaining[t] == 1) freed += sim.tensor_size[t];
      }
      double delta = sim.op_alloc[cand] - freed;
      if (delta < best_delta) {
        best_delta = delta;
        best = cand;
      }
    }
    ready.erase(best);
    live += sim.op_alloc[best];
    peak = std::max(peak, live);
    for (int t : sim.op_frees[best]) {
      if (--remaining[t] == 0) live -= sim.tensor_size[t];
    }
    for (int s : sim.op_successors[best]) {
      if (--indegree[s] == 0) ready.insert(s);
    }
  }
  return sim.persistent + peak;
}

double exhaustive_footprint(const SimGraph& sim) {
  // DP over executed-op subsets: the live set (and so current memory) is a
  // function of the subset alone, which makes minimax-over-orders a
  // shortest-bottleneck search on the subset lattice.
  size_t n = sim.n;
  size_t full = size_t{1} << n;
  std::vector<double> best(full, std::numeric_limits<double>::infinity());
  std::vector<double> live(full, 0.0);
  live[0] = sim.initial_live;
  best[0] = sim.initial_live;

  auto tensor_freed_by = [&](size_t mask, int op) {
    // Bytes freed after running `op` from state `mask`. Live bytes are a
    // pure function of the executed set, not of the order taken to it.
    double freed = 0;
    for (int t : sim.op_frees[op]) {
      int remaining = sim.consumer_count[t];
      for (size_t j = 0; j < n; ++j) {
        if (!(mask & (size_t{1} << j)) && static_cast<int>(j) != op) continue;
        for (int ft : sim.op_frees[j]) {
          if (ft == t) --remaining;
        }
      }
      if (remaining == 0) freed += sim.tensor_size[t];
    }
    return freed;
  };

  for (size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(best[mask])) continue;
    for (size_t i = 0; i < n; ++i) {
      size_t bit = size_t{1} << i;
      if (mask & bit) continue;
      bool ready = true;
      for (int p : sim.op_inputs_from[i]) {
        if (!(mask & (size_t{1} << p))) ready = false;
      }
      if (!ready) continue;
      double during = live[mask] + sim.op_alloc[i];
      double after = during - tensor_freed_by(mask, static_cast<int>(i));
      size_t next = mask | bit;
      double candidate = std::max(best[mask], during);
      if (candidate < best[next]) {
        best[next] = candidate;
        live[next] = after;
      }
    }
  }
  return sim.persistent + best[full - 1];
}

}  // namespace

double min_footprint(const ComputeGraph& g, const Binding& b, const FootprintOptions& opt) {
  if (!g.validated()) throw GraphError("min_footprint needs a validated graph");
  SimGraph sim = build_sim(g, b, opt);
  if (opt.mode == FootprintMode::kExhaustive) {
    if (sim.n > opt.exhaustive_op_limit) {
      throw TooLargeForExhaustiveError("exhaustive footprint limited to " +
                                       std::to_string(opt.exhaustive_op_limit) + " ops");
    }
    return exhaustive_footprint(sim);
  }
  return heuristic_footprint(sim);
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os << "p,flops_per_sample,bytes_per_step,intensity,footprint_bytes\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.params << "," << r.flops_per_sample << "," << r.bytes_per_step << "," << r.intensity
       << "," << r.footprint_bytes << "\n";
  }
  return os.str();
}

SweepTable sweep(const std::function<SweepInput(double)>& build, const std::string& axis,
                 const std::vector<double>& values) {
  SweepTable table;
  table.axis = axis;
  for (double v : values) {
    SweepInput in = build(v);
    CostReport report = analyze(in.graph);
    SweepRow row;
    row.axis_value = v;
    row.params = in.params.evaluate(in.binding);
    double step_flops = report.flops(in.binding);
    double step_bytes = report.bytes(in.binding);
    row.flops_per_sample = step_flops / in.batch;
    row.bytes_per_step = step_bytes;
    row.intensity = step_flops / step_bytes;
    row.footprint_bytes = min_footprint(in.graph.graph, in.binding);
    table.rows.push_back(row);
  }
  return table;
}

double relative_residual(const std::vector<double>& predicted, const std::vector<double>& observed) {
  double num = 0;
  double den = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    double r = predicted[i] - observed[i];
    num += r * r;
    den += observed[i] * observed[i];
  }
  return den == 0 ? 0 : std::sqrt(num / den);
}

RequirementFit fit_requirement_models(const SweepTable& table, double batch) {
  const auto& rows = table.rows;
  if (rows.size() < 5) throw InsufficientPointsError("need at least 5 sweep points");
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = 0;
  for (const auto& r : rows) {
    pmin = std::min(pmin, r.params);
    pmax = std::max(pmax, r.params);
  }
  if (pmax < 100.0 * pmin) {
    throw InsufficientPointsError("sweep must span at least two decades of parameter count");
  }

  RequirementFit fit;
  std::vector<double> p, c, a, f;
  for (const auto& r : rows) {
    p.push_back(r.params);
    c.push_back(r.flops_per_sample);
    a.push_back(r.bytes_per_step);
    f.push_back(r.footprint_bytes);
  }

  fit.gamma = origin_fit(p, c);
  fit.delta = origin_fit(p, f);

  // a = lambda * p + (mu * b) * sqrt(p): two-basis normal equations.
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    double x1 = p[i];
    double x2 = std::sqrt(p[i]);
    s11 += x1 * x1;
    s12 += x1 * x2;
    s22 += x2 * x2;
    b1 += x1 * a[i];
    b2 += x2 * a[i];
  }
  double det = s11 * s22 - s12 * s12;
  fit.lambda = (b1 * s22 - b2 * s12) / det;
  fit.mu = ((s11 * b2 - s12 * b1) / det) / batch;

  std::vector<double> cp, ap, fp;
  for (size_t i = 0; i < p.size(); ++i) {
    cp.push_back(fit.gamma * p[i]);
    ap.push_back(fit.lambda * p[i] + fit.mu * batch * std::sqrt(p[i]));
    fp.push_back(fit.delta * p[i]);
  }
  fit.gamma_residual = relative_residual(cp, c);
  fit.bytes_residual = relative_residual(ap, a);
  fit.delta_residual = relative_residual(fp, f);
  return fit;
}

}  // namespace graphcap
