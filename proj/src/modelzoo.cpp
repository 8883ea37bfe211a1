// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphcap/modelzoo.hpp"

#include <cmath>

namespace graphcap {

namespace {

// Builder-side shorthand over a graph under construction.
struct GraphCursor {
  ComputeGraph& g;

  std::string weight(const std::string& id, std::vector<DimExpr> shape) {
    TensorSpec t;
    t.id = id;
    t.shape = std::move(shape);
    t.kind = TensorKind::kWeight;
    g.add_tensor(std::move(t));
    return id;
  }

  std::string tensor(const std::string& id, std::vector<DimExpr> shape, TensorKind kind,
                     DimExpr mult = DimExpr(1)) {
    TensorSpec t;
    t.id = id;
    t.shape = std::move(shape);
    t.kind = kind;
    t.footprint_mult = std::move(mult);
    g.add_tensor(std::move(t));
    return id;
  }

  std::string act(const std::string& id, std::vector<DimExpr> shape, DimExpr mult = DimExpr(1)) {
    return tensor(id, std::move(shape), TensorKind::kActivation, std::move(mult));
  }

  OpNode& op(OpNode node) { return g.add_op(std::move(node)); }

  std::string matmul(const std::string& id, const std::string& a, const std::string& b,
                     const DimExpr& m, const DimExpr& n, const DimExpr& k, const std::string& out,
                     DimExpr unroll = DimExpr(1)) {
    OpNode node;
    node.id = id;
    node.type = OpType::kMatMul;
    node.attrs["m"] = m;
    node.attrs["n"] = n;
    node.attrs["k"] = k;
    node.inputs = {a, b};
    node.outputs = {out};
    node.unroll_count = std::move(unroll);
    op(std::move(node));
    return out;
  }

  std::string pointwise(const std::string& id, std::vector<std::string> inputs,
                        const std::string& out, std::int64_t fpe, DimExpr unroll = DimExpr(1)) {
    OpNode node;
    node.id = id;
    node.type = OpType::kPointwise;
    node.attrs["flops_per_element"] = DimExpr(fpe);
    node.inputs = std::move(inputs);
    node.outputs = {out};
    node.unroll_count = std::move(unroll);
    op(std::move(node));
    return out;
  }

  // Zero-FLOP shape adapter (per-step slice of a sequence tensor, recurrent
  // carry, attention pooling); Reduction places no shape constraints.
  std::string view(const std::string& id, const std::string& in, const std::string& out,
                   std::int64_t fpe = 0, DimExpr unroll = DimExpr(1)) {
    OpNode node;
    node.id = id;
    node.type = OpType::kReduction;
    node.attrs["flops_per_element"] = DimExpr(fpe);
    node.inputs = {in};
    node.outputs = {out};
    node.unroll_count = std::move(unroll);
    op(std::move(node));
    return out;
  }

  std::string softmax(const std::string& id, const std::string& in, const std::string& out,
                      DimExpr unroll = DimExpr(1)) {
    OpNode node;
    node.id = id;
    node.type = OpType::kSoftmax;
    node.inputs = {in};
    node.outputs = {out};
    node.unroll_count = std::move(unroll);
    op(std::move(node));
    return out;
  }
};

DimExpr S(const std::string& name) { return DimExpr::sym(name); }

// One LSTM layer: a fused gate matmul on [x_t, h_{t-1}] plus the cell
// pointwise chain, everything unrolled `steps` times. Gate values, the cell
// state and the hidden output stay live for the whole backward pass; the
// carries are per-step views of tensors already counted.
std::string lstm_layer(GraphCursor& c, const std::string& name, const std::string& x_step,
                       const DimExpr& in_dim, const DimExpr& h, const DimExpr& b,
                       const DimExpr& steps, std::int64_t act_flops) {
  DimExpr gates_dim = DimExpr(4) * h;
  std::string w = c.weight(name + ".w", {in_dim + h, gates_dim});
  std::string bias = c.weight(name + ".bias", {gates_dim});

  std::string carry = c.act(name + ".h_prev", {b, h});
  c.view(name + ".carry", x_step, carry, 0, steps);
  std::string cell_in = c.act(name + ".cell_in", {b, in_dim + h});
  OpNode cat;
  cat.id = name + ".concat";
  cat.type = OpType::kConcat;
  cat.inputs = {x_step, carry};
  cat.outputs = {cell_in};
  cat.unroll_count = steps;
  c.op(std::move(cat));

  std::string preact = c.act(name + ".preact", {b, gates_dim});
  c.matmul(name + ".gates_mm", cell_in, w, b, gates_dim, in_dim + h, preact, steps);
  std::string preact_b = c.act(name + ".preact_b", {b, gates_dim});
  c.pointwise(name + ".bias_add", {preact, bias}, preact_b, 1, steps);

  std::string gates = c.act(name + ".gates", {b, gates_dim}, steps);
  c.pointwise(name + ".gate_act", {preact_b}, gates, act_flops, steps);

  std::string c_prev = c.act(name + ".c_prev", {b, h});
  c.view(name + ".c_carry", cell_in, c_prev, 0, steps);
  std::string cell = c.act(name + ".c", {b, h}, steps);
  c.pointwise(name + ".cell", {gates, c_prev}, cell, 3, steps);
  std::string tanh_c = c.act(name + ".tanh_c", {b, h}, steps);
  c.pointwise(name + ".c_act", {cell}, tanh_c, act_flops, steps);
  std::string h_out = c.act(name + ".h", {b, h}, steps);
  c.pointwise(name + ".h_out", {gates, tanh_c}, h_out, 1, steps);
  return h_out;
}

// Per-step output head: optional projection, logits, bias, softmax.
void lm_head(GraphCursor& c, const std::string& name, const std::string& h_in,
             const DimExpr& in_dim, const DimExpr& v, const DimExpr& b, const DimExpr& steps,
             const DimExpr& proj_dim, bool has_proj) {
  std::string logits_in = h_in;
  DimExpr logits_k = in_dim;
  if (has_proj) {
    std::string pw = c.weight(name + ".proj_w", {in_dim, proj_dim});
    std::string projected = c.act(name + ".proj", {b, proj_dim}, steps);
    c.matmul(name + ".proj_mm", h_in, pw, b, proj_dim, in_dim, projected, steps);
    logits_in = projected;
    logits_k = proj_dim;
  }
  std::string ow = c.weight(name + ".out_w", {logits_k, v});
  std::string ob = c.weight(name + ".out_bias", {v});
  std::string logits = c.act(name + ".logits", {b, v});
  c.matmul(name + ".out_mm", logits_in, ow, b, v, logits_k, logits, steps);
  std::string logits_b = c.act(name + ".logits_b", {b, v});
  c.pointwise(name + ".out_bias_add", {logits, ob}, logits_b, 1, steps);
  std::string probs = c.tensor(name + ".probs", {b, v}, TensorKind::kOutput);
  c.softmax(name + ".softmax", logits_b, probs, steps);
}

BuiltModel finish(ComputeGraph&& g, const ModelConfig& cfg) {
  BuiltModel out{std::move(g), DimExpr(0), Binding{}, cfg};
  out.graph.validate();
  out.params = weight_params(out.graph);
  out.defaults = out.graph.default_binding();
  return out;
}

void check_positive(const ModelConfig& cfg) {
  if (cfg.hidden <= 0 || cfg.layers <= 0 || cfg.vocab <= 0 || cfg.seq_len <= 0 ||
      cfg.subbatch <= 0) {
    throw InvalidConfigError("model dimensions must be positive");
  }
  if (cfg.projection > 0 && cfg.projection > cfg.hidden) {
    throw InvalidConfigError("projection dim must not exceed hidden dim");
  }
}

}  // namespace

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::kWordLm: return "word_lm";
    case Domain::kCharLm: return "char_lm";
    case Domain::kNmt: return "nmt";
    case Domain::kSpeech: return "speech";
    case Domain::kImage: return "image";
  }
  return "?";
}

Domain domain_from_name(const std::string& name) {
  for (Domain d : {Domain::kWordLm, Domain::kCharLm, Domain::kNmt, Domain::kSpeech, Domain::kImage}) {
    if (name == domain_name(d)) return d;
  }
  throw InvalidConfigError("unknown domain: " + name +
                           " (expected word_lm, char_lm, nmt, speech or image)");
}

ModelConfig default_config(Domain d) {
  ModelConfig cfg;
  cfg.domain = d;
  switch (d) {
    case Domain::kWordLm:
      cfg.hidden = 1024;
      cfg.layers = 2;
      cfg.vocab = 800000;
      cfg.seq_len = 26;
      cfg.tokens_per_sample = 26;
      cfg.subbatch = 128;
      break;
    case Domain::kCharLm:
      cfg.hidden = 1024;
      cfg.layers = 1;
      cfg.vocab = 100;
      cfg.seq_len = 150;
      cfg.tokens_per_sample = 118;
      cfg.rhn_depth = 10;
      cfg.subbatch = 96;
      break;
    case Domain::kNmt:
      cfg.hidden = 1024;
      cfg.layers = 2;
      cfg.vocab = 32000;
      cfg.seq_len = 29;
      cfg.src_len = 29;
      cfg.tokens_per_sample = 29;
      cfg.subbatch = 96;
      break;
    case Domain::kSpeech:
      cfg.hidden = 1024;
      cfg.layers = 4;
      cfg.vocab = 30;
      cfg.seq_len = 79;
      cfg.src_len = 300;
      cfg.tokens_per_sample = 79;
      cfg.subbatch = 128;
      break;
    case Domain::kImage:
      cfg.resnet_depth = 50;
      cfg.width = 1.0;
      cfg.classes = 1000;
      cfg.seq_len = 1;
      cfg.tokens_per_sample = 1;
      cfg.subbatch = 32;
      break;
  }
  return cfg;
}

DimExpr weight_params(const ComputeGraph& g) {
  DimExpr total;
  for (const auto& tid : g.tensor_ids()) {
    const TensorSpec& t = g.tensor(tid);
    if (t.kind == TensorKind::kWeight) total += t.num_elements();
  }
  return total;
}

BuiltModel build_word_lm(const ModelConfig& cfg) {
  if (cfg.domain != Domain::kWordLm) throw InvalidConfigError("config domain must be word_lm");
  check_positive(cfg);

  ComputeGraph g;
  g.declare_symbol("h", static_cast<double>(cfg.hidden));
  g.declare_symbol("v", static_cast<double>(cfg.vocab));
  g.declare_symbol("q", static_cast<double>(cfg.seq_len));
  g.declare_symbol("b", static_cast<double>(cfg.subbatch));
  bool wide_embed = cfg.embed_dim > 0;
  if (wide_embed) g.declare_symbol("e", static_cast<double>(cfg.embed_dim));
  bool has_proj = cfg.projection > 0;
  if (has_proj) g.declare_symbol("r", static_cast<double>(cfg.projection));

  DimExpr h = S("h"), v = S("v"), q = S("q"), b = S("b");
  DimExpr e = wide_embed ? S("e") : h;
  GraphCursor c{g};

  c.tensor("tokens", {b, q}, TensorKind::kInput);
  c.weight("embedding", {v, e});
  std::string emb_out = c.act("emb_out", {b, q, e});
  OpNode lookup;
  lookup.id = "embed";
  lookup.type = OpType::kEmbeddingLookup;
  lookup.inputs = {"embedding", "tokens"};
  lookup.outputs = {emb_out};
  c.op(std::move(lookup));

  std::string x = c.act("x_step", {b, e});
  c.view("x_slice", emb_out, x, 0, q);

  for (std::int64_t i = 0; i < cfg.layers; ++i) {
    DimExpr in_dim = i == 0 ? e : h;
    x = lstm_layer(c, "lstm" + std::to_string(i), x, in_dim, h, b, q, cfg.transcendental_flops);
  }

  lm_head(c, "head", x, h, v, b, q, has_proj ? S("r") : DimExpr(0), has_proj);
  return finish(std::move(g), cfg);
}

BuiltModel build_char_rhn(const ModelConfig& cfg) {
  if (cfg.domain != Domain::kCharLm) throw InvalidConfigError("config domain must be char_lm");
  check_positive(cfg);
  if (cfg.rhn_depth <= 0) throw InvalidConfigError("rhn_depth must be positive");

  ComputeGraph g;
  g.declare_symbol("h", static_cast<double>(cfg.hidden));
  g.declare_symbol("v", static_cast<double>(cfg.vocab));
  g.declare_symbol("q", static_cast<double>(cfg.seq_len));
  g.declare_symbol("b", static_cast<double>(cfg.subbatch));
  DimExpr h = S("h"), v = S("v"), q = S("q"), b = S("b");
  GraphCursor c{g};

  c.tensor("tokens", {b, q}, TensorKind::kInput);
  c.weight("embedding", {v, h});
  std::string emb_out = c.act("emb_out", {b, q, h});
  OpNode lookup;
  lookup.id = "embed";
  lookup.type = OpType::kEmbeddingLookup;
  lookup.inputs = {"embedding", "tokens"};
  lookup.outputs = {emb_out};
  c.op(std::move(lookup));

  std::string x = c.act("x_step", {b, h});
  c.view("x_slice", emb_out, x, 0, q);

  // Each sublayer applies H (tanh) and T (sigmoid) transforms to the
  // concatenation of its input and the recurrent state:
  // s' = H(x,s) * T(x,s) + s * (1 - T(x,s)).
  for (std::int64_t d = 0; d < cfg.rhn_depth; ++d) {
    std::string name = "rhn" + std::to_string(d);
    std::string carry = c.act(name + ".s_prev", {b, h});
    c.view(name + ".carry", x, carry, 0, q);
    std::string cell_in = c.act(name + ".cell_in", {b, DimExpr(2) * h});
    OpNode cat;
    cat.id = name + ".concat";
    cat.type = OpType::kConcat;
    cat.inputs = {x, carry};
    cat.outputs = {cell_in};
    cat.unroll_count = q;
    c.op(std::move(cat));

    std::string wh = c.weight(name + ".w_h", {DimExpr(2) * h, h});
    std::string bh = c.weight(name + ".b_h", {h});
    std::string wt = c.weight(name + ".w_t", {DimExpr(2) * h, h});
    std::string bt = c.weight(name + ".b_t", {h});

    std::string pre_h = c.act(name + ".pre_h", {b, h});
    c.matmul(name + ".mm_h", cell_in, wh, b, h, DimExpr(2) * h, pre_h, q);
    std::string act_h = c.act(name + ".h_gate", {b, h}, q);
    c.pointwise(name + ".act_h", {pre_h, bh}, act_h, cfg.transcendental_flops, q);

    std::string pre_t = c.act(name + ".pre_t", {b, h});
    c.matmul(name + ".mm_t", cell_in, wt, b, h, DimExpr(2) * h, pre_t, q);
    std::string act_t = c.act(name + ".t_gate", {b, h}, q);
    c.pointwise(name + ".act_t", {pre_t, bt}, act_t, cfg.transcendental_flops, q);

    std::string s_out = c.act(name + ".s", {b, h}, q);
    c.pointwise(name + ".combine", {act_h, act_t, carry}, s_out, 4, q);
    x = s_out;
  }

  lm_head(c, "head", x, h, v, b, q, DimExpr(0), false);
  return finish(std::move(g), cfg);
}

namespace {

// Luong-style attention over the encoder states, evaluated once per decoder
// step: dot-product scores, a softmax, the weighted context sum and a
// combine projection back to the hidden size.
std::string attention(GraphCursor& c, const std::string& name, const std::string& enc_seq,
                      const std::string& dec_h, const DimExpr& h, const DimExpr& b,
                      const DimExpr& src_steps, const DimExpr& dec_steps) {
  std::string scores = c.act(name + ".scores", {b, src_steps});
  OpNode score_op;
  score_op.id = name + ".score";
  score_op.type = OpType::kReduction;
  score_op.attrs["flops_per_element"] = DimExpr(2);  // multiply + add per encoder element
  score_op.inputs = {enc_seq, dec_h};
  score_op.outputs = {scores};
  score_op.unroll_count = dec_steps;
  c.op(std::move(score_op));

  std::string weights = c.act(name + ".weights", {b, src_steps});
  c.softmax(name + ".softmax", scores, weights, dec_steps);

  std::string context = c.act(name + ".context", {b, h});
  OpNode ctx_op;
  ctx_op.id = name + ".context_sum";
  ctx_op.type = OpType::kReduction;
  ctx_op.attrs["flops_per_element"] = DimExpr(2);
  ctx_op.inputs = {enc_seq, weights};
  ctx_op.outputs = {context};
  ctx_op.unroll_count = dec_steps;
  c.op(std::move(ctx_op));

  std::string cat = c.act(name + ".cat", {b, DimExpr(2) * h});
  OpNode cat_op;
  cat_op.id = name + ".concat";
  cat_op.type = OpType::kConcat;
  cat_op.inputs = {context, dec_h};
  cat_op.outputs = {cat};
  cat_op.unroll_count = dec_steps;
  c.op(std::move(cat_op));

  std::string wc = c.weight(name + ".w_combine", {DimExpr(2) * h, h});
  std::string combined = c.act(name + ".h", {b, h}, dec_steps);
  c.matmul(name + ".combine_mm", cat, wc, b, h, DimExpr(2) * h, combined, dec_steps);
  return combined;
}

// A bidirectional LSTM layer is two unidirectional cells over the same
// input; their outputs concatenate to width 2h.
std::string bilstm_layer(GraphCursor& c, const std::string& name, const std::string& x_step,
                         const DimExpr& in_dim, const DimExpr& h, const DimExpr& b,
                         const DimExpr& steps, std::int64_t act_flops) {
  std::string fwd = lstm_layer(c, name + ".fwd", x_step, in_dim, h, b, steps, act_flops);
  std::string bwd = lstm_layer(c, name + ".bwd", x_step, in_dim, h, b, steps, act_flops);
  std::string both = c.act(name + ".h", {b, DimExpr(2) * h}, steps);
  OpNode cat;
  cat.id = name + ".concat";
  cat.type = OpType::kConcat;
  cat.inputs = {fwd, bwd};
  cat.outputs = {both};
  cat.unroll_count = steps;
  c.op(std::move(cat));
  return both;
}

}  // namespace

BuiltModel build_nmt(const ModelConfig& cfg) {
  if (cfg.domain != Domain::kNmt) throw InvalidConfigError("config domain must be nmt");
  check_positive(cfg);

  ComputeGraph g;
  g.declare_symbol("h", static_cast<double>(cfg.hidden));
  g.declare_symbol("v", static_cast<double>(cfg.vocab));
  g.declare_symbol("q", static_cast<double>(cfg.seq_len));
  g.declare_symbol("qs", static_cast<double>(cfg.src_len > 0 ? cfg.src_len : cfg.seq_len));
  g.declare_symbol("b", static_cast<double>(cfg.subbatch));
  DimExpr h = S("h"), v = S("v"), q = S("q"), qs = S("qs"), b = S("b");
  GraphCursor c{g};

  // Encoder: embedding plus a bidirectional LSTM stack over source steps.
  c.tensor("src_tokens", {b, qs}, TensorKind::kInput);
  c.weight("src_embedding", {v, h});
  std::string src_emb = c.act("src_emb", {b, qs, h});
  OpNode src_lookup;
  src_lookup.id = "src_embed";
  src_lookup.type = OpType::kEmbeddingLookup;
  src_lookup.inputs = {"src_embedding", "src_tokens"};
  src_lookup.outputs = {src_emb};
  c.op(std::move(src_lookup));

  std::string enc = c.act("enc_x", {b, h});
  c.view("src_slice", src_emb, enc, 0, qs);
  for (std::int64_t i = 0; i < cfg.layers; ++i) {
    DimExpr in_dim = i == 0 ? h : DimExpr(2) * h;
    enc = bilstm_layer(c, "enc" + std::to_string(i), enc, in_dim, h, b, qs,
                       cfg.transcendental_flops);
  }
  // Encoder sequence as attention sees it (both directions reduced to h).
  std::string enc_seq = c.act("enc_seq", {b, qs, h});
  c.view("enc_collect", enc, enc_seq, 0);

  // Decoder: embedding plus an LSTM stack over target steps.
  c.tensor("tgt_tokens", {b, q}, TensorKind::kInput);
  c.weight("tgt_embedding", {v, h});
  std::string tgt_emb = c.act("tgt_emb", {b, q, h});
  OpNode tgt_lookup;
  tgt_lookup.id = "tgt_embed";
  tgt_lookup.type = OpType::kEmbeddingLookup;
  tgt_lookup.inputs = {"tgt_embedding", "tgt_tokens"};
  tgt_lookup.outputs = {tgt_emb};
  c.op(std::move(tgt_lookup));

  std::string dec = c.act("dec_x", {b, h});
  c.view("tgt_slice", tgt_emb, dec, 0, q);
  for (std::int64_t i = 0; i < cfg.layers; ++i) {
    dec = lstm_layer(c, "dec" + std::to_string(i), dec, h, h, b, q, cfg.transcendental_flops);
  }

  std::string attn = attention(c, "attn", enc_seq, dec, h, b, qs, q);
  lm_head(c, "head", attn, h, v, b, q, DimExpr(0), false);
  return finish(std::move(g), cfg);
}

BuiltModel build_speech_attention(const ModelConfig& cfg) {
  if (cfg.domain != Domain::kSpeech) throw InvalidConfigError("config domain must be speech");
  check_positive(cfg);

  ComputeGraph g;
  g.declare_symbol("h", static_cast<double>(cfg.hidden));
  g.declare_symbol("v", static_cast<double>(cfg.vocab));
  g.declare_symbol("q", static_cast<double>(cfg.seq_len));
  g.declare_symbol("qs", static_cast<double>(cfg.src_len > 0 ? cfg.src_len : 300));
  g.declare_symbol("b", static_cast<double>(cfg.subbatch));
  g.declare_symbol("d", static_cast<double>(cfg.input_dim));
  DimExpr h = S("h"), v = S("v"), q = S("q"), qs = S("qs"), b = S("b"), d = S("d");
  GraphCursor c{g};

  c.tensor("frames", {b, qs, d}, TensorKind::kInput);

  // Encoder: bi-LSTM stack; pooling after each of the first two layers
  // halves the time dimension, so deeper layers unroll for fewer steps.
  std::string x = c.act("enc_x", {b, d});
  c.view("frame_slice", "frames", x, 0, qs);
  DimExpr steps = qs;
  DimExpr in_dim = d;
  for (std::int64_t i = 0; i < cfg.layers; ++i) {
    std::string name = "enc" + std::to_string(i);
    x = bilstm_layer(c, name, x, in_dim, h, b, steps, cfg.transcendental_flops);
    in_dim = DimExpr(2) * h;
    if (i + 1 < cfg.layers && i < 2) {
      DimExpr next_steps = DimExpr(Rational(1, 2)) * steps;
      std::string pooled = c.act(name + ".pooled", {b, DimExpr(2) * h});
      OpNode pool;
      pool.id = name + ".pool";
      pool.type = OpType::kPool;
      pool.attrs["window"] = DimExpr(2);
      pool.inputs = {x};
      pool.outputs = {pooled};
      pool.unroll_count = next_steps;
      c.op(std::move(pool));
      x = pooled;
      steps = next_steps;
    }
  }
  std::string enc_seq = c.act("enc_seq", {b, steps, DimExpr(2) * h});
  c.view("enc_collect", x, enc_seq, 0);

  // Small convolution extracting location features for the attention.
  std::string conv_filter =
      c.weight("attn.conv_filter", {DimExpr(15), DimExpr(1), DimExpr(1), DimExpr(8)});
  std::string conv_in = c.act("attn.conv_in", {b, steps, DimExpr(1), DimExpr(1)});
  c.view("attn.conv_view", enc_seq, conv_in, 0);
  std::string conv_out = c.act("attn.conv_out", {b, steps, DimExpr(1), DimExpr(8)});
  OpNode conv;
  conv.id = "attn.conv";
  conv.type = OpType::kConv2D;
  conv.attrs["kh"] = DimExpr(15);
  conv.attrs["kw"] = DimExpr(1);
  conv.attrs["cin"] = DimExpr(1);
  conv.attrs["cout"] = DimExpr(8);
  conv.attrs["hout"] = steps;
  conv.attrs["wout"] = DimExpr(1);
  conv.inputs = {conv_in, conv_filter};
  conv.outputs = {conv_out};
  conv.unroll_count = q;
  c.op(std::move(conv));

  // Decoder LSTM plus attention over the pooled encoder sequence.
  c.tensor("tgt_tokens", {b, q}, TensorKind::kInput);
  c.weight("tgt_embedding", {v, h});
  std::string tgt_emb = c.act("tgt_emb", {b, q, h});
  OpNode tgt_lookup;
  tgt_lookup.id = "tgt_embed";
  tgt_lookup.type = OpType::kEmbeddingLookup;
  tgt_lookup.inputs = {"tgt_embedding", "tgt_tokens"};
  tgt_lookup.outputs = {tgt_emb};
  c.op(std::move(tgt_lookup));

  std::string dec = c.act("dec_x", {b, h});
  c.view("tgt_slice", tgt_emb, dec, 0, q);
  dec = lstm_layer(c, "dec0", dec, h, h, b, q, cfg.transcendental_flops);

  std::string attn = attention(c, "attn", enc_seq, dec, h, b, steps, q);
  lm_head(c, "head", attn, h, v, b, q, DimExpr(0), false);
  return finish(std::move(g), cfg);
}

namespace {

struct ResNetCursor {
  GraphCursor& c;
  DimExpr b;

  // Channel counts scale with the width-multiplier symbol.
  DimExpr ch(std::int64_t base) const { return DimExpr(base) * S("w"); }

  std::string conv(const std::string& name, const std::string& in, const DimExpr& cin,
                   const DimExpr& cout, std::int64_t kernel, std::int64_t out_spatial) {
    std::string w = c.weight(name + ".w", {DimExpr(kernel), DimExpr(kernel), cin, cout});
    std::string out = c.act(name + ".out", {b, DimExpr(out_spatial), DimExpr(out_spatial), cout});
    OpNode op;
    op.id = name;
    op.type = OpType::kConv2D;
    op.attrs["kh"] = DimExpr(kernel);
    op.attrs["kw"] = DimExpr(kernel);
    op.attrs["cin"] = cin;
    op.attrs["cout"] = cout;
    op.attrs["hout"] = DimExpr(out_spatial);
    op.attrs["wout"] = DimExpr(out_spatial);
    op.inputs = {in, w};
    op.outputs = {out};
    c.op(std::move(op));
    return out;
  }

  std::string bn_relu(const std::string& name, const std::string& in, const DimExpr& chans,
                      std::int64_t spatial, bool relu) {
    std::string gb = c.weight(name + ".gb", {DimExpr(2), chans});
    std::string normed = c.act(name + ".bn", {b, DimExpr(spatial), DimExpr(spatial), chans});
    OpNode bn;
    bn.id = name + ".norm";
    bn.type = OpType::kBatchNorm;
    bn.inputs = {in, gb};
    bn.outputs = {normed};
    c.op(std::move(bn));
    if (!relu) return normed;
    std::string out = c.act(name + ".relu", {b, DimExpr(spatial), DimExpr(spatial), chans});
    c.pointwise(name + ".act", {normed}, out, 1);
    return out;
  }
};

}  // namespace

BuiltModel build_resnet(const ModelConfig& cfg) {
  if (cfg.domain != Domain::kImage) throw InvalidConfigError("config domain must be image");
  if (cfg.width <= 0) throw InvalidConfigError("width multiplier must be positive");
  if (cfg.subbatch <= 0) throw InvalidConfigError("subbatch must be positive");

  struct StagePlan {
    std::vector<int> blocks;
    bool bottleneck;
  };
  StagePlan plan;
  switch (cfg.resnet_depth) {
    case 18: plan = {{2, 2, 2, 2}, false}; break;
    case 34: plan = {{3, 4, 6, 3}, false}; break;
    case 50: plan = {{3, 4, 6, 3}, true}; break;
    case 101: plan = {{3, 4, 23, 3}, true}; break;
    case 152: plan = {{3, 8, 36, 3}, true}; break;
    default:
      throw InvalidConfigError("resnet_depth must be one of 18, 34, 50, 101, 152");
  }

  ComputeGraph g;
  g.declare_symbol("b", static_cast<double>(cfg.subbatch));
  g.declare_symbol("w", cfg.width);
  GraphCursor gc{g};
  ResNetCursor rc{gc, S("b")};

  std::int64_t spatial = cfg.image_size / 4;  // stem conv /2, then pool /2
  gc.tensor("images", {S("b"), DimExpr(cfg.image_size), DimExpr(cfg.image_size), DimExpr(3)},
            TensorKind::kInput);

  std::string x = rc.conv("stem", "images", DimExpr(3), rc.ch(64), 7, cfg.image_size / 2);
  x = rc.bn_relu("stem", x, rc.ch(64), cfg.image_size / 2, true);
  std::string pooled =
      gc.act("stem.pool_out", {S("b"), DimExpr(spatial), DimExpr(spatial), rc.ch(64)});
  OpNode stem_pool;
  stem_pool.id = "stem.pool";
  stem_pool.type = OpType::kPool;
  stem_pool.attrs["window"] = DimExpr(9);
  stem_pool.inputs = {x};
  stem_pool.outputs = {pooled};
  gc.op(std::move(stem_pool));
  x = pooled;

  const std::int64_t base_mid[4] = {64, 128, 256, 512};
  DimExpr in_ch = rc.ch(64);
  for (int stage = 0; stage < 4; ++stage) {
    if (stage > 0) spatial /= 2;
    std::int64_t mid_base = base_mid[stage];
    DimExpr mid = rc.ch(mid_base);
    DimExpr out_ch = plan.bottleneck ? rc.ch(mid_base * 4) : rc.ch(mid_base);
    for (int block = 0; block < plan.blocks[stage]; ++block) {
      std::string name = "s" + std::to_string(stage) + "b" + std::to_string(block);
      std::string skip = x;
      std::string y;
      if (plan.bottleneck) {
        y = rc.conv(name + ".c1", x, in_ch, mid, 1, spatial);
        y = rc.bn_relu(name + ".c1", y, mid, spatial, true);
        y = rc.conv(name + ".c2", y, mid, mid, 3, spatial);
        y = rc.bn_relu(name + ".c2", y, mid, spatial, true);
        y = rc.conv(name + ".c3", y, mid, out_ch, 1, spatial);
        y = rc.bn_relu(name + ".c3", y, out_ch, spatial, false);
      } else {
        y = rc.conv(name + ".c1", x, in_ch, mid, 3, spatial);
        y = rc.bn_relu(name + ".c1", y, mid, spatial, true);
        y = rc.conv(name + ".c2", y, mid, out_ch, 3, spatial);
        y = rc.bn_relu(name + ".c2", y, out_ch, spatial, false);
      }
      if (block == 0) {
        skip = rc.conv(name + ".down", skip, in_ch, out_ch, 1, spatial);
        skip = rc.bn_relu(name + ".down", skip, out_ch, spatial, false);
      }
      std::string sum =
          gc.act(name + ".sum", {S("b"), DimExpr(spatial), DimExpr(spatial), out_ch});
      gc.pointwise(name + ".add", {y, skip}, sum, 1);
      std::string out =
          gc.act(name + ".out", {S("b"), DimExpr(spatial), DimExpr(spatial), out_ch});
      gc.pointwise(name + ".relu", {sum}, out, 1);
      x = out;
      in_ch = out_ch;
    }
  }

  std::string gap = gc.act("gap", {S("b"), in_ch});
  OpNode pool;
  pool.id = "global_pool";
  pool.type = OpType::kPool;
  pool.attrs["window"] = DimExpr(spatial * spatial);
  pool.inputs = {x};
  pool.outputs = {gap};
  gc.op(std::move(pool));

  std::string fw = gc.weight("fc.w", {in_ch, DimExpr(cfg.classes)});
  std::string fb = gc.weight("fc.bias", {DimExpr(cfg.classes)});
  std::string logits = gc.act("fc.logits", {S("b"), DimExpr(cfg.classes)});
  gc.matmul("fc", gap, fw, S("b"), DimExpr(cfg.classes), in_ch, logits);
  std::string logits_b = gc.act("fc.logits_b", {S("b"), DimExpr(cfg.classes)});
  gc.pointwise("fc.bias_add", {logits, fb}, logits_b, 1);
  std::string probs = gc.tensor("probs", {S("b"), DimExpr(cfg.classes)}, TensorKind::kOutput);
  gc.softmax("softmax", logits_b, probs);

  return finish(std::move(g), cfg);
}

BuiltModel build_model(const ModelConfig& cfg) {
  switch (cfg.domain) {
    case Domain::kWordLm: return build_word_lm(cfg);
    case Domain::kCharLm: return build_char_rhn(cfg);
    case Domain::kNmt: return build_nmt(cfg);
    case Domain::kSpeech: return build_speech_attention(cfg);
    case Domain::kImage: return build_resnet(cfg);
  }
  throw InvalidConfigError("unknown domain");
}

}  // namespace graphcap
