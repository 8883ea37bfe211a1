// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameterized forward-graph builders for the five studied architectures:
// LSTM word language models (with an optional projected final layer),
// recurrent-highway character models, attention encoder-decoder NMT and
// speech models, and bottleneck/basic residual image classifiers.
// Dimensions enter the graphs as symbols (h, v, q, b, ...) whose defaults
// come from the config, so every cost query works symbolically or bound.

#pragma once

#include <cstdint>
#include <string>

#include "graphcap/graph.hpp"

namespace graphcap {

class InvalidConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Domain { kWordLm, kCharLm, kNmt, kSpeech, kImage };

const char* domain_name(Domain d);
Domain domain_from_name(const std::string& name);

struct ModelConfig {
  Domain domain = Domain::kWordLm;

  std::int64_t hidden = 1024;     // h
  std::int64_t layers = 2;        // recurrent layers per stack
  std::int64_t vocab = 10000;     // v
  std::int64_t seq_len = 26;      // q, unrolled recurrent steps
  std::int64_t src_len = 0;       // encoder steps (NMT/speech); 0 = seq_len
  std::int64_t subbatch = 128;    // b

  std::int64_t embed_dim = 0;     // e; 0 = hidden
  std::int64_t projection = 0;    // r, reduced inner dim ahead of the output layer; 0 = off
  std::int64_t rhn_depth = 10;    // feed-forward sublayers per RHN step
  std::int64_t input_dim = 40;    // speech feature width

  int resnet_depth = 50;          // one of 18/34/50/101/152
  double width = 1.0;             // channel multiplier w
  std::int64_t classes = 1000;
  std::int64_t image_size = 224;

  // Tokens consumed from the dataset per training sample, for epoch
  // accounting; may differ from the unrolled step count.
  double tokens_per_sample = 26;

  // Algorithmic FLOPs charged per sigmoid/tanh element.
  std::int64_t transcendental_flops = 4;
};

ModelConfig default_config(Domain d);

struct BuiltModel {
  ComputeGraph graph;   // validated forward graph
  DimExpr params;       // total trainable parameters
  Binding defaults;     // config values for every declared symbol
  ModelConfig config;
};

BuiltModel build_word_lm(const ModelConfig& cfg);
BuiltModel build_char_rhn(const ModelConfig& cfg);
BuiltModel build_nmt(const ModelConfig& cfg);
BuiltModel build_speech_attention(const ModelConfig& cfg);
BuiltModel build_resnet(const ModelConfig& cfg);
BuiltModel build_model(const ModelConfig& cfg);

// Total elements across weight tensors.
DimExpr weight_params(const ComputeGraph& g);

}  // namespace graphcap
