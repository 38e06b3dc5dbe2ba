#pragma once

#include <cstdint>
#include <vector>

#include "logan/params.hpp"
#include "logan/tensor.hpp"

namespace logan {

// Per-iteration value snapshots, exported by the attention CLI command.
struct WcvgIteration {
    std::vector<double> similarity;      // [N x Q]
    std::vector<double> word_attention;  // [N x Q], rows sum to 1
    std::vector<double> frames;          // [N x H] updated frame representations
};

struct WcvgTrace {
    std::int64_t frame_count = 0;
    std::int64_t word_count = 0;
    std::int64_t hidden = 0;
    std::vector<WcvgIteration> iterations;
};

// Projections shared across iterations: node_proj fuses a word with its
// word-specific video summary, update_proj folds the aggregated message back
// into each frame.
void register_wcvg_params(ParamStore& store, std::int64_t hidden);

// ReLU(node_proj * concat(word, word_video) + bias), one row per word.
Tensor build_visual_semantic_nodes(const Tensor& words, const Tensor& word_video,
                                   ParamStore& store);

// One message-passing round: fresh cosine grid against the graph word nodes,
// row-softmax attention, convex message per frame, then the update
// projection over concat(frame, message). Optionally surfaces the
// intermediate similarity/attention tensors.
Tensor message_passing_step(const Tensor& frames_prev, const Tensor& graph_words,
                            ParamStore& store, Tensor* similarity_out = nullptr,
                            Tensor* attention_out = nullptr);

// Builds the graph word nodes once, then applies `iterations` passing steps.
// iterations == 0 returns frames0 untouched (the interaction-only ablation).
Tensor run_wcvg(const Tensor& frames0, const Tensor& words, const Tensor& word_video,
                ParamStore& store, int iterations, WcvgTrace* trace = nullptr);

}  // namespace logan
