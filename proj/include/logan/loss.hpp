#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "logan/model.hpp"
#include "logan/params.hpp"
#include "logan/tensor.hpp"
#include "logan/types.hpp"

namespace logan {

struct LossConfig {
    double lambda = 6.0;
    double margin = 0.7;
    int top_k_negatives = 15;
    int batch_videos = 32;
};

// Smooth-max pooled similarity of a segment: per-frame cosines between the
// updated frames and their frame-specific sentence rows, LSE-pooled over
// [span.begin_unit, span.end_unit). A one-frame span reduces to the plain
// cosine for any lambda.
Tensor lse_similarity(const Tensor& frames_final, const Tensor& frame_sentence,
                      const SegmentSpan& span, double lambda);

// max(0, margin - sim_pos + sim_neg), scalar tensors.
Tensor triplet_loss(const Tensor& sim_pos, const Tensor& sim_neg, double margin);

struct TrainPair {
    const VideoFeatures* video = nullptr;
    const QueryTokens* query = nullptr;
};

struct BatchLossResult {
    Tensor loss;
    int active_hinges = 0;
    int total_hinges = 0;
};

// Bidirectional ranking loss over one batch of positive pairs. For each
// anchor and each direction only the K highest-similarity negatives
// contribute; ties break toward the lower batch index.
BatchLossResult batch_loss(MomentModel& model, std::span<const TrainPair> batch,
                           const LossConfig& cfg);

struct StepResult {
    double loss = 0.0;
    int active_hinges = 0;
};

// One zero-grad / forward / backward / Adam cycle. Throws NumericError (with
// the offending pair ids) on a non-finite loss.
StepResult train_step(MomentModel& model, std::span<const TrainPair> batch,
                      const LossConfig& cfg, AdamOptimizer& optimizer);

}  // namespace logan
