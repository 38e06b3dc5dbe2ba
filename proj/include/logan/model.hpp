#pragma once

#include <cstdint>

#include "logan/attention.hpp"
#include "logan/encoders.hpp"
#include "logan/params.hpp"
#include "logan/tensor.hpp"
#include "logan/types.hpp"
#include "logan/wcvg.hpp"

namespace logan {

struct ModelConfig {
    EncoderDims dims;
    PositionMode position_mode = PositionMode::sinusoidal;
    double pe_scale = 10000.0;  // sinusoidal frequency base
    int iterations = 3;         // message-passing rounds; 0 = interaction only
    double lambda = 6.0;        // LSE sharpness
};

// Full retrieval model: owns the parameters and wires encoders, the
// frame-by-word stage and the visual graph into one differentiable pipeline.
class MomentModel {
public:
    MomentModel(ModelConfig cfg, std::uint64_t param_seed);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const ModelConfig& config() const { return cfg_; }

    Tensor encode_video(const VideoFeatures& video);
    Tensor encode_query(const QueryTokens& query);

    struct PairForward {
        Tensor frames_final;      // [N x H] after graph updates
        Tensor frame_sentence;    // [N x H], frozen from the initial interaction
        Tensor framewise_cosine;  // [N] cosine(frame_k, sentence_k)
        FbwTensors fbw;
        WcvgTrace trace;
    };

    // Pipeline from already-encoded inputs; lets a training batch reuse the
    // per-video/per-query encodings across all pairs.
    PairForward forward_from_encoded(const Tensor& frames0, const Tensor& words,
                                     bool want_trace = false);
    PairForward forward_pair(const VideoFeatures& video, const QueryTokens& query,
                             bool want_trace = false);

    // Whole-video LSE similarity, the training-time bag score.
    Tensor video_query_similarity(const VideoFeatures& video, const QueryTokens& query);

private:
    ModelConfig cfg_;
    ParamStore params_;
};

}  // namespace logan
