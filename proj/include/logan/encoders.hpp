#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "logan/params.hpp"
#include "logan/tensor.hpp"
#include "logan/types.hpp"

namespace logan {

// How the fixed positional tail of each frame representation is built.
enum class PositionMode {
    sinusoidal,  // sin/cos features, tail width = pe_dim
    endpoint,    // (i/N, (i+1)/N), tail width = 2
    none,        // no tail; frame dim stays at the FC output width
};

struct EncoderDims {
    std::int64_t vocab = 0;
    std::int64_t embed_dim = 300;   // D_e
    std::int64_t hidden = 512;      // H, shared by words and frames
    std::int64_t pe_dim = 64;       // sinusoidal tail width
    std::int64_t feature_dim = 0;   // D_v

    std::int64_t position_tail(PositionMode mode) const {
        switch (mode) {
            case PositionMode::sinusoidal: return pe_dim;
            case PositionMode::endpoint: return 2;
            case PositionMode::none: return 0;
        }
        return 0;
    }
    // FC output width. Ablating the tail (`none`) keeps the FC at the
    // sinusoidal width, so the frame dim drops below `hidden` and the
    // frame-by-word stage rejects it unless dims are reconfigured.
    std::int64_t visual_fc_out(PositionMode mode) const {
        return mode == PositionMode::endpoint ? hidden - 2 : hidden - pe_dim;
    }
};

// Registers embedding table, GRU gates and the visual FC in the store.
void register_encoder_params(ParamStore& store, const EncoderDims& dims, PositionMode mode);

// Fixed sinusoidal position features: even index i -> sin(pos / M^(i/d)),
// odd -> cos(pos / M^(i/d)).
std::vector<double> positional_encoding(std::int64_t pos, std::int64_t dim, double m_scale);

// Segment-level endpoint pair (i/N, (i+1)/N).
std::array<double, 2> temporal_endpoint_features(std::int64_t i, std::int64_t n);

// Word representations: embedding rows fed through a single-direction GRU,
// one output row per consumed token. Shape [Q x H].
Tensor encode_words(const QueryTokens& query, ParamStore& store, const EncoderDims& dims);

// Frame representations: ReLU(FC(features)) with the positional tail
// concatenated per frame. The tail carries no gradient. Shape [N x H] for
// sinusoidal mode, [N x (fc_out + tail)] otherwise.
Tensor encode_frames(const VideoFeatures& video, ParamStore& store, const EncoderDims& dims,
                     PositionMode mode, double m_scale);

}  // namespace logan
