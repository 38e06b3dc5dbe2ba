#include "logan/encoders.hpp"

#include <cmath>

#include "logan/errors.hpp"

namespace logan {

void register_encoder_params(ParamStore& store, const EncoderDims& dims, PositionMode mode) {
    const std::int64_t de = dims.embed_dim;
    const std::int64_t h = dims.hidden;
    const std::int64_t fc_out = dims.visual_fc_out(mode);
    if (fc_out <= 0)
        throw ConfigError("visual FC width must be positive; hidden=" + std::to_string(h) +
                          " leaves no room for the position tail");

    store.create("embed.table", {dims.vocab, de}, de);
    store.create("gru.update_x", {de, h}, de);
    store.create("gru.update_h", {h, h}, h);
    store.create("gru.update_b", {h}, h);
    store.create("gru.reset_x", {de, h}, de);
    store.create("gru.reset_h", {h, h}, h);
    store.create("gru.reset_b", {h}, h);
    store.create("gru.cand_x", {de, h}, de);
    store.create("gru.cand_h", {h, h}, h);
    store.create("gru.cand_b", {h}, h);
    store.create("visual.fc_w", {dims.feature_dim, fc_out}, dims.feature_dim);
    store.create("visual.fc_b", {fc_out}, dims.feature_dim);
}

std::vector<double> positional_encoding(std::int64_t pos, std::int64_t dim, double m_scale) {
    if (pos < 0) throw ContractError("positional_encoding: pos must be >= 0");
    if (dim < 1 || dim % 2 != 0)
        throw ContractError("positional_encoding: dim must be a positive even number, got " +
                            std::to_string(dim));
    if (m_scale <= 0.0) throw ContractError("positional_encoding: scale must be positive");

    std::vector<double> out(static_cast<std::size_t>(dim));
    const double p = static_cast<double>(pos);
    for (std::int64_t i = 0; i < dim; ++i) {
        const double freq = std::pow(m_scale, static_cast<double>(i) / static_cast<double>(dim));
        out[static_cast<std::size_t>(i)] =
            (i % 2 == 0) ? std::sin(p / freq) : std::cos(p / freq);
    }
    return out;
}

std::array<double, 2> temporal_endpoint_features(std::int64_t i, std::int64_t n) {
    if (n < 1 || i < 0 || i >= n)
        throw ContractError("temporal_endpoint_features: need 0 <= i < n");
    const double nn = static_cast<double>(n);
    return {static_cast<double>(i) / nn, static_cast<double>(i + 1) / nn};
}

Tensor encode_words(const QueryTokens& query, ParamStore& store, const EncoderDims& dims) {
    if (query.tokens.empty())
        throw DataError("query " + query.query_id + " has no tokens");
    for (auto id : query.tokens)
        if (id < 0 || id >= dims.vocab)
            throw DataError("query " + query.query_id + ": token id " + std::to_string(id) +
                            " outside vocabulary of size " + std::to_string(dims.vocab));

    const Tensor& embed = store.get("embed.table");
    const Tensor& wz = store.get("gru.update_x");
    const Tensor& uz = store.get("gru.update_h");
    const Tensor& bz = store.get("gru.update_b");
    const Tensor& wr = store.get("gru.reset_x");
    const Tensor& ur = store.get("gru.reset_h");
    const Tensor& br = store.get("gru.reset_b");
    const Tensor& wh = store.get("gru.cand_x");
    const Tensor& uh = store.get("gru.cand_h");
    const Tensor& bh = store.get("gru.cand_b");

    const std::int64_t h_dim = dims.hidden;
    Tensor ones = Tensor::leaf({1, h_dim}, std::vector<double>(static_cast<std::size_t>(h_dim), 1.0));
    Tensor state = Tensor::zeros({1, h_dim});

    std::vector<Tensor> outputs;
    outputs.reserve(query.tokens.size());
    for (auto id : query.tokens) {
        Tensor x = gather_rows(embed, {id});
        Tensor update = sigmoid(add_rowvec(add(matmul(x, wz), matmul(state, uz)), bz));
        Tensor reset = sigmoid(add_rowvec(add(matmul(x, wr), matmul(state, ur)), br));
        Tensor cand = tanh_op(add_rowvec(add(matmul(x, wh), matmul(mul(reset, state), uh)), bh));
        Tensor keep = add(ones, scale(update, -1.0));  // 1 - z
        state = add(mul(keep, state), mul(update, cand));
        outputs.push_back(state);
    }
    return concat_rows(outputs);
}

Tensor encode_frames(const VideoFeatures& video, ParamStore& store, const EncoderDims& dims,
                     PositionMode mode, double m_scale) {
    if (video.feature_dim != dims.feature_dim)
        throw DataError("video " + video.video_id + ": feature width " +
                        std::to_string(video.feature_dim) + " does not match configured " +
                        std::to_string(dims.feature_dim));
    if (video.frame_count < 1)
        throw DataError("video " + video.video_id + " has no frames");

    Tensor feats = Tensor::leaf({video.frame_count, video.feature_dim}, video.features);
    Tensor activated = relu(add_rowvec(matmul(feats, store.get("visual.fc_w")),
                                       store.get("visual.fc_b")));
    if (mode == PositionMode::none) return activated;

    const std::int64_t n = video.frame_count;
    const std::int64_t tail = dims.position_tail(mode);
    std::vector<double> tail_values(static_cast<std::size_t>(n * tail));
    for (std::int64_t i = 0; i < n; ++i) {
        if (mode == PositionMode::sinusoidal) {
            auto pe = positional_encoding(video.frame_positions[static_cast<std::size_t>(i)],
                                          tail, m_scale);
            std::copy(pe.begin(), pe.end(), tail_values.begin() + i * tail);
        } else {
            auto tef = temporal_endpoint_features(i, n);
            tail_values[static_cast<std::size_t>(i * tail)] = tef[0];
            tail_values[static_cast<std::size_t>(i * tail + 1)] = tef[1];
        }
    }
    Tensor tail_block = Tensor::leaf({n, tail}, std::move(tail_values));
    return concat_lastdim(activated, tail_block);
}

}  // namespace logan
