#include "logan/model.hpp"

namespace logan {

MomentModel::MomentModel(ModelConfig cfg, std::uint64_t param_seed)
    : cfg_(cfg), params_(param_seed) {
    register_encoder_params(params_, cfg_.dims, cfg_.position_mode);
    register_wcvg_params(params_, cfg_.dims.hidden);
}

Tensor MomentModel::encode_video(const VideoFeatures& video) {
    return encode_frames(video, params_, cfg_.dims, cfg_.position_mode, cfg_.pe_scale);
}

Tensor MomentModel::encode_query(const QueryTokens& query) {
    return encode_words(query, params_, cfg_.dims);
}

MomentModel::PairForward MomentModel::forward_from_encoded(const Tensor& frames0,
                                                           const Tensor& words,
                                                           bool want_trace) {
    PairForward out;
    out.fbw = frame_by_word(frames0, words);
    // The frame-specific sentence rows are read from the initial interaction
    // and stay fixed while the graph refines the frame side.
    out.frame_sentence = out.fbw.frame_sentence;
    out.frames_final = run_wcvg(frames0, words, out.fbw.word_video, params_, cfg_.iterations,
                                want_trace ? &out.trace : nullptr);
    out.framewise_cosine = cosine_pairs(out.frames_final, out.frame_sentence);
    return out;
}

MomentModel::PairForward MomentModel::forward_pair(const VideoFeatures& video,
                                                   const QueryTokens& query, bool want_trace) {
    return forward_from_encoded(encode_video(video), encode_query(query), want_trace);
}

Tensor MomentModel::video_query_similarity(const VideoFeatures& video,
                                           const QueryTokens& query) {
    PairForward fwd = forward_pair(video, query);
    return lse_span(fwd.framewise_cosine, 0, video.frame_count, cfg_.lambda);
}

}  // namespace logan
