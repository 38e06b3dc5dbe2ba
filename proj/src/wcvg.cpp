#include "logan/wcvg.hpp"

#include "logan/errors.hpp"

namespace logan {

void register_wcvg_params(ParamStore& store, std::int64_t hidden) {
    store.create("graph.node_proj_w", {2 * hidden, hidden}, 2 * hidden);
    store.create("graph.node_proj_b", {hidden}, 2 * hidden);
    store.create("graph.update_w", {2 * hidden, hidden}, 2 * hidden);
    store.create("graph.update_b", {hidden}, 2 * hidden);
}

Tensor build_visual_semantic_nodes(const Tensor& words, const Tensor& word_video,
                                   ParamStore& store) {
    Tensor fused = concat_lastdim(words, word_video);
    return relu(add_rowvec(matmul(fused, store.get("graph.node_proj_w")),
                           store.get("graph.node_proj_b")));
}

Tensor message_passing_step(const Tensor& frames_prev, const Tensor& graph_words,
                            ParamStore& store, Tensor* similarity_out,
                            Tensor* attention_out) {
    Tensor similarity = cosine_matrix(frames_prev, graph_words);
    Tensor attention = row_softmax(similarity, Axis::rows);
    Tensor message = matmul(attention, graph_words);
    Tensor updated = add_rowvec(matmul(concat_lastdim(frames_prev, message),
                                       store.get("graph.update_w")),
                                store.get("graph.update_b"));
    if (similarity_out) *similarity_out = similarity;
    if (attention_out) *attention_out = attention;
    return updated;
}

Tensor run_wcvg(const Tensor& frames0, const Tensor& words, const Tensor& word_video,
                ParamStore& store, int iterations, WcvgTrace* trace) {
    if (iterations < 0) throw ContractError("run_wcvg: iterations must be >= 0");
    if (trace) {
        trace->frame_count = frames0.rows();
        trace->word_count = words.rows();
        trace->hidden = frames0.cols();
        trace->iterations.clear();
    }
    if (iterations == 0) return frames0;

    // Word nodes are built once; only frame representations evolve.
    Tensor graph_words = build_visual_semantic_nodes(words, word_video, store);
    Tensor frames = frames0;
    for (int t = 0; t < iterations; ++t) {
        Tensor similarity, attention;
        frames = message_passing_step(frames, graph_words, store, &similarity, &attention);
        if (trace) {
            WcvgIteration it;
            it.similarity.assign(similarity.values().begin(), similarity.values().end());
            it.word_attention.assign(attention.values().begin(), attention.values().end());
            it.frames.assign(frames.values().begin(), frames.values().end());
            trace->iterations.push_back(std::move(it));
        }
    }
    return frames;
}

}  // namespace logan
