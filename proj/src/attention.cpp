#include "logan/attention.hpp"

#include "logan/errors.hpp"

namespace logan {

Tensor fbw_similarity(const Tensor& frames, const Tensor& words) {
    if (frames.cols() != words.cols())
        throw DimensionError("frame/word dims differ: " + shape_string(frames.shape()) +
                             " vs " + shape_string(words.shape()) +
                             "; position tail and word width must add up");
    return cosine_matrix(frames, words);
}

Tensor frame_specific_sentence(const Tensor& similarity, const Tensor& words) {
    Tensor attention = row_softmax(similarity, Axis::rows);
    return matmul(attention, words);
}

Tensor word_specific_video(const Tensor& similarity, const Tensor& frames) {
    Tensor attention = row_softmax(similarity, Axis::cols);
    return matmul(transpose(attention), frames);
}

FbwTensors frame_by_word(const Tensor& frames, const Tensor& words) {
    FbwTensors out;
    out.similarity = fbw_similarity(frames, words);
    out.word_attention = row_softmax(out.similarity, Axis::rows);
    out.frame_attention = row_softmax(out.similarity, Axis::cols);
    out.frame_sentence = matmul(out.word_attention, words);
    out.word_video = matmul(transpose(out.frame_attention), frames);
    return out;
}

}  // namespace logan
