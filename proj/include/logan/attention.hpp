#pragma once

#include "logan/tensor.hpp"

namespace logan {

// Frame-by-word interaction stage: the cosine similarity grid between every
// frame and word plus both attention directions derived from it.
struct FbwTensors {
    Tensor similarity;       // [N x Q]
    Tensor word_attention;   // [N x Q], rows sum to 1
    Tensor frame_attention;  // [N x Q], columns sum to 1
    Tensor frame_sentence;   // [N x H] attention-weighted word summary per frame
    Tensor word_video;       // [Q x H] attention-weighted frame summary per word
};

// Pairwise cosine between frame rows and word rows. Throws DimensionError
// when the shared dimension differs (the guard that catches a position-tail
// ablation without a matching word width).
Tensor fbw_similarity(const Tensor& frames, const Tensor& words);

// For each frame, softmax over words then the weighted word combination.
Tensor frame_specific_sentence(const Tensor& similarity, const Tensor& words);

// For each word, softmax over frames then the weighted frame combination.
Tensor word_specific_video(const Tensor& similarity, const Tensor& frames);

FbwTensors frame_by_word(const Tensor& frames, const Tensor& words);

}  // namespace logan
