#include "logan/loss.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "logan/errors.hpp"

namespace logan {

Tensor lse_similarity(const Tensor& frames_final, const Tensor& frame_sentence,
                      const SegmentSpan& span, double lambda) {
    Tensor framewise = cosine_pairs(frames_final, frame_sentence);
    return lse_span(framewise, span.begin_unit, span.end_unit, lambda);
}

Tensor triplet_loss(const Tensor& sim_pos, const Tensor& sim_neg, double margin) {
    return relu(add(add(Tensor::scalar(margin), scale(sim_pos, -1.0)), sim_neg));
}

namespace {

// Indices of the `k` largest values, ties toward the lower index.
std::vector<std::size_t> top_k_indices(const std::vector<double>& values,
                                       const std::vector<std::size_t>& candidates,
                                       std::size_t k) {
    std::vector<std::size_t> order = candidates;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    if (order.size() > k) order.resize(k);
    return order;
}

}  // namespace

BatchLossResult batch_loss(MomentModel& model, std::span<const TrainPair> batch,
                           const LossConfig& cfg) {
    std::set<std::string> distinct;
    for (const auto& p : batch) distinct.insert(p.video->video_id);
    if (distinct.size() < 2)
        throw ContractError("batch_loss: need at least 2 distinct videos, got " +
                            std::to_string(distinct.size()));

    const std::size_t b = batch.size();
    std::vector<Tensor> video_enc(b), query_enc(b);
    for (std::size_t i = 0; i < b; ++i) {
        video_enc[i] = model.encode_video(*batch[i].video);
        query_enc[i] = model.encode_query(*batch[i].query);
    }

    // Bag similarity for every (video i, query j) pair in the batch.
    const double lambda = cfg.lambda;
    std::vector<std::vector<Tensor>> sim(b, std::vector<Tensor>(b));
    std::vector<std::vector<double>> sim_value(b, std::vector<double>(b));
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            auto fwd = model.forward_from_encoded(video_enc[i], query_enc[j]);
            sim[i][j] = lse_span(fwd.framewise_cosine, 0, batch[i].video->frame_count, lambda);
            sim_value[i][j] = sim[i][j].item();
        }
    }

    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(cfg.top_k_negatives, 1)), b - 1);

    BatchLossResult result;
    std::vector<Tensor> hinges;
    for (std::size_t a = 0; a < b; ++a) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < b; ++j)
            if (j != a) others.push_back(j);

        // Keep the query, swap in other queries against this video.
        {
            std::vector<double> scores(b);
            for (std::size_t j : others) scores[j] = sim_value[a][j];
            for (std::size_t j : top_k_indices(scores, others, k))
                hinges.push_back(triplet_loss(sim[a][a], sim[a][j], cfg.margin));
        }
        // Keep the query's video slot, swap in other videos.
        {
            std::vector<double> scores(b);
            for (std::size_t j : others) scores[j] = sim_value[j][a];
            for (std::size_t j : top_k_indices(scores, others, k))
                hinges.push_back(triplet_loss(sim[a][a], sim[j][a], cfg.margin));
        }
    }

    result.total_hinges = static_cast<int>(hinges.size());
    for (const auto& h : hinges)
        if (h.item() > 0.0) ++result.active_hinges;
    result.loss = sum(concat_rows(hinges));
    return result;
}

StepResult train_step(MomentModel& model, std::span<const TrainPair> batch,
                      const LossConfig& cfg, AdamOptimizer& optimizer) {
    model.params().zero_grad();
    BatchLossResult b = batch_loss(model, batch, cfg);
    const double loss_value = b.loss.item();
    if (!std::isfinite(loss_value)) {
        std::ostringstream os;
        os << "non-finite loss " << loss_value << " on batch:";
        for (const auto& p : batch)
            os << " (" << p.video->video_id << "," << p.query->query_id << ")";
        throw NumericError(os.str());
    }
    backward(b.loss);
    optimizer.step(model.params());
    return {loss_value, b.active_hinges};
}

}  // namespace logan
