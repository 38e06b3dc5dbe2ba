#include "logan/eval.hpp"

#include <thread>

#include "logan/errors.hpp"
#include "logan/loss.hpp"

namespace logan {

std::vector<ScoredSegment> rank_segments(MomentModel& model, const VideoFeatures& video,
                                         const QueryTokens& query,
                                         const ProposalScheme& scheme) {
    auto spans = enumerate_proposals(scheme, video.frame_count);
    auto fwd = model.forward_pair(video, query);

    std::vector<ScoredSegment> scored;
    scored.reserve(spans.size());
    for (const auto& span : spans) {
        const double score =
            lse_span(fwd.framewise_cosine, span.begin_unit, span.end_unit,
                     model.config().lambda)
                .item();
        if (!std::isfinite(score))
            throw NumericError("non-finite segment score for query " + query.query_id);
        scored.push_back({span, score});
    }
    sort_ranked(scored);
    return scored;
}

EvalOutcome evaluate_dataset(MomentModel& model, const Dataset& dataset,
                             const EvalOptions& options) {
    const auto& queries = dataset.manifest.queries;
    for (const auto& q : queries)
        if (!q.gt_span)
            throw DataError("query " + q.query_id + " has no gt_span; evaluation needs one");

    EvalOutcome outcome;
    outcome.per_query.resize(queries.size());

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t qi = begin; qi < end; ++qi) {
            const auto& q = queries[qi];
            const VideoFeatures& video = dataset.video_of(q);
            QueryResult result;
            result.gt = *q.gt_span;
            if (options.oracle) {
                auto spans = enumerate_proposals(dataset.manifest.scheme, video.frame_count);
                for (const auto& span : spans)
                    result.ranked.push_back({span, temporal_iou(span, result.gt)});
                sort_ranked(result.ranked);
            } else {
                result.ranked = rank_segments(model, video, q, dataset.manifest.scheme);
            }
            outcome.per_query[qi] = std::move(result);
        }
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1 || queries.size() < 2) {
        run_range(0, queries.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (queries.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::size_t begin = static_cast<std::size_t>(t) * chunk;
            if (begin >= queries.size()) break;
            const std::size_t end = std::min(queries.size(), begin + chunk);
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    outcome.report = aggregate_eval(outcome.per_query, options.ns, options.thetas);
    return outcome;
}

}  // namespace logan
