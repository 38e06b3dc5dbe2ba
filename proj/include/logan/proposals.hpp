#pragma once

#include <cstdint>
#include <vector>

#include "logan/types.hpp"

namespace logan {

SegmentSpan make_span(std::int64_t begin_unit, std::int64_t end_unit, double seconds_per_unit);

// Candidate segments for one video. unit_spans: every contiguous unit range,
// ordered by (begin, end). fixed_windows: per size, back-to-back windows
// clipped at the video end. A video shorter than every window size yields a
// single clipped window and sets *clipped_short.
std::vector<SegmentSpan> enumerate_proposals(const ProposalScheme& scheme,
                                             std::int64_t video_units,
                                             bool* clipped_short = nullptr);

// Intersection-over-union on the second axis. Symmetric, 1 iff identical.
double temporal_iou(const SegmentSpan& a, const SegmentSpan& b);
double temporal_iou(const SegmentSpan& a, const TimeSpan& b);

// Descending score; ties by earlier start, then shorter span.
void sort_ranked(std::vector<ScoredSegment>& segments);

// One evaluated query: proposals already scored and ranked, plus truth.
struct QueryResult {
    std::vector<ScoredSegment> ranked;
    TimeSpan gt;
};

struct EvalReport {
    std::vector<int> ns{1, 5, 10};
    std::vector<double> thetas{0.3, 0.5, 0.7};
    // recall[theta_idx][n_idx]
    std::vector<std::vector<double>> recall;
    std::vector<std::vector<double>> upper_bound;
    double miou = 0.0;
    std::int64_t query_count = 0;
};

// Recall@N at IoU theta over ranked proposals, the oracle upper bound
// (best-IoU-first ranking) and mean rank-1 IoU.
EvalReport aggregate_eval(const std::vector<QueryResult>& results,
                          const std::vector<int>& ns, const std::vector<double>& thetas);

// Expected Recall@1 when the top-ranked proposal is drawn uniformly:
// mean over queries of (#qualifying proposals / #proposals).
double random_rank1_recall(const std::vector<QueryResult>& results, double theta);

}  // namespace logan
