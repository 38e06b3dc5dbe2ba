#pragma once

#include <vector>

#include "logan/data.hpp"
#include "logan/model.hpp"
#include "logan/proposals.hpp"

namespace logan {

// Scores every proposal of the query's video with the pooled segment
// similarity and returns them ranked (score desc, then earlier start, then
// shorter).
std::vector<ScoredSegment> rank_segments(MomentModel& model, const VideoFeatures& video,
                                         const QueryTokens& query,
                                         const ProposalScheme& scheme);

struct EvalOptions {
    std::vector<int> ns{1, 5, 10};
    std::vector<double> thetas{0.3, 0.5, 0.7};
    int threads = 1;
    bool oracle = false;  // rank by true IoU instead of the model
};

struct EvalOutcome {
    EvalReport report;
    std::vector<QueryResult> per_query;
};

// Per-query ranking + the Recall/mIoU/upper-bound grid. Every query must
// carry a ground-truth span. Queries are independent, so `threads` splits
// them; aggregation is order-independent.
EvalOutcome evaluate_dataset(MomentModel& model, const Dataset& dataset,
                             const EvalOptions& options);

}  // namespace logan
