#include "logan/proposals.hpp"

#include <algorithm>

#include "logan/errors.hpp"

namespace logan {

SegmentSpan make_span(std::int64_t begin_unit, std::int64_t end_unit, double seconds_per_unit) {
    if (begin_unit < 0 || begin_unit >= end_unit)
        throw ContractError("make_span: need 0 <= begin < end, got [" +
                            std::to_string(begin_unit) + "," + std::to_string(end_unit) + ")");
    return {begin_unit, end_unit, static_cast<double>(begin_unit) * seconds_per_unit,
            static_cast<double>(end_unit) * seconds_per_unit};
}

std::vector<SegmentSpan> enumerate_proposals(const ProposalScheme& scheme,
                                             std::int64_t video_units, bool* clipped_short) {
    if (video_units < 1)
        throw ContractError("enumerate_proposals: video has no units");
    if (clipped_short) *clipped_short = false;

    std::vector<SegmentSpan> out;
    if (scheme.kind == ProposalKind::unit_spans) {
        for (std::int64_t begin = 0; begin < video_units; ++begin)
            for (std::int64_t end = begin + 1; end <= video_units; ++end)
                out.push_back(make_span(begin, end, scheme.seconds_per_unit));
        return out;
    }

    if (scheme.window_sizes.empty())
        throw ContractError("enumerate_proposals: fixed_windows scheme has no sizes");
    bool any_fits = false;
    for (std::int64_t size : scheme.window_sizes) {
        if (size < 1) throw ContractError("enumerate_proposals: window size must be >= 1");
        if (size <= video_units) any_fits = true;
        for (std::int64_t begin = 0; begin < video_units; begin += size)
            out.push_back(make_span(begin, std::min(begin + size, video_units),
                                    scheme.seconds_per_unit));
    }
    if (!any_fits) {
        // Every window overshoots; the scheme degenerates to one clipped
        // window per size, all identical. Collapse and flag.
        out.clear();
        out.push_back(make_span(0, video_units, scheme.seconds_per_unit));
        if (clipped_short) *clipped_short = true;
    }
    return out;
}

namespace {

double iou_seconds(double a0, double a1, double b0, double b1) {
    const double inter = std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
    const double uni = std::max(a1, b1) - std::min(a0, b0);
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace

double temporal_iou(const SegmentSpan& a, const SegmentSpan& b) {
    return iou_seconds(a.begin_sec, a.end_sec, b.begin_sec, b.end_sec);
}

double temporal_iou(const SegmentSpan& a, const TimeSpan& b) {
    return iou_seconds(a.begin_sec, a.end_sec, b.start_sec, b.end_sec);
}

void sort_ranked(std::vector<ScoredSegment>& segments) {
    std::stable_sort(segments.begin(), segments.end(),
                     [](const ScoredSegment& a, const ScoredSegment& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.span.begin_unit != b.span.begin_unit)
                             return a.span.begin_unit < b.span.begin_unit;
                         return a.span.end_unit - a.span.begin_unit <
                                b.span.end_unit - b.span.begin_unit;
                     });
}

EvalReport aggregate_eval(const std::vector<QueryResult>& results,
                          const std::vector<int>& ns, const std::vector<double>& thetas) {
    EvalReport report;
    report.ns = ns;
    report.thetas = thetas;
    report.query_count = static_cast<std::int64_t>(results.size());
    report.recall.assign(thetas.size(), std::vector<double>(ns.size(), 0.0));
    report.upper_bound.assign(thetas.size(), std::vector<double>(ns.size(), 0.0));
    if (results.empty()) return report;

    double iou_sum = 0.0;
    for (const auto& q : results) {
        if (q.ranked.empty()) throw ContractError("aggregate_eval: query with no proposals");
        std::vector<double> ious(q.ranked.size());
        double best_iou = 0.0;
        for (std::size_t i = 0; i < q.ranked.size(); ++i) {
            ious[i] = temporal_iou(q.ranked[i].span, q.gt);
            best_iou = std::max(best_iou, ious[i]);
        }
        iou_sum += ious[0];
        for (std::size_t t = 0; t < thetas.size(); ++t) {
            for (std::size_t n = 0; n < ns.size(); ++n) {
                const std::size_t depth =
                    std::min<std::size_t>(static_cast<std::size_t>(ns[n]), ious.size());
                bool hit = false;
                for (std::size_t i = 0; i < depth && !hit; ++i) hit = ious[i] >= thetas[t];
                if (hit) report.recall[t][n] += 1.0;
                // The oracle ranks by true IoU, so its top-N always contains
                // the best proposal.
                if (best_iou >= thetas[t]) report.upper_bound[t][n] += 1.0;
            }
        }
    }

    const double count = static_cast<double>(results.size());
    for (std::size_t t = 0; t < thetas.size(); ++t)
        for (std::size_t n = 0; n < ns.size(); ++n) {
            report.recall[t][n] /= count;
            report.upper_bound[t][n] /= count;
        }
    report.miou = iou_sum / count;
    return report;
}

double random_rank1_recall(const std::vector<QueryResult>& results, double theta) {
    if (results.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& q : results) {
        std::size_t qualifying = 0;
        for (const auto& s : q.ranked)
            if (temporal_iou(s.span, q.gt) >= theta) ++qualifying;
        acc += static_cast<double>(qualifying) / static_cast<double>(q.ranked.size());
    }
    return acc / static_cast<double>(results.size());
}

}  // namespace logan
