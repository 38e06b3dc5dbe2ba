#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace logan {

// Ground-truth moment in seconds, evaluation-only.
struct TimeSpan {
    double start_sec = 0.0;
    double end_sec = 0.0;
};

struct QueryTokens {
    std::string query_id;
    std::string video_id;
    std::vector<std::int64_t> tokens;
    std::string raw_text;
    std::optional<TimeSpan> gt_span;
};

struct VideoFeatures {
    std::string video_id;
    std::int64_t frame_count = 0;    // N
    std::int64_t feature_dim = 0;    // D_v
    std::vector<double> features;    // row-major N x D_v
    std::vector<std::int64_t> frame_positions;  // 0..N-1
    double seconds_per_unit = 1.0;

    const double* row(std::int64_t i) const { return features.data() + i * feature_dim; }
};

enum class ProposalKind {
    unit_spans,     // every contiguous unit range, u(u+1)/2 proposals
    fixed_windows,  // non-overlapping windows per size, clipped at video end
};

struct ProposalScheme {
    ProposalKind kind = ProposalKind::unit_spans;
    std::int64_t unit_count = 6;
    std::vector<std::int64_t> window_sizes;
    double seconds_per_unit = 1.0;
};

// Candidate segment, [begin,end) in unit indices plus derived seconds.
struct SegmentSpan {
    std::int64_t begin_unit = 0;
    std::int64_t end_unit = 0;
    double begin_sec = 0.0;
    double end_sec = 0.0;
};

struct ScoredSegment {
    SegmentSpan span;
    double score = 0.0;
};

struct ManifestVideo {
    std::string video_id;
    std::string feature_path;
    std::int64_t unit_count = 0;
};

struct DatasetManifest {
    std::string name;
    std::string split;  // train | val | test
    ProposalScheme scheme;
    std::vector<ManifestVideo> videos;
    std::vector<QueryTokens> queries;
};

struct SyntheticSpec {
    std::int64_t concept_count = 8;
    std::int64_t vocab_size = 8;
    std::int64_t feature_dim = 32;
    std::int64_t frames_per_video = 12;
    std::int64_t words_per_query = 2;
    std::int64_t videos_train = 200;
    std::int64_t videos_val = 50;
    std::int64_t videos_test = 50;
    double noise_sigma = 0.1;
    std::uint64_t seed = 7;
};

}  // namespace logan
