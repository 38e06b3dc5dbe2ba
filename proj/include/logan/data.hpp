#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "logan/types.hpp"

namespace logan {

// --- binary feature files ("LGFV": magic, version u32, N u32, D u32,
// row-major little-endian f32 payload) ---------------------------------------

void save_features(const std::string& path, const VideoFeatures& video);
VideoFeatures load_features(const std::string& path);

// --- vocabulary: one token per line, line number = token id -----------------

struct Vocabulary {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, std::int64_t> index;

    std::int64_t size() const { return static_cast<std::int64_t>(tokens.size()); }
    std::int64_t id_of(const std::string& token, const std::string& query_id) const;
};

Vocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const std::string& path, const std::vector<std::string>& tokens);

// --- dataset manifests (JSON, token strings resolved against the vocab) -----

DatasetManifest load_manifest(const std::string& path, const Vocabulary& vocab);
void save_manifest(const std::string& path, const DatasetManifest& manifest,
                   const Vocabulary& vocab);

// Manifest plus its feature matrices, ready for training/evaluation.
struct Dataset {
    DatasetManifest manifest;
    std::vector<VideoFeatures> videos;  // parallel to manifest.videos
    std::unordered_map<std::string, std::size_t> video_index;
    std::vector<std::vector<std::size_t>> queries_by_video;

    const VideoFeatures& video_of(const QueryTokens& query) const;
};

Dataset load_dataset(const std::string& manifest_path, const Vocabulary& vocab);

// --- synthetic planted-alignment corpus --------------------------------------

// Writes vocab.txt, concepts.lgfv, features/*.lgfv and one manifest per
// split ({train,val,test}.manifest.json) under out_dir. Each video carries a
// contiguous planted span whose per-frame concepts spell the query token
// sequence; off-span frames avoid the query's concepts so the alignment is
// decodable. Deterministic function of the spec.
void generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

struct PlantedCheck {
    std::int64_t queries = 0;
    std::int64_t recovered = 0;  // planted span recovered exactly and uniquely
    double rank1_recall_at_half = 0.0;  // oracle R@1 at IoU 0.5
};

// Nearest-concept decoding oracle over a generated split.
PlantedCheck verify_planted_alignment(const std::string& out_dir, const std::string& split);

// --- batching -----------------------------------------------------------------

struct BatchPair {
    std::size_t video_idx = 0;
    std::size_t query_idx = 0;
};

// Epoch-seeded shuffle; every batch holds distinct videos with one positive
// query each; the final short batch is dropped.
std::vector<std::vector<BatchPair>> epoch_batches(const Dataset& dataset, int batch_videos,
                                                  std::uint64_t seed, std::int64_t epoch);

// --- misc ----------------------------------------------------------------------

std::string fnv1a_hex(const void* data, std::size_t size);
std::string file_hash_hex(const std::string& path);

}  // namespace logan
