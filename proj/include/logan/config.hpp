#pragma once

#include <cstdint>
#include <string>

#include "logan/model.hpp"
#include "logan/types.hpp"

namespace logan {

// Declarative run configuration shared by every CLI subcommand. JSON file
// plus per-flag overrides; unknown keys are rejected.
struct RunConfig {
    // model dims
    std::int64_t embed_dim = 300;
    std::int64_t hidden = 512;
    std::int64_t pe_dim = 64;
    std::int64_t feature_dim = 4096;

    std::string pe_mode = "pe";  // pe | tef | none
    double pe_scale = 10000.0;
    int iterations = 3;
    bool tied_iterations = true;  // graph projections shared across rounds
    double lambda = 6.0;
    double margin = 0.7;
    int top_k = 15;
    double lr = 1e-5;
    int batch_videos = 32;
    int epochs = 10;
    std::uint64_t param_seed = 1;
    std::uint64_t shuffle_seed = 1;
    int threads = 1;

    struct Paths {
        std::string manifest;       // train split
        std::string manifest_eval;  // val/test split; falls back to manifest
        std::string vocab;
        std::string checkpoint;
        std::string report;
        std::string log;
        std::string attention;
    } paths;

    SyntheticSpec synth;
    std::string synth_dir = "data/synthetic";
};

RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& cfg);
std::string config_json(const RunConfig& cfg);  // canonical dump, hashed into reports
std::string config_hash(const RunConfig& cfg);

PositionMode position_mode_of(const RunConfig& cfg);
ModelConfig model_config_of(const RunConfig& cfg, std::int64_t vocab_size);

}  // namespace logan
