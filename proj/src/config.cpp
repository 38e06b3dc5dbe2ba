#include "logan/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "logan/data.hpp"
#include "logan/errors.hpp"

using ordered_json = nlohmann::ordered_json;

namespace logan {

namespace {

void reject_unknown(const ordered_json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown config key '" + key + "' in " + where);
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }

    RunConfig cfg;
    reject_unknown(j,
                   {"dims", "pe_mode", "pe_scale", "iterations", "tied_iterations", "lambda",
                    "margin", "top_k", "lr", "batch_videos", "epochs", "seeds", "threads",
                    "paths", "synth"},
                   "config root");

    if (j.contains("dims")) {
        const auto& d = j["dims"];
        reject_unknown(d, {"embed", "hidden", "pe", "feature"}, "dims");
        cfg.embed_dim = d.value("embed", cfg.embed_dim);
        cfg.hidden = d.value("hidden", cfg.hidden);
        cfg.pe_dim = d.value("pe", cfg.pe_dim);
        cfg.feature_dim = d.value("feature", cfg.feature_dim);
    }
    cfg.pe_mode = j.value("pe_mode", cfg.pe_mode);
    cfg.pe_scale = j.value("pe_scale", cfg.pe_scale);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.tied_iterations = j.value("tied_iterations", cfg.tied_iterations);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.margin = j.value("margin", cfg.margin);
    cfg.top_k = j.value("top_k", cfg.top_k);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.batch_videos = j.value("batch_videos", cfg.batch_videos);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.threads = j.value("threads", cfg.threads);

    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        reject_unknown(s, {"params", "shuffle"}, "seeds");
        cfg.param_seed = s.value("params", cfg.param_seed);
        cfg.shuffle_seed = s.value("shuffle", cfg.shuffle_seed);
    }
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        reject_unknown(p,
                       {"manifest", "manifest_eval", "vocab", "checkpoint", "report", "log",
                        "attention"},
                       "paths");
        cfg.paths.manifest = p.value("manifest", "");
        cfg.paths.manifest_eval = p.value("manifest_eval", "");
        cfg.paths.vocab = p.value("vocab", "");
        cfg.paths.checkpoint = p.value("checkpoint", "");
        cfg.paths.report = p.value("report", "");
        cfg.paths.log = p.value("log", "");
        cfg.paths.attention = p.value("attention", "");
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        reject_unknown(s,
                       {"dir", "concepts", "vocab_size", "feature_dim", "frames_per_video",
                        "words_per_query", "videos_train", "videos_val", "videos_test",
                        "noise_sigma", "seed"},
                       "synth");
        cfg.synth_dir = s.value("dir", cfg.synth_dir);
        cfg.synth.concept_count = s.value("concepts", cfg.synth.concept_count);
        cfg.synth.vocab_size = s.value("vocab_size", cfg.synth.vocab_size);
        cfg.synth.feature_dim = s.value("feature_dim", cfg.synth.feature_dim);
        cfg.synth.frames_per_video = s.value("frames_per_video", cfg.synth.frames_per_video);
        cfg.synth.words_per_query = s.value("words_per_query", cfg.synth.words_per_query);
        cfg.synth.videos_train = s.value("videos_train", cfg.synth.videos_train);
        cfg.synth.videos_val = s.value("videos_val", cfg.synth.videos_val);
        cfg.synth.videos_test = s.value("videos_test", cfg.synth.videos_test);
        cfg.synth.noise_sigma = s.value("noise_sigma", cfg.synth.noise_sigma);
        cfg.synth.seed = s.value("seed", cfg.synth.seed);
    }
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    if (cfg.pe_mode != "pe" && cfg.pe_mode != "tef" && cfg.pe_mode != "none")
        throw ConfigError("pe_mode must be one of pe|tef|none, got '" + cfg.pe_mode + "'");
    if (!cfg.tied_iterations)
        throw ConfigError("tied_iterations=false is not supported; graph projections are "
                          "shared across rounds");
    if (cfg.iterations < 0) throw ConfigError("iterations must be >= 0");
    if (cfg.lambda <= 0.0) throw ConfigError("lambda must be positive");
    if (cfg.top_k < 1) throw ConfigError("top_k must be >= 1");
    if (cfg.batch_videos < 2) throw ConfigError("batch_videos must be >= 2");
    if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (cfg.hidden < 1 || cfg.embed_dim < 1 || cfg.feature_dim < 1)
        throw ConfigError("model dims must be positive");
    if (cfg.pe_mode == "pe") {
        if (cfg.pe_dim < 2 || cfg.pe_dim % 2 != 0)
            throw ConfigError("pe dim must be a positive even number");
        if (cfg.pe_dim >= cfg.hidden)
            throw ConfigError("pe dim must leave room for the visual FC output");
        if (cfg.pe_scale <= 0.0) throw ConfigError("pe_scale must be positive");
    }
    if (cfg.pe_mode == "tef" && cfg.hidden <= 2)
        throw ConfigError("hidden too small for the endpoint tail");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

std::string config_json(const RunConfig& cfg) {
    ordered_json j;
    j["dims"] = {{"embed", cfg.embed_dim},
                 {"hidden", cfg.hidden},
                 {"pe", cfg.pe_dim},
                 {"feature", cfg.feature_dim}};
    j["pe_mode"] = cfg.pe_mode;
    j["pe_scale"] = cfg.pe_scale;
    j["iterations"] = cfg.iterations;
    j["tied_iterations"] = cfg.tied_iterations;
    j["lambda"] = cfg.lambda;
    j["margin"] = cfg.margin;
    j["top_k"] = cfg.top_k;
    j["lr"] = cfg.lr;
    j["batch_videos"] = cfg.batch_videos;
    j["epochs"] = cfg.epochs;
    j["seeds"] = {{"params", cfg.param_seed}, {"shuffle", cfg.shuffle_seed}};
    j["threads"] = cfg.threads;
    j["paths"] = {{"manifest", cfg.paths.manifest},
                  {"manifest_eval", cfg.paths.manifest_eval},
                  {"vocab", cfg.paths.vocab},
                  {"checkpoint", cfg.paths.checkpoint},
                  {"report", cfg.paths.report},
                  {"log", cfg.paths.log},
                  {"attention", cfg.paths.attention}};
    j["synth"] = {{"dir", cfg.synth_dir},
                  {"concepts", cfg.synth.concept_count},
                  {"vocab_size", cfg.synth.vocab_size},
                  {"feature_dim", cfg.synth.feature_dim},
                  {"frames_per_video", cfg.synth.frames_per_video},
                  {"words_per_query", cfg.synth.words_per_query},
                  {"videos_train", cfg.synth.videos_train},
                  {"videos_val", cfg.synth.videos_val},
                  {"videos_test", cfg.synth.videos_test},
                  {"noise_sigma", cfg.synth.noise_sigma},
                  {"seed", cfg.synth.seed}};
    return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
    const std::string dump = config_json(cfg);
    return fnv1a_hex(dump.data(), dump.size());
}

PositionMode position_mode_of(const RunConfig& cfg) {
    if (cfg.pe_mode == "pe") return PositionMode::sinusoidal;
    if (cfg.pe_mode == "tef") return PositionMode::endpoint;
    return PositionMode::none;
}

ModelConfig model_config_of(const RunConfig& cfg, std::int64_t vocab_size) {
    ModelConfig mc;
    mc.dims.vocab = vocab_size;
    mc.dims.embed_dim = cfg.embed_dim;
    mc.dims.hidden = cfg.hidden;
    mc.dims.pe_dim = cfg.pe_dim;
    mc.dims.feature_dim = cfg.feature_dim;
    mc.position_mode = position_mode_of(cfg);
    mc.pe_scale = cfg.pe_scale;
    mc.iterations = cfg.iterations;
    mc.lambda = cfg.lambda;
    return mc;
}

}  // namespace logan
