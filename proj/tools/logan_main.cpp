// Command-line front end: synth / train / eval / gradcheck / attention over a
// JSON config with per-flag overrides. Exit codes: 0 ok, 1 check failure,
// 2 config/data error, 3 numeric abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "logan/config.hpp"
#include "logan/data.hpp"
#include "logan/errors.hpp"
#include "logan/eval.hpp"
#include "logan/gradcheck.hpp"
#include "logan/model.hpp"
#include "logan/train.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace logan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericAbort = 3;

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::int64_t> embed_dim, hidden, pe_dim, feature_dim;
    std::optional<std::string> pe_mode;
    std::optional<double> pe_scale, lambda, margin, lr;
    std::optional<int> iterations, top_k, batch_videos, epochs, threads;
    std::optional<std::uint64_t> param_seed, shuffle_seed;
    std::optional<std::string> manifest, manifest_eval, vocab, checkpoint, report, log,
        attention_out, synth_dir;
    std::optional<std::uint64_t> synth_seed;
    bool fbw_only = false;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--embed-dim", o.embed_dim, "word embedding width");
    cmd->add_option("--hidden", o.hidden, "hidden width shared by words and frames");
    cmd->add_option("--pe-dim", o.pe_dim, "sinusoidal tail width");
    cmd->add_option("--feature-dim", o.feature_dim, "raw frame feature width");
    cmd->add_option("--pe-mode", o.pe_mode, "position tail: pe|tef|none");
    cmd->add_option("--pe-scale", o.pe_scale, "sinusoidal frequency base");
    cmd->add_option("--iterations", o.iterations, "message-passing rounds");
    cmd->add_flag("--fbw-only", o.fbw_only, "interaction-only ablation (iterations=0)");
    cmd->add_option("--lambda", o.lambda, "LSE sharpness");
    cmd->add_option("--margin", o.margin, "triplet margin");
    cmd->add_option("--top-k", o.top_k, "hard negatives per anchor per direction");
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--batch-videos", o.batch_videos, "videos per batch");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--threads", o.threads, "evaluation threads");
    cmd->add_option("--seed-params", o.param_seed, "parameter init seed");
    cmd->add_option("--seed-shuffle", o.shuffle_seed, "batch shuffle seed");
    cmd->add_option("--manifest", o.manifest, "train manifest path");
    cmd->add_option("--manifest-eval", o.manifest_eval, "eval manifest path");
    cmd->add_option("--vocab", o.vocab, "vocabulary path");
    cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path");
    cmd->add_option("--report", o.report, "eval report output path");
    cmd->add_option("--log", o.log, "training log output path");
    cmd->add_option("--attention-out", o.attention_out, "attention dump output path");
    cmd->add_option("--synth-dir", o.synth_dir, "synthetic dataset directory");
    cmd->add_option("--synth-seed", o.synth_seed, "synthetic dataset seed");
}

RunConfig resolve_config(const Overrides& o) {
    RunConfig cfg;
    if (o.config_path) cfg = load_config(*o.config_path);
    if (o.embed_dim) cfg.embed_dim = *o.embed_dim;
    if (o.hidden) cfg.hidden = *o.hidden;
    if (o.pe_dim) cfg.pe_dim = *o.pe_dim;
    if (o.feature_dim) cfg.feature_dim = *o.feature_dim;
    if (o.pe_mode) cfg.pe_mode = *o.pe_mode;
    if (o.pe_scale) cfg.pe_scale = *o.pe_scale;
    if (o.iterations) cfg.iterations = *o.iterations;
    if (o.fbw_only) cfg.iterations = 0;
    if (o.lambda) cfg.lambda = *o.lambda;
    if (o.margin) cfg.margin = *o.margin;
    if (o.top_k) cfg.top_k = *o.top_k;
    if (o.lr) cfg.lr = *o.lr;
    if (o.batch_videos) cfg.batch_videos = *o.batch_videos;
    if (o.epochs) cfg.epochs = *o.epochs;
    if (o.threads) cfg.threads = *o.threads;
    if (o.param_seed) cfg.param_seed = *o.param_seed;
    if (o.shuffle_seed) cfg.shuffle_seed = *o.shuffle_seed;
    if (o.manifest) cfg.paths.manifest = *o.manifest;
    if (o.manifest_eval) cfg.paths.manifest_eval = *o.manifest_eval;
    if (o.vocab) cfg.paths.vocab = *o.vocab;
    if (o.checkpoint) cfg.paths.checkpoint = *o.checkpoint;
    if (o.report) cfg.paths.report = *o.report;
    if (o.log) cfg.paths.log = *o.log;
    if (o.attention_out) cfg.paths.attention = *o.attention_out;
    if (o.synth_dir) cfg.synth_dir = *o.synth_dir;
    if (o.synth_seed) cfg.synth.seed = *o.synth_seed;
    validate_config(cfg);
    return cfg;
}

void require_path(const std::string& value, const char* what) {
    if (value.empty())
        throw ConfigError(std::string("missing required path: ") + what);
}

// --- synth -------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, bool verify) {
    generate_synthetic(cfg.synth, cfg.synth_dir);
    std::cout << "synthetic dataset written to " << cfg.synth_dir << "\n";
    if (verify) {
        const PlantedCheck check = verify_planted_alignment(cfg.synth_dir, "test");
        std::cout << "planted-alignment check: " << check.recovered << "/" << check.queries
                  << " spans uniquely recovered, oracle R@1@0.5 = " << check.rank1_recall_at_half
                  << "\n";
        if (check.rank1_recall_at_half < 0.99) {
            std::cerr << "verify failed: nearest-concept oracle below 0.99\n";
            return kExitCheckFailure;
        }
    }
    return kExitOk;
}

// --- train -------------------------------------------------------------------

int cmd_train(const RunConfig& cfg, bool resume) {
    require_path(cfg.paths.manifest, "paths.manifest");
    require_path(cfg.paths.vocab, "paths.vocab");
    require_path(cfg.paths.checkpoint, "paths.checkpoint");

    const Vocabulary vocab = load_vocabulary(cfg.paths.vocab);
    const Dataset dataset = load_dataset(cfg.paths.manifest, vocab);

    MomentModel model(model_config_of(cfg, vocab.size()), cfg.param_seed);

    TrainOptions options;
    options.loss.lambda = cfg.lambda;
    options.loss.margin = cfg.margin;
    options.loss.top_k_negatives = cfg.top_k;
    options.loss.batch_videos = cfg.batch_videos;
    options.adam.lr = cfg.lr;
    options.epochs = cfg.epochs;
    options.shuffle_seed = cfg.shuffle_seed;
    options.checkpoint_path = cfg.paths.checkpoint;
    options.log_path = cfg.paths.log;
    options.resume = resume;

    const TrainSummary summary = train_model(model, dataset, options);
    std::cout << "trained " << summary.epochs_run << " epochs, " << summary.steps
              << " steps; first-epoch loss " << summary.first_epoch_loss
              << ", final-epoch loss " << summary.final_epoch_loss << "\n"
              << "checkpoint: " << cfg.paths.checkpoint << "\n";
    return kExitOk;
}

// --- eval ---------------------------------------------------------------------

ordered_json report_to_json(const EvalReport& report, const Dataset& dataset,
                            const RunConfig& cfg, bool oracle,
                            const std::string& checkpoint_hash) {
    ordered_json j;
    j["dataset"] = dataset.manifest.name;
    j["split"] = dataset.manifest.split;
    j["query_count"] = report.query_count;
    j["ns"] = report.ns;
    j["thetas"] = report.thetas;
    auto grid = [&](const std::vector<std::vector<double>>& values) {
        ordered_json out;
        for (std::size_t t = 0; t < report.thetas.size(); ++t) {
            char key[16];
            std::snprintf(key, sizeof(key), "%.1f", report.thetas[t]);
            ordered_json row;
            for (std::size_t n = 0; n < report.ns.size(); ++n)
                row[std::to_string(report.ns[n])] = values[t][n];
            out[key] = std::move(row);
        }
        return out;
    };
    j["recall"] = grid(report.recall);
    j["upper_bound"] = grid(report.upper_bound);
    j["miou"] = report.miou;
    j["oracle"] = oracle;
    j["config_hash"] = config_hash(cfg);
    j["checkpoint_hash"] = checkpoint_hash;
    return j;
}

void print_grid(const EvalReport& report) {
    std::printf("%-12s", "");
    for (double theta : report.thetas)
        for (int n : report.ns) std::printf("R@%d/%.1f  ", n, theta);
    std::printf("mIoU\n");
    std::printf("%-12s", "model");
    for (std::size_t t = 0; t < report.thetas.size(); ++t)
        for (std::size_t n = 0; n < report.ns.size(); ++n)
            std::printf("%8.4f ", report.recall[t][n]);
    std::printf("%7.4f\n", report.miou);
    std::printf("%-12s", "upper bound");
    for (std::size_t t = 0; t < report.thetas.size(); ++t)
        for (std::size_t n = 0; n < report.ns.size(); ++n)
            std::printf("%8.4f ", report.upper_bound[t][n]);
    std::printf("\n");
}

int cmd_eval(const RunConfig& cfg, bool oracle) {
    require_path(cfg.paths.vocab, "paths.vocab");
    const std::string manifest_path =
        cfg.paths.manifest_eval.empty() ? cfg.paths.manifest : cfg.paths.manifest_eval;
    require_path(manifest_path, "paths.manifest_eval");

    const Vocabulary vocab = load_vocabulary(cfg.paths.vocab);
    const Dataset dataset = load_dataset(manifest_path, vocab);

    MomentModel model(model_config_of(cfg, vocab.size()), cfg.param_seed);
    std::string checkpoint_hash = "none";
    if (!oracle) {
        require_path(cfg.paths.checkpoint, "paths.checkpoint");
        if (!fs::exists(cfg.paths.checkpoint))
            throw ConfigError("checkpoint does not exist: " + cfg.paths.checkpoint);
        load_checkpoint(cfg.paths.checkpoint, model.params());
        checkpoint_hash = file_hash_hex(cfg.paths.checkpoint);
    }

    EvalOptions options;
    options.threads = cfg.threads;
    options.oracle = oracle;
    const EvalOutcome outcome = evaluate_dataset(model, dataset, options);

    print_grid(outcome.report);
    if (!cfg.paths.report.empty()) {
        std::ofstream out(cfg.paths.report, std::ios::trunc);
        if (!out) throw FormatError("cannot write report: " + cfg.paths.report);
        out << report_to_json(outcome.report, dataset, cfg, oracle, checkpoint_hash).dump(2)
            << '\n';
        std::cout << "report: " << cfg.paths.report << "\n";
    }
    return kExitOk;
}

// --- gradcheck -------------------------------------------------------------------

// Test-only op with a deliberately wrong (sign-flipped) backward; lets the
// checker prove it can catch a broken gradient.
Tensor faulty_sum(const Tensor& t) {
    auto node = std::make_shared<TensorNode>();
    node->shape = {1};
    node->values = {0.0};
    for (double v : t.values()) node->values[0] += v;
    node->op = "faulty_sum";
    node->requires_grad = t.requires_grad();
    node->inputs = {t.ptr()};
    node->backprop = [](TensorNode& self) {
        double* g = self.inputs[0]->grad_data();
        for (std::size_t i = 0; i < self.inputs[0]->values.size(); ++i)
            g[i] -= self.grad[0];  // wrong sign on purpose
    };
    return Tensor(node);
}

int cmd_gradcheck(const RunConfig& cfg, double h, double tol, bool inject_fault) {
    // Fixed 2-video fixture, 4 frames x 3 words, double precision throughout.
    const std::int64_t fixture_vocab = 6;
    MomentModel model(model_config_of(cfg, fixture_vocab), cfg.param_seed);

    Rng rng(cfg.param_seed ^ 0x5eedf00dULL);
    auto make_video = [&](const std::string& id) {
        VideoFeatures v;
        v.video_id = id;
        v.frame_count = 4;
        v.feature_dim = cfg.feature_dim;
        v.features.resize(static_cast<std::size_t>(4 * cfg.feature_dim));
        for (auto& x : v.features) x = rng.normal();
        v.frame_positions = {0, 1, 2, 3};
        return v;
    };
    auto make_query = [&](const std::string& id, const std::string& vid) {
        QueryTokens q;
        q.query_id = id;
        q.video_id = vid;
        for (int i = 0; i < 3; ++i)
            q.tokens.push_back(
                static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(fixture_vocab))));
        return q;
    };
    const VideoFeatures va = make_video("gc_a"), vb = make_video("gc_b");
    const QueryTokens qa = make_query("gc_qa", "gc_a"), qb = make_query("gc_qb", "gc_b");
    const std::vector<TrainPair> pairs{{&va, &qa}, {&vb, &qb}};

    LossConfig loss_cfg;
    loss_cfg.lambda = cfg.lambda;
    loss_cfg.margin = cfg.margin;
    loss_cfg.top_k_negatives = 1;
    loss_cfg.batch_videos = 2;

    auto loss_fn = [&](ParamStore&) {
        Tensor loss = batch_loss(model, pairs, loss_cfg).loss;
        if (inject_fault)
            loss = add(loss, scale(faulty_sum(model.params().get("embed.table")), 0.01));
        return loss;
    };

    const GradCheckReport report = finite_diff_check(loss_fn, model.params(), h, tol);
    std::printf("%-20s %-12s %s\n", "parameter", "max rel err", "status");
    for (const auto& e : report.entries)
        std::printf("%-20s %-12.3e %s\n", e.name.c_str(), e.max_rel_err,
                    e.pass ? "ok" : "FAIL");
    if (!report.all_pass) {
        std::cerr << "gradient check failed\n";
        return kExitCheckFailure;
    }
    std::cout << "all gradients match finite differences within " << tol << "\n";
    return kExitOk;
}

// --- attention ---------------------------------------------------------------------

int cmd_attention(const RunConfig& cfg, const std::string& query_id) {
    require_path(cfg.paths.vocab, "paths.vocab");
    const std::string manifest_path =
        cfg.paths.manifest_eval.empty() ? cfg.paths.manifest : cfg.paths.manifest_eval;
    require_path(manifest_path, "paths.manifest");
    require_path(cfg.paths.attention, "paths.attention");

    const Vocabulary vocab = load_vocabulary(cfg.paths.vocab);
    const Dataset dataset = load_dataset(manifest_path, vocab);

    const QueryTokens* query = nullptr;
    if (query_id.empty()) {
        if (dataset.manifest.queries.empty()) throw DataError("dataset has no queries");
        query = &dataset.manifest.queries.front();
    } else {
        for (const auto& q : dataset.manifest.queries)
            if (q.query_id == query_id) query = &q;
        if (!query) throw DataError("query not found: " + query_id);
    }

    MomentModel model(model_config_of(cfg, vocab.size()), cfg.param_seed);
    if (!cfg.paths.checkpoint.empty() && fs::exists(cfg.paths.checkpoint))
        load_checkpoint(cfg.paths.checkpoint, model.params());

    const VideoFeatures& video = dataset.video_of(*query);
    auto fwd = model.forward_pair(video, *query, /*want_trace=*/true);

    auto block = [](std::int64_t rows, std::int64_t cols, std::span<const double> values) {
        ordered_json b;
        b["shape"] = {rows, cols};
        b["values"] = std::vector<double>(values.begin(), values.end());
        return b;
    };
    const std::int64_t n = video.frame_count;
    const std::int64_t q_len = static_cast<std::int64_t>(query->tokens.size());

    ordered_json j;
    j["video_id"] = video.video_id;
    j["query_id"] = query->query_id;
    ordered_json initial;
    initial["similarity"] = block(n, q_len, fwd.fbw.similarity.values());
    initial["word_attention"] = block(n, q_len, fwd.fbw.word_attention.values());
    initial["frame_attention"] = block(n, q_len, fwd.fbw.frame_attention.values());
    j["initial"] = std::move(initial);
    ordered_json iters;
    for (std::size_t t = 0; t < fwd.trace.iterations.size(); ++t) {
        const auto& it = fwd.trace.iterations[t];
        ordered_json b;
        b["similarity"] = block(n, q_len, {it.similarity});
        b["word_attention"] = block(n, q_len, {it.word_attention});
        b["frames"] = block(n, fwd.trace.hidden, {it.frames});
        iters["iter_" + std::to_string(t)] = std::move(b);
    }
    j["iterations"] = std::move(iters);

    std::ofstream out(cfg.paths.attention, std::ios::trunc);
    if (!out) throw FormatError("cannot write attention dump: " + cfg.paths.attention);
    out << j.dump(2) << '\n';
    std::cout << "attention dump: " << cfg.paths.attention << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly-supervised video moment retrieval"};
    app.require_subcommand(1);

    Overrides o;
    bool verify = false, resume = false, oracle = false, inject_fault = false;
    double gc_h = 1e-5, gc_tol = 1e-4;
    std::string query_id;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common_flags(synth, o);
    synth->add_flag("--verify", verify, "run the nearest-concept recovery oracle");

    CLI::App* train = app.add_subcommand("train", "train and write checkpoints");
    add_common_flags(train, o);
    train->add_flag("--resume", resume, "continue from the checkpoint if present");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common_flags(eval, o);
    eval->add_flag("--oracle", oracle, "rank proposals by true IoU instead of the model");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    add_common_flags(gradcheck, o);
    gradcheck->add_option("--fd-step", gc_h, "central-difference step");
    gradcheck->add_option("--fd-tol", gc_tol, "max relative error");
    gradcheck->add_flag("--inject-fault", inject_fault)->group("");

    CLI::App* attention = app.add_subcommand("attention", "dump attention maps as JSON");
    add_common_flags(attention, o);
    attention->add_option("--query-id", query_id, "query to trace (default: first)");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = resolve_config(o);
        if (synth->parsed()) return cmd_synth(cfg, verify);
        if (train->parsed()) return cmd_train(cfg, resume);
        if (eval->parsed()) return cmd_eval(cfg, oracle);
        if (gradcheck->parsed()) return cmd_gradcheck(cfg, gc_h, gc_tol, inject_fault);
        if (attention->parsed()) return cmd_attention(cfg, query_id);
    } catch (const NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return kExitNumericAbort;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
