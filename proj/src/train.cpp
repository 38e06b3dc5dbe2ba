#include "logan/train.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "logan/errors.hpp"

namespace logan {

namespace {

struct TrainerMeta {
    std::int64_t next_epoch = 0;
    std::int64_t global_step = 0;
};

void save_training_checkpoint(const std::string& path, const ParamStore& params,
                              const AdamOptimizer& optimizer, const TrainerMeta& meta) {
    std::vector<CheckpointEntry> entries;
    for (const auto& [name, t] : params.entries())
        entries.push_back({name, t.shape(),
                           std::vector<double>(t.values().begin(), t.values().end())});
    optimizer.append_state(entries);
    entries.push_back({"opt.meta", {2},
                       {static_cast<double>(meta.next_epoch),
                        static_cast<double>(meta.global_step)}});
    write_checkpoint(path, entries);
}

TrainerMeta load_training_checkpoint(const std::string& path, ParamStore& params,
                                     AdamOptimizer& optimizer) {
    const auto entries = read_checkpoint(path);
    TrainerMeta meta;
    for (const auto& e : entries) {
        if (e.name == "opt.meta") {
            meta.next_epoch = static_cast<std::int64_t>(e.values.at(0));
            meta.global_step = static_cast<std::int64_t>(e.values.at(1));
        } else if (e.name.rfind("opt.", 0) != 0) {
            Tensor& t = params.get(e.name);
            if (t.shape() != e.dims)
                throw DataError("checkpoint entry " + e.name + " has shape " +
                                shape_string(e.dims) + ", expected " +
                                shape_string(t.shape()));
            std::copy(e.values.begin(), e.values.end(), t.mutable_values().begin());
        }
    }
    optimizer.restore_state(entries);
    return meta;
}

}  // namespace

TrainSummary train_model(MomentModel& model, const Dataset& dataset,
                         const TrainOptions& options) {
    if (options.checkpoint_path.empty())
        throw ConfigError("train: checkpoint path is required");
    if (options.loss.top_k_negatives >= options.loss.batch_videos)
        throw ConfigError("train: top_k must stay below batch_videos");

    AdamOptimizer optimizer(options.adam);
    TrainerMeta meta;

    const bool resuming =
        options.resume && std::filesystem::exists(options.checkpoint_path);
    if (resuming) {
        meta = load_training_checkpoint(options.checkpoint_path, model.params(), optimizer);
    } else {
        save_training_checkpoint(options.checkpoint_path, model.params(), optimizer, meta);
    }

    std::ofstream log;
    if (!options.log_path.empty()) {
        log.open(options.log_path, resuming ? std::ios::app : std::ios::trunc);
        if (!log) throw FormatError("cannot open training log: " + options.log_path);
    }

    TrainSummary summary;
    for (std::int64_t epoch = meta.next_epoch; epoch < options.epochs; ++epoch) {
        const auto batches =
            epoch_batches(dataset, options.loss.batch_videos, options.shuffle_seed, epoch);
        if (batches.empty())
            throw ContractError("train: no full batch; shrink batch_videos or add videos");

        double epoch_loss = 0.0;
        for (const auto& batch : batches) {
            std::vector<TrainPair> pairs;
            pairs.reserve(batch.size());
            for (const auto& bp : batch)
                pairs.push_back({&dataset.videos[bp.video_idx],
                                 &dataset.manifest.queries[bp.query_idx]});

            const auto start = std::chrono::steady_clock::now();
            const StepResult step = train_step(model, pairs, options.loss, optimizer);
            const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();

            ++meta.global_step;
            ++summary.steps;
            epoch_loss += step.loss;
            if (log.is_open()) {
                nlohmann::ordered_json line;
                line["step"] = meta.global_step;
                line["loss"] = step.loss;
                line["lr"] = options.adam.lr;
                line["active_hinges"] = step.active_hinges;
                line["wall_ms"] = elapsed;
                log << line.dump() << '\n';
                log.flush();
            }
        }
        epoch_loss /= static_cast<double>(batches.size());
        if (summary.epochs_run == 0) summary.first_epoch_loss = epoch_loss;
        summary.final_epoch_loss = epoch_loss;
        ++summary.epochs_run;

        meta.next_epoch = epoch + 1;
        save_training_checkpoint(options.checkpoint_path, model.params(), optimizer, meta);
    }
    return summary;
}

}  // namespace logan
