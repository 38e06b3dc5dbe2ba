#pragma once

#include <cstdint>
#include <string>

#include "logan/data.hpp"
#include "logan/loss.hpp"
#include "logan/model.hpp"

namespace logan {

struct TrainOptions {
    LossConfig loss;
    AdamOptimizer::Config adam;
    int epochs = 10;
    std::uint64_t shuffle_seed = 1;
    std::string checkpoint_path;  // rewritten after every epoch
    std::string log_path;         // one JSON line per step
    bool resume = false;          // continue from checkpoint_path if present
};

struct TrainSummary {
    int epochs_run = 0;
    std::int64_t steps = 0;
    double first_epoch_loss = 0.0;  // mean loss of the first epoch this run
    double final_epoch_loss = 0.0;
};

// Epoch loop: seeded batches, one Adam step per batch, checkpoint (with
// optimizer state) per epoch. Resuming from an epoch-boundary checkpoint
// replays the exact trajectory of an uninterrupted run.
TrainSummary train_model(MomentModel& model, const Dataset& dataset,
                         const TrainOptions& options);

}  // namespace logan
