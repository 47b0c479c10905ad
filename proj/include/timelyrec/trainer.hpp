#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "timelyrec/data.hpp"
#include "timelyrec/eval.hpp"
#include "timelyrec/model.hpp"

namespace timelyrec {

struct TrainConfig {
    ModelConfig model;
    double learning_rate = 0.001;
    int batch_size = 256;
    int max_epochs = 50;
    int patience = 10;
    std::uint64_t seed = 42;
    std::int64_t negative_separation = 3600;

    void validate() const;
};

struct TrainState {
    Model best;             // checkpoint at the best-validation epoch
    int best_epoch = -1;    // -1 when no epoch ran
    double best_val_hr10 = -1.0;
    int epochs_run = 0;
    double final_train_loss = 0.0;
    int skipped_positives = 0;
};

// Per epoch: rebuild negatives, shuffle, Adam-update per batch, evaluate
// validation item-recommendation HR@10, keep the best checkpoint. Stops at
// max_epochs or when validation has not improved for `patience` epochs.
// Log lines are key=value: epoch, loss, val_hr10, best.
TrainState train(const Dataset& dataset, const SplitSpec& split,
                 const TrainConfig& config, std::ostream* log = nullptr);

// Validation item-recommendation HR@10 with the run's fixed seed; the same
// code path as the evaluation harness.
double validate_hr10(const Model& model, const Dataset& dataset, const SplitSpec& split,
                     std::uint64_t seed);

}  // namespace timelyrec
