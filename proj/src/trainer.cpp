#include "timelyrec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace timelyrec {

void TrainConfig::validate() const {
    model.validate();
    if (learning_rate <= 0.0) throw ContractError("TrainConfig: learning rate must be > 0");
    if (batch_size < 1) throw ContractError("TrainConfig: batch size must be >= 1");
    if (max_epochs < 0) throw ContractError("TrainConfig: max epochs must be >= 0");
    if (patience < 1) throw ContractError("TrainConfig: patience must be >= 1");
}

double validate_hr10(const Model& model, const Dataset& dataset, const SplitSpec& split,
                     std::uint64_t seed) {
    EvalOptions options;
    options.scenario = Scenario::Item;
    options.phase = EvalPhase::Validation;
    options.seed = seed;
    options.history_len = model.config().history_len;
    return evaluate(model, dataset, split, options).hr10;
}

TrainState train(const Dataset& dataset, const SplitSpec& split,
                 const TrainConfig& config, std::ostream* log) {
    config.validate();
    ModelConfig model_cfg = config.model;
    model_cfg.init_seed = config.seed;
    Model model(model_cfg, dataset.n_users(), dataset.n_items());

    TrainState state{Model(model_cfg, dataset.n_users(), dataset.n_items())};
    state.best_epoch = -1;

    AdamHyper adam;
    adam.learning_rate = config.learning_rate;

    EpochOptions epoch_options;
    epoch_options.history_len = config.model.history_len;
    epoch_options.separation = config.negative_separation;
    epoch_options.seed = config.seed;

    const std::uint64_t validation_seed = config.seed ^ 0x5A17D47Eull;
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        int skipped = 0;
        std::vector<Example> examples =
            build_training_epoch(dataset, split, epoch_options, epoch, &skipped);
        state.skipped_positives += skipped;
        if (examples.empty())
            throw ContractError("train: no training examples");

        Rng shuffle_rng{config.seed, 0x5F0FF1Eull, static_cast<std::uint64_t>(epoch)};
        for (std::size_t i = examples.size(); i > 1; --i)
            std::swap(examples[i - 1], examples[static_cast<std::size_t>(
                                           shuffle_rng.next_below(i))]);

        Rng dropout_rng{config.seed, 0xD20D007ull, static_cast<std::uint64_t>(epoch)};
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < examples.size();
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(
                begin + static_cast<std::size_t>(config.batch_size), examples.size());
            std::vector<Example> batch(examples.begin() + begin, examples.begin() + end);
            std::vector<Vec> grads = model.params().zero_gradients();
            double loss;
            try {
                loss = model.batch_loss_and_gradients(
                    batch, grads, config.model.dropout > 0.0 ? &dropout_rng : nullptr);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (epoch " +
                                   std::to_string(epoch) + ", batch " +
                                   std::to_string(batches) + ")");
            }
            model.params().adam_step(grads, adam);
            loss_sum += loss;
            ++batches;
        }
        const double mean_loss = loss_sum / static_cast<double>(batches);
        state.final_train_loss = mean_loss;
        state.epochs_run = epoch + 1;

        const double val = validate_hr10(model, dataset, split, validation_seed);
        const bool improved = val > state.best_val_hr10;
        if (improved) {
            state.best_val_hr10 = val;
            state.best_epoch = epoch;
            state.best = model;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (log) {
            char line[160];
            std::snprintf(line, sizeof(line), "epoch=%d loss=%.6f val_hr10=%.4f best=%d",
                          epoch, mean_loss, val, improved ? 1 : 0);
            (*log) << line << '\n' << std::flush;
        }
        if (epochs_since_best >= config.patience) break;
    }

    if (state.best_epoch < 0) state.best = model;  // zero-epoch run: initialization
    return state;
}

}  // namespace timelyrec
