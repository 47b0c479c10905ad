#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "timelyrec/autograd.hpp"
#include "timelyrec/calendar.hpp"
#include "timelyrec/params.hpp"
#include "timelyrec/types.hpp"

namespace timelyrec {

struct ModelConfig {
    int dim = 32;
    GranularityConfig granularities;
    int history_len = 5;
    std::vector<int> mlp_hidden = {64, 64};
    double dropout = 0.2;
    std::int64_t utc_offset = 0;
    // History item time encoding: at the interaction's own timestamp by
    // default, at the target timestamp when set.
    bool history_encoding_at_target = false;
    // Ablation switch: zero the timestamp representation everywhere.
    bool disable_mate = false;
    std::uint64_t init_seed = 42;

    void validate() const;
};

// Attention internals exposed for inspection reports.
struct Explanation {
    struct GranularityReport {
        Granularity granularity;
        int target_slot;
        std::vector<double> weights;                // softmax a_0..a_r
        std::vector<double> weights_target_scaled;  // rescaled so a_0 reads 1.0
        double gate;                                // importance b_g
    };
    std::vector<GranularityReport> granularities;
    std::vector<double> history_scores;  // c_j, most-recent-first
    double score = 0.0;
};

namespace detail {

// Gradual attention over a cyclic slot window. `window` holds personalized
// slot nodes at offsets -r..r; the center entry is the target slot.
Tape::NodeId gradual_attention(Tape& tape, const std::vector<Tape::NodeId>& window,
                               int dim, std::vector<double>* weights_out);

// Independent sigmoid gates b_g = sigmoid(query . part_g); output is the
// gate-weighted sum (not normalized).
Tape::NodeId combine_granularities(Tape& tape, Tape::NodeId query,
                                   const std::vector<Tape::NodeId>& parts,
                                   std::vector<double>* gates_out);

// c_j = (cos(target, history_time_j) + 1) / 2, then H = sum_j c_j item_j.
// A zero-norm vector entering the cosine yields the neutral score 0.5 and
// bumps *zero_warnings instead of failing.
Tape::NodeId time_based_attention(Tape& tape, Tape::NodeId target,
                                  const std::vector<Tape::NodeId>& history_times,
                                  const std::vector<Tape::NodeId>& history_items,
                                  int dim, std::vector<double>* scores_out,
                                  std::atomic<long>* zero_warnings);

}  // namespace detail

class Model {
public:
    Model(ModelConfig config, int n_users, int n_items);

    Model(const Model& other)
        : config_(other.config_),
          n_users_(other.n_users_),
          n_items_(other.n_items_),
          store_(other.store_),
          zero_cosine_warnings_(other.zero_cosine_warnings_.load()) {}

    Model& operator=(const Model& other) {
        config_ = other.config_;
        n_users_ = other.n_users_;
        n_items_ = other.n_items_;
        store_ = other.store_;
        zero_cosine_warnings_.store(other.zero_cosine_warnings_.load());
        return *this;
    }

    const ModelConfig& config() const { return config_; }
    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    // Inference-mode score; reentrant with a read-only parameter snapshot.
    double predict(int user, int item, std::int64_t time, const HistoryWindow& history,
                   Explanation* explanation = nullptr) const;

    // Mean BCE over the batch plus gradients accumulated into `grads`
    // (shape-matched to params; caller typically gets them from
    // params().zero_gradients()). Dropout is applied when `training_rng`
    // is non-null and config().dropout > 0.
    double batch_loss_and_gradients(const std::vector<Example>& batch,
                                    std::vector<Vec>& grads,
                                    Rng* training_rng) const;

    // Component values for tests and reports, computed on throwaway tapes.
    Vec personalize_value(int user, std::int64_t time, Granularity g) const;
    Vec gradual_value(int user, std::int64_t time, Granularity g,
                      std::vector<double>* weights_out = nullptr) const;
    Vec mate_value(int user, std::int64_t time,
                   std::vector<double>* gates_out = nullptr) const;
    Vec item_at_time_value(int item, std::int64_t time) const;

    void save(const std::string& path) const;
    static Model load(const std::string& path);

    long zero_cosine_warnings() const { return zero_cosine_warnings_.load(); }

private:
    struct Forward;

    void init_params();

    ModelConfig config_;
    int n_users_;
    int n_items_;
    ParamStore store_;
    mutable std::atomic<long> zero_cosine_warnings_{0};
};

// Mean BCE of predictions against labels with the standard 1e-12 clamp.
double mean_bce(const std::vector<double>& predictions,
                const std::vector<double>& labels);

}  // namespace timelyrec
