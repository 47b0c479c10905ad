#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "timelyrec/data.hpp"
#include "timelyrec/types.hpp"

namespace timelyrec {

enum class Scenario { Item, ItemTiming };

const char* scenario_name(Scenario s);

// Rank of the positive with pessimistic ties: equal scores count against it.
int rank_positive(double score_pos, const std::vector<double>& scores_neg);

double hr_at_k(int rank, int k);
double ndcg_at_k(int rank, int k);

struct MetricsReport {
    Scenario scenario;
    std::uint64_t seed = 0;
    int users_evaluated = 0;
    double hr1 = 0, hr5 = 0, hr10 = 0;
    double ndcg5 = 0, ndcg10 = 0;

    // Fixed-key structured text, 4 fractional digits.
    std::string to_text() const;
};

// One positive plus its sampled negatives; every negative satisfies its
// sampler's constraints by construction.
struct RankingCase {
    Example positive;
    std::vector<Example> negatives;  // 100 (item) or 300 (item-timing)
};

enum class EvalPhase { Validation, Test };

struct EvalOptions {
    Scenario scenario = Scenario::Item;
    EvalPhase phase = EvalPhase::Test;
    std::uint64_t seed = 42;
    int history_len = 5;
    std::int64_t separation = 3600;
};

// Deterministic candidate construction for one evaluable user: item-scenario
// negatives share the positive's history; timed candidates get a history
// recomputed at their own timestamp.
RankingCase build_ranking_case(const Dataset& dataset, const SplitSpec& split, int user,
                               const EvalOptions& options);

using Scorer = std::function<double(const Example&)>;

// Scores every case with a read-only scorer and accumulates HR/NDCG means
// over evaluable users. A failed case aborts the run.
MetricsReport evaluate(const Scorer& scorer, const Dataset& dataset,
                       const SplitSpec& split, const EvalOptions& options);

class Model;
MetricsReport evaluate(const Model& model, const Dataset& dataset,
                       const SplitSpec& split, const EvalOptions& options);

}  // namespace timelyrec
