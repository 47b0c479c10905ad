#include "timelyrec/eval.hpp"

#include <cmath>
#include <cstdio>

#include "timelyrec/model.hpp"

namespace timelyrec {

const char* scenario_name(Scenario s) {
    return s == Scenario::Item ? "item" : "item-timing";
}

int rank_positive(double score_pos, const std::vector<double>& scores_neg) {
    if (!std::isfinite(score_pos)) throw NumericError("rank_positive: NaN score");
    int rank = 1;
    for (double s : scores_neg) {
        if (!std::isfinite(s)) throw NumericError("rank_positive: NaN score");
        if (s >= score_pos) ++rank;
    }
    return rank;
}

double hr_at_k(int rank, int k) {
    if (rank < 1 || k < 1) throw ContractError("hr_at_k: rank and K must be >= 1");
    return rank <= k ? 1.0 : 0.0;
}

double ndcg_at_k(int rank, int k) {
    if (rank < 1 || k < 1) throw ContractError("ndcg_at_k: rank and K must be >= 1");
    return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

std::string MetricsReport::to_text() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "scenario=%s\nusers_evaluated=%d\nseed=%llu\n"
                  "hr@1=%.4f\nhr@5=%.4f\nndcg@5=%.4f\nhr@10=%.4f\nndcg@10=%.4f\n",
                  scenario_name(scenario), users_evaluated,
                  static_cast<unsigned long long>(seed), hr1, hr5, ndcg5, hr10, ndcg10);
    return buf;
}

RankingCase build_ranking_case(const Dataset& dataset, const SplitSpec& split, int user,
                               const EvalOptions& options) {
    const UserSplit& us = split.users[static_cast<std::size_t>(user)];
    if (!us.evaluable)
        throw ContractError("build_ranking_case: user is not evaluable");
    const std::size_t pos_idx =
        options.phase == EvalPhase::Test ? us.test_pos : us.val_pos;
    const Dataset::Event& pos = dataset.events[static_cast<std::size_t>(user)][pos_idx];

    Rng rng{options.seed, static_cast<std::uint64_t>(options.scenario),
            static_cast<std::uint64_t>(options.phase),
            static_cast<std::uint64_t>(user)};

    RankingCase rc;
    rc.positive = {user, pos.item, pos.time, 1.0,
                   recent_history(dataset, split, user, pos.time, options.history_len)};

    auto add_wrong_items = [&] {
        for (int n = 0; n < 100; ++n) {
            const int item = sample_negative_item(dataset, user, rng);
            rc.negatives.push_back({user, item, pos.time, 0.0, rc.positive.history});
        }
    };

    add_wrong_items();
    if (options.scenario == Scenario::ItemTiming) {
        std::vector<std::int64_t> accepted;
        accepted.reserve(100);
        for (int n = 0; n < 100; ++n) {
            const std::int64_t t = sample_negative_timestamp(
                dataset, user, pos.item, pos.time, NegativeTimePurpose::Eval, rng,
                accepted, options.separation);
            accepted.push_back(t);
            rc.negatives.push_back(
                {user, pos.item, t, 0.0,
                 recent_history(dataset, split, user, t, options.history_len)});
        }
        accepted.clear();
        for (int n = 0; n < 100; ++n) {
            const int item = sample_negative_item(dataset, user, rng);
            const std::int64_t t = sample_negative_timestamp(
                dataset, user, item, pos.time, NegativeTimePurpose::Eval, rng, accepted,
                options.separation);
            accepted.push_back(t);
            rc.negatives.push_back(
                {user, item, t, 0.0,
                 recent_history(dataset, split, user, t, options.history_len)});
        }
    }
    return rc;
}

MetricsReport evaluate(const Scorer& scorer, const Dataset& dataset,
                       const SplitSpec& split, const EvalOptions& options) {
    MetricsReport report;
    report.scenario = options.scenario;
    report.seed = options.seed;
    for (int u = 0; u < dataset.n_users(); ++u) {
        if (!split.users[static_cast<std::size_t>(u)].evaluable) continue;
        const RankingCase rc = build_ranking_case(dataset, split, u, options);
        const double score_pos = scorer(rc.positive);
        std::vector<double> scores_neg;
        scores_neg.reserve(rc.negatives.size());
        for (const Example& ex : rc.negatives) scores_neg.push_back(scorer(ex));
        const int rank = rank_positive(score_pos, scores_neg);
        report.hr1 += hr_at_k(rank, 1);
        report.hr5 += hr_at_k(rank, 5);
        report.hr10 += hr_at_k(rank, 10);
        report.ndcg5 += ndcg_at_k(rank, 5);
        report.ndcg10 += ndcg_at_k(rank, 10);
        ++report.users_evaluated;
    }
    if (report.users_evaluated > 0) {
        const double inv = 1.0 / report.users_evaluated;
        report.hr1 *= inv;
        report.hr5 *= inv;
        report.hr10 *= inv;
        report.ndcg5 *= inv;
        report.ndcg10 *= inv;
    }
    return report;
}

MetricsReport evaluate(const Model& model, const Dataset& dataset,
                       const SplitSpec& split, const EvalOptions& options) {
    return evaluate(
        [&model](const Example& ex) {
            return model.predict(ex.user, ex.item, ex.time, ex.history);
        },
        dataset, split, options);
}

}  // namespace timelyrec
