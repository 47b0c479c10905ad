#include "timelyrec/model.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

namespace timelyrec {

void ModelConfig::validate() const {
    if (dim < 1) throw ContractError("ModelConfig: dim must be >= 1");
    granularities.validate();
    if (history_len < 0) throw ContractError("ModelConfig: history_len must be >= 0");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ContractError("ModelConfig: dropout must satisfy 0 <= p < 1");
    for (int w : mlp_hidden)
        if (w < 1) throw ContractError("ModelConfig: MLP hidden width must be >= 1");
}

namespace detail {

Tape::NodeId gradual_attention(Tape& tape, const std::vector<Tape::NodeId>& window,
                               int dim, std::vector<double>* weights_out) {
    if (window.empty() || window.size() % 2 == 0)
        throw ContractError("gradual_attention: window must have odd size 2r+1");
    const int r = static_cast<int>(window.size()) / 2;
    const Tape::NodeId target = window[static_cast<std::size_t>(r)];

    std::vector<Tape::NodeId> summaries;
    summaries.reserve(static_cast<std::size_t>(r) + 1);
    summaries.push_back(target);
    for (int j = 1; j <= r; ++j) {
        std::vector<Tape::NodeId> span(window.begin() + (r - j),
                                       window.begin() + (r + j + 1));
        summaries.push_back(tape.mean_of(span));
    }

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<Tape::NodeId> logits;
    logits.reserve(summaries.size());
    for (Tape::NodeId s : summaries)
        logits.push_back(tape.scale(tape.dot(target, s), inv_sqrt_d));
    const Tape::NodeId weights = tape.softmax(tape.concat(logits));
    if (weights_out) *weights_out = tape.value(weights);
    return tape.linear_comb(weights, summaries);
}

Tape::NodeId combine_granularities(Tape& tape, Tape::NodeId query,
                                   const std::vector<Tape::NodeId>& parts,
                                   std::vector<double>* gates_out) {
    if (parts.empty())
        throw ContractError("combine_granularities: no granularity representations");
    std::vector<Tape::NodeId> gates;
    gates.reserve(parts.size());
    for (Tape::NodeId part : parts)
        gates.push_back(tape.sigmoid(tape.dot(query, part)));
    const Tape::NodeId gate_vec = tape.concat(gates);
    if (gates_out) *gates_out = tape.value(gate_vec);
    return tape.linear_comb(gate_vec, parts);
}

namespace {

bool zero_norm(const Vec& v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

}  // namespace

Tape::NodeId time_based_attention(Tape& tape, Tape::NodeId target,
                                  const std::vector<Tape::NodeId>& history_times,
                                  const std::vector<Tape::NodeId>& history_items,
                                  int dim, std::vector<double>* scores_out,
                                  std::atomic<long>* zero_warnings) {
    if (history_times.size() != history_items.size())
        throw ContractError("time_based_attention: history list size mismatch");
    if (scores_out) scores_out->clear();
    if (history_times.empty())
        return tape.constant(Vec(static_cast<std::size_t>(dim), 0.0));

    const Tape::NodeId one = tape.constant(Vec{1.0});
    std::vector<Tape::NodeId> scores;
    scores.reserve(history_times.size());
    for (std::size_t j = 0; j < history_times.size(); ++j) {
        Tape::NodeId c;
        if (zero_norm(tape.value(target)) || zero_norm(tape.value(history_times[j]))) {
            c = tape.constant(Vec{0.5});
            if (zero_warnings) zero_warnings->fetch_add(1);
        } else {
            c = tape.scale(tape.add(tape.cosine(target, history_times[j]), one), 0.5);
        }
        scores.push_back(c);
        if (scores_out) scores_out->push_back(tape.value(c)[0]);
    }
    return tape.linear_comb(tape.concat(scores), history_items);
}

}  // namespace detail

namespace {

std::string slot_param_name(Granularity g) {
    return std::string("slot_emb_") + granularity_name(g);
}

std::string proj_param_name(Granularity g) {
    return std::string("proj_") + granularity_name(g);
}

void fill_uniform(Vec& values, Rng& rng, double scale) {
    for (double& v : values) v = rng.next_in_unit_symmetric(scale);
}

}  // namespace

Model::Model(ModelConfig config, int n_users, int n_items)
    : config_(std::move(config)), n_users_(n_users), n_items_(n_items) {
    config_.validate();
    if (n_users_ < 1 || n_items_ < 1)
        throw ContractError("Model: vocabularies must be non-empty");
    init_params();
}

void Model::init_params() {
    const auto d = static_cast<std::size_t>(config_.dim);
    store_.add("user_emb", {static_cast<std::size_t>(n_users_), d});
    store_.add("item_emb", {static_cast<std::size_t>(n_items_), d});
    for (Granularity g : kAllGranularities) {
        if (!config_.granularities.is_enabled(g)) continue;
        store_.add(slot_param_name(g), {static_cast<std::size_t>(slot_count(g)), d});
        store_.add(proj_param_name(g), {d, d});
    }
    store_.add("query_proj", {d, d});
    store_.add("alpha", {1});
    std::size_t in_dim = 4 * d;
    for (std::size_t k = 0; k < config_.mlp_hidden.size(); ++k) {
        const auto width = static_cast<std::size_t>(config_.mlp_hidden[k]);
        store_.add("mlp_w" + std::to_string(k), {width, in_dim});
        store_.add("mlp_b" + std::to_string(k), {width});
        in_dim = width;
    }
    store_.add("mlp_out_w", {1, in_dim});
    store_.add("mlp_out_b", {1});

    Rng rng(config_.init_seed);
    const double emb_scale = 1.0 / std::sqrt(static_cast<double>(config_.dim));
    for (int p = 0; p < store_.count(); ++p) {
        const std::string& name = store_.name(p);
        Tensor& t = store_.tensor(p);
        if (name == "alpha") {
            t.values[0] = 1.0;
        } else if (name.rfind("mlp_b", 0) == 0 || name == "mlp_out_b") {
            // biases stay zero
        } else if (name.rfind("mlp_", 0) == 0) {
            fill_uniform(t.values, rng, 1.0 / std::sqrt(static_cast<double>(t.shape[1])));
        } else {
            fill_uniform(t.values, rng, emb_scale);
        }
    }
}

// Per-tape forward context: leases parameter slices as tape leaves (one
// node per distinct slice) and caches the sub-expressions that repeat
// across history timestamps and batch examples.
struct Model::Forward {
    const Model& m;
    Tape& tape;
    Rng* rng;  // dropout stream; nullptr disables dropout

    std::unordered_map<std::uint64_t, Tape::NodeId> leaf_cache;
    std::vector<std::tuple<int, std::size_t, std::size_t, Tape::NodeId>> uses;
    std::unordered_map<std::uint64_t, Tape::NodeId> node_cache;

    Forward(const Model& model, Tape& t, Rng* r) : m(model), tape(t), rng(r) {}

    Tape::NodeId lease(int param, std::size_t offset, std::size_t len) {
        const std::uint64_t key = (static_cast<std::uint64_t>(param) << 44) | offset;
        auto it = leaf_cache.find(key);
        if (it != leaf_cache.end()) return it->second;
        const Vec& values = m.store_.tensor(param).values;
        if (offset + len > values.size())
            throw ContractError("Model: parameter slice out of range");
        const Tape::NodeId node = tape.leaf(values.data() + offset, len);
        leaf_cache.emplace(key, node);
        uses.emplace_back(param, offset, len, node);
        return node;
    }

    Tape::NodeId row(const std::string& name, int row_idx) {
        const int param = m.store_.index_of(name);
        const Tensor& t = m.store_.tensor(param);
        if (row_idx < 0 || static_cast<std::size_t>(row_idx) >= t.shape[0])
            throw ContractError("Model: row index out of range for " + name);
        const std::size_t len = t.shape[1];
        return lease(param, static_cast<std::size_t>(row_idx) * len, len);
    }

    Tape::NodeId whole(const std::string& name) {
        const int param = m.store_.index_of(name);
        return lease(param, 0, m.store_.tensor(param).size());
    }

    Tape::NodeId cached(std::uint64_t key, auto&& make) {
        auto it = node_cache.find(key);
        if (it != node_cache.end()) return it->second;
        const Tape::NodeId node = make();
        node_cache.emplace(key, node);
        return node;
    }

    // Cache keys: disjoint bit fields so distinct (kind, granularity, user,
    // slot) tuples can never collide.
    static std::uint64_t key(std::uint64_t tag, std::uint64_t g, std::uint64_t user,
                             std::uint64_t slot = 0) {
        return (tag << 60) | (g << 58) | (user << 8) | slot;
    }

    Tape::NodeId personalized(int user, Granularity g, int slot) {
        const auto gi = static_cast<std::uint64_t>(g);
        return cached(key(1, gi, static_cast<std::uint64_t>(user),
                          static_cast<std::uint64_t>(slot)),
                      [&] {
                          const Tape::NodeId projected = cached(
                              key(2, gi, static_cast<std::uint64_t>(user)), [&] {
                                  return tape.matvec(whole(proj_param_name(g)),
                                                     row("user_emb", user), m.config_.dim,
                                                     m.config_.dim);
                              });
                          return tape.hadamard(projected, row(slot_param_name(g), slot));
                      });
    }

    Tape::NodeId mate(int user, std::int64_t time,
                      std::vector<Explanation::GranularityReport>* reports) {
        const CalendarFields fields = decompose(time, m.config_.utc_offset);
        std::vector<Tape::NodeId> parts;
        for (Granularity g : kAllGranularities) {
            if (!m.config_.granularities.is_enabled(g)) continue;
            const int slot = fields.slot(g);
            const int r = m.config_.granularities.radius(g);
            std::vector<Tape::NodeId> window;
            window.reserve(static_cast<std::size_t>(2 * r) + 1);
            for (int off = -r; off <= r; ++off)
                window.push_back(personalized(user, g, shift_slot(slot, off, g)));
            std::vector<double> weights;
            parts.push_back(detail::gradual_attention(tape, window, m.config_.dim,
                                                      reports ? &weights : nullptr));
            if (reports) {
                Explanation::GranularityReport rep;
                rep.granularity = g;
                rep.target_slot = slot;
                rep.weights = weights;
                rep.weights_target_scaled.resize(weights.size());
                for (std::size_t i = 0; i < weights.size(); ++i)
                    rep.weights_target_scaled[i] =
                        weights[0] != 0.0 ? weights[i] / weights[0] : 0.0;
                reports->push_back(std::move(rep));
            }
        }
        const Tape::NodeId query =
            cached(key(3, 0, static_cast<std::uint64_t>(user)), [&] {
                return tape.matvec(whole("query_proj"), row("user_emb", user),
                                   m.config_.dim, m.config_.dim);
            });
        std::vector<double> gates;
        const Tape::NodeId combined =
            detail::combine_granularities(tape, query, parts, reports ? &gates : nullptr);
        if (reports)
            for (std::size_t i = 0; i < reports->size(); ++i)
                (*reports)[i].gate = gates[i];
        return combined;
    }

    Tape::NodeId item_at_time(int item, std::int64_t time) {
        const Tape::NodeId te = tape.constant(temporal_encoding(time, m.config_.dim));
        return tape.add(row("item_emb", item), tape.scale_by(te, whole("alpha")));
    }

    Tape::NodeId logit(const Example& ex, Explanation* explanation) {
        if (static_cast<int>(ex.history.size()) > m.config_.history_len)
            throw ContractError("Model: history window exceeds configured length");
        for (const HistoryEntry& h : ex.history)
            if (h.time >= ex.time)
                throw ContractError("Model: history entry not strictly before target");

        const Tape::NodeId user_node = row("user_emb", ex.user);
        const Tape::NodeId item_node = item_at_time(ex.item, ex.time);

        Tape::NodeId time_repr;
        Tape::NodeId history_repr;
        std::vector<double> history_scores;
        if (m.config_.disable_mate) {
            time_repr = tape.constant(Vec(static_cast<std::size_t>(m.config_.dim), 0.0));
            if (ex.history.empty()) {
                history_repr =
                    tape.constant(Vec(static_cast<std::size_t>(m.config_.dim), 0.0));
            } else {
                std::vector<Tape::NodeId> items, scores;
                for (const HistoryEntry& h : ex.history) {
                    items.push_back(item_at_time(
                        h.item, m.config_.history_encoding_at_target ? ex.time : h.time));
                    scores.push_back(tape.constant(Vec{0.5}));
                    history_scores.push_back(0.5);
                }
                history_repr = tape.linear_comb(tape.concat(scores), items);
            }
        } else {
            time_repr = mate(ex.user, ex.time,
                             explanation ? &explanation->granularities : nullptr);
            std::vector<Tape::NodeId> times, items;
            for (const HistoryEntry& h : ex.history) {
                times.push_back(mate(ex.user, h.time, nullptr));
                items.push_back(item_at_time(
                    h.item, m.config_.history_encoding_at_target ? ex.time : h.time));
            }
            history_repr = detail::time_based_attention(
                tape, time_repr, times, items, m.config_.dim, &history_scores,
                &m.zero_cosine_warnings_);
        }
        if (explanation) explanation->history_scores = history_scores;

        Tape::NodeId x = tape.concat({user_node, item_node, time_repr, history_repr});
        int in_dim = 4 * m.config_.dim;
        for (std::size_t k = 0; k < m.config_.mlp_hidden.size(); ++k) {
            const int width = m.config_.mlp_hidden[k];
            x = tape.relu(tape.affine(whole("mlp_w" + std::to_string(k)),
                                      whole("mlp_b" + std::to_string(k)), x, width,
                                      in_dim));
            if (rng && m.config_.dropout > 0.0)
                x = tape.dropout(x, m.config_.dropout, true, *rng);
            in_dim = width;
        }
        return tape.affine(whole("mlp_out_w"), whole("mlp_out_b"), x, 1, in_dim);
    }
};

double Model::predict(int user, int item, std::int64_t time,
                      const HistoryWindow& history, Explanation* explanation) const {
    Tape tape(false);
    Forward fwd(*this, tape, nullptr);
    Example ex{user, item, time, 1.0, history};
    const double z = tape.value(fwd.logit(ex, explanation))[0];
    if (!std::isfinite(z)) throw NumericError("Model::predict: non-finite logit");
    const double score = 1.0 / (1.0 + std::exp(-z));
    if (explanation) explanation->score = score;
    return score;
}

double Model::batch_loss_and_gradients(const std::vector<Example>& batch,
                                       std::vector<Vec>& grads,
                                       Rng* training_rng) const {
    if (batch.empty())
        throw ContractError("batch_loss_and_gradients: empty batch");
    if (grads.size() != static_cast<std::size_t>(store_.count()))
        throw ContractError("batch_loss_and_gradients: gradient buffer mismatch");
    Tape tape(true);
    Forward fwd(*this, tape, training_rng);
    std::vector<Tape::NodeId> terms;
    terms.reserve(batch.size());
    for (const Example& ex : batch)
        terms.push_back(tape.bce_with_logit(fwd.logit(ex, nullptr), ex.label));
    const Tape::NodeId loss_node = tape.mean_of(terms);
    const double loss = tape.value(loss_node)[0];
    if (!std::isfinite(loss))
        throw NumericError("batch_loss_and_gradients: non-finite loss");
    tape.backward(loss_node);
    for (const auto& [param, offset, len, node] : fwd.uses) {
        const Vec& g = tape.grad(node);
        Vec& dst = grads[static_cast<std::size_t>(param)];
        for (std::size_t i = 0; i < len; ++i) dst[offset + i] += g[i];
    }
    return loss;
}

Vec Model::personalize_value(int user, std::int64_t time, Granularity g) const {
    if (!config_.granularities.is_enabled(g))
        throw ContractError("personalize: granularity not enabled");
    Tape tape(false);
    Forward fwd(*this, tape, nullptr);
    const int slot = decompose(time, config_.utc_offset).slot(g);
    return tape.value(fwd.personalized(user, g, slot));
}

Vec Model::gradual_value(int user, std::int64_t time, Granularity g,
                         std::vector<double>* weights_out) const {
    if (!config_.granularities.is_enabled(g))
        throw ContractError("gradual_value: granularity not enabled");
    Tape tape(false);
    Forward fwd(*this, tape, nullptr);
    const int slot = decompose(time, config_.utc_offset).slot(g);
    const int r = config_.granularities.radius(g);
    std::vector<Tape::NodeId> window;
    for (int off = -r; off <= r; ++off)
        window.push_back(fwd.personalized(user, g, shift_slot(slot, off, g)));
    return tape.value(detail::gradual_attention(tape, window, config_.dim, weights_out));
}

Vec Model::mate_value(int user, std::int64_t time,
                      std::vector<double>* gates_out) const {
    Tape tape(false);
    Forward fwd(*this, tape, nullptr);
    std::vector<Explanation::GranularityReport> reports;
    const Tape::NodeId node = fwd.mate(user, time, gates_out ? &reports : nullptr);
    if (gates_out) {
        gates_out->clear();
        for (const auto& rep : reports) gates_out->push_back(rep.gate);
    }
    return tape.value(node);
}

Vec Model::item_at_time_value(int item, std::int64_t time) const {
    Tape tape(false);
    Forward fwd(*this, tape, nullptr);
    return tape.value(fwd.item_at_time(item, time));
}

double mean_bce(const std::vector<double>& predictions,
                const std::vector<double>& labels) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw ContractError("mean_bce: empty or mismatched batch");
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        total += bce_value(predictions[i], labels[i]);
    return total / static_cast<double>(predictions.size());
}

namespace {

constexpr char kCheckpointMagic[4] = {'T', 'R', 'C', 'K'};
constexpr std::uint8_t kCheckpointVersion = 1;

}  // namespace

void Model::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out.write(kCheckpointMagic, 4);
    write_u8(out, kCheckpointVersion);
    write_u32(out, static_cast<std::uint32_t>(config_.dim));
    std::uint8_t mask = 0;
    for (int i = 0; i < kGranularityCount; ++i)
        if (config_.granularities.enabled[static_cast<std::size_t>(i)])
            mask |= static_cast<std::uint8_t>(1 << i);
    write_u8(out, mask);
    for (int i = 0; i < kGranularityCount; ++i)
        write_u32(out, static_cast<std::uint32_t>(
                           config_.granularities.window_radius[static_cast<std::size_t>(i)]));
    write_u32(out, static_cast<std::uint32_t>(config_.history_len));
    write_u32(out, static_cast<std::uint32_t>(config_.mlp_hidden.size()));
    for (int w : config_.mlp_hidden) write_u32(out, static_cast<std::uint32_t>(w));
    write_f64(out, config_.dropout);
    write_i64(out, config_.utc_offset);
    std::uint8_t flags = 0;
    if (config_.history_encoding_at_target) flags |= 1;
    if (config_.disable_mate) flags |= 2;
    write_u8(out, flags);
    write_u64(out, config_.init_seed);
    write_u32(out, static_cast<std::uint32_t>(n_users_));
    write_u32(out, static_cast<std::uint32_t>(n_items_));
    store_.serialize(out);
    if (!out) throw IoError("checkpoint write failed: " + path);
}

Model Model::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::string(magic, 4) != std::string(kCheckpointMagic, 4))
        throw IoError("not a model checkpoint: " + path);
    if (read_u8(in) != kCheckpointVersion)
        throw IoError("unsupported checkpoint version: " + path);
    ModelConfig cfg;
    cfg.dim = static_cast<int>(read_u32(in));
    const std::uint8_t mask = read_u8(in);
    for (int i = 0; i < kGranularityCount; ++i)
        cfg.granularities.enabled[static_cast<std::size_t>(i)] = (mask >> i) & 1;
    for (int i = 0; i < kGranularityCount; ++i)
        cfg.granularities.window_radius[static_cast<std::size_t>(i)] =
            static_cast<int>(read_u32(in));
    cfg.history_len = static_cast<int>(read_u32(in));
    const std::uint32_t layers = read_u32(in);
    cfg.mlp_hidden.clear();
    for (std::uint32_t k = 0; k < layers; ++k)
        cfg.mlp_hidden.push_back(static_cast<int>(read_u32(in)));
    cfg.dropout = read_f64(in);
    cfg.utc_offset = read_i64(in);
    const std::uint8_t flags = read_u8(in);
    cfg.history_encoding_at_target = flags & 1;
    cfg.disable_mate = flags & 2;
    cfg.init_seed = read_u64(in);
    const int n_users = static_cast<int>(read_u32(in));
    const int n_items = static_cast<int>(read_u32(in));
    Model model(cfg, n_users, n_items);
    model.store_ = ParamStore::deserialize(in);
    return model;
}

}  // namespace timelyrec
