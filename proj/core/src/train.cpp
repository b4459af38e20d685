#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sps/evalstat.hpp"
#include "sps/training.hpp"

namespace sps::train {

using ag::Tape;
using ag::Value;

namespace {

ag::ParamSet clone_params(const ag::ParamSet& params) {
    ag::ParamSet out;
    for (const auto& [name, p] : params)
        out.emplace(name, ag::make_param(p->shape, p->val));
    return out;
}

PreparedPair prepare_pair(const textprep::TokenizedSentence& s0_in,
                          const textprep::TokenizedSentence& s1_in, double label,
                          textprep::Vocabulary& vocab, const PrepareOptions& opts) {
    textprep::TokenizedSentence s0 = s0_in;
    textprep::TokenizedSentence s1 = s1_in;
    if (opts.use_flags) textprep::overlap_flags(s0, s1, opts.stopwords);
    textprep::assign_indices(s0, vocab);
    textprep::assign_indices(s1, vocab);
    PreparedPair pair;
    pair.s0 = textprep::embed_sequence(s0, vocab, opts.pad_len);
    pair.s1 = textprep::embed_sequence(s1, vocab, opts.pad_len);
    pair.label = label;
    return pair;
}

std::vector<PreparedGroup> prepare_group_split(const std::vector<data::PairGroup>& groups,
                                               textprep::Vocabulary& vocab,
                                               const PrepareOptions& opts,
                                               const ir::CorpusStats* stats,
                                               bool prune) {
    std::vector<PreparedGroup> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        std::vector<double> bm25;
        if (stats) {
            bm25.reserve(g.candidates.size());
            for (const auto& cand : g.candidates)
                bm25.push_back(ir::bm25_score(g.s0, cand, *stats));
        }
        std::vector<std::size_t> keep(g.candidates.size());
        std::iota(keep.begin(), keep.end(), 0);
        if (prune && stats && opts.prune_top_k > 0)
            keep = ir::prune_topk_indices(bm25, opts.prune_top_k);
        PreparedGroup pg;
        for (std::size_t i : keep) {
            if (g.candidates[i].empty()) continue;  // encoders reject empty sentences
            pg.pairs.push_back(
                prepare_pair(g.s0, g.candidates[i], g.labels[i], vocab, opts));
            pg.labels.push_back(g.labels[i]);
            if (stats && opts.bm25_feature) pg.bm25.push_back(bm25[i]);
        }
        if (pg.pairs.empty()) continue;
        out.push_back(std::move(pg));
    }
    return out;
}

}  // namespace

PreparedData prepare_ranking(std::vector<data::PairGroup> train,
                             std::vector<data::PairGroup> val,
                             std::vector<data::PairGroup> test,
                             textprep::Vocabulary& vocab, const PrepareOptions& opts) {
    PreparedData out;
    out.head = models::TaskHead::kRanking;
    std::optional<ir::CorpusStats> stats;
    const bool need_bm25 = opts.bm25_feature || opts.prune_top_k > 0;
    if (need_bm25) {
        std::vector<textprep::TokenizedSentence> docs;
        for (const auto& g : train)
            for (const auto& cand : g.candidates) docs.push_back(cand);
        stats = ir::fit_stats(docs);
    }
    const ir::CorpusStats* sp = stats ? &*stats : nullptr;
    out.train_groups = prepare_group_split(train, vocab, opts, sp, /*prune=*/true);
    out.val_groups = prepare_group_split(val, vocab, opts, sp, /*prune=*/false);
    out.test_groups = prepare_group_split(test, vocab, opts, sp, /*prune=*/false);
    return out;
}

std::vector<PreparedGroup> prepare_groups_simple(const std::vector<data::PairGroup>& groups,
                                                 textprep::Vocabulary& vocab,
                                                 const PrepareOptions& opts) {
    return prepare_group_split(groups, vocab, opts, nullptr, /*prune=*/false);
}

PreparedPair prepare_one_pair(const textprep::TokenizedSentence& s0,
                              const textprep::TokenizedSentence& s1, double label,
                              textprep::Vocabulary& vocab, const PrepareOptions& opts) {
    return prepare_pair(s0, s1, label, vocab, opts);
}

PreparedData prepare_pairs(models::TaskHead head, std::vector<data::PairSample> train,
                           std::vector<data::PairSample> val,
                           std::vector<data::PairSample> test,
                           textprep::Vocabulary& vocab, const PrepareOptions& opts) {
    PreparedData out;
    out.head = head;
    auto convert = [&](const std::vector<data::PairSample>& split) {
        std::vector<PreparedPair> pairs;
        pairs.reserve(split.size());
        for (const auto& s : split) {
            if (s.s0.empty() || s.s1.empty()) continue;
            pairs.push_back(prepare_pair(s.s0, s.s1, s.label, vocab, opts));
        }
        return pairs;
    };
    out.train_pairs = convert(train);
    out.val_pairs = convert(val);
    out.test_pairs = convert(test);
    return out;
}

std::string default_metric(models::TaskHead head) {
    switch (head) {
        case models::TaskHead::kRanking: return "mrr";
        case models::TaskHead::kBinary: return "accuracy";
        case models::TaskHead::kSts: return "pearson";
        case models::TaskHead::kRte3: return "accuracy";
    }
    return "mrr";
}

namespace {

std::vector<double> pair_extras(const models::Model& model, const PreparedGroup& group,
                                std::size_t i) {
    if (model.spec().use_bm25_feature && !group.bm25.empty())
        return {group.bm25[i]};
    return {};
}

double score_pair_eval(const models::Model& model, const PreparedPair& pair,
                       const std::vector<double>& extras) {
    Tape tape;
    Rng rng(0);
    const models::Forward fwd =
        model.forward(tape, pair.s0, pair.s1, extras, /*train_mode=*/false, rng);
    return fwd.score->val[0];
}

}  // namespace

std::vector<std::vector<double>> score_groups(const models::Model& model,
                                              const std::vector<PreparedGroup>& groups) {
    std::vector<std::vector<double>> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        std::vector<double> scores;
        scores.reserve(g.pairs.size());
        for (std::size_t i = 0; i < g.pairs.size(); ++i)
            scores.push_back(score_pair_eval(model, g.pairs[i], pair_extras(model, g, i)));
        out.push_back(std::move(scores));
    }
    return out;
}

double evaluate_metric(const models::Model& model, const std::vector<PreparedGroup>& groups,
                       const std::string& metric) {
    const auto scores = score_groups(model, groups);
    std::vector<eval::RankedGroup> ranked(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        ranked[g].scores = scores[g];
        ranked[g].labels = groups[g].labels;
    }
    if (metric == "map") return eval::map_metric(ranked);
    if (metric == "mrr") return eval::mrr_metric(ranked);
    if (metric.rfind("r@", 0) == 0) {
        // "r@k" or "r@k/n"; n defaults to the group size
        const auto slash = metric.find('/');
        const std::size_t k = std::stoul(metric.substr(2, slash - 2));
        std::size_t n = ranked.empty() ? k : ranked[0].scores.size();
        if (slash != std::string::npos) n = std::stoul(metric.substr(slash + 1));
        return eval::recall_at(ranked, k, n);
    }
    throw ConfigError("unknown ranking metric: " + metric);
}

double evaluate_metric(const models::Model& model, const std::vector<PreparedPair>& pairs,
                       models::TaskHead head, const std::string& metric) {
    Rng rng(0);
    if (head == models::TaskHead::kSts) {
        std::vector<double> pred, gold;
        for (const auto& pair : pairs) {
            Tape tape;
            const auto fwd = model.forward(tape, pair.s0, pair.s1, {}, false, rng);
            pred.push_back(fwd.sts_value->val[0]);
            gold.push_back(pair.label);
        }
        if (metric == "pearson") return eval::pearson_r(pred, gold);
        throw ConfigError("unknown sts metric: " + metric);
    }
    std::vector<int> predicted, gold;
    for (const auto& pair : pairs) {
        Tape tape;
        const auto fwd = model.forward(tape, pair.s0, pair.s1, {}, false, rng);
        if (head == models::TaskHead::kRte3) {
            const auto& dist = fwd.class_dist->val;
            predicted.push_back(static_cast<int>(
                std::max_element(dist.begin(), dist.end()) - dist.begin()));
        } else {
            predicted.push_back(fwd.score->val[0] > 0.5 ? 1 : 0);
        }
        gold.push_back(static_cast<int>(std::lround(pair.label)));
    }
    if (metric == "accuracy") return eval::accuracy(predicted, gold);
    throw ConfigError("unknown classification metric: " + metric);
}

namespace {

// Permutation consumed in chunks; consecutive epochs draw disjoint group
// sets until the pool is exhausted, then it is reshuffled.
class ChunkSampler {
  public:
    ChunkSampler(std::size_t n, Rng& rng) : rng_(rng) {
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        rng_.shuffle(order_);
    }

    std::vector<std::size_t> next(std::size_t count) {
        std::vector<std::size_t> out;
        out.reserve(count);
        while (out.size() < count) {
            if (cursor_ == order_.size()) {
                rng_.shuffle(order_);
                cursor_ = 0;
            }
            out.push_back(order_[cursor_++]);
        }
        return out;
    }

  private:
    Rng& rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

double train_ranking_epoch(models::Model& model, const PreparedData& data,
                           const TrainConfig& cfg, OptimizerState& opt,
                           ChunkSampler& sampler, Rng& rng) {
    const std::size_t total = data.train_groups.size();
    const std::size_t per_epoch = static_cast<std::size_t>(
        std::ceil(cfg.epoch_fraction * static_cast<double>(total)));
    const auto picked = sampler.next(std::min(per_epoch, total));
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t gi : picked) {
        const PreparedGroup& group = data.train_groups[gi];
        bool has_pos = false, has_neg = false;
        for (double l : group.labels) (l > 0.5 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) continue;  // contributes no RankNet pairs
        ag::zero_grads(model.params());
        Tape tape;
        std::vector<Value> scores;
        scores.reserve(group.pairs.size());
        for (std::size_t i = 0; i < group.pairs.size(); ++i) {
            const auto fwd = model.forward(tape, group.pairs[i].s0, group.pairs[i].s1,
                                           pair_extras(model, group, i),
                                           cfg.dropout_enabled, rng);
            scores.push_back(fwd.score);
        }
        Value loss = ranknet_loss(tape, scores, group.labels, {0, scores.size()});
        tape.backward(loss);
        add_l2_gradients(model.params(), cfg.l2_lambda);
        opt.step(model.params(), cfg.optimizer, cfg.frozen);
        loss_sum += loss->val[0] + l2_penalty(model.params(), cfg.l2_lambda);
        ++steps;
    }
    return steps ? loss_sum / static_cast<double>(steps) : 0.0;
}

double train_pointwise_epoch(models::Model& model, const PreparedData& data,
                             const TrainConfig& cfg, OptimizerState& opt, Rng& rng) {
    std::vector<std::size_t> order(data.train_pairs.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const models::TaskHead head = data.head;
    double loss_sum = 0.0;
    std::size_t steps = 0;
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = std::min(start + cfg.batch_size, order.size());
        // Pearson needs >= 2 samples; extend the final batch if necessary.
        if (head == models::TaskHead::kSts && order.size() - end == 1) end = order.size();
        ag::zero_grads(model.params());
        Tape tape;
        Value loss;
        if (head == models::TaskHead::kSts) {
            std::vector<Value> pred;
            std::vector<double> gold;
            for (std::size_t k = start; k < end; ++k) {
                const auto& pair = data.train_pairs[order[k]];
                const auto fwd =
                    model.forward(tape, pair.s0, pair.s1, {}, cfg.dropout_enabled, rng);
                pred.push_back(fwd.sts_value);
                gold.push_back(pair.label);
            }
            if (pred.size() < 2) break;
            loss = pearson_loss(tape, pred, gold);
        } else if (head == models::TaskHead::kRte3) {
            Value sum;
            for (std::size_t k = start; k < end; ++k) {
                const auto& pair = data.train_pairs[order[k]];
                const auto fwd =
                    model.forward(tape, pair.s0, pair.s1, {}, cfg.dropout_enabled, rng);
                Value ce = cross_entropy(tape, fwd.class_dist,
                                         interpolated_target(pair.label + 1.0, 3));
                sum = sum ? ag::add(tape, sum, ce) : ce;
            }
            loss = ag::affine(tape, sum, 1.0 / static_cast<double>(end - start), 0.0);
        } else {
            std::vector<Value> pred;
            std::vector<double> labels;
            for (std::size_t k = start; k < end; ++k) {
                const auto& pair = data.train_pairs[order[k]];
                const auto fwd =
                    model.forward(tape, pair.s0, pair.s1, {}, cfg.dropout_enabled, rng);
                // the dot scorer is unbounded; squash it for cross-entropy
                pred.push_back(model.spec().scorer == models::ScorerKind::kDot
                                   ? ag::sigmoid(tape, fwd.score)
                                   : fwd.score);
                labels.push_back(pair.label);
            }
            loss = bce_loss(tape, pred, labels);
        }
        tape.backward(loss);
        add_l2_gradients(model.params(), cfg.l2_lambda);
        opt.step(model.params(), cfg.optimizer, cfg.frozen);
        loss_sum += loss->val[0] + l2_penalty(model.params(), cfg.l2_lambda);
        ++steps;
        start = end;
    }
    return steps ? loss_sum / static_cast<double>(steps) : 0.0;
}

}  // namespace

TrainResult train(models::Model& model, const PreparedData& data, const TrainConfig& cfg) {
    const bool group_training = data.ranking() && !data.train_pointwise;
    if (group_training && data.train_groups.empty())
        throw ConfigError("train: no training groups");
    if (!group_training && data.train_pairs.empty())
        throw ConfigError("train: no training pairs");
    const std::string metric = cfg.metric.empty() ? default_metric(data.head) : cfg.metric;
    Rng rng(cfg.seed);
    OptimizerState opt;
    TrainResult result;
    result.best_metric = -std::numeric_limits<double>::infinity();
    std::optional<ChunkSampler> sampler;
    if (group_training) sampler.emplace(data.train_groups.size(), rng);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double train_loss =
            group_training
                ? train_ranking_epoch(model, data, cfg, opt, *sampler, rng)
                : train_pointwise_epoch(model, data, cfg, opt, rng);
        const double val_metric =
            data.ranking()
                ? evaluate_metric(model, data.val_groups, metric)
                : evaluate_metric(model, data.val_pairs, data.head, metric);
        result.log.push_back({epoch, train_loss, val_metric});
        if (val_metric > result.best_metric) {
            result.best_metric = val_metric;
            result.best_epoch = epoch;
            result.best_params = clone_params(model.params());
        }
    }
    if (result.best_params.empty()) result.best_params = clone_params(model.params());
    return result;
}

std::vector<std::string> copy_matching_params(const ag::ParamSet& source,
                                              ag::ParamSet& target) {
    std::vector<std::string> copied;
    for (auto& [name, tgt] : target) {
        const auto it = source.find(name);
        if (it == source.end()) continue;
        if (it->second->shape != tgt->shape)
            throw TransferError("transfer: shape mismatch on layer '" + name + "'");
        tgt->val = it->second->val;
        copied.push_back(name);
    }
    return copied;
}

void apply_transfer(const ag::Checkpoint& source, models::Model& target,
                    const TransferConfig& tcfg, TrainConfig& cfg) {
    copy_matching_params(source.params, target.params());
    cfg.frozen.clear();
    for (const std::string& layer : tcfg.frozen_layers) {
        bool matched = false;
        for (const auto& [name, p] : target.params()) {
            if (name == layer || name.rfind(layer + ".", 0) == 0) {
                cfg.frozen.insert(name);
                matched = true;
            }
        }
        if (!matched)
            throw ConfigError("transfer: frozen layer '" + layer +
                              "' matches no target parameter");
    }
    cfg.optimizer.kind = tcfg.optimizer;
    const models::ModelSpec source_spec = models::ModelSpec::deserialize(source.header);
    if (!source_spec.dropout_enabled) cfg.dropout_enabled = false;
}

}  // namespace sps::train
