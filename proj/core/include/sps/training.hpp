#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sps/checkpoint.hpp"
#include "sps/datasets.hpp"
#include "sps/irbase.hpp"
#include "sps/models.hpp"
#include "sps/ops.hpp"
#include "sps/tensor.hpp"

namespace sps::train {

// --- objectives -----------------------------------------------------------

// Bipartite RankNet: mean over all within-group (positive, negative) pairs
// of ln(1 + exp(-(s_pos - s_neg))). `group_offsets` holds group start
// indices plus a final sentinel equal to scores.size().
ag::Value ranknet_loss(ag::Tape& tape, const std::vector<ag::Value>& scores,
                       const std::vector<double>& labels,
                       const std::vector<std::size_t>& group_offsets);

// 1 - Pearson r between predictions and constant gold values.
ag::Value pearson_loss(ag::Tape& tape, const std::vector<ag::Value>& pred,
                       const std::vector<double>& gold);

// Mean binary cross-entropy; predictions clamped to [1e-7, 1 - 1e-7].
ag::Value bce_loss(ag::Tape& tape, const std::vector<ag::Value>& pred,
                   const std::vector<double>& labels);

// -sum_k target_k ln(dist_k) for one K-way distribution.
ag::Value cross_entropy(ag::Tape& tape, const ag::Value& dist,
                        const std::vector<double>& target);

// Two-point target distribution over classes 1..K for a real gold score.
std::vector<double> interpolated_target(double gold, std::size_t classes);

// L2 penalty value over regularized parameters (dense / recurrent /
// convolutional weights; embeddings and biases excluded) and the matching
// gradient contribution 2*lambda*w added in place.
bool is_l2_regularized(const std::string& name);
double l2_penalty(const ag::ParamSet& params, double lambda);
void add_l2_gradients(ag::ParamSet& params, double lambda);

// --- optimizers -------------------------------------------------------------

enum class Optimizer { kAdam, kRmsprop };

struct OptimizerConfig {
    Optimizer kind = Optimizer::kAdam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;    // Adam
    double beta2 = 0.999;  // Adam
    double decay = 0.9;    // RMSprop
    double epsilon = 1e-8;
};

// Per-parameter moment slots, keyed like the ParamSet.
class OptimizerState {
  public:
    void step(ag::ParamSet& params, const OptimizerConfig& cfg,
              const std::set<std::string>& frozen = {});

  private:
    std::map<std::string, std::vector<double>> m_;
    std::map<std::string, std::vector<double>> v_;
    std::size_t t_ = 0;
};

// --- prepared data ----------------------------------------------------------

struct PreparedPair {
    textprep::EmbeddedSequence s0;
    textprep::EmbeddedSequence s1;
    double label = 0.0;
};

// Overlap flags are pair-specific, so each candidate carries its own copy of
// the s0 sequence.
struct PreparedGroup {
    std::vector<PreparedPair> pairs;
    std::vector<double> labels;
    std::vector<double> bm25;  // empty unless the bm25 feature is enabled
};

struct PreparedData {
    models::TaskHead head = models::TaskHead::kRanking;
    std::vector<PreparedGroup> train_groups, val_groups, test_groups;
    std::vector<PreparedPair> train_pairs, val_pairs, test_pairs;
    // Next-utterance style: pointwise (cross-entropy) training with grouped
    // ranking evaluation.
    bool train_pointwise = false;
    bool ranking() const { return head == models::TaskHead::kRanking; }
};

struct PrepareOptions {
    bool use_flags = true;
    bool bm25_feature = false;
    std::size_t prune_top_k = 0;  // 0 = no pruning; applied to training groups
    std::size_t pad_len = 60;
    textprep::StopwordSet stopwords = textprep::StopwordSet::builtin();
};

// Tokenized groups -> padded index/flag matrices. Registers unseen words
// with the vocabulary and, when requested, fits BM25 stats on the training
// split's candidate sentences.
PreparedData prepare_ranking(std::vector<data::PairGroup> train,
                             std::vector<data::PairGroup> val,
                             std::vector<data::PairGroup> test,
                             textprep::Vocabulary& vocab, const PrepareOptions& opts);

// Group preparation without BM25 fitting or pruning (evaluation splits).
std::vector<PreparedGroup> prepare_groups_simple(const std::vector<data::PairGroup>& groups,
                                                 textprep::Vocabulary& vocab,
                                                 const PrepareOptions& opts);

// Single pair preparation (flags, indices, padding).
PreparedPair prepare_one_pair(const textprep::TokenizedSentence& s0,
                              const textprep::TokenizedSentence& s1, double label,
                              textprep::Vocabulary& vocab, const PrepareOptions& opts);

PreparedData prepare_pairs(models::TaskHead head, std::vector<data::PairSample> train,
                           std::vector<data::PairSample> val,
                           std::vector<data::PairSample> test,
                           textprep::Vocabulary& vocab, const PrepareOptions& opts);

// --- training loop ----------------------------------------------------------

struct TrainConfig {
    OptimizerConfig optimizer;
    double l2_lambda = 1e-4;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 16;
    double epoch_fraction = 0.25;  // ranking tasks only
    std::string metric = "";       // default per task head
    std::uint64_t seed = 1;
    bool dropout_enabled = true;
    std::set<std::string> frozen;  // parameter names excluded from updates
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_metric = 0.0;
};

struct TrainResult {
    ag::ParamSet best_params;  // float32-exact snapshot of the best epoch
    double best_metric = 0.0;
    std::size_t best_epoch = 0;
    std::vector<EpochLog> log;
};

TrainResult train(models::Model& model, const PreparedData& data, const TrainConfig& cfg);

// Evaluates the named metric ("map", "mrr", "r@1", "r@2", "r@5", "pearson",
// "accuracy") on a split in eval mode.
double evaluate_metric(const models::Model& model, const std::vector<PreparedGroup>& groups,
                       const std::string& metric);
double evaluate_metric(const models::Model& model, const std::vector<PreparedPair>& pairs,
                       models::TaskHead head, const std::string& metric);

std::string default_metric(models::TaskHead head);

// Scores every candidate of every group in eval mode.
std::vector<std::vector<double>> score_groups(const models::Model& model,
                                              const std::vector<PreparedGroup>& groups);

// --- transfer ----------------------------------------------------------------

struct TransferConfig {
    std::string source_checkpoint;
    std::vector<std::string> frozen_layers;
    bool balance_labels = true;
    Optimizer optimizer = Optimizer::kRmsprop;
};

// Copies every parameter whose name exists in both sets; a name present in
// both with a different shape is a TransferError. Returns the copied names.
std::vector<std::string> copy_matching_params(const ag::ParamSet& source,
                                              ag::ParamSet& target);

// Applies the source checkpoint to the target model and adjusts the train
// config per the transfer rules (frozen layers, optimizer override, dropout
// off when the source was trained without it).
void apply_transfer(const ag::Checkpoint& source, models::Model& target,
                    const TransferConfig& tcfg, TrainConfig& cfg);

}  // namespace sps::train
