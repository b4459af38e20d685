#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sps/ops.hpp"
#include "sps/tensor.hpp"
#include "sps/textprep.hpp"

namespace sps::models {

enum class EncoderKind { kAvg, kDan, kRnn, kCnn, kRnnCnn, kAttn1511 };
enum class ScorerKind { kDot, kMlp };
enum class TaskHead { kRanking, kBinary, kSts, kRte3 };

std::string to_string(EncoderKind k);
std::string to_string(ScorerKind k);
std::string to_string(TaskHead k);
EncoderKind encoder_from_string(const std::string& s);
ScorerKind scorer_from_string(const std::string& s);
TaskHead head_from_string(const std::string& s);

// Architecture configuration. Zero-valued size fields mean "use the
// encoder's default" and are materialized by resolve().
struct ModelSpec {
    EncoderKind encoder = EncoderKind::kAvg;
    std::size_t embed_dim = 300;   // N
    std::size_t vocab_size = 0;    // V, filled from the vocabulary at init
    double input_dropout = -1.0;   // -1 = encoder default
    double output_dropout = -1.0;
    bool siamese = true;
    std::size_t projection_dim = 0;  // default 2N
    ScorerKind scorer = ScorerKind::kMlp;
    bool use_bm25_feature = false;
    TaskHead head = TaskHead::kRanking;
    std::size_t pad_len = 60;
    std::size_t rnn_units = 0;  // per direction; default 2N (rnn) / N (rnn-cnn, attn)
    bool dropout_enabled = true;

    // Fills defaulted fields and validates cross-field constraints.
    void resolve();

    std::string serialize() const;  // flat key=value lines
    static ModelSpec deserialize(const std::string& text);

    std::size_t input_width() const { return embed_dim + textprep::kFlagDims; }
};

// One sentence's encoder output plus (for attn1511) the per-token recurrent
// representation it was built from.
struct SentenceEncoding {
    ag::Value embedding;  // projected sentence vector
};

struct Forward {
    ag::Value score;               // scalar; sigmoid prob for mlp, raw for dot
    ag::Value class_dist;          // K-way distribution for sts/rte heads
    ag::Value sts_value;           // interpolated score in [1,5], sts head only
};

class Model {
  public:
    Model(ModelSpec spec, ag::ParamSet params);

    // Fresh parameters; embedding rows copied from the vocabulary.
    static Model init(ModelSpec spec, const textprep::Vocabulary& vocab, Rng& rng);

    const ModelSpec& spec() const { return spec_; }
    ag::ParamSet& params() { return params_; }
    const ag::ParamSet& params() const { return params_; }

    Forward forward(ag::Tape& tape, const textprep::EmbeddedSequence& s0,
                    const textprep::EmbeddedSequence& s1,
                    const std::vector<double>& extras, bool train_mode, Rng& rng) const;

    // Siamese encoder path; not valid for attn1511 (whose two sentences take
    // different paths inside forward()).
    ag::Value encode(ag::Tape& tape, const textprep::EmbeddedSequence& s,
                     bool train_mode, Rng& rng) const;

  private:
    ModelSpec spec_;
    ag::ParamSet params_;

    const ag::Value& p(const std::string& name) const;

    ag::Value embed_input(ag::Tape& tape, const textprep::EmbeddedSequence& s) const;
    ag::Value encode_avg(ag::Tape& tape, const textprep::EmbeddedSequence& s,
                         bool train_mode, Rng& rng) const;
    ag::Value encode_dan(ag::Tape& tape, const textprep::EmbeddedSequence& s,
                         bool train_mode, Rng& rng) const;
    ag::Value encode_rnn(ag::Tape& tape, const textprep::EmbeddedSequence& s,
                         bool train_mode, Rng& rng) const;
    ag::Value encode_cnn(ag::Tape& tape, const textprep::EmbeddedSequence& s,
                         bool train_mode, Rng& rng) const;
    ag::Value encode_rnn_cnn(ag::Tape& tape, const textprep::EmbeddedSequence& s,
                             bool train_mode, Rng& rng) const;

    // Bidirectional GRU; returns per-token states (L x 2H) and the sum of
    // final states (H vector).
    struct GruOut {
        ag::Value token_states;  // len x 2H (unpadded rows only)
        ag::Value final_sum;     // H
        std::vector<double> mask;  // length len, all ones
    };
    GruOut run_bigru(ag::Tape& tape, const ag::Value& seq,
                     const std::vector<double>& mask, const std::string& prefix,
                     std::size_t units) const;
    ag::Value gru_pass(ag::Tape& tape, const ag::Value& seq,
                       const std::vector<double>& mask, const std::string& prefix,
                       std::size_t units, bool reverse,
                       std::vector<ag::Value>* states) const;

    ag::Value conv_bank(ag::Tape& tape, const ag::Value& seq,
                        const std::vector<double>& mask,
                        const std::string& prefix) const;
    ag::Value project(ag::Tape& tape, const ag::Value& raw, bool relu_proj) const;

    ag::Value scorer_features(ag::Tape& tape, const ag::Value& e0, const ag::Value& e1,
                              const std::vector<double>& extras) const;
    ag::Value mlp_hidden(ag::Tape& tape, const ag::Value& features) const;

    ag::Value attn_score_path(ag::Tape& tape, const textprep::EmbeddedSequence& s0,
                              const textprep::EmbeddedSequence& s1,
                              const std::vector<double>& extras, bool train_mode,
                              Rng& rng) const;
};

// GRU cell on plain vectors, exposed for unit testing.
ag::Value gru_step(ag::Tape& tape, const ag::Value& x, const ag::Value& h,
                   const ag::Value& wz, const ag::Value& uz, const ag::Value& bz,
                   const ag::Value& wr, const ag::Value& ur, const ag::Value& br,
                   const ag::Value& wh, const ag::Value& uh, const ag::Value& bh);

}  // namespace sps::models
