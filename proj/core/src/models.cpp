#include "sps/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sps::models {

using ag::Tape;
using ag::Value;

std::string to_string(EncoderKind k) {
    switch (k) {
        case EncoderKind::kAvg: return "avg";
        case EncoderKind::kDan: return "dan";
        case EncoderKind::kRnn: return "rnn";
        case EncoderKind::kCnn: return "cnn";
        case EncoderKind::kRnnCnn: return "rnn-cnn";
        case EncoderKind::kAttn1511: return "attn1511";
    }
    return "?";
}

std::string to_string(ScorerKind k) {
    return k == ScorerKind::kDot ? "dot" : "mlp";
}

std::string to_string(TaskHead k) {
    switch (k) {
        case TaskHead::kRanking: return "ranking";
        case TaskHead::kBinary: return "binary";
        case TaskHead::kSts: return "sts";
        case TaskHead::kRte3: return "rte3";
    }
    return "?";
}

EncoderKind encoder_from_string(const std::string& s) {
    if (s == "avg") return EncoderKind::kAvg;
    if (s == "dan") return EncoderKind::kDan;
    if (s == "rnn") return EncoderKind::kRnn;
    if (s == "cnn") return EncoderKind::kCnn;
    if (s == "rnn-cnn") return EncoderKind::kRnnCnn;
    if (s == "attn1511") return EncoderKind::kAttn1511;
    throw ConfigError("unknown encoder kind: " + s);
}

ScorerKind scorer_from_string(const std::string& s) {
    if (s == "dot") return ScorerKind::kDot;
    if (s == "mlp") return ScorerKind::kMlp;
    throw ConfigError("unknown scorer kind: " + s);
}

TaskHead head_from_string(const std::string& s) {
    if (s == "ranking") return TaskHead::kRanking;
    if (s == "binary") return TaskHead::kBinary;
    if (s == "sts") return TaskHead::kSts;
    if (s == "rte3") return TaskHead::kRte3;
    throw ConfigError("unknown task head: " + s);
}

void ModelSpec::resolve() {
    if (embed_dim == 0) throw ConfigError("model: embed_dim must be positive");
    if (projection_dim == 0) projection_dim = 2 * embed_dim;
    if (rnn_units == 0) {
        rnn_units = (encoder == EncoderKind::kRnn) ? 2 * embed_dim : embed_dim;
    }
    const bool uses_conv_bank =
        encoder == EncoderKind::kCnn || encoder == EncoderKind::kRnnCnn ||
        encoder == EncoderKind::kAttn1511;
    if (uses_conv_bank && embed_dim % 2 != 0)
        throw ConfigError("model: conv-bank encoders need an even embedding width");
    if (input_dropout < 0.0) {
        switch (encoder) {
            case EncoderKind::kAvg:
            case EncoderKind::kDan: input_dropout = 1.0 / 3.0; break;
            case EncoderKind::kRnn: input_dropout = 0.8; break;
            default: input_dropout = 0.0; break;
        }
    }
    if (output_dropout < 0.0) {
        output_dropout = encoder == EncoderKind::kRnn ? 0.8 : 0.0;
    }
    if (encoder == EncoderKind::kAttn1511) {
        siamese = false;  // the convolutional stages are never shared
        if (scorer != ScorerKind::kMlp)
            throw ConfigError("model: attn1511 requires the mlp scorer");
    }
    if ((head == TaskHead::kSts || head == TaskHead::kRte3) &&
        scorer != ScorerKind::kMlp)
        throw ConfigError("model: sts/rte heads require the mlp scorer");
    if (scorer == ScorerKind::kDot && use_bm25_feature)
        throw ConfigError("model: the dot scorer takes no extra inputs");
}

std::string ModelSpec::serialize() const {
    std::ostringstream out;
    out << "encoder = " << to_string(encoder) << "\n";
    out << "embed_dim = " << embed_dim << "\n";
    out << "vocab_size = " << vocab_size << "\n";
    out << "input_dropout = " << input_dropout << "\n";
    out << "output_dropout = " << output_dropout << "\n";
    out << "siamese = " << (siamese ? 1 : 0) << "\n";
    out << "projection_dim = " << projection_dim << "\n";
    out << "scorer = " << to_string(scorer) << "\n";
    out << "use_bm25_feature = " << (use_bm25_feature ? 1 : 0) << "\n";
    out << "head = " << to_string(head) << "\n";
    out << "pad_len = " << pad_len << "\n";
    out << "rnn_units = " << rnn_units << "\n";
    out << "dropout_enabled = " << (dropout_enabled ? 1 : 0) << "\n";
    return out.str();
}

ModelSpec ModelSpec::deserialize(const std::string& text) {
    ModelSpec spec;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "encoder") spec.encoder = encoder_from_string(value);
        else if (key == "embed_dim") spec.embed_dim = std::stoul(value);
        else if (key == "vocab_size") spec.vocab_size = std::stoul(value);
        else if (key == "input_dropout") spec.input_dropout = std::stod(value);
        else if (key == "output_dropout") spec.output_dropout = std::stod(value);
        else if (key == "siamese") spec.siamese = value != "0";
        else if (key == "projection_dim") spec.projection_dim = std::stoul(value);
        else if (key == "scorer") spec.scorer = scorer_from_string(value);
        else if (key == "use_bm25_feature") spec.use_bm25_feature = value != "0";
        else if (key == "head") spec.head = head_from_string(value);
        else if (key == "pad_len") spec.pad_len = std::stoul(value);
        else if (key == "rnn_units") spec.rnn_units = std::stoul(value);
        else if (key == "dropout_enabled") spec.dropout_enabled = value != "0";
        else throw ConfigError("model spec: unknown key " + key);
    }
    return spec;
}

Value gru_step(Tape& tape, const Value& x, const Value& h,
               const Value& wz, const Value& uz, const Value& bz,
               const Value& wr, const Value& ur, const Value& br,
               const Value& wh, const Value& uh, const Value& bh) {
    using namespace ag;
    Value z = sigmoid(tape, add(tape, matvec(tape, wz, x),
                                add(tape, matvec(tape, uz, h), bz)));
    Value r = sigmoid(tape, add(tape, matvec(tape, wr, x),
                                add(tape, matvec(tape, ur, h), br)));
    Value candidate = tanh_op(
        tape, add(tape, matvec(tape, wh, x),
                  add(tape, matvec(tape, uh, mul(tape, r, h)), bh)));
    // h' = (1 - z) * h + z * candidate
    return add(tape, mul(tape, affine(tape, z, -1.0, 1.0), h),
               mul(tape, z, candidate));
}

namespace {

bool is_bias_name(const std::string& name) {
    const auto dot = name.find_last_of('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    return !leaf.empty() && leaf[0] == 'b';
}

std::size_t num_flags_extras(const ModelSpec& spec) {
    return spec.use_bm25_feature ? 1 : 0;
}

}  // namespace

Model::Model(ModelSpec spec, ag::ParamSet params)
    : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.resolve();
}

Model Model::init(ModelSpec spec, const textprep::Vocabulary& vocab, Rng& rng) {
    spec.resolve();
    spec.vocab_size = vocab.size();
    if (spec.embed_dim != vocab.dim())
        throw ConfigError("model: embed_dim " + std::to_string(spec.embed_dim) +
                          " does not match vocabulary dim " + std::to_string(vocab.dim()));

    const std::size_t n = spec.embed_dim;
    const std::size_t c_in = spec.input_width();
    const std::size_t p_dim = spec.projection_dim;
    const std::size_t h = spec.rnn_units;

    ag::ParamSet params;
    auto declare = [&params](const std::string& name, std::vector<std::size_t> shape) {
        std::size_t count = 1;
        for (std::size_t e : shape) count *= e;
        params.emplace(name, ag::make_param(std::move(shape), std::vector<double>(count, 0.0)));
    };
    auto declare_gru = [&](const std::string& prefix, std::size_t in_width) {
        for (const char* gate : {"z", "r", "h"}) {
            declare(prefix + ".W" + gate, {h, in_width});
            declare(prefix + ".U" + gate, {h, h});
            declare(prefix + ".b" + gate, {h});
        }
    };
    auto declare_conv_bank = [&](const std::string& prefix, std::size_t bank_in) {
        declare(prefix + ".w1.F", {1, bank_in, n});
        declare(prefix + ".w1.b", {n});
        for (std::size_t w = 2; w <= 5; ++w) {
            declare(prefix + ".w" + std::to_string(w) + ".F", {w, bank_in, n / 2});
            declare(prefix + ".w" + std::to_string(w) + ".b", {n / 2});
        }
    };

    std::size_t enc_out = 0;
    switch (spec.encoder) {
        case EncoderKind::kAvg:
            enc_out = c_in;
            break;
        case EncoderKind::kDan:
            declare("dan.W1", {c_in, c_in});
            declare("dan.b1", {c_in});
            declare("dan.W2", {c_in, c_in});
            declare("dan.b2", {c_in});
            enc_out = c_in;
            break;
        case EncoderKind::kRnn:
            declare_gru("gru.fwd", c_in);
            declare_gru("gru.bwd", c_in);
            enc_out = h;
            break;
        case EncoderKind::kCnn:
            declare_conv_bank("cnn", c_in);
            enc_out = 3 * n;
            break;
        case EncoderKind::kRnnCnn:
            declare_gru("gru.fwd", c_in);
            declare_gru("gru.bwd", c_in);
            declare_conv_bank("cnn", 2 * h);
            enc_out = 3 * n;
            break;
        case EncoderKind::kAttn1511:
            declare_gru("gru.fwd", c_in);
            declare_gru("gru.bwd", c_in);
            declare_conv_bank("cnn", 2 * h);
            enc_out = 3 * n;
            declare("attn.P", {2 * h, p_dim});
            declare("attn.w", {2 * h});
            declare("attn.conv.F", {3, 2 * h, p_dim});
            declare("attn.conv.b", {p_dim});
            break;
    }
    declare("proj.U", {p_dim, enc_out});
    declare("proj.b", {p_dim});

    if (spec.scorer == ScorerKind::kMlp) {
        const std::size_t feat = 2 * p_dim + num_flags_extras(spec);
        const std::size_t hidden = 2 * n;
        std::size_t out_width = 1;
        if (spec.head == TaskHead::kSts) out_width = 5;
        if (spec.head == TaskHead::kRte3) out_width = 3;
        declare("mlp.W1", {hidden, feat});
        declare("mlp.b1", {hidden});
        declare("mlp.W2", {out_width, hidden});
        declare("mlp.b2", {out_width});
    }

    // Embedding rows come from the vocabulary; everything else Glorot uniform.
    {
        std::vector<double> emb(vocab.size() * n);
        for (std::size_t v = 0; v < vocab.size(); ++v) {
            const auto& row = vocab.row(v);
            for (std::size_t d = 0; d < n; ++d)
                emb[v * n + d] = ag::snap_f32(row[d]);
        }
        params.emplace("embed", ag::make_param({vocab.size(), n}, std::move(emb)));
    }

    // Sorted iteration keeps RNG consumption deterministic across runs.
    for (auto& [name, tensor] : params) {
        if (name == "embed" || is_bias_name(name)) continue;
        std::size_t fan_in = 1, fan_out = 1;
        if (tensor->shape.size() == 2) {
            fan_out = tensor->shape[0];
            fan_in = tensor->shape[1];
        } else if (tensor->shape.size() == 3) {
            fan_in = tensor->shape[0] * tensor->shape[1];
            fan_out = tensor->shape[2];
        } else {
            fan_in = tensor->shape[0];
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : tensor->val)
            v = ag::snap_f32(rng.uniform(-bound, bound));
    }
    return Model(std::move(spec), std::move(params));
}

const Value& Model::p(const std::string& name) const {
    const auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("model: missing parameter " + name);
    return it->second;
}

Value Model::embed_input(Tape& tape, const textprep::EmbeddedSequence& s) const {
    if (s.token_indices.empty())
        throw DegenerateInputError("encoder: empty sentence");
    return ag::embed_tokens(tape, p("embed"), s);
}

Value Model::project(Tape& tape, const Value& raw, bool relu_proj) const {
    Value pre = ag::add(tape, ag::matvec(tape, p("proj.U"), raw), p("proj.b"));
    return relu_proj ? ag::relu(tape, pre) : ag::tanh_op(tape, pre);
}

Value Model::encode_avg(Tape& tape, const textprep::EmbeddedSequence& s,
                        bool train_mode, Rng& rng) const {
    Value seq = embed_input(tape, s);
    if (spec_.dropout_enabled) {
        seq = ag::dropout(tape, seq, spec_.input_dropout,
                          train_mode ? ag::DropoutMode::kTrain : ag::DropoutMode::kEval,
                          ag::DropoutGranularity::kElement, rng);
    }
    Value mean = ag::masked_mean(tape, seq, s.mask);
    return project(tape, mean, /*relu_proj=*/false);
}

Value Model::encode_dan(Tape& tape, const textprep::EmbeddedSequence& s,
                        bool train_mode, Rng& rng) const {
    Value seq = embed_input(tape, s);
    if (spec_.dropout_enabled) {
        seq = ag::dropout(tape, seq, spec_.input_dropout,
                          train_mode ? ag::DropoutMode::kTrain : ag::DropoutMode::kEval,
                          ag::DropoutGranularity::kToken, rng);
    }
    Value x = ag::masked_mean(tape, seq, s.mask);
    x = ag::relu(tape, ag::add(tape, ag::matvec(tape, p("dan.W1"), x), p("dan.b1")));
    x = ag::relu(tape, ag::add(tape, ag::matvec(tape, p("dan.W2"), x), p("dan.b2")));
    return project(tape, x, /*relu_proj=*/true);
}

Value Model::gru_pass(Tape& tape, const Value& seq, const std::vector<double>& mask,
                      const std::string& prefix, std::size_t units, bool reverse,
                      std::vector<Value>* states) const {
    std::size_t len = 0;
    for (double m : mask) len += (m != 0.0) ? 1 : 0;
    if (len == 0) throw DegenerateInputError("gru: empty sentence");
    const Value& wz = p(prefix + ".Wz");
    const Value& uz = p(prefix + ".Uz");
    const Value& bz = p(prefix + ".bz");
    const Value& wr = p(prefix + ".Wr");
    const Value& ur = p(prefix + ".Ur");
    const Value& br = p(prefix + ".br");
    const Value& wh = p(prefix + ".Wh");
    const Value& uh = p(prefix + ".Uh");
    const Value& bh = p(prefix + ".bh");
    Value h = ag::make_leaf({units}, std::vector<double>(units, 0.0));
    if (states) states->assign(len, nullptr);
    for (std::size_t step = 0; step < len; ++step) {
        const std::size_t t = reverse ? len - 1 - step : step;
        Value x = ag::row(tape, seq, t);
        h = gru_step(tape, x, h, wz, uz, bz, wr, ur, br, wh, uh, bh);
        if (states) (*states)[t] = h;
    }
    return h;
}

Model::GruOut Model::run_bigru(Tape& tape, const Value& seq,
                               const std::vector<double>& mask,
                               const std::string& prefix, std::size_t units) const {
    std::vector<Value> fwd_states, bwd_states;
    Value fwd_final = gru_pass(tape, seq, mask, prefix + ".fwd", units, false, &fwd_states);
    Value bwd_final = gru_pass(tape, seq, mask, prefix + ".bwd", units, true, &bwd_states);
    GruOut out;
    out.final_sum = ag::add(tape, fwd_final, bwd_final);
    std::vector<Value> rows(fwd_states.size());
    for (std::size_t t = 0; t < fwd_states.size(); ++t)
        rows[t] = ag::concat(tape, {fwd_states[t], bwd_states[t]});
    out.token_states = ag::stack_rows(tape, rows);
    out.mask.assign(fwd_states.size(), 1.0);
    return out;
}

Value Model::encode_rnn(Tape& tape, const textprep::EmbeddedSequence& s,
                        bool train_mode, Rng& rng) const {
    Value seq = embed_input(tape, s);
    const auto mode = train_mode ? ag::DropoutMode::kTrain : ag::DropoutMode::kEval;
    if (spec_.dropout_enabled) {
        seq = ag::dropout(tape, seq, spec_.input_dropout, mode,
                          ag::DropoutGranularity::kElement, rng);
    }
    Value fwd = gru_pass(tape, seq, s.mask, "gru.fwd", spec_.rnn_units, false, nullptr);
    Value bwd = gru_pass(tape, seq, s.mask, "gru.bwd", spec_.rnn_units, true, nullptr);
    Value raw = ag::add(tape, fwd, bwd);
    if (spec_.dropout_enabled) {
        raw = ag::dropout(tape, raw, spec_.output_dropout, mode,
                          ag::DropoutGranularity::kElement, rng);
    }
    return project(tape, raw, /*relu_proj=*/false);
}

Value Model::conv_bank(Tape& tape, const Value& seq, const std::vector<double>& mask,
                       const std::string& prefix) const {
    std::vector<Value> pooled;
    for (std::size_t w = 1; w <= 5; ++w) {
        const std::string base = prefix + ".w" + std::to_string(w);
        Value conv = ag::conv1d(tape, seq, p(base + ".F"), p(base + ".b"));
        Value act = ag::relu(tape, conv);
        pooled.push_back(ag::max_over_time(tape, act, mask));
    }
    return ag::concat(tape, pooled);
}

Value Model::encode_cnn(Tape& tape, const textprep::EmbeddedSequence& s, bool,
                        Rng&) const {
    Value seq = embed_input(tape, s);
    Value pooled = conv_bank(tape, seq, s.mask, "cnn");
    return project(tape, pooled, /*relu_proj=*/false);
}

Value Model::encode_rnn_cnn(Tape& tape, const textprep::EmbeddedSequence& s, bool,
                            Rng&) const {
    Value seq = embed_input(tape, s);
    GruOut gru = run_bigru(tape, seq, s.mask, "gru", spec_.rnn_units);
    Value pooled = conv_bank(tape, gru.token_states, gru.mask, "cnn");
    return project(tape, pooled, /*relu_proj=*/false);
}

Value Model::encode(Tape& tape, const textprep::EmbeddedSequence& s, bool train_mode,
                    Rng& rng) const {
    switch (spec_.encoder) {
        case EncoderKind::kAvg: return encode_avg(tape, s, train_mode, rng);
        case EncoderKind::kDan: return encode_dan(tape, s, train_mode, rng);
        case EncoderKind::kRnn: return encode_rnn(tape, s, train_mode, rng);
        case EncoderKind::kCnn: return encode_cnn(tape, s, train_mode, rng);
        case EncoderKind::kRnnCnn: return encode_rnn_cnn(tape, s, train_mode, rng);
        case EncoderKind::kAttn1511:
            throw ConfigError("attn1511 has no symmetric encoder; use forward()");
    }
    throw ConfigError("unknown encoder");
}

Value Model::scorer_features(Tape& tape, const Value& e0, const Value& e1,
                             const std::vector<double>& extras) const {
    if (e0->shape != e1->shape)
        throw ShapeError("scorer: sentence embedding widths differ");
    std::vector<Value> parts = {ag::mul(tape, e0, e1), ag::add(tape, e0, e1)};
    if (!extras.empty())
        parts.push_back(ag::make_leaf({extras.size()}, extras));
    return ag::concat(tape, parts);
}

Value Model::mlp_hidden(Tape& tape, const Value& features) const {
    return ag::relu(tape,
                    ag::add(tape, ag::matvec(tape, p("mlp.W1"), features), p("mlp.b1")));
}

Value Model::attn_score_path(Tape& tape, const textprep::EmbeddedSequence& s0,
                             const textprep::EmbeddedSequence& s1,
                             const std::vector<double>& extras, bool train_mode,
                             Rng& rng) const {
    Value e0 = encode_rnn_cnn(tape, s0, train_mode, rng);
    Value seq1 = embed_input(tape, s1);
    GruOut gru = run_bigru(tape, seq1, s1.mask, "gru", spec_.rnn_units);
    // attention logit per token: w . (t_j * P e0)
    Value cond = ag::matvec(tape, p("attn.P"), e0);
    Value conditioned = ag::scale_cols(tape, gru.token_states, cond);
    Value logits = ag::matvec(tape, conditioned, p("attn.w"));
    Value alpha = ag::masked_softmax(tape, logits, gru.mask);
    Value focused = ag::scale_rows(tape, gru.token_states, alpha);
    Value conv = ag::relu(tape, ag::conv1d(tape, focused, p("attn.conv.F"),
                                           p("attn.conv.b")));
    Value pooled = ag::max_over_time(tape, conv, gru.mask);  // not projected
    return scorer_features(tape, e0, pooled, extras);
}

Forward Model::forward(Tape& tape, const textprep::EmbeddedSequence& s0,
                       const textprep::EmbeddedSequence& s1,
                       const std::vector<double>& extras, bool train_mode,
                       Rng& rng) const {
    Forward out;
    Value features;
    if (spec_.encoder == EncoderKind::kAttn1511) {
        features = attn_score_path(tape, s0, s1, extras, train_mode, rng);
    } else if (spec_.scorer == ScorerKind::kDot &&
               (spec_.head == TaskHead::kRanking || spec_.head == TaskHead::kBinary)) {
        Value e0 = encode(tape, s0, train_mode, rng);
        Value e1 = encode(tape, s1, train_mode, rng);
        out.score = ag::dot(tape, e0, e1);
        return out;
    } else {
        Value e0 = encode(tape, s0, train_mode, rng);
        Value e1 = encode(tape, s1, train_mode, rng);
        features = scorer_features(tape, e0, e1, extras);
    }
    Value hidden = mlp_hidden(tape, features);
    Value logits = ag::add(tape, ag::matvec(tape, p("mlp.W2"), hidden), p("mlp.b2"));
    switch (spec_.head) {
        case TaskHead::kRanking:
        case TaskHead::kBinary:
            out.score = ag::sum_all(tape, ag::sigmoid(tape, logits));
            break;
        case TaskHead::kSts: {
            out.class_dist =
                ag::masked_softmax(tape, logits, std::vector<double>(5, 1.0));
            out.sts_value = ag::dot_const(tape, out.class_dist, {1, 2, 3, 4, 5});
            break;
        }
        case TaskHead::kRte3:
            out.class_dist =
                ag::masked_softmax(tape, logits, std::vector<double>(3, 1.0));
            break;
    }
    return out;
}

}  // namespace sps::models
