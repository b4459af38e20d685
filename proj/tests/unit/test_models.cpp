#include <doctest.h>

#include <cmath>

#include "sps/errors.hpp"
#include "sps/models.hpp"

using namespace sps;
using namespace sps::models;

namespace {

textprep::Vocabulary small_vocab(std::size_t dim, std::uint64_t seed = 42) {
    textprep::Vocabulary vocab(dim, seed);
    for (const char* w : {"alpha", "beta", "gamma", "delta", "eps", "zeta"})
        vocab.add_unknown(w);
    return vocab;
}

textprep::EmbeddedSequence prepare(const std::string& text,
                                   textprep::Vocabulary& vocab, std::size_t pad_len) {
    auto s = textprep::tokenize(text);
    textprep::assign_indices(s, vocab);
    return textprep::embed_sequence(s, vocab, pad_len);
}

}  // namespace

TEST_CASE("gru_step with all-zero weights halves the previous state") {
    // z = sigmoid(0) = 1/2, candidate = tanh(0) = 0, so h' = (1-z) h = h/2
    ag::Tape tape;
    const std::size_t h = 2, c = 3;
    auto zeros = [](std::vector<std::size_t> shape) {
        std::size_t n = 1;
        for (std::size_t e : shape) n *= e;
        return ag::make_param(std::move(shape), std::vector<double>(n, 0.0));
    };
    ag::Value x = ag::make_leaf({c}, {1.0, -2.0, 3.0});
    ag::Value state = ag::make_leaf({h}, {1.0, 2.0});
    ag::Value next = gru_step(tape, x, state, zeros({h, c}), zeros({h, h}), zeros({h}),
                              zeros({h, c}), zeros({h, h}), zeros({h}), zeros({h, c}),
                              zeros({h, h}), zeros({h}));
    CHECK(next->val[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(next->val[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spec resolution fills encoder-specific defaults") {
    ModelSpec avg;
    avg.embed_dim = 10;
    avg.resolve();
    CHECK(avg.projection_dim == 20);
    CHECK(avg.input_dropout == doctest::Approx(1.0 / 3.0));
    CHECK(avg.output_dropout == 0.0);

    ModelSpec rnn;
    rnn.encoder = EncoderKind::kRnn;
    rnn.embed_dim = 10;
    rnn.resolve();
    CHECK(rnn.rnn_units == 20);
    CHECK(rnn.input_dropout == doctest::Approx(0.8));
    CHECK(rnn.output_dropout == doctest::Approx(0.8));

    ModelSpec rc;
    rc.encoder = EncoderKind::kRnnCnn;
    rc.embed_dim = 10;
    rc.resolve();
    CHECK(rc.rnn_units == 10);
    CHECK(rc.input_dropout == 0.0);
}

TEST_CASE("spec resolution rejects invalid combinations") {
    ModelSpec odd;
    odd.encoder = EncoderKind::kCnn;
    odd.embed_dim = 7;
    CHECK_THROWS_AS(odd.resolve(), ConfigError);

    ModelSpec attn_dot;
    attn_dot.encoder = EncoderKind::kAttn1511;
    attn_dot.embed_dim = 8;
    attn_dot.scorer = ScorerKind::kDot;
    CHECK_THROWS_AS(attn_dot.resolve(), ConfigError);

    ModelSpec sts_dot;
    sts_dot.embed_dim = 8;
    sts_dot.head = TaskHead::kSts;
    sts_dot.scorer = ScorerKind::kDot;
    CHECK_THROWS_AS(sts_dot.resolve(), ConfigError);

    ModelSpec dot_bm25;
    dot_bm25.embed_dim = 8;
    dot_bm25.scorer = ScorerKind::kDot;
    dot_bm25.use_bm25_feature = true;
    CHECK_THROWS_AS(dot_bm25.resolve(), ConfigError);
}

TEST_CASE("attn1511 is never siamese") {
    ModelSpec spec;
    spec.encoder = EncoderKind::kAttn1511;
    spec.embed_dim = 8;
    spec.siamese = true;
    spec.resolve();
    CHECK_FALSE(spec.siamese);
}

TEST_CASE("spec serialization round-trips every field") {
    ModelSpec spec;
    spec.encoder = EncoderKind::kRnnCnn;
    spec.embed_dim = 12;
    spec.head = TaskHead::kSts;
    spec.pad_len = 33;
    spec.dropout_enabled = false;
    spec.resolve();
    const ModelSpec back = ModelSpec::deserialize(spec.serialize());
    CHECK(back.encoder == spec.encoder);
    CHECK(back.embed_dim == spec.embed_dim);
    CHECK(back.projection_dim == spec.projection_dim);
    CHECK(back.rnn_units == spec.rnn_units);
    CHECK(back.head == spec.head);
    CHECK(back.pad_len == spec.pad_len);
    CHECK(back.dropout_enabled == spec.dropout_enabled);
    CHECK(back.input_dropout == spec.input_dropout);
}

TEST_CASE("init declares the documented shapes and float32-exact values") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.encoder = EncoderKind::kRnn;
    spec.embed_dim = 4;
    Rng rng(1);
    Model model = Model::init(spec, vocab, rng);
    const auto& params = model.params();
    CHECK(params.at("embed")->shape == std::vector<std::size_t>{6, 4});
    CHECK(params.at("gru.fwd.Wz")->shape == std::vector<std::size_t>{8, 8});  // H=2N, in=N+4
    CHECK(params.at("gru.bwd.Uh")->shape == std::vector<std::size_t>{8, 8});
    CHECK(params.at("proj.U")->shape == std::vector<std::size_t>{8, 8});
    CHECK(params.at("mlp.W1")->shape == std::vector<std::size_t>{8, 16});
    CHECK(params.at("mlp.W2")->shape == std::vector<std::size_t>{1, 8});
    for (const auto& [name, p] : params)
        for (double v : p->val) CHECK(ag::snap_f32(v) == v);
    // biases start at zero
    for (double v : params.at("gru.fwd.bz")->val) CHECK(v == 0.0);
}

TEST_CASE("init is deterministic for a fixed seed") {
    auto v1 = small_vocab(4), v2 = small_vocab(4);
    ModelSpec spec;
    spec.embed_dim = 4;
    Rng r1(9), r2(9), r3(10);
    Model a = Model::init(spec, v1, r1);
    Model b = Model::init(spec, v2, r2);
    Model c = Model::init(spec, v1, r3);
    for (const auto& [name, p] : a.params()) {
        CHECK(p->val == b.params().at(name)->val);
    }
    CHECK(a.params().at("proj.U")->val != c.params().at("proj.U")->val);
}

TEST_CASE("init rejects a vocabulary of the wrong width") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.embed_dim = 8;
    Rng rng(1);
    CHECK_THROWS_AS(Model::init(spec, vocab, rng), ConfigError);
}

TEST_CASE("siamese mlp scoring is symmetric in its two sentences") {
    auto vocab = small_vocab(4);
    for (EncoderKind kind : {EncoderKind::kAvg, EncoderKind::kDan, EncoderKind::kRnn,
                             EncoderKind::kCnn, EncoderKind::kRnnCnn}) {
        ModelSpec spec;
        spec.encoder = kind;
        spec.embed_dim = 4;
        spec.pad_len = 6;
        spec.dropout_enabled = false;
        Rng rng(5);
        Model model = Model::init(spec, vocab, rng);
        const auto s0 = prepare("alpha beta gamma", vocab, 6);
        const auto s1 = prepare("delta eps", vocab, 6);
        ag::Tape t1, t2;
        Rng fr(0);
        const double ab = model.forward(t1, s0, s1, {}, false, fr).score->val[0];
        const double ba = model.forward(t2, s1, s0, {}, false, fr).score->val[0];
        CHECK(ab == ba);
    }
}

TEST_CASE("encodings are invariant to trailing padding") {
    auto vocab = small_vocab(4);
    for (EncoderKind kind : {EncoderKind::kAvg, EncoderKind::kRnn, EncoderKind::kCnn}) {
        ModelSpec spec;
        spec.encoder = kind;
        spec.embed_dim = 4;
        spec.dropout_enabled = false;
        Rng rng(5);
        Model model = Model::init(spec, vocab, rng);
        const auto short_pad = prepare("alpha beta gamma", vocab, 5);
        const auto long_pad = prepare("alpha beta gamma", vocab, 12);
        ag::Tape t1, t2;
        Rng fr(0);
        const auto a = model.encode(t1, short_pad, false, fr);
        const auto b = model.encode(t2, long_pad, false, fr);
        for (std::size_t i = 0; i < a->val.size(); ++i)
            CHECK(a->val[i] == doctest::Approx(b->val[i]).epsilon(1e-12));
    }
}

TEST_CASE("dot scorer returns the raw embedding dot product") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.embed_dim = 4;
    spec.scorer = ScorerKind::kDot;
    spec.dropout_enabled = false;
    Rng rng(2);
    Model model = Model::init(spec, vocab, rng);
    const auto s0 = prepare("alpha beta", vocab, 6);
    const auto s1 = prepare("gamma delta", vocab, 6);
    ag::Tape tape;
    Rng fr(0);
    const auto fwd = model.forward(tape, s0, s1, {}, false, fr);
    ag::Tape t2;
    const auto e0 = model.encode(t2, s0, false, fr);
    const auto e1 = model.encode(t2, s1, false, fr);
    double expect = 0.0;
    for (std::size_t i = 0; i < e0->val.size(); ++i) expect += e0->val[i] * e1->val[i];
    CHECK(fwd.score->val[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sts head produces a 5-way distribution and interpolated value") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.embed_dim = 4;
    spec.head = TaskHead::kSts;
    spec.dropout_enabled = false;
    Rng rng(3);
    Model model = Model::init(spec, vocab, rng);
    const auto s0 = prepare("alpha beta", vocab, 6);
    const auto s1 = prepare("beta gamma", vocab, 6);
    ag::Tape tape;
    Rng fr(0);
    const auto fwd = model.forward(tape, s0, s1, {}, false, fr);
    REQUIRE(fwd.class_dist->val.size() == 5);
    double sum = 0.0, interp = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        sum += fwd.class_dist->val[k];
        interp += fwd.class_dist->val[k] * static_cast<double>(k + 1);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fwd.sts_value->val[0] == doctest::Approx(interp).epsilon(1e-12));
    CHECK(fwd.sts_value->val[0] >= 1.0);
    CHECK(fwd.sts_value->val[0] <= 5.0);
}

TEST_CASE("rte head produces a 3-way distribution") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.embed_dim = 4;
    spec.head = TaskHead::kRte3;
    spec.dropout_enabled = false;
    Rng rng(3);
    Model model = Model::init(spec, vocab, rng);
    const auto s0 = prepare("alpha", vocab, 6);
    const auto s1 = prepare("beta", vocab, 6);
    ag::Tape tape;
    Rng fr(0);
    const auto fwd = model.forward(tape, s0, s1, {}, false, fr);
    REQUIRE(fwd.class_dist->val.size() == 3);
    double sum = 0.0;
    for (double v : fwd.class_dist->val) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("attn1511 forward produces a sigmoid-bounded ranking score") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.encoder = EncoderKind::kAttn1511;
    spec.embed_dim = 4;
    spec.pad_len = 6;
    spec.dropout_enabled = false;
    Rng rng(4);
    Model model = Model::init(spec, vocab, rng);
    const auto s0 = prepare("alpha beta gamma", vocab, 6);
    const auto s1 = prepare("beta delta", vocab, 6);
    ag::Tape tape;
    Rng fr(0);
    const auto fwd = model.forward(tape, s0, s1, {}, false, fr);
    CHECK(fwd.score->val[0] > 0.0);
    CHECK(fwd.score->val[0] < 1.0);
    CHECK_THROWS_AS(model.encode(tape, s0, false, fr), ConfigError);
}

TEST_CASE("encoders reject empty sentences") {
    auto vocab = small_vocab(4);
    ModelSpec spec;
    spec.embed_dim = 4;
    spec.dropout_enabled = false;
    Rng rng(1);
    Model model = Model::init(spec, vocab, rng);
    textprep::EmbeddedSequence empty;
    empty.rows = 4;
    empty.cols = 8;
    empty.values.assign(32, 0.0);
    empty.mask.assign(4, 0.0);
    ag::Tape tape;
    Rng fr(0);
    CHECK_THROWS_AS(model.encode(tape, empty, false, fr), DegenerateInputError);
}
