#include <doctest.h>

#include <cmath>

#include "sps/models.hpp"
#include "sps/training.hpp"

using namespace sps;
using namespace sps::train;

namespace {

ag::Value scalar_param(ag::ParamSet& params, const std::string& name, double v) {
    auto p = ag::make_param({}, {v});
    params.emplace(name, p);
    return p;
}

// Small synthetic ranking task: positives share a token with the query.
PreparedData tiny_ranking(textprep::Vocabulary& vocab) {
    PrepareOptions opts;
    opts.pad_len = 4;
    std::vector<data::PairGroup> groups;
    const char* queries[] = {"alpha question", "beta question", "gamma question"};
    const char* keys[] = {"alpha", "beta", "gamma"};
    for (std::size_t g = 0; g < 3; ++g) {
        data::PairGroup pg;
        pg.id = g;
        pg.s0_text = queries[g];
        pg.s0 = textprep::tokenize(queries[g]);
        const std::string pos = std::string(keys[g]) + " answer";
        const std::string neg1 = std::string(keys[(g + 1) % 3]) + " answer";
        const std::string neg2 = std::string(keys[(g + 2) % 3]) + " other";
        for (const auto& [text, label] :
             {std::pair{pos, 1.0}, std::pair{neg1, 0.0}, std::pair{neg2, 0.0}}) {
            pg.candidate_texts.push_back(text);
            pg.candidates.push_back(textprep::tokenize(text));
            pg.labels.push_back(label);
        }
        groups.push_back(std::move(pg));
    }
    return prepare_ranking(groups, groups, {}, vocab, opts);
}

}  // namespace

TEST_CASE("ranknet loss of a tied positive/negative pair is ln 2") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> scores = {scalar_param(params, "a", 0.3),
                                     scalar_param(params, "b", 0.3)};
    ag::Value loss = ranknet_loss(tape, scores, {1.0, 0.0}, {0, 2});
    CHECK(loss->val[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("ranknet loss matches softplus of the score margin") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> scores = {scalar_param(params, "a", 1.0),
                                     scalar_param(params, "b", 0.0)};
    ag::Value loss = ranknet_loss(tape, scores, {1.0, 0.0}, {0, 2});
    CHECK(loss->val[0] ==
          doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
    tape.backward(loss);
    CHECK(scores[0]->grad[0] < 0.0);  // pushing the positive up lowers the loss
    CHECK(scores[1]->grad[0] > 0.0);
    CHECK(scores[0]->grad[0] == doctest::Approx(-scores[1]->grad[0]).epsilon(1e-12));
}

TEST_CASE("ranknet averages over all bipartite pairs across groups") {
    ag::Tape tape;
    ag::ParamSet params;
    // group 1: pos 2.0, negs 1.0 and 0.0 -> pairs with margins 1 and 2
    // group 2: pos 0.5, neg 0.5 -> margin 0
    std::vector<ag::Value> scores = {
        scalar_param(params, "a", 2.0), scalar_param(params, "b", 1.0),
        scalar_param(params, "c", 0.0), scalar_param(params, "d", 0.5),
        scalar_param(params, "e", 0.5)};
    ag::Value loss = ranknet_loss(tape, scores, {1, 0, 0, 1, 0}, {0, 3, 5});
    const double expect = (std::log1p(std::exp(-1.0)) + std::log1p(std::exp(-2.0)) +
                           std::log(2.0)) / 3.0;
    CHECK(loss->val[0] == doctest::Approx(expect).epsilon(1e-12));
    // cross-group pairs are never formed: scores d,e only see the margin-0 pair
    tape.backward(loss);
    CHECK(scores[3]->grad[0] == doctest::Approx(-0.5 / 3.0).epsilon(1e-12));
}

TEST_CASE("ranknet validates its offsets") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> scores = {scalar_param(params, "a", 1.0)};
    CHECK_THROWS_AS(ranknet_loss(tape, scores, {1.0}, {0}), ConfigError);
    CHECK_THROWS_AS(ranknet_loss(tape, scores, {1.0}, {0, 2}), ConfigError);
    CHECK_THROWS_AS(ranknet_loss(tape, scores, {1.0, 0.0}, {0, 1}), ShapeError);
}

TEST_CASE("pearson loss is zero for a perfect linear fit") {
    ag::Tape tape;
    ag::ParamSet params;
    const std::vector<double> gold = {1.0, 2.0, 3.0, 4.0};
    std::vector<ag::Value> pred;
    for (std::size_t i = 0; i < 4; ++i)
        pred.push_back(scalar_param(params, "p" + std::to_string(i), 2.0 * gold[i] + 1.0));
    ag::Value loss = pearson_loss(tape, pred, gold);
    CHECK(loss->val[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pearson loss is 1 with zero gradient for constant predictions") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> pred = {scalar_param(params, "a", 0.7),
                                   scalar_param(params, "b", 0.7),
                                   scalar_param(params, "c", 0.7)};
    ag::Value loss = pearson_loss(tape, pred, {1.0, 2.0, 3.0});
    CHECK(loss->val[0] == 1.0);
    tape.backward(loss);
    for (const auto& p : pred) CHECK(p->grad[0] == 0.0);
}

TEST_CASE("pearson loss rejects constant gold") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> pred = {scalar_param(params, "a", 0.1),
                                   scalar_param(params, "b", 0.9)};
    CHECK_THROWS_AS(pearson_loss(tape, pred, {2.0, 2.0}), ConfigError);
}

TEST_CASE("bce loss matches the textbook value") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> pred = {scalar_param(params, "a", 0.9),
                                   scalar_param(params, "b", 0.2)};
    ag::Value loss = bce_loss(tape, pred, {1.0, 0.0});
    const double expect = -(std::log(0.9) + std::log(0.8)) / 2.0;
    CHECK(loss->val[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bce clamps extreme predictions and zeroes their gradient") {
    ag::Tape tape;
    ag::ParamSet params;
    std::vector<ag::Value> pred = {scalar_param(params, "a", 0.0),
                                   scalar_param(params, "b", 1.0)};
    ag::Value loss = bce_loss(tape, pred, {0.0, 1.0});
    CHECK(std::isfinite(loss->val[0]));
    tape.backward(loss);
    CHECK(pred[0]->grad[0] == 0.0);
    CHECK(pred[1]->grad[0] == 0.0);
}

TEST_CASE("cross entropy of a one-hot target is -log of the hit probability") {
    ag::Tape tape;
    ag::Value dist = ag::make_param({3}, {0.2, 0.5, 0.3});
    ag::Value loss = cross_entropy(tape, dist, {0.0, 1.0, 0.0});
    CHECK(loss->val[0] == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("interpolated targets split mass over adjacent classes") {
    const auto t = interpolated_target(2.3, 5);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(t[2] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(t[3] == 0.0);
    const auto exact = interpolated_target(4.0, 5);
    CHECK(exact[3] == 1.0);
    const auto top = interpolated_target(5.0, 5);
    CHECK(top[4] == 1.0);
    CHECK_THROWS_AS(interpolated_target(0.5, 5), DataError);
    CHECK_THROWS_AS(interpolated_target(5.1, 5), DataError);
}

TEST_CASE("l2 regularization skips embeddings and biases") {
    CHECK(is_l2_regularized("mlp.W1"));
    CHECK(is_l2_regularized("gru.fwd.Uh"));
    CHECK(is_l2_regularized("attn.w"));
    CHECK_FALSE(is_l2_regularized("embed"));
    CHECK_FALSE(is_l2_regularized("mlp.b1"));
    CHECK_FALSE(is_l2_regularized("gru.fwd.bz"));
    CHECK_FALSE(is_l2_regularized("proj.b"));
}

TEST_CASE("l2 penalty and gradients act on regularized weights only") {
    ag::ParamSet params;
    params.emplace("mlp.W1", ag::make_param({2}, {3.0, 4.0}));
    params.emplace("mlp.b1", ag::make_param({1}, {10.0}));
    params.emplace("embed", ag::make_param({1}, {10.0}));
    const double lambda = 0.5;
    CHECK(l2_penalty(params, lambda) == doctest::Approx(0.5 * 25.0).epsilon(1e-12));
    ag::zero_grads(params);
    add_l2_gradients(params, lambda);
    CHECK(params["mlp.W1"]->grad == std::vector<double>{3.0, 4.0});  // 2 lambda w
    CHECK(params["mlp.b1"]->grad == std::vector<double>{0.0});
    CHECK(params["embed"]->grad == std::vector<double>{0.0});
}

TEST_CASE("adam first step matches the hand-derived update") {
    ag::ParamSet params;
    params.emplace("w", ag::make_param({1}, {1.0}));
    params["w"]->ensure_grad();
    params["w"]->grad[0] = 0.5;
    OptimizerConfig cfg;  // adam, lr 1e-3, betas 0.9/0.999, eps 1e-8
    OptimizerState opt;
    opt.step(params, cfg);
    // m = 0.05, v = 2.5e-4; bias-corrected: m_hat = 0.5, v_hat = 0.25
    const double expect =
        ag::snap_f32(1.0 - 1e-3 * 0.5 / (std::sqrt(0.25) + 1e-8));
    CHECK(params["w"]->val[0] == expect);
}

TEST_CASE("rmsprop first step matches the hand-derived update") {
    ag::ParamSet params;
    params.emplace("w", ag::make_param({1}, {1.0}));
    params["w"]->ensure_grad();
    params["w"]->grad[0] = 0.5;
    OptimizerConfig cfg;
    cfg.kind = Optimizer::kRmsprop;
    OptimizerState opt;
    opt.step(params, cfg);
    const double v = 0.1 * 0.25;  // (1 - decay) g^2
    const double expect = ag::snap_f32(1.0 - 1e-3 * 0.5 / (std::sqrt(v) + 1e-8));
    CHECK(params["w"]->val[0] == expect);
}

TEST_CASE("optimizer updates stay float32-exact and respect the frozen set") {
    ag::ParamSet params;
    params.emplace("w", ag::make_param({1}, {1.0}));
    params.emplace("frozen.w", ag::make_param({1}, {1.0}));
    for (auto& [n, p] : params) {
        p->ensure_grad();
        p->grad[0] = 0.3;
    }
    OptimizerConfig cfg;
    OptimizerState opt;
    opt.step(params, cfg, {"frozen.w"});
    CHECK(params["frozen.w"]->val[0] == 1.0);
    CHECK(params["w"]->val[0] != 1.0);
    CHECK(ag::snap_f32(params["w"]->val[0]) == params["w"]->val[0]);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto run = [](std::uint64_t seed) {
        textprep::Vocabulary vocab(4, 77);
        PreparedData data = tiny_ranking(vocab);
        models::ModelSpec spec;
        spec.embed_dim = 4;
        spec.pad_len = 4;
        spec.dropout_enabled = false;
        Rng init(seed);
        models::Model model = models::Model::init(spec, vocab, init);
        TrainConfig cfg;
        cfg.max_epochs = 2;
        cfg.epoch_fraction = 1.0;
        cfg.seed = seed;
        cfg.dropout_enabled = false;
        return sps::train::train(model, data, cfg);
    };
    const TrainResult a = run(3);
    const TrainResult b = run(3);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t e = 0; e < a.log.size(); ++e) {
        CHECK(a.log[e].train_loss == b.log[e].train_loss);
        CHECK(a.log[e].val_metric == b.log[e].val_metric);
    }
    CHECK(a.best_epoch == b.best_epoch);
    for (const auto& [name, p] : a.best_params)
        CHECK(p->val == b.best_params.at(name)->val);
}

TEST_CASE("train tracks the best epoch by validation metric") {
    textprep::Vocabulary vocab(4, 77);
    PreparedData data = tiny_ranking(vocab);
    models::ModelSpec spec;
    spec.embed_dim = 4;
    spec.pad_len = 4;
    spec.dropout_enabled = false;
    Rng init(1);
    models::Model model = models::Model::init(spec, vocab, init);
    TrainConfig cfg;
    cfg.max_epochs = 4;
    cfg.epoch_fraction = 1.0;
    cfg.dropout_enabled = false;
    const TrainResult result = sps::train::train(model, data, cfg);
    REQUIRE(result.log.size() == 4);
    double best = -1.0;
    for (const auto& e : result.log) best = std::max(best, e.val_metric);
    CHECK(result.best_metric == best);
    CHECK(result.log[result.best_epoch - 1].val_metric == best);
}

TEST_CASE("copy_matching_params copies by name and rejects shape clashes") {
    ag::ParamSet src, dst;
    src.emplace("a", ag::make_param({2}, {1.0, 2.0}));
    src.emplace("only_src", ag::make_param({1}, {9.0}));
    dst.emplace("a", ag::make_param({2}, {0.0, 0.0}));
    dst.emplace("only_dst", ag::make_param({1}, {7.0}));
    const auto copied = copy_matching_params(src, dst);
    CHECK(copied == std::vector<std::string>{"a"});
    CHECK(dst["a"]->val == std::vector<double>{1.0, 2.0});
    CHECK(dst["only_dst"]->val == std::vector<double>{7.0});

    ag::ParamSet bad;
    bad.emplace("a", ag::make_param({3}, {1.0, 2.0, 3.0}));
    CHECK_THROWS_AS(copy_matching_params(src, bad), TransferError);
}

TEST_CASE("apply_transfer expands frozen prefixes and applies source policy") {
    textprep::Vocabulary vocab(4, 77);
    models::ModelSpec spec;
    spec.encoder = models::EncoderKind::kRnn;
    spec.embed_dim = 4;
    Rng r1(1), r2(2);
    models::Model source = models::Model::init(spec, vocab, r1);
    models::Model target = models::Model::init(spec, vocab, r2);

    models::ModelSpec source_spec = source.spec();
    source_spec.dropout_enabled = false;  // source trained with dropout off
    ag::Checkpoint ckpt{source_spec.serialize(), source.params()};

    TransferConfig tcfg;
    tcfg.frozen_layers = {"gru.fwd"};
    TrainConfig cfg;
    cfg.dropout_enabled = true;
    apply_transfer(ckpt, target, tcfg, cfg);

    CHECK(cfg.frozen.size() == 9);  // 3 gates x W/U/b
    CHECK(cfg.frozen.count("gru.fwd.Wz") == 1);
    CHECK(cfg.frozen.count("gru.bwd.Wz") == 0);
    CHECK(cfg.optimizer.kind == Optimizer::kRmsprop);
    CHECK_FALSE(cfg.dropout_enabled);  // inherited from the source header
    CHECK(target.params().at("proj.U")->val == source.params().at("proj.U")->val);

    TransferConfig bad;
    bad.frozen_layers = {"nonexistent"};
    CHECK_THROWS_AS(apply_transfer(ckpt, target, bad, cfg), ConfigError);
}

TEST_CASE("prepare_ranking prunes training groups only") {
    textprep::Vocabulary vocab(4, 5);
    PrepareOptions opts;
    opts.pad_len = 6;
    opts.prune_top_k = 2;
    data::PairGroup g;
    g.s0_text = "cat mat";
    g.s0 = textprep::tokenize(g.s0_text);
    for (const char* cand : {"cat on the mat", "dog", "the cat", "bird"}) {
        g.candidate_texts.push_back(cand);
        g.candidates.push_back(textprep::tokenize(cand));
        g.labels.push_back(g.candidates.size() == 1 ? 1.0 : 0.0);
    }
    const PreparedData data = prepare_ranking({g}, {g}, {}, vocab, opts);
    CHECK(data.train_groups[0].pairs.size() == 2);
    CHECK(data.val_groups[0].pairs.size() == 4);
}
