#include <doctest.h>

#include "sps/config.hpp"
#include "sps/errors.hpp"

using namespace sps;
using namespace sps::run;

TEST_CASE("config parses dotted keys with comments and blank lines") {
    const RunConfig cfg = RunConfig::from_text(
        "# a comment\n"
        "task.kind = sts\n"
        "\n"
        "model.encoder = rnn-cnn\n"
        "model.embed_dim = 50\n"
        "train.learning_rate = 0.01\n"
        "train.optimizer = rmsprop\n"
        "data.train = train.tsv\n"
        "seeds = 3,5,9\n");
    CHECK(cfg.task == "sts");
    CHECK(cfg.model.encoder == models::EncoderKind::kRnnCnn);
    CHECK(cfg.model.embed_dim == 50);
    CHECK(cfg.tcfg.optimizer.learning_rate == 0.01);
    CHECK(cfg.tcfg.optimizer.kind == train::Optimizer::kRmsprop);
    CHECK(cfg.train_path == "train.tsv");
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 5, 9});
}

TEST_CASE("config defaults to seeds 1..16") {
    const RunConfig cfg = RunConfig::from_text("task.kind = anssel\n");
    REQUIRE(cfg.seeds.size() == 16);
    CHECK(cfg.seeds.front() == 1);
    CHECK(cfg.seeds.back() == 16);
}

TEST_CASE("config rejects unknown keys and malformed lines") {
    CHECK_THROWS_AS(RunConfig::from_text("nope.nope = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("just a line without equals\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("task.use_flags = maybe\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("train.optimizer = sgd\n"), ConfigError);
}

TEST_CASE("seed lists accept ranges and comma lists") {
    CHECK(parse_seed_list("2..5") == std::vector<std::uint64_t>{2, 3, 4, 5});
    CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
    CHECK(parse_seed_list("1, 3, 9") == std::vector<std::uint64_t>{1, 3, 9});
    CHECK_THROWS_AS(parse_seed_list("5..2"), ConfigError);
    CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
}

TEST_CASE("head mapping follows the task kind") {
    RunConfig cfg;
    cfg.task = "anssel";
    CHECK(cfg.head() == models::TaskHead::kRanking);
    cfg.task = "nextutt";
    CHECK(cfg.head() == models::TaskHead::kRanking);
    cfg.task = "rte3";
    CHECK(cfg.head() == models::TaskHead::kRte3);
    cfg.task = "sts";
    CHECK(cfg.head() == models::TaskHead::kSts);
    cfg.task = "binary";
    CHECK(cfg.head() == models::TaskHead::kBinary);
    cfg.task = "unknown";
    CHECK_THROWS_AS(cfg.head(), ConfigError);
}

TEST_CASE("validate collects every problem instead of stopping at the first") {
    RunConfig cfg = RunConfig::from_text(
        "task.kind = nope\n"
        "train.epoch_fraction = 2.0\n");
    const auto problems = cfg.validate();
    CHECK(problems.size() >= 4);  // bad task, missing train, missing val, bad fraction
    bool has_task = false, has_fraction = false;
    for (const auto& p : problems) {
        if (p.find("task.kind") != std::string::npos) has_task = true;
        if (p.find("epoch_fraction") != std::string::npos) has_fraction = true;
    }
    CHECK(has_task);
    CHECK(has_fraction);
}

TEST_CASE("validate flags missing files") {
    RunConfig cfg = RunConfig::from_text(
        "task.kind = anssel\n"
        "data.train = /nonexistent/t.csv\n"
        "data.val = /nonexistent/v.csv\n");
    const auto problems = cfg.validate();
    bool train_missing = false;
    for (const auto& p : problems)
        if (p.find("/nonexistent/t.csv") != std::string::npos) train_missing = true;
    CHECK(train_missing);
}

TEST_CASE("serialize materializes defaults and parses back identically") {
    RunConfig cfg = RunConfig::from_text(
        "task.kind = anssel\n"
        "model.encoder = cnn\n"
        "data.train = t.csv\n"
        "data.val = v.csv\n"
        "seeds = 1..4\n");
    const std::string text = cfg.serialize();
    CHECK(text.find("train.metric = mrr") != std::string::npos);  // default materialized
    CHECK(text.find("model.encoder = cnn") != std::string::npos);
    const RunConfig back = RunConfig::from_text(text);
    CHECK(back.task == cfg.task);
    CHECK(back.model.encoder == cfg.model.encoder);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.tcfg.batch_size == cfg.tcfg.batch_size);
    CHECK(back.serialize() == text);  // fixed point
}

TEST_CASE("transfer keys populate the transfer block") {
    const RunConfig cfg = RunConfig::from_text(
        "task.kind = anssel\n"
        "transfer.source = src.bin\n"
        "transfer.frozen = gru.fwd, gru.bwd\n"
        "transfer.balance_labels = 0\n"
        "transfer.optimizer = adam\n");
    CHECK(cfg.has_transfer);
    CHECK(cfg.transfer.source_checkpoint == "src.bin");
    CHECK(cfg.transfer.frozen_layers ==
          std::vector<std::string>{"gru.fwd", "gru.bwd"});
    CHECK_FALSE(cfg.transfer.balance_labels);
    CHECK(cfg.transfer.optimizer == train::Optimizer::kAdam);
}
