// Microbenchmarks for the hot paths: encoder forward/backward passes and the
// lexical baselines.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "sps/irbase.hpp"
#include "sps/models.hpp"
#include "sps/training.hpp"
#include "sps/rng.hpp"
#include "sps/textprep.hpp"

using namespace sps;

namespace {

std::vector<std::string> word_list() {
    std::vector<std::string> words;
    for (int i = 0; i < 200; ++i) words.push_back("word" + std::to_string(i));
    return words;
}

textprep::EmbeddedSequence random_sequence(textprep::Vocabulary& vocab,
                                           const std::vector<std::string>& words,
                                           std::size_t pad_len, Rng& rng) {
    std::string text;
    const std::size_t len = 4 + rng.index(pad_len - 4);
    for (std::size_t i = 0; i < len; ++i) {
        if (!text.empty()) text += " ";
        text += words[rng.index(words.size())];
    }
    auto s = textprep::tokenize(text);
    textprep::assign_indices(s, vocab);
    return textprep::embed_sequence(s, vocab, pad_len);
}

models::Model make_model(models::EncoderKind kind, textprep::Vocabulary& vocab) {
    models::ModelSpec spec;
    spec.encoder = kind;
    spec.embed_dim = 50;
    spec.pad_len = 20;
    spec.dropout_enabled = false;
    Rng init(1);
    return models::Model::init(spec, vocab, init);
}

void encoder_forward(benchmark::State& state, models::EncoderKind kind) {
    textprep::Vocabulary vocab(50, 1);
    const auto words = word_list();
    Rng rng(2);
    const auto s0 = random_sequence(vocab, words, 20, rng);
    const auto s1 = random_sequence(vocab, words, 20, rng);
    const models::Model model = make_model(kind, vocab);
    for (auto _ : state) {
        ag::Tape tape;
        Rng fr(0);
        const auto fwd = model.forward(tape, s0, s1, {}, false, fr);
        benchmark::DoNotOptimize(fwd.score->val[0]);
    }
}

void encoder_backward(benchmark::State& state, models::EncoderKind kind) {
    textprep::Vocabulary vocab(50, 1);
    const auto words = word_list();
    Rng rng(2);
    const auto s0 = random_sequence(vocab, words, 20, rng);
    const auto s1 = random_sequence(vocab, words, 20, rng);
    models::Model model = make_model(kind, vocab);
    for (auto _ : state) {
        ag::Tape tape;
        Rng fr(0);
        const auto fwd = model.forward(tape, s0, s1, {}, false, fr);
        const auto loss = train::bce_loss(tape, {fwd.score}, {1.0});
        tape.backward(loss);
        ag::zero_grads(model.params());
        benchmark::DoNotOptimize(loss->val[0]);
    }
}

void bm25_scoring(benchmark::State& state) {
    const auto words = word_list();
    Rng rng(3);
    std::vector<textprep::TokenizedSentence> docs;
    for (int d = 0; d < 500; ++d) {
        std::string text;
        const std::size_t len = 5 + rng.index(20);
        for (std::size_t i = 0; i < len; ++i) {
            if (!text.empty()) text += " ";
            text += words[rng.index(words.size())];
        }
        docs.push_back(textprep::tokenize(text));
    }
    const auto stats = ir::fit_stats(docs);
    const auto query = textprep::tokenize("word1 word17 word42 word99");
    for (auto _ : state) {
        double total = 0.0;
        for (const auto& doc : docs) total += ir::bm25_score(query, doc, stats);
        benchmark::DoNotOptimize(total);
    }
}

}  // namespace

BENCHMARK_CAPTURE(encoder_forward, avg, models::EncoderKind::kAvg);
BENCHMARK_CAPTURE(encoder_forward, rnn, models::EncoderKind::kRnn);
BENCHMARK_CAPTURE(encoder_forward, cnn, models::EncoderKind::kCnn);
BENCHMARK_CAPTURE(encoder_forward, attn1511, models::EncoderKind::kAttn1511);
BENCHMARK_CAPTURE(encoder_backward, avg, models::EncoderKind::kAvg);
BENCHMARK_CAPTURE(encoder_backward, rnn, models::EncoderKind::kRnn);
BENCHMARK(bm25_scoring);

BENCHMARK_MAIN();
