#include <doctest.h>

#include <cmath>

#include "sps/errors.hpp"
#include "sps/irbase.hpp"
#include "sps/textprep.hpp"

using namespace sps;
using namespace sps::ir;

namespace {

std::vector<textprep::TokenizedSentence> toy_corpus() {
    return {textprep::tokenize("the cat sat on the mat"),
            textprep::tokenize("the dog sat"),
            textprep::tokenize("a cat and a dog"),
            textprep::tokenize("birds fly high"),
            textprep::tokenize("the mat was red")};
}

}  // namespace

TEST_CASE("fit_stats computes document frequencies and average length") {
    const auto stats = fit_stats(toy_corpus());
    CHECK(stats.doc_count == 5);
    CHECK(stats.avg_doc_len == doctest::Approx(4.2).epsilon(1e-12));
    CHECK(stats.doc_freq.at("the") == 3);
    CHECK(stats.doc_freq.at("cat") == 2);
    CHECK(stats.doc_freq.at("on") == 1);
    CHECK(stats.k1 == 1.2);
    CHECK(stats.b == 0.75);
}

TEST_CASE("fit_stats rejects an empty collection") {
    CHECK_THROWS_AS(fit_stats({}), ConfigError);
}

TEST_CASE("idf is the smoothed log ratio floored at zero") {
    const auto stats = fit_stats(toy_corpus());
    CHECK(idf("cat", stats) == doctest::Approx(std::log(1.4)).epsilon(1e-12));
    CHECK(idf("on", stats) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(idf("the", stats) == 0.0);   // df 3 of 5 -> negative raw value
    CHECK(idf("THE", stats) == 0.0);   // case folded
    CHECK(idf("zebra", stats) == doctest::Approx(std::log(11.0)).epsilon(1e-12));
}

TEST_CASE("bm25 matches the hand-worked toy values") {
    const auto docs = toy_corpus();
    const auto stats = fit_stats(docs);
    const auto query = textprep::tokenize("cat on the mat");
    const double expected[] = {1.5072913885868646, 0.0, 0.3121489424076313, 0.0,
                               0.3431571154944821};
    for (std::size_t i = 0; i < docs.size(); ++i)
        CHECK(bm25_score(query, docs[i], stats) ==
              doctest::Approx(expected[i]).epsilon(1e-9));
}

TEST_CASE("tfidf matches the hand-worked toy values") {
    const auto docs = toy_corpus();
    const auto stats = fit_stats(docs);
    const auto query = textprep::tokenize("cat on the mat");
    const double expected[] = {1.7715567619105357, 0.0, 0.3364722366212129, 0.0,
                               0.3364722366212129};
    for (std::size_t i = 0; i < docs.size(); ++i)
        CHECK(tfidf_score(query, docs[i], stats) ==
              doctest::Approx(expected[i]).epsilon(1e-9));
}

TEST_CASE("bm25 counts repeated query terms once but document tf fully") {
    const auto docs = toy_corpus();
    const auto stats = fit_stats(docs);
    const auto once = textprep::tokenize("cat");
    const auto twice = textprep::tokenize("cat cat");
    CHECK(bm25_score(once, docs[0], stats) == bm25_score(twice, docs[0], stats));
}

TEST_CASE("empty documents score zero") {
    const auto stats = fit_stats(toy_corpus());
    const auto query = textprep::tokenize("cat");
    CHECK(bm25_score(query, textprep::TokenizedSentence{}, stats) == 0.0);
}

TEST_CASE("prune_topk keeps the best k in original order") {
    const std::vector<double> scores = {5.0, 1.0, 4.0, 4.0, 2.0};
    CHECK(prune_topk_indices(scores, 3) == std::vector<std::size_t>{0, 2, 3});
    // boundary tie: index 2 beats index 3 by stability
    CHECK(prune_topk_indices(scores, 2) == std::vector<std::size_t>{0, 2});
    // k >= size keeps everything
    CHECK(prune_topk_indices(scores, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("prune_topk rejects k = 0") {
    CHECK_THROWS_AS(prune_topk_indices({1.0}, 0), ConfigError);
}
