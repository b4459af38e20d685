#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sps/errors.hpp"
#include "sps/textprep.hpp"

using namespace sps;
using namespace sps::textprep;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("tokenize detaches punctuation and keeps intra-word marks") {
    const auto s = tokenize("Hello, world! GRU-based don't stop.");
    CHECK(s.tokens == std::vector<std::string>{"Hello", ",", "world", "!", "GRU-based",
                                               "don't", "stop", "."});
    CHECK(s.flags[0].capital == 1.0);
    CHECK(s.flags[2].capital == 0.0);
    CHECK(s.flags[4].capital == 1.0);
}

TEST_CASE("tokenize treats dangling hyphens and apostrophes as punctuation") {
    const auto s = tokenize("well - known 'quote'");
    CHECK(s.tokens == std::vector<std::string>{"well", "-", "known", "'", "quote", "'"});
}

TEST_CASE("tokenize flags numeric tokens") {
    // sign and decimal point split off as punctuation tokens
    const auto s = tokenize("rank 42 of -3.5 items");
    REQUIRE(s.tokens == std::vector<std::string>{"rank", "42", "of", "-", "3", ".",
                                                 "5", "items"});
    CHECK(s.flags[1].numeric == 1.0);
    CHECK(s.flags[3].numeric == 0.0);
    CHECK(s.flags[4].numeric == 1.0);
    CHECK(s.flags[6].numeric == 1.0);
    CHECK(s.flags[0].numeric == 0.0);
}

TEST_CASE("is_numeric accepts signed decimals only") {
    CHECK(is_numeric("42"));
    CHECK(is_numeric("-3.5"));
    CHECK(is_numeric("+7"));
    CHECK(is_numeric("3."));
    CHECK_FALSE(is_numeric(".5"));
    CHECK_FALSE(is_numeric("1a"));
    CHECK_FALSE(is_numeric("-"));
    CHECK_FALSE(is_numeric(""));
}

TEST_CASE("is_punctuation requires every character to be punctuation") {
    CHECK(is_punctuation("!"));
    CHECK(is_punctuation("..."));
    CHECK_FALSE(is_punctuation("a!"));
    CHECK_FALSE(is_punctuation(""));
}

TEST_CASE("overlap flags are case-folded and skip stopwords and punctuation") {
    auto s0 = tokenize("The cat sat .");
    auto s1 = tokenize("the mat SAT .");
    overlap_flags(s0, s1, StopwordSet::builtin());
    CHECK(s0.flags[0].unigram == 0.0);  // "The" is a stopword
    CHECK(s0.flags[1].unigram == 0.0);  // "cat" not in s1
    CHECK(s0.flags[2].unigram == 1.0);  // "sat" matches "SAT"
    CHECK(s0.flags[3].unigram == 0.0);  // punctuation
    CHECK(s1.flags[2].unigram == 1.0);
}

TEST_CASE("bigram overlap flag marks the first token of a shared bigram") {
    auto s0 = tokenize("big red dog");
    auto s1 = tokenize("a big red cat");
    overlap_flags(s0, s1, StopwordSet::builtin());
    CHECK(s0.flags[0].bigram == 1.0);  // "big red" appears in s1
    CHECK(s0.flags[1].bigram == 0.0);  // "red dog" does not
    CHECK(s1.flags[1].bigram == 1.0);
    CHECK(s1.flags[0].bigram == 0.0);
}

TEST_CASE("stopword sets are case-insensitive and loadable from files") {
    const auto path = temp_file("sps_stop.txt", "Foo\nbar\n\n");
    const auto set = StopwordSet::from_file(path);
    CHECK(set.contains("foo"));
    CHECK(set.contains("FOO"));
    CHECK(set.contains("bar"));
    CHECK_FALSE(set.contains("baz"));
    std::remove(path.c_str());
}

TEST_CASE("vocabulary folds case and tracks word origin") {
    Vocabulary vocab(3, 11);
    const std::size_t a = vocab.add_known("Cat", {1.0, 2.0, 3.0});
    CHECK(vocab.index_of("cat") == a);
    CHECK(vocab.is_known(a));
    const std::size_t b = vocab.index_of("dog");
    CHECK_FALSE(vocab.is_known(b));
    std::size_t found = 0;
    CHECK(vocab.try_index("DOG", found));
    CHECK(found == b);
    CHECK_FALSE(vocab.try_index("missing", found));
    CHECK(vocab.size() == 2);
}

TEST_CASE("unknown embedding rows are uniform in [-0.25, 0.25) and seeded") {
    Vocabulary v1(8, 5), v2(8, 5), v3(8, 6);
    v1.add_unknown("word");
    v2.add_unknown("word");
    v3.add_unknown("word");
    CHECK(v1.row(0) == v2.row(0));
    CHECK(v1.row(0) != v3.row(0));
    for (double x : v1.row(0)) {
        CHECK(x >= -0.25);
        CHECK(x < 0.25);
    }
}

TEST_CASE("add_known rejects rows of the wrong width") {
    Vocabulary vocab(3, 1);
    CHECK_THROWS_AS(vocab.add_known("w", {1.0, 2.0}), DataError);
}

TEST_CASE("load_embeddings parses word-vector lines") {
    const auto path = temp_file("sps_emb.txt", "cat 0.5 -0.25\ndog 1 2\n");
    const auto vocab = load_embeddings(path, 2, 0);
    CHECK(vocab.size() == 2);
    std::size_t idx = 0;
    REQUIRE(vocab.try_index("cat", idx));
    CHECK(vocab.row(idx) == std::vector<double>{0.5, -0.25});
    std::remove(path.c_str());
}

TEST_CASE("load_embeddings reports the offending line on dimension mismatch") {
    const auto short_path = temp_file("sps_emb_short.txt", "cat 1 2\ndog 1\n");
    CHECK_THROWS_WITH_AS(load_embeddings(short_path, 2, 0),
                         doctest::Contains("line 2"), DataError);
    const auto long_path = temp_file("sps_emb_long.txt", "cat 1 2 3\n");
    CHECK_THROWS_WITH_AS(load_embeddings(long_path, 2, 0),
                         doctest::Contains("line 1"), DataError);
    std::remove(short_path.c_str());
    std::remove(long_path.c_str());
}

TEST_CASE("embed_sequence pads, masks and copies flag columns") {
    Vocabulary vocab(2, 3);
    auto s = tokenize("One 2");
    assign_indices(s, vocab);
    const auto seq = embed_sequence(s, vocab, 4);
    CHECK(seq.rows == 4);
    CHECK(seq.cols == 6);  // 2 embedding dims + 4 flags
    CHECK(seq.mask == std::vector<double>{1.0, 1.0, 0.0, 0.0});
    CHECK(seq.token_indices.size() == 2);
    // row 0: "One" is capitalized, not numeric
    CHECK(seq.values[0 * 6 + 4] == 1.0);  // capital flag
    CHECK(seq.values[0 * 6 + 5] == 0.0);  // numeric flag
    // row 1: "2" is numeric
    CHECK(seq.values[1 * 6 + 5] == 1.0);
    // padded rows are all zero
    for (std::size_t c = 0; c < 6; ++c) CHECK(seq.values[2 * 6 + c] == 0.0);
}

TEST_CASE("embed_sequence truncates to the pad length") {
    Vocabulary vocab(2, 3);
    auto s = tokenize("a b c d e");
    assign_indices(s, vocab);
    const auto seq = embed_sequence(s, vocab, 3);
    CHECK(seq.rows == 3);
    CHECK(seq.token_indices.size() == 3);
    CHECK(seq.mask == std::vector<double>{1.0, 1.0, 1.0});
}
