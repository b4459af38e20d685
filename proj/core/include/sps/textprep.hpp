#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sps/rng.hpp"

namespace sps::textprep {

inline constexpr int kFlagDims = 4;

// Per-token binary features: [bigram overlap, unigram overlap, capitalized,
// numeric]. Overlap flags are filled in by overlap_flags(); the other two at
// tokenization time would also work but we keep all four together.
struct TokenFlags {
    double bigram = 0.0;
    double unigram = 0.0;
    double capital = 0.0;
    double numeric = 0.0;
};

struct TokenizedSentence {
    std::vector<std::string> tokens;   // surface forms, original casing
    std::vector<std::size_t> indices;  // vocabulary indices, parallel to tokens
    std::vector<TokenFlags> flags;     // parallel to tokens

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
};

class StopwordSet {
  public:
    StopwordSet() = default;
    static StopwordSet from_file(const std::string& path);
    static StopwordSet builtin();  // small default list, same as data/stopwords.txt

    void insert(const std::string& word);
    // Case-insensitive; punctuation tokens count as stopwords for flag purposes.
    bool contains(const std::string& word) const;
    std::size_t size() const { return words_.size(); }

  private:
    std::unordered_set<std::string> words_;
};

class Vocabulary {
  public:
    Vocabulary(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

    // Adds a word with an explicit vector (pretrained row).
    std::size_t add_known(const std::string& word, const std::vector<double>& row);
    // Adds a word with a uniform [-0.25, 0.25] row; used for words seen in
    // training data but absent from the embedding file.
    std::size_t add_unknown(const std::string& word);
    // Lookup, registering the word as unknown on first sight.
    std::size_t index_of(const std::string& word);
    // Lookup without registration; returns false if absent.
    bool try_index(const std::string& word, std::size_t& out) const;

    bool is_known(std::size_t index) const { return known_[index]; }
    std::size_t size() const { return matrix_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<double>& row(std::size_t index) const { return matrix_[index]; }
    std::vector<double>& row(std::size_t index) { return matrix_[index]; }

  private:
    std::size_t dim_;
    Rng rng_;
    std::unordered_map<std::string, std::size_t> word_to_index_;
    std::vector<std::vector<double>> matrix_;
    std::vector<bool> known_;  // pretrained vs randomly initialized
};

// Whitespace split with punctuation detached into standalone tokens.
// Intra-word hyphens and apostrophes are kept ("GRU-based" stays one token).
TokenizedSentence tokenize(const std::string& raw);

// Registers every token with the vocabulary and fills `indices`.
void assign_indices(TokenizedSentence& s, Vocabulary& vocab);

// Loads a plain-text embedding file: one `word v1 .. vN` line per entry.
Vocabulary load_embeddings(const std::string& path, std::size_t dim, std::uint64_t seed);

// Fills the 4-dim flags of both sentences against each other.
void overlap_flags(TokenizedSentence& s0, TokenizedSentence& s1, const StopwordSet& stopwords);

bool is_punctuation(const std::string& token);
bool is_numeric(const std::string& token);
std::string lowercase(const std::string& s);

// Dense input to the encoders: pad_len x (N+4) row-major matrix plus a
// 0/1 length mask. Rows past the sentence length are zero.
struct EmbeddedSequence {
    std::size_t rows = 0;  // pad length
    std::size_t cols = 0;  // N + 4
    std::vector<double> values;  // row-major
    std::vector<double> mask;    // pad_len entries in {0,1}
    std::vector<std::size_t> token_indices;  // vocab index per unmasked row
};

EmbeddedSequence embed_sequence(const TokenizedSentence& s, const Vocabulary& vocab,
                                std::size_t pad_len);

}  // namespace sps::textprep
