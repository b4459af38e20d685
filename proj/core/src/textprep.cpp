#include "sps/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sps/errors.hpp"

namespace sps::textprep {

namespace {

bool is_punct_char(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_word_char(char c) {
    return !is_punct_char(c) && !std::isspace(static_cast<unsigned char>(c));
}

// Punctuation glued inside a word (hyphen, apostrophe) stays attached when
// flanked by word characters on both sides.
bool is_intra_word(char c) { return c == '-' || c == '\''; }

const char* kBuiltinStopwords[] = {
    "a",    "an",   "and",  "are", "as",   "at",   "be",   "but", "by",
    "for",  "if",   "in",   "into", "is",  "it",   "no",   "not", "of",
    "on",   "or",   "such", "that", "the", "their", "then", "there",
    "these", "they", "this", "to",  "was", "will", "with"};

}  // namespace

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_punctuation(const std::string& token) {
    if (token.empty()) return false;
    return std::all_of(token.begin(), token.end(), is_punct_char);
}

bool is_numeric(const std::string& token) {
    // optional sign, digits, optional decimal part
    std::size_t i = 0;
    if (i < token.size() && (token[i] == '+' || token[i] == '-')) ++i;
    std::size_t digits = 0;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) {
        ++i;
        ++digits;
    }
    if (digits == 0) return false;
    if (i < token.size() && token[i] == '.') {
        ++i;
        while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i;
    }
    return i == token.size();
}

TokenizedSentence tokenize(const std::string& raw) {
    TokenizedSentence out;
    const std::size_t n = raw.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = raw[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_punct_char(c)) {
            out.tokens.push_back(std::string(1, c));
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n) {
            if (is_word_char(raw[j])) {
                ++j;
            } else if (is_intra_word(raw[j]) && j > i && j + 1 < n && is_word_char(raw[j + 1])) {
                ++j;
            } else {
                break;
            }
        }
        out.tokens.push_back(raw.substr(i, j - i));
        i = j;
    }
    out.indices.assign(out.tokens.size(), 0);
    out.flags.assign(out.tokens.size(), TokenFlags{});
    for (std::size_t t = 0; t < out.tokens.size(); ++t) {
        const std::string& tok = out.tokens[t];
        if (std::isupper(static_cast<unsigned char>(tok.front()))) out.flags[t].capital = 1.0;
        if (is_numeric(tok)) out.flags[t].numeric = 1.0;
    }
    return out;
}

StopwordSet StopwordSet::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword file: " + path);
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) set.insert(line);
    }
    return set;
}

StopwordSet StopwordSet::builtin() {
    StopwordSet set;
    for (const char* w : kBuiltinStopwords) set.insert(w);
    return set;
}

void StopwordSet::insert(const std::string& word) { words_.insert(lowercase(word)); }

bool StopwordSet::contains(const std::string& word) const {
    return words_.count(lowercase(word)) > 0;
}

std::size_t Vocabulary::add_known(const std::string& word, const std::vector<double>& row) {
    if (row.size() != dim_)
        throw DataError("embedding row width " + std::to_string(row.size()) +
                        " does not match dimension " + std::to_string(dim_));
    const std::string key = lowercase(word);
    auto it = word_to_index_.find(key);
    if (it != word_to_index_.end()) return it->second;
    const std::size_t idx = matrix_.size();
    word_to_index_.emplace(key, idx);
    matrix_.push_back(row);
    known_.push_back(true);
    return idx;
}

std::size_t Vocabulary::add_unknown(const std::string& word) {
    const std::string key = lowercase(word);
    auto it = word_to_index_.find(key);
    if (it != word_to_index_.end()) return it->second;
    std::vector<double> row(dim_);
    for (double& v : row) {
        // stored at float32 precision so checkpoints round-trip exactly
        v = static_cast<double>(static_cast<float>(rng_.uniform(-0.25, 0.25)));
    }
    const std::size_t idx = matrix_.size();
    word_to_index_.emplace(key, idx);
    matrix_.push_back(std::move(row));
    known_.push_back(false);
    return idx;
}

std::size_t Vocabulary::index_of(const std::string& word) {
    auto it = word_to_index_.find(lowercase(word));
    if (it != word_to_index_.end()) return it->second;
    return add_unknown(word);
}

bool Vocabulary::try_index(const std::string& word, std::size_t& out) const {
    auto it = word_to_index_.find(lowercase(word));
    if (it == word_to_index_.end()) return false;
    out = it->second;
    return true;
}

void assign_indices(TokenizedSentence& s, Vocabulary& vocab) {
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
        s.indices[t] = vocab.index_of(s.tokens[t]);
    }
}

Vocabulary load_embeddings(const std::string& path, std::size_t dim, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);
    Vocabulary vocab(dim, seed);
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> row(dim);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        for (std::size_t d = 0; d < dim; ++d) {
            if (!(ss >> row[d]))
                throw DataError("embedding file " + path + " line " + std::to_string(line_no) +
                                ": expected " + std::to_string(dim) + " components");
        }
        double extra;
        if (ss >> extra)
            throw DataError("embedding file " + path + " line " + std::to_string(line_no) +
                            ": more than " + std::to_string(dim) + " components");
        vocab.add_known(word, row);
    }
    return vocab;
}

namespace {

// Case-folded token view plus the set of bigrams for overlap tests.
struct FoldedSentence {
    std::vector<std::string> lower;
    std::unordered_set<std::string> unigrams;
    std::unordered_set<std::string> bigrams;
};

FoldedSentence fold(const TokenizedSentence& s) {
    FoldedSentence f;
    f.lower.reserve(s.tokens.size());
    for (const auto& tok : s.tokens) f.lower.push_back(lowercase(tok));
    for (const auto& w : f.lower) f.unigrams.insert(w);
    for (std::size_t t = 0; t + 1 < f.lower.size(); ++t) {
        f.bigrams.insert(f.lower[t] + "\x1f" + f.lower[t + 1]);
    }
    return f;
}

void fill_flags(TokenizedSentence& self, const FoldedSentence& self_folded,
                const FoldedSentence& other, const StopwordSet& stopwords) {
    for (std::size_t t = 0; t < self.tokens.size(); ++t) {
        TokenFlags& fl = self.flags[t];
        fl.bigram = 0.0;
        fl.unigram = 0.0;
        if (t + 1 < self.tokens.size()) {
            const std::string big = self_folded.lower[t] + "\x1f" + self_folded.lower[t + 1];
            if (other.bigrams.count(big)) fl.bigram = 1.0;
        }
        const std::string& low = self_folded.lower[t];
        if (other.unigrams.count(low) && !stopwords.contains(low) &&
            !is_punctuation(self.tokens[t])) {
            fl.unigram = 1.0;
        }
    }
}

}  // namespace

void overlap_flags(TokenizedSentence& s0, TokenizedSentence& s1, const StopwordSet& stopwords) {
    const FoldedSentence f0 = fold(s0);
    const FoldedSentence f1 = fold(s1);
    fill_flags(s0, f0, f1, stopwords);
    fill_flags(s1, f1, f0, stopwords);
}

EmbeddedSequence embed_sequence(const TokenizedSentence& s, const Vocabulary& vocab,
                                std::size_t pad_len) {
    EmbeddedSequence out;
    const std::size_t n_embed = vocab.dim();
    out.rows = pad_len;
    out.cols = n_embed + kFlagDims;
    out.values.assign(pad_len * out.cols, 0.0);
    out.mask.assign(pad_len, 0.0);
    const std::size_t len = std::min(s.size(), pad_len);
    out.token_indices.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
        const std::size_t idx = s.indices[t];
        if (idx >= vocab.size())
            throw ShapeError("vocabulary index " + std::to_string(idx) + " out of range");
        const std::vector<double>& row = vocab.row(idx);
        double* dst = &out.values[t * out.cols];
        std::copy(row.begin(), row.end(), dst);
        dst[n_embed + 0] = s.flags[t].bigram;
        dst[n_embed + 1] = s.flags[t].unigram;
        dst[n_embed + 2] = s.flags[t].capital;
        dst[n_embed + 3] = s.flags[t].numeric;
        out.mask[t] = 1.0;
        out.token_indices.push_back(idx);
    }
    return out;
}

}  // namespace sps::textprep
