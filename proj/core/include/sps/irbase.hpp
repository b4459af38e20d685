#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "sps/textprep.hpp"

namespace sps::ir {

// Corpus-level statistics fitted on the training-split s1 sentences.
struct CorpusStats {
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> doc_freq;  // case-folded terms
    double avg_doc_len = 0.0;
    double k1 = 1.2;
    double b = 0.75;
};

CorpusStats fit_stats(const std::vector<textprep::TokenizedSentence>& documents,
                      double k1 = 1.2, double b = 0.75);

// Robertson-Sparck-Jones IDF with +0.5 smoothing, floored at zero.
double idf(const std::string& term, const CorpusStats& stats);

double bm25_score(const textprep::TokenizedSentence& query,
                  const textprep::TokenizedSentence& doc, const CorpusStats& stats);

double tfidf_score(const textprep::TokenizedSentence& query,
                   const textprep::TokenizedSentence& doc, const CorpusStats& stats);

// Keeps the k highest-scoring candidate indices, stable by original order on
// ties. Returns surviving indices in their original relative order.
std::vector<std::size_t> prune_topk_indices(const std::vector<double>& scores, std::size_t k);

}  // namespace sps::ir
