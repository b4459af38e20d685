#include "sps/irbase.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sps/errors.hpp"

namespace sps::ir {

namespace {

std::unordered_map<std::string, std::size_t> term_counts(
    const textprep::TokenizedSentence& s) {
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& tok : s.tokens) ++tf[textprep::lowercase(tok)];
    return tf;
}

}  // namespace

CorpusStats fit_stats(const std::vector<textprep::TokenizedSentence>& documents,
                      double k1, double b) {
    if (documents.empty()) throw ConfigError("fit_stats: empty document collection");
    CorpusStats stats;
    stats.k1 = k1;
    stats.b = b;
    stats.doc_count = documents.size();
    std::size_t total_len = 0;
    for (const auto& doc : documents) {
        total_len += doc.size();
        for (const auto& [term, _] : term_counts(doc)) ++stats.doc_freq[term];
    }
    stats.avg_doc_len = static_cast<double>(total_len) / static_cast<double>(documents.size());
    return stats;
}

double idf(const std::string& term, const CorpusStats& stats) {
    const auto it = stats.doc_freq.find(textprep::lowercase(term));
    const double df = it == stats.doc_freq.end() ? 0.0 : static_cast<double>(it->second);
    const double d = static_cast<double>(stats.doc_count);
    const double raw = std::log((d - df + 0.5) / (df + 0.5));
    return std::max(raw, 0.0);
}

double bm25_score(const textprep::TokenizedSentence& query,
                  const textprep::TokenizedSentence& doc, const CorpusStats& stats) {
    if (doc.empty()) return 0.0;
    const auto doc_tf = term_counts(doc);
    const double len_norm =
        stats.k1 * (1.0 - stats.b + stats.b * static_cast<double>(doc.size()) /
                                        stats.avg_doc_len);
    double score = 0.0;
    for (const auto& [term, _] : term_counts(query)) {
        const auto it = doc_tf.find(term);
        if (it == doc_tf.end()) continue;
        const double tf = static_cast<double>(it->second);
        score += idf(term, stats) * tf * (stats.k1 + 1.0) / (tf + len_norm);
    }
    return score;
}

double tfidf_score(const textprep::TokenizedSentence& query,
                   const textprep::TokenizedSentence& doc, const CorpusStats& stats) {
    const auto doc_tf = term_counts(doc);
    double score = 0.0;
    for (const auto& [term, _] : term_counts(query)) {
        const auto it = doc_tf.find(term);
        if (it == doc_tf.end()) continue;
        score += idf(term, stats) * static_cast<double>(it->second);
    }
    return score;
}

std::vector<std::size_t> prune_topk_indices(const std::vector<double>& scores, std::size_t k) {
    if (k == 0) throw ConfigError("prune_topk: k must be positive");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    if (scores.size() > k) {
        // ties at the boundary: earlier candidate index wins
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a] > scores[b];
        });
        order.resize(k);
        std::sort(order.begin(), order.end());
    }
    return order;
}

}  // namespace sps::ir
