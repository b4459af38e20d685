#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sps/textprep.hpp"

namespace sps::data {

// One (s0, s1, label) pair. Label meaning depends on the task: {0,1} for
// ranking and binary, class index 0..2 for RTE, score in [1,5] for STS.
struct PairSample {
    std::string s0_text;
    std::string s1_text;
    textprep::TokenizedSentence s0;
    textprep::TokenizedSentence s1;
    double label = 0.0;
    std::size_t group_id = 0;
};

// A ranking group: one s0 against many candidates.
struct PairGroup {
    std::size_t id = 0;
    std::string s0_text;
    textprep::TokenizedSentence s0;
    std::vector<std::string> candidate_texts;
    std::vector<textprep::TokenizedSentence> candidates;
    std::vector<double> labels;
    bool has_positive() const {
        for (double l : labels)
            if (l > 0.5) return true;
        return false;
    }
};

// anssel / property-selection CSV: header `label,qtext,atext`, RFC-style
// quoting; rows sharing one qtext are consecutive and form a group.
std::vector<PairGroup> load_ranking(const std::string& path);

// Next-utterance train TSV: `label<TAB>context<TAB>candidate`. Stops at
// `pair_cap` rows (the upstream corpus convention of using a prefix).
std::vector<PairSample> load_nextutt_train(const std::string& path,
                                           std::size_t pair_cap = 1000000);

// Next-utterance eval TSV: `context<TAB>positive<TAB>neg1..neg9` (11 fields).
// Candidate order within each group is shuffled deterministically by seed;
// labels track the positive.
std::vector<PairGroup> load_nextutt_eval(const std::string& path, std::uint64_t seed);

// RTE TSV `label<TAB>s0<TAB>s1`, labels contradiction/neutral/entailment
// mapped to 0/1/2.
std::vector<PairSample> load_rte(const std::string& path);

// STS TSV `label<TAB>s0<TAB>s1`, decimal gold in [0,5] remapped linearly to
// [1,5] for the 5-class interpolation head.
std::vector<PairSample> load_sts(const std::string& path);

// Oversamples the minority class (with replacement, seeded) to equal counts.
std::vector<PairSample> balance_labels(const std::vector<PairSample>& samples,
                                       std::uint64_t seed);

struct SplitStats {
    std::size_t pair_count = 0;
    std::size_t group_count = 0;
    double mean_candidates = 0.0;
    double rel_sd_candidates = 0.0;  // sd / mean, as a fraction
};

SplitStats split_stats(const std::vector<PairGroup>& groups);
SplitStats split_stats(const std::vector<PairSample>& samples);

// Canonical serialization (used by the round-trip property test).
void save_ranking(const std::string& path, const std::vector<PairGroup>& groups);

}  // namespace sps::data
