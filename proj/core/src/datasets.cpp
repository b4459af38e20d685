#include "sps/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sps/errors.hpp"
#include "sps/rng.hpp"

namespace sps::data {

namespace {

// Minimal RFC-style CSV row parser: fields separated by commas, optionally
// double-quoted with "" escaping.
std::vector<std::string> parse_csv_row(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                cur += c;
                ++i;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            ++i;
        } else {
            cur += c;
            ++i;
        }
    }
    if (quoted)
        throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    return in;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_label(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ": bad label '" + s + "'");
    }
}

}  // namespace

std::vector<PairGroup> load_ranking(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++line_no;
    strip_cr(line);
    if (parse_csv_row(line, line_no) != std::vector<std::string>{"label", "qtext", "atext"})
        throw DataError(path + ": expected header label,qtext,atext");
    std::vector<PairGroup> groups;
    std::unordered_map<std::string, std::size_t> seen_qtext;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = parse_csv_row(line, line_no);
        if (fields.size() != 3)
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected 3 fields, got " + std::to_string(fields.size()));
        const double label = parse_label(fields[0], line_no);
        const std::string& qtext = fields[1];
        if (groups.empty() || groups.back().s0_text != qtext) {
            const auto it = seen_qtext.find(qtext);
            if (it != seen_qtext.end())
                throw DataError(path + " line " + std::to_string(line_no) +
                                ": non-consecutive duplicate qtext '" + qtext + "'");
            seen_qtext.emplace(qtext, groups.size());
            PairGroup g;
            g.id = groups.size();
            g.s0_text = qtext;
            g.s0 = textprep::tokenize(qtext);
            groups.push_back(std::move(g));
        }
        PairGroup& g = groups.back();
        g.candidate_texts.push_back(fields[2]);
        g.candidates.push_back(textprep::tokenize(fields[2]));
        g.labels.push_back(label);
    }
    return groups;
}

void save_ranking(const std::string& path, const std::vector<PairGroup>& groups) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);
    out << "label,qtext,atext\n";
    for (const PairGroup& g : groups) {
        for (std::size_t i = 0; i < g.candidates.size(); ++i) {
            out << (g.labels[i] > 0.5 ? 1 : 0) << ',' << csv_quote(g.s0_text) << ','
                << csv_quote(g.candidate_texts[i]) << '\n';
        }
    }
}

std::vector<PairSample> load_nextutt_train(const std::string& path, std::size_t pair_cap) {
    std::ifstream in = open_or_throw(path);
    std::vector<PairSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (samples.size() < pair_cap && std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3)
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected 3 tab-separated fields");
        PairSample s;
        s.label = parse_label(fields[0], line_no);
        s.s0_text = fields[1];
        s.s1_text = fields[2];
        s.s0 = textprep::tokenize(s.s0_text);
        s.s1 = textprep::tokenize(s.s1_text);
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<PairGroup> load_nextutt_eval(const std::string& path, std::uint64_t seed) {
    std::ifstream in = open_or_throw(path);
    Rng rng(seed);
    std::vector<PairGroup> groups;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 11)
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected 11 fields (context, positive, 9 negatives), got " +
                            std::to_string(fields.size()));
        PairGroup g;
        g.id = groups.size();
        g.s0_text = fields[0];
        g.s0 = textprep::tokenize(g.s0_text);
        std::vector<std::size_t> order(10);
        for (std::size_t i = 0; i < 10; ++i) order[i] = i;
        rng.shuffle(order);
        for (std::size_t i : order) {
            g.candidate_texts.push_back(fields[1 + i]);
            g.candidates.push_back(textprep::tokenize(fields[1 + i]));
            g.labels.push_back(i == 0 ? 1.0 : 0.0);
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

namespace {

std::vector<PairSample> load_pair_tsv(const std::string& path, bool rte) {
    std::ifstream in = open_or_throw(path);
    std::vector<PairSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3)
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected 3 tab-separated fields");
        PairSample s;
        if (rte) {
            if (fields[0] == "contradiction") s.label = 0.0;
            else if (fields[0] == "neutral") s.label = 1.0;
            else if (fields[0] == "entailment") s.label = 2.0;
            else
                throw DataError(path + " line " + std::to_string(line_no) +
                                ": unknown label '" + fields[0] + "'");
        } else {
            const double gold = parse_label(fields[0], line_no);
            if (gold < 0.0 || gold > 5.0)
                throw DataError(path + " line " + std::to_string(line_no) +
                                ": sts gold outside [0,5]");
            // remap [0,5] -> [1,5] for the 5-class interpolation head
            s.label = 1.0 + gold * 4.0 / 5.0;
        }
        s.s0_text = fields[1];
        s.s1_text = fields[2];
        s.s0 = textprep::tokenize(s.s0_text);
        s.s1 = textprep::tokenize(s.s1_text);
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace

std::vector<PairSample> load_rte(const std::string& path) { return load_pair_tsv(path, true); }

std::vector<PairSample> load_sts(const std::string& path) { return load_pair_tsv(path, false); }

std::vector<PairSample> balance_labels(const std::vector<PairSample>& samples,
                                       std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].label > 0.5 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw DataError("balance_labels: a class is absent");
    Rng rng(seed);
    std::vector<PairSample> out = samples;
    auto& minority = pos.size() < neg.size() ? pos : neg;
    const std::size_t deficit =
        (pos.size() < neg.size() ? neg.size() : pos.size()) - minority.size();
    for (std::size_t k = 0; k < deficit; ++k)
        out.push_back(samples[minority[rng.index(minority.size())]]);
    return out;
}

SplitStats split_stats(const std::vector<PairGroup>& groups) {
    SplitStats stats;
    stats.group_count = groups.size();
    if (groups.empty()) return stats;
    double sum = 0.0;
    for (const auto& g : groups) {
        stats.pair_count += g.candidates.size();
        sum += static_cast<double>(g.candidates.size());
    }
    stats.mean_candidates = sum / static_cast<double>(groups.size());
    double ss = 0.0;
    for (const auto& g : groups) {
        const double d = static_cast<double>(g.candidates.size()) - stats.mean_candidates;
        ss += d * d;
    }
    if (groups.size() > 1 && stats.mean_candidates > 0.0) {
        const double sd = std::sqrt(ss / static_cast<double>(groups.size() - 1));
        stats.rel_sd_candidates = sd / stats.mean_candidates;
    }
    return stats;
}

SplitStats split_stats(const std::vector<PairSample>& samples) {
    SplitStats stats;
    stats.pair_count = samples.size();
    return stats;
}

}  // namespace sps::data
