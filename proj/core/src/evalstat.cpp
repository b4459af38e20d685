#include "sps/evalstat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "sps/errors.hpp"

namespace sps::eval {

std::vector<std::size_t> rank_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

namespace {

void check_group(const RankedGroup& group) {
    if (group.scores.size() != group.labels.size() || group.scores.empty())
        throw EvalError("ranked group: scores and labels must be nonempty and aligned");
    if (std::none_of(group.labels.begin(), group.labels.end(),
                     [](double l) { return l > 0.5; }))
        throw EvalError("ranked group has no positive label");
}

}  // namespace

double average_precision(const RankedGroup& group) {
    check_group(group);
    const auto order = rank_order(group.scores);
    double positives_seen = 0.0;
    double sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (group.labels[order[rank]] > 0.5) {
            positives_seen += 1.0;
            sum += positives_seen / static_cast<double>(rank + 1);
        }
    }
    return sum / positives_seen;
}

double reciprocal_rank(const RankedGroup& group) {
    check_group(group);
    const auto order = rank_order(group.scores);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (group.labels[order[rank]] > 0.5)
            return 1.0 / static_cast<double>(rank + 1);
    }
    return 0.0;  // unreachable, check_group guarantees a positive
}

namespace {

double mean_over_groups(const std::vector<RankedGroup>& groups,
                        double (*per_group)(const RankedGroup&)) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& g : groups) {
        const bool has_pos = std::any_of(g.labels.begin(), g.labels.end(),
                                         [](double l) { return l > 0.5; });
        if (!has_pos) continue;  // excluded from MAP/MRR
        sum += per_group(g);
        ++counted;
    }
    if (counted == 0) throw EvalError("no group with a positive label");
    return sum / static_cast<double>(counted);
}

}  // namespace

double map_metric(const std::vector<RankedGroup>& groups) {
    return mean_over_groups(groups, average_precision);
}

double mrr_metric(const std::vector<RankedGroup>& groups) {
    return mean_over_groups(groups, reciprocal_rank);
}

double recall_at(const std::vector<RankedGroup>& groups, std::size_t k, std::size_t n) {
    if (groups.empty()) throw EvalError("recall_at: no groups");
    if (k < 1 || k > n) throw EvalError("recall_at: k must be in [1, n]");
    std::size_t hits = 0;
    for (const auto& g : groups) {
        std::size_t positives = 0;
        for (double l : g.labels) positives += l > 0.5 ? 1 : 0;
        if (positives != 1)
            throw DataError("recall_at: group must have exactly one positive");
        RankedGroup view = g;
        if (n == 2 && g.scores.size() != 2) {
            // 1-in-2: positive plus the first-listed negative
            view.scores.clear();
            view.labels.clear();
            bool took_neg = false;
            for (std::size_t i = 0; i < g.scores.size(); ++i) {
                if (g.labels[i] > 0.5 || !took_neg) {
                    if (g.labels[i] <= 0.5) took_neg = true;
                    view.scores.push_back(g.scores[i]);
                    view.labels.push_back(g.labels[i]);
                }
            }
        }
        if (view.scores.size() != n)
            throw DataError("recall_at: group size " + std::to_string(view.scores.size()) +
                            " does not match n=" + std::to_string(n));
        const auto order = rank_order(view.scores);
        for (std::size_t rank = 0; rank < k; ++rank) {
            if (view.labels[order[rank]] > 0.5) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(groups.size());
}

double pearson_r(const std::vector<double>& pred, const std::vector<double>& gold) {
    if (pred.size() != gold.size() || pred.size() < 2)
        throw EvalError("pearson_r: need >=2 aligned samples");
    const double n = static_cast<double>(pred.size());
    const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
    const double mg = std::accumulate(gold.begin(), gold.end(), 0.0) / n;
    double spp = 0.0, sgg = 0.0, spg = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double a = pred[i] - mp;
        const double b = gold[i] - mg;
        spp += a * a;
        sgg += b * b;
        spg += a * b;
    }
    if (spp <= 0.0 || sgg <= 0.0)
        throw EvalError("pearson_r: undefined for zero-variance input");
    return spg / std::sqrt(spp * sgg);
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& gold) {
    if (predicted.size() != gold.size() || predicted.empty())
        throw EvalError("accuracy: need aligned nonempty inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        hits += predicted[i] == gold[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double student_t_quantile(std::size_t dof, double p) {
    if (dof == 0) throw StatsError("student_t_quantile: zero degrees of freedom");
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, p);
}

RunReport aggregate_runs(const std::string& metric, const std::vector<double>& values,
                         double confidence) {
    if (values.size() < 2)
        throw StatsError("aggregate_runs: need at least 2 values");
    RunReport report;
    report.metric = metric;
    report.values = values;
    report.confidence = confidence;
    const double n = static_cast<double>(values.size());
    report.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - report.mean;
        ss += d * d;
    }
    report.sd = std::sqrt(ss / (n - 1.0));
    const double t = student_t_quantile(values.size() - 1, (1.0 + confidence) / 2.0);
    report.half_width = t * report.sd / std::sqrt(n);
    return report;
}

std::string format_report_line(const RunReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << report.metric << "\t" << report.mean << "\t±" << report.half_width;
    return out.str();
}

}  // namespace sps::eval
