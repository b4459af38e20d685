#pragma once

#include <string>
#include <vector>

namespace sps::eval {

struct RankedGroup {
    std::vector<double> scores;
    std::vector<double> labels;  // binary
};

// Candidates sorted by descending score, ties broken by ascending index.
std::vector<std::size_t> rank_order(const std::vector<double>& scores);

// Groups without a positive label are excluded from MAP/MRR by the callers;
// these two throw EvalError when handed such a group.
double average_precision(const RankedGroup& group);
double reciprocal_rank(const RankedGroup& group);

double map_metric(const std::vector<RankedGroup>& groups);
double mrr_metric(const std::vector<RankedGroup>& groups);

// Next-utterance recall: every group must have exactly n candidates and one
// positive. The 1-in-2 variant restricts each group to the positive plus the
// first-listed negative.
double recall_at(const std::vector<RankedGroup>& groups, std::size_t k, std::size_t n);

double pearson_r(const std::vector<double>& pred, const std::vector<double>& gold);
double accuracy(const std::vector<int>& predicted, const std::vector<int>& gold);

// Multi-seed aggregation with Student-t confidence intervals.
struct RunReport {
    std::string metric;
    std::vector<double> values;
    double mean = 0.0;
    double sd = 0.0;          // sample sd, n-1 denominator
    double confidence = 0.95;
    double half_width = 0.0;  // t_{n-1,(1+c)/2} * sd / sqrt(n)
};

double student_t_quantile(std::size_t dof, double p);
RunReport aggregate_runs(const std::string& metric, const std::vector<double>& values,
                         double confidence = 0.95);

// One-line report rendering: `metric  mean  ±halfwidth`.
std::string format_report_line(const RunReport& report);

}  // namespace sps::eval
