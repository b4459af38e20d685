#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sps/config.hpp"
#include "sps/evalstat.hpp"
#include "sps/training.hpp"

namespace sps::run {

// One seed's full train+test cycle.
struct TrialResult {
    std::uint64_t seed = 0;
    train::TrainResult training;
    std::map<std::string, double> test_metrics;
};

// Metric names reported for a task (evaluation split).
std::vector<std::string> metrics_for_task(const std::string& task);

// Loads, preprocesses, trains and evaluates for one seed.
TrialResult run_trial(const RunConfig& cfg, std::uint64_t seed);

// Gradient-check suite covering every differentiable operation and each
// encoder end-to-end.
struct GradCheckItem {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 1e-4;
    bool pass() const { return max_rel_err <= tolerance; }
};

std::vector<GradCheckItem> run_gradcheck_suite();

// Subcommand entry points; return process exit codes (0 ok, 1 validation
// error, 2 runtime failure).
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_bench(const RunConfig& cfg, std::size_t runs, std::ostream& out);
int cmd_transfer(const RunConfig& cfg, std::size_t runs, std::ostream& out);
int cmd_baseline(const RunConfig& cfg, std::ostream& out);
int cmd_gradcheck(std::ostream& out);
int cmd_report(const std::vector<std::string>& paths, std::ostream& out);

// Bench report TSV: `metric<TAB>mean<TAB>halfwidth<TAB>v1,v2,...` per line.
std::vector<eval::RunReport> parse_report_tsv(const std::string& path);

}  // namespace sps::run
