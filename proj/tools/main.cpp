// pairscore command-line front end: train / bench / transfer / baseline /
// gradcheck / report. Exit codes: 0 success, 1 configuration problem,
// 2 runtime failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sps/config.hpp"
#include "sps/errors.hpp"
#include "sps/runner.hpp"

namespace {

sps::run::RunConfig load_config(const std::string& path,
                                const std::vector<std::string>& overrides) {
    sps::run::RunConfig cfg = sps::run::RunConfig::from_file(path);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw sps::ConfigError("--set expects key=value, got '" + kv + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sentence-pair scoring framework"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string seed_spec;
    std::size_t runs = 0;
    std::vector<std::string> report_paths;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("-c,--config", config_path, "run config file");
        if (needs_config) opt->required();
        sub->add_option("--set", overrides, "override a config key (key=value)");
        sub->add_option("-o,--out", out_dir, "output directory override");
        sub->add_option("--seed", seed_spec, "seed list override (e.g. 1..16 or 3,5)");
    };

    CLI::App* train = app.add_subcommand("train", "train one model on one seed");
    add_common(train, true);

    CLI::App* bench =
        app.add_subcommand("bench", "multi-seed benchmark with confidence intervals");
    add_common(bench, true);
    bench->add_option("--runs", runs, "cap on the number of seeds to run");

    CLI::App* transfer =
        app.add_subcommand("transfer", "multi-seed benchmark starting from a checkpoint");
    add_common(transfer, true);
    transfer->add_option("--runs", runs, "cap on the number of seeds to run");

    CLI::App* baseline =
        app.add_subcommand("baseline", "BM25 / TF-IDF retrieval baselines");
    add_common(baseline, true);

    app.add_subcommand("gradcheck",
                       "finite-difference check of every operation and encoder");

    CLI::App* report = app.add_subcommand("report", "merge bench report.tsv files");
    report->add_option("files", report_paths, "report.tsv paths")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("gradcheck")) return sps::run::cmd_gradcheck(std::cout);
        if (app.got_subcommand("report"))
            return sps::run::cmd_report(report_paths, std::cout);

        sps::run::RunConfig cfg = load_config(config_path, overrides);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!seed_spec.empty()) cfg.seeds = sps::run::parse_seed_list(seed_spec);

        if (app.got_subcommand("train")) return sps::run::cmd_train(cfg, std::cout);
        if (app.got_subcommand("bench"))
            return sps::run::cmd_bench(cfg, runs, std::cout);
        if (app.got_subcommand("transfer"))
            return sps::run::cmd_transfer(cfg, runs, std::cout);
        if (app.got_subcommand("baseline")) return sps::run::cmd_baseline(cfg, std::cout);
    } catch (const sps::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
