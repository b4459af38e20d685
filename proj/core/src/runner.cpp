#include "sps/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "sps/checkpoint.hpp"
#include "sps/gradcheck.hpp"

namespace sps::run {

namespace fs = std::filesystem;

namespace {

textprep::Vocabulary build_vocab(const RunConfig& cfg) {
    if (!cfg.embeddings_path.empty())
        return textprep::load_embeddings(cfg.embeddings_path, cfg.model.embed_dim,
                                         cfg.vocab_seed);
    return textprep::Vocabulary(cfg.model.embed_dim, cfg.vocab_seed);
}

train::PrepareOptions prepare_options(const RunConfig& cfg) {
    train::PrepareOptions opts;
    opts.use_flags = cfg.use_flags;
    opts.bm25_feature = cfg.bm25_feature;
    opts.prune_top_k = cfg.prune_top20 ? 20 : 0;
    opts.pad_len = cfg.model.pad_len;
    opts.stopwords = cfg.stopwords_path.empty()
                         ? textprep::StopwordSet::builtin()
                         : textprep::StopwordSet::from_file(cfg.stopwords_path);
    return opts;
}

void warn_wang_yodaqa_mix(const RunConfig& cfg, std::ostream& out) {
    const std::string all = cfg.train_path + " " + cfg.val_path + " " + cfg.test_path;
    if (all.find("wang") != std::string::npos &&
        all.find("yodaqa") != std::string::npos) {
        out << "warning: mixing wang and yodaqa splits in one run; their "
               "question sets overlap and results will be inflated\n";
    }
}

train::PreparedData load_and_prepare(const RunConfig& cfg, std::uint64_t seed,
                                     textprep::Vocabulary& vocab, bool balance) {
    const auto opts = prepare_options(cfg);
    if (cfg.task == "anssel") {
        auto train_groups = data::load_ranking(cfg.train_path);
        auto val_groups = data::load_ranking(cfg.val_path);
        std::vector<data::PairGroup> test_groups;
        if (!cfg.test_path.empty()) test_groups = data::load_ranking(cfg.test_path);
        return train::prepare_ranking(std::move(train_groups), std::move(val_groups),
                                      std::move(test_groups), vocab, opts);
    }
    if (cfg.task == "nextutt") {
        auto samples = data::load_nextutt_train(cfg.train_path, cfg.nextutt_pair_cap);
        if (balance) samples = data::balance_labels(samples, seed);
        train::PreparedData prepared;
        prepared.head = models::TaskHead::kRanking;
        prepared.train_pointwise = true;
        for (const auto& s : samples) {
            if (s.s0.empty() || s.s1.empty()) continue;
            prepared.train_pairs.push_back(
                train::prepare_one_pair(s.s0, s.s1, s.label, vocab, opts));
        }
        prepared.val_groups = train::prepare_groups_simple(
            data::load_nextutt_eval(cfg.val_path, seed), vocab, opts);
        if (!cfg.test_path.empty())
            prepared.test_groups = train::prepare_groups_simple(
                data::load_nextutt_eval(cfg.test_path, seed), vocab, opts);
        return prepared;
    }
    if (cfg.task == "rte3" || cfg.task == "sts" || cfg.task == "binary") {
        std::vector<data::PairSample> train_samples, val_samples, test_samples;
        if (cfg.task == "rte3") {
            train_samples = data::load_rte(cfg.train_path);
            val_samples = data::load_rte(cfg.val_path);
            if (!cfg.test_path.empty()) test_samples = data::load_rte(cfg.test_path);
        } else if (cfg.task == "sts") {
            train_samples = data::load_sts(cfg.train_path);
            val_samples = data::load_sts(cfg.val_path);
            if (!cfg.test_path.empty()) test_samples = data::load_sts(cfg.test_path);
        } else {
            train_samples = data::load_nextutt_train(cfg.train_path, SIZE_MAX);
            val_samples = data::load_nextutt_train(cfg.val_path, SIZE_MAX);
            if (!cfg.test_path.empty())
                test_samples = data::load_nextutt_train(cfg.test_path, SIZE_MAX);
        }
        if (balance && cfg.task == "binary")
            train_samples = data::balance_labels(train_samples, seed);
        return train::prepare_pairs(cfg.head(), std::move(train_samples),
                                    std::move(val_samples), std::move(test_samples),
                                    vocab, opts);
    }
    throw ConfigError("unknown task: " + cfg.task);
}

void load_params_into(models::Model& model, const ag::ParamSet& source) {
    for (auto& [name, p] : model.params()) {
        const auto it = source.find(name);
        if (it == source.end()) continue;
        p->val = it->second->val;
    }
}

}  // namespace

std::vector<std::string> metrics_for_task(const std::string& task) {
    if (task == "anssel") return {"map", "mrr"};
    if (task == "nextutt") return {"mrr", "r@1/10", "r@2/10", "r@5/10", "r@1/2"};
    if (task == "sts") return {"pearson"};
    return {"accuracy"};
}

TrialResult run_trial(const RunConfig& cfg, std::uint64_t seed) {
    TrialResult trial;
    trial.seed = seed;

    textprep::Vocabulary vocab = build_vocab(cfg);
    const bool balance = cfg.has_transfer && cfg.transfer.balance_labels;
    train::PreparedData data = load_and_prepare(cfg, seed, vocab, balance);

    models::ModelSpec spec = cfg.model;
    spec.head = cfg.head();
    spec.use_bm25_feature = cfg.bm25_feature;
    spec.resolve();

    Rng init_rng(seed);
    models::Model model = models::Model::init(spec, vocab, init_rng);

    train::TrainConfig tcfg = cfg.tcfg;
    tcfg.seed = seed;
    if (cfg.has_transfer) {
        const ag::Checkpoint source = ag::load_checkpoint(cfg.transfer.source_checkpoint);
        train::apply_transfer(source, model, cfg.transfer, tcfg);
    }

    trial.training = train::train(model, data, tcfg);
    load_params_into(model, trial.training.best_params);

    const bool use_test = data.ranking() ? !data.test_groups.empty()
                                         : !data.test_pairs.empty();
    for (const std::string& metric : metrics_for_task(cfg.task)) {
        double value;
        if (data.ranking()) {
            value = train::evaluate_metric(
                model, use_test ? data.test_groups : data.val_groups, metric);
        } else {
            value = train::evaluate_metric(
                model, use_test ? data.test_pairs : data.val_pairs, data.head, metric);
        }
        trial.test_metrics[metric] = value;
    }
    return trial;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    const auto problems = cfg.validate();
    if (!problems.empty()) {
        for (const auto& p : problems) out << "config error: " << p << "\n";
        return 1;
    }
    warn_wang_yodaqa_mix(cfg, out);
    fs::create_directories(cfg.out_dir);
    const std::uint64_t seed = cfg.seeds.front();
    TrialResult trial = run_trial(cfg, seed);

    // artifact 1: best checkpoint
    models::ModelSpec spec = cfg.model;
    spec.head = cfg.head();
    spec.use_bm25_feature = cfg.bm25_feature;
    spec.dropout_enabled = cfg.tcfg.dropout_enabled;
    spec.resolve();
    ag::save_checkpoint(cfg.out_dir + "/checkpoint.bin", spec.serialize(),
                        trial.training.best_params);

    // artifact 2: per-epoch metric log
    {
        std::ofstream log(cfg.out_dir + "/epochs.tsv", std::ios::binary);
        log << std::setprecision(17);
        for (const auto& e : trial.training.log)
            log << e.epoch << "\t" << e.train_loss << "\t" << e.val_metric << "\n";
    }

    // artifact 3: resolved config snapshot
    {
        std::ofstream snap(cfg.out_dir + "/config.resolved", std::ios::binary);
        snap << cfg.serialize();
    }

    out << "seed " << seed << ": best epoch " << trial.training.best_epoch
        << ", val " << trial.training.best_metric << "\n";
    for (const auto& [metric, value] : trial.test_metrics)
        out << metric << "\t" << value << "\n";
    return 0;
}

namespace {

std::size_t worker_count() {
    if (const char* env = std::getenv("SPS_WORKERS")) {
        const long n = std::atol(env);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return 1;
}

int bench_impl(const RunConfig& cfg, std::size_t runs, std::ostream& out) {
    const auto problems = cfg.validate();
    if (!problems.empty()) {
        for (const auto& p : problems) out << "config error: " << p << "\n";
        return 1;
    }
    warn_wang_yodaqa_mix(cfg, out);
    fs::create_directories(cfg.out_dir);

    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (runs > 0 && runs < seeds.size()) seeds.resize(runs);
    if (seeds.size() < 2) {
        out << "config error: bench needs at least 2 seeds\n";
        return 1;
    }

    std::vector<TrialResult> trials(seeds.size());
    std::vector<std::string> failures(seeds.size());
    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                trials[i] = run_trial(cfg, seeds[i]);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const std::size_t workers = std::min(worker_count(), seeds.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    // partial per-seed results are preserved even when a seed fails
    {
        std::ofstream per_seed(cfg.out_dir + "/seeds.tsv", std::ios::binary);
        per_seed << std::setprecision(17);
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (!failures[i].empty()) continue;
            per_seed << seeds[i];
            for (const auto& [metric, value] : trials[i].test_metrics)
                per_seed << "\t" << metric << "=" << value;
            per_seed << "\n";
        }
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!failures[i].empty()) {
            out << "seed " << seeds[i] << " failed: " << failures[i] << "\n";
            return 2;
        }
    }

    std::ofstream table(cfg.out_dir + "/report.txt", std::ios::binary);
    std::ofstream tsv(cfg.out_dir + "/report.tsv", std::ios::binary);
    tsv << std::setprecision(17);
    for (const std::string& metric : metrics_for_task(cfg.task)) {
        std::vector<double> values;
        for (const auto& trial : trials) values.push_back(trial.test_metrics.at(metric));
        const eval::RunReport report = eval::aggregate_runs(metric, values);
        const std::string line = eval::format_report_line(report);
        table << line << "\n";
        out << line << "\n";
        tsv << metric << "\t" << report.mean << "\t" << report.half_width;
        tsv << "\t";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) tsv << ",";
            tsv << values[i];
        }
        tsv << "\n";
    }
    {
        std::ofstream snap(cfg.out_dir + "/config.resolved", std::ios::binary);
        snap << cfg.serialize();
    }
    return 0;
}

}  // namespace

int cmd_bench(const RunConfig& cfg, std::size_t runs, std::ostream& out) {
    return bench_impl(cfg, runs, out);
}

int cmd_transfer(const RunConfig& cfg, std::size_t runs, std::ostream& out) {
    if (!cfg.has_transfer) {
        out << "config error: transfer.source is required\n";
        return 1;
    }
    return bench_impl(cfg, runs, out);
}

int cmd_baseline(const RunConfig& cfg, std::ostream& out) {
    const auto problems = cfg.validate();
    if (!problems.empty()) {
        for (const auto& p : problems) out << "config error: " << p << "\n";
        return 1;
    }
    if (cfg.task != "anssel" && cfg.task != "nextutt") {
        out << "config error: baseline supports ranking tasks only\n";
        return 1;
    }
    warn_wang_yodaqa_mix(cfg, out);
    fs::create_directories(cfg.out_dir);

    const std::uint64_t seed = cfg.seeds.front();
    std::vector<data::PairGroup> train_groups, eval_groups;
    if (cfg.task == "anssel") {
        train_groups = data::load_ranking(cfg.train_path);
        eval_groups = data::load_ranking(cfg.test_path.empty() ? cfg.val_path
                                                               : cfg.test_path);
    } else {
        // IDF comes from the eval candidates themselves; the pointwise train
        // file has no grouped structure to fit on
        eval_groups = data::load_nextutt_eval(
            cfg.test_path.empty() ? cfg.val_path : cfg.test_path, seed);
        train_groups = eval_groups;
    }
    std::vector<textprep::TokenizedSentence> docs;
    for (const auto& g : train_groups)
        for (const auto& cand : g.candidates) docs.push_back(cand);
    const ir::CorpusStats stats = ir::fit_stats(docs);

    for (const std::string method : {"bm25", "tfidf"}) {
        std::ofstream scores_out(cfg.out_dir + "/" + method + "_scores.tsv",
                                 std::ios::binary);
        scores_out << std::setprecision(17);
        std::vector<eval::RankedGroup> ranked;
        for (const auto& g : eval_groups) {
            eval::RankedGroup rg;
            rg.labels = g.labels;
            for (std::size_t i = 0; i < g.candidates.size(); ++i) {
                const double s = method == "bm25"
                                     ? ir::bm25_score(g.s0, g.candidates[i], stats)
                                     : ir::tfidf_score(g.s0, g.candidates[i], stats);
                rg.scores.push_back(s);
                scores_out << g.id << "\t" << i << "\t" << s << "\n";
            }
            if (g.has_positive()) ranked.push_back(std::move(rg));
        }
        out << method << "\tmap=" << eval::map_metric(ranked)
            << "\tmrr=" << eval::mrr_metric(ranked) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gradient-check suite
// ---------------------------------------------------------------------------

namespace {

ag::ParamSet random_params(Rng& rng,
                           std::initializer_list<std::pair<const char*,
                                                           std::vector<std::size_t>>> defs,
                           double lo = -1.0, double hi = 1.0) {
    ag::ParamSet params;
    for (const auto& [name, shape] : defs) {
        std::size_t n = 1;
        for (std::size_t e : shape) n *= e;
        std::vector<double> vals(n);
        for (double& v : vals) v = rng.uniform(lo, hi);
        params.emplace(name, ag::make_param(shape, std::move(vals)));
    }
    return params;
}

// keeps relu/max inputs away from kinks and ties
void nudge_from_zero(ag::ParamSet& params, double margin = 0.05) {
    for (auto& [name, p] : params)
        for (double& v : p->val)
            if (std::abs(v) < margin) v = v < 0 ? v - margin : v + margin;
}

GradCheckItem check_many(const std::string& name, std::size_t trials,
                         const std::function<double(Rng&)>& one_trial) {
    GradCheckItem item;
    item.name = name;
    Rng rng(0xC0FFEE ^ std::hash<std::string>{}(name));
    for (std::size_t t = 0; t < trials; ++t)
        item.max_rel_err = std::max(item.max_rel_err, one_trial(rng));
    return item;
}

double encoder_check(models::EncoderKind kind, Rng& rng) {
    const std::size_t n = 4;
    textprep::Vocabulary vocab(n, rng.next_u64());
    for (const char* w : {"alpha", "beta", "gamma", "delta", "one", "two"})
        vocab.add_unknown(w);

    models::ModelSpec spec;
    spec.encoder = kind;
    spec.embed_dim = n;
    spec.pad_len = 6;
    spec.dropout_enabled = false;
    spec.scorer = models::ScorerKind::kMlp;
    Rng init_rng(rng.next_u64());
    models::Model model = models::Model::init(spec, vocab, init_rng);
    nudge_from_zero(model.params(), 0.02);

    textprep::TokenizedSentence s0 = textprep::tokenize("alpha beta gamma one");
    textprep::TokenizedSentence s1 = textprep::tokenize("beta delta two");
    textprep::overlap_flags(s0, s1, textprep::StopwordSet::builtin());
    textprep::assign_indices(s0, vocab);
    textprep::assign_indices(s1, vocab);
    const auto e0 = textprep::embed_sequence(s0, vocab, spec.pad_len);
    const auto e1 = textprep::embed_sequence(s1, vocab, spec.pad_len);

    Rng fwd_rng(0);
    const auto builder = [&](ag::Tape& tape, ag::ParamSet&) {
        return model.forward(tape, e0, e1, {}, false, fwd_rng).score;
    };
    return ag::grad_check(builder, model.params()).max_rel_err;
}

}  // namespace

std::vector<GradCheckItem> run_gradcheck_suite() {
    using ag::Tape;
    using ag::Value;
    std::vector<GradCheckItem> items;

    items.push_back(check_many("matmul", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"A", {3, 4}}, {"B", {4, 2}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::matmul(t, p["A"], p["B"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("matvec", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"A", {3, 4}}, {"x", {4}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::matvec(t, p["A"], p["x"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("add_mul", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"a", {2, 3}}, {"b", {2, 3}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(
                           t, ag::mul(t, ag::add(t, p["a"], p["b"]), p["a"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("tanh", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"x", {5}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::tanh_op(t, p["x"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("relu", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"x", {6}}});
        nudge_from_zero(params);
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::relu(t, p["x"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("sigmoid", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"x", {5}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::sigmoid(t, p["x"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("masked_softmax", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"x", {5}}, {"w", {5}}});
        const std::vector<double> mask = {1, 1, 0, 1, 1};
        return ag::grad_check(
                   [mask](Tape& t, ag::ParamSet& p) {
                       return ag::dot(t, ag::masked_softmax(t, p["x"], mask), p["w"]);
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("conv1d", 20, [](Rng& rng) {
        auto params =
            random_params(rng, {{"s", {5, 3}}, {"F", {3, 3, 2}}, {"b", {2}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::conv1d(t, p["s"], p["F"], p["b"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("max_over_time", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"s", {5, 3}}});
        const std::vector<double> mask = {1, 1, 1, 0, 1};
        return ag::grad_check(
                   [mask](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::max_over_time(t, p["s"], mask));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("masked_mean", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"s", {4, 3}}});
        const std::vector<double> mask = {1, 0, 1, 1};
        return ag::grad_check(
                   [mask](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(t, ag::masked_mean(t, p["s"], mask));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("scale_rows_cols", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"s", {4, 3}}, {"r", {4}}, {"c", {3}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       return ag::sum_all(
                           t, ag::scale_cols(t, ag::scale_rows(t, p["s"], p["r"]),
                                             p["c"]));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("structural", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"a", {3}}, {"b", {4}}, {"m", {3, 2}}});
        return ag::grad_check(
                   [](Tape& t, ag::ParamSet& p) {
                       Value cat = ag::concat(t, {p["a"], p["b"], ag::row(t, p["m"], 1)});
                       return ag::sum_all(t, ag::tanh_op(t, cat));
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("gru_step_3x", 10, [](Rng& rng) {
        const std::size_t h = 3, c = 2;
        auto params = random_params(rng, {{"Wz", {h, c}}, {"Uz", {h, h}}, {"bz", {h}},
                                          {"Wr", {h, c}}, {"Ur", {h, h}}, {"br", {h}},
                                          {"Wh", {h, c}}, {"Uh", {h, h}}, {"bh", {h}},
                                          {"x", {3, c}}});
        return ag::grad_check(
                   [h](Tape& t, ag::ParamSet& p) {
                       Value state = ag::make_leaf({h}, std::vector<double>(h, 0.0));
                       for (std::size_t step = 0; step < 3; ++step) {
                           Value x = ag::row(t, p["x"], step);
                           state = models::gru_step(t, x, state, p["Wz"], p["Uz"],
                                                    p["bz"], p["Wr"], p["Ur"], p["br"],
                                                    p["Wh"], p["Uh"], p["bh"]);
                       }
                       return ag::sum_all(t, state);
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("ranknet_loss", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"s", {6, 1}}});
        const std::vector<double> labels = {1, 0, 0, 1, 0, 1};
        return ag::grad_check(
                   [labels](Tape& t, ag::ParamSet& p) {
                       std::vector<Value> scores;
                       for (std::size_t i = 0; i < 6; ++i)
                           scores.push_back(ag::sum_all(t, ag::row(t, p["s"], i)));
                       return train::ranknet_loss(t, scores, labels, {0, 3, 6});
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("pearson_loss", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"s", {5, 1}}});
        const std::vector<double> gold = {1.0, 2.5, 0.5, 4.0, 3.0};
        return ag::grad_check(
                   [gold](Tape& t, ag::ParamSet& p) {
                       std::vector<Value> pred;
                       for (std::size_t i = 0; i < 5; ++i)
                           pred.push_back(ag::sum_all(t, ag::row(t, p["s"], i)));
                       return train::pearson_loss(t, pred, gold);
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("bce_loss", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"s", {4, 1}}}, -2.0, 2.0);
        const std::vector<double> labels = {1, 0, 1, 0};
        return ag::grad_check(
                   [labels](Tape& t, ag::ParamSet& p) {
                       std::vector<Value> pred;
                       for (std::size_t i = 0; i < 4; ++i)
                           pred.push_back(ag::sigmoid(
                               t, ag::sum_all(t, ag::row(t, p["s"], i))));
                       return train::bce_loss(t, pred, labels);
                   },
                   params)
            .max_rel_err;
    }));
    items.push_back(check_many("cross_entropy", 20, [](Rng& rng) {
        auto params = random_params(rng, {{"x", {4}}});
        const std::vector<double> target = {0.0, 0.6, 0.4, 0.0};
        const std::vector<double> mask(4, 1.0);
        return ag::grad_check(
                   [target, mask](Tape& t, ag::ParamSet& p) {
                       return train::cross_entropy(
                           t, ag::masked_softmax(t, p["x"], mask), target);
                   },
                   params)
            .max_rel_err;
    }));

    const std::pair<const char*, models::EncoderKind> encoders[] = {
        {"encoder_avg", models::EncoderKind::kAvg},
        {"encoder_dan", models::EncoderKind::kDan},
        {"encoder_rnn", models::EncoderKind::kRnn},
        {"encoder_cnn", models::EncoderKind::kCnn},
        {"encoder_rnn_cnn", models::EncoderKind::kRnnCnn},
        {"encoder_attn1511", models::EncoderKind::kAttn1511},
    };
    for (const auto& [name, kind] : encoders) {
        items.push_back(check_many(name, 2, [kind](Rng& rng) {
            return encoder_check(kind, rng);
        }));
    }
    return items;
}

int cmd_gradcheck(std::ostream& out) {
    bool all_pass = true;
    for (const auto& item : run_gradcheck_suite()) {
        out << (item.pass() ? "PASS" : "FAIL") << "\t" << item.name << "\tmax_rel_err="
            << item.max_rel_err << "\ttol=" << item.tolerance << "\n";
        all_pass = all_pass && item.pass();
    }
    return all_pass ? 0 : 2;
}

std::vector<eval::RunReport> parse_report_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path);
    std::vector<eval::RunReport> reports;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        eval::RunReport report;
        std::string values_field;
        if (!std::getline(ss, report.metric, '\t'))
            throw DataError("report: bad line '" + line + "'");
        std::string mean_s, half_s;
        std::getline(ss, mean_s, '\t');
        std::getline(ss, half_s, '\t');
        std::getline(ss, values_field, '\t');
        report.mean = std::stod(mean_s);
        report.half_width = std::stod(half_s);
        std::istringstream vs(values_field);
        std::string tok;
        while (std::getline(vs, tok, ',')) report.values.push_back(std::stod(tok));
        reports.push_back(std::move(report));
    }
    return reports;
}

int cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
    if (paths.empty()) {
        out << "report: no input files\n";
        return 1;
    }
    for (const std::string& path : paths) {
        for (const auto& report : parse_report_tsv(path)) {
            out << path << "\t" << report.metric << "\t" << report.mean << "\t±"
                << report.half_width << "\n";
        }
    }
    return 0;
}

}  // namespace sps::run
