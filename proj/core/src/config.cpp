#include "sps/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sps/errors.hpp"

namespace sps::run {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(trim(text.substr(0, dots)));
        const std::uint64_t hi = std::stoull(trim(text.substr(dots + 2)));
        if (hi < lo) throw ConfigError("config: empty seed range '" + text + "'");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    for (const std::string& tok : split_commas(text)) seeds.push_back(std::stoull(tok));
    if (seeds.empty()) throw ConfigError("config: empty seed list");
    return seeds;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    // task
    if (key == "task.kind") task = value;
    else if (key == "task.use_flags") use_flags = parse_bool(value, key);
    else if (key == "task.bm25_feature") bm25_feature = parse_bool(value, key);
    else if (key == "task.prune_top20") prune_top20 = parse_bool(value, key);
    // model
    else if (key == "model.encoder") model.encoder = models::encoder_from_string(value);
    else if (key == "model.embed_dim") model.embed_dim = std::stoul(value);
    else if (key == "model.input_dropout") model.input_dropout = std::stod(value);
    else if (key == "model.output_dropout") model.output_dropout = std::stod(value);
    else if (key == "model.siamese") model.siamese = parse_bool(value, key);
    else if (key == "model.projection_dim") model.projection_dim = std::stoul(value);
    else if (key == "model.scorer") model.scorer = models::scorer_from_string(value);
    else if (key == "model.pad_len") model.pad_len = std::stoul(value);
    else if (key == "model.rnn_units") model.rnn_units = std::stoul(value);
    // training
    else if (key == "train.optimizer") {
        if (value == "adam") tcfg.optimizer.kind = train::Optimizer::kAdam;
        else if (value == "rmsprop") tcfg.optimizer.kind = train::Optimizer::kRmsprop;
        else throw ConfigError("config: unknown optimizer '" + value + "'");
    } else if (key == "train.learning_rate") tcfg.optimizer.learning_rate = std::stod(value);
    else if (key == "train.l2_lambda") tcfg.l2_lambda = std::stod(value);
    else if (key == "train.batch_size") tcfg.batch_size = std::stoul(value);
    else if (key == "train.max_epochs") tcfg.max_epochs = std::stoul(value);
    else if (key == "train.epoch_fraction") tcfg.epoch_fraction = std::stod(value);
    else if (key == "train.metric") tcfg.metric = value;
    else if (key == "train.dropout") tcfg.dropout_enabled = parse_bool(value, key);
    // transfer
    else if (key == "transfer.source") {
        transfer.source_checkpoint = value;
        has_transfer = true;
    } else if (key == "transfer.frozen") transfer.frozen_layers = split_commas(value);
    else if (key == "transfer.balance_labels")
        transfer.balance_labels = parse_bool(value, key);
    else if (key == "transfer.optimizer") {
        if (value == "adam") transfer.optimizer = train::Optimizer::kAdam;
        else if (value == "rmsprop") transfer.optimizer = train::Optimizer::kRmsprop;
        else throw ConfigError("config: unknown optimizer '" + value + "'");
    }
    // data
    else if (key == "data.train") train_path = value;
    else if (key == "data.val") val_path = value;
    else if (key == "data.test") test_path = value;
    else if (key == "data.embeddings") embeddings_path = value;
    else if (key == "data.stopwords") stopwords_path = value;
    else if (key == "data.nextutt_pair_cap") nextutt_pair_cap = std::stoul(value);
    else if (key == "data.vocab_seed") vocab_seed = std::stoull(value);
    // run
    else if (key == "seeds") seeds = parse_seed_list(value);
    else if (key == "out") out_dir = value;
    else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    if (cfg.seeds.empty())
        for (std::uint64_t s = 1; s <= 16; ++s) cfg.seeds.push_back(s);
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

models::TaskHead RunConfig::head() const {
    if (task == "anssel" || task == "nextutt") return models::TaskHead::kRanking;
    if (task == "rte3") return models::TaskHead::kRte3;
    if (task == "sts") return models::TaskHead::kSts;
    if (task == "binary") return models::TaskHead::kBinary;
    throw ConfigError("config: unknown task '" + task + "'");
}

std::vector<std::string> RunConfig::validate() const {
    std::vector<std::string> problems;
    const char* known_tasks[] = {"anssel", "nextutt", "rte3", "sts", "binary"};
    bool task_ok = false;
    for (const char* t : known_tasks) task_ok |= task == t;
    if (!task_ok) problems.push_back("task.kind: unknown task '" + task + "'");
    if (train_path.empty()) problems.push_back("data.train: missing dataset path");
    else if (!std::filesystem::exists(train_path))
        problems.push_back("data.train: no such file '" + train_path + "'");
    if (val_path.empty()) problems.push_back("data.val: missing dataset path");
    else if (!std::filesystem::exists(val_path))
        problems.push_back("data.val: no such file '" + val_path + "'");
    if (!test_path.empty() && !std::filesystem::exists(test_path))
        problems.push_back("data.test: no such file '" + test_path + "'");
    if (!embeddings_path.empty() && !std::filesystem::exists(embeddings_path))
        problems.push_back("data.embeddings: no such file '" + embeddings_path + "'");
    if (seeds.empty()) problems.push_back("seeds: empty seed list");
    if (tcfg.epoch_fraction <= 0.0 || tcfg.epoch_fraction > 1.0)
        problems.push_back("train.epoch_fraction: must be in (0, 1]");
    if (tcfg.l2_lambda < 0.0) problems.push_back("train.l2_lambda: must be >= 0");
    if (has_transfer && !std::filesystem::exists(transfer.source_checkpoint))
        problems.push_back("transfer.source: no such file '" +
                           transfer.source_checkpoint + "'");
    return problems;
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "task.kind = " << task << "\n";
    out << "task.use_flags = " << (use_flags ? 1 : 0) << "\n";
    out << "task.bm25_feature = " << (bm25_feature ? 1 : 0) << "\n";
    out << "task.prune_top20 = " << (prune_top20 ? 1 : 0) << "\n";
    out << "model.encoder = " << models::to_string(model.encoder) << "\n";
    out << "model.embed_dim = " << model.embed_dim << "\n";
    out << "model.input_dropout = " << model.input_dropout << "\n";
    out << "model.output_dropout = " << model.output_dropout << "\n";
    out << "model.siamese = " << (model.siamese ? 1 : 0) << "\n";
    out << "model.projection_dim = " << model.projection_dim << "\n";
    out << "model.scorer = " << models::to_string(model.scorer) << "\n";
    out << "model.pad_len = " << model.pad_len << "\n";
    out << "model.rnn_units = " << model.rnn_units << "\n";
    out << "train.optimizer = "
        << (tcfg.optimizer.kind == train::Optimizer::kAdam ? "adam" : "rmsprop") << "\n";
    out << "train.learning_rate = " << tcfg.optimizer.learning_rate << "\n";
    out << "train.l2_lambda = " << tcfg.l2_lambda << "\n";
    out << "train.batch_size = " << tcfg.batch_size << "\n";
    out << "train.max_epochs = " << tcfg.max_epochs << "\n";
    out << "train.epoch_fraction = " << tcfg.epoch_fraction << "\n";
    out << "train.metric = "
        << (tcfg.metric.empty() ? train::default_metric(head()) : tcfg.metric) << "\n";
    out << "train.dropout = " << (tcfg.dropout_enabled ? 1 : 0) << "\n";
    if (has_transfer) {
        out << "transfer.source = " << transfer.source_checkpoint << "\n";
        std::string frozen;
        for (const auto& f : transfer.frozen_layers) {
            if (!frozen.empty()) frozen += ",";
            frozen += f;
        }
        if (!frozen.empty()) out << "transfer.frozen = " << frozen << "\n";
        out << "transfer.balance_labels = " << (transfer.balance_labels ? 1 : 0) << "\n";
        out << "transfer.optimizer = "
            << (transfer.optimizer == train::Optimizer::kAdam ? "adam" : "rmsprop")
            << "\n";
    }
    out << "data.train = " << train_path << "\n";
    out << "data.val = " << val_path << "\n";
    if (!test_path.empty()) out << "data.test = " << test_path << "\n";
    if (!embeddings_path.empty()) out << "data.embeddings = " << embeddings_path << "\n";
    if (!stopwords_path.empty()) out << "data.stopwords = " << stopwords_path << "\n";
    out << "data.nextutt_pair_cap = " << nextutt_pair_cap << "\n";
    out << "data.vocab_seed = " << vocab_seed << "\n";
    std::string seed_str;
    for (std::uint64_t s : seeds) {
        if (!seed_str.empty()) seed_str += ",";
        seed_str += std::to_string(s);
    }
    out << "seeds = " << seed_str << "\n";
    out << "out = " << out_dir << "\n";
    return out.str();
}

}  // namespace sps::run
