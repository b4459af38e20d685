#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sps/models.hpp"
#include "sps/training.hpp"

namespace sps::run {

// Fully resolved run description: task, model, training, data paths, seeds.
// Parsed from flat `key = value` text with dotted section prefixes
// (`model.encoder = rnn`); command-line overrides use the same keys.
struct RunConfig {
    // task
    std::string task = "anssel";  // anssel | nextutt | rte3 | sts | binary
    bool use_flags = true;
    bool bm25_feature = false;
    bool prune_top20 = false;

    // model (embed_dim/vocab filled at run time)
    models::ModelSpec model;

    // training
    train::TrainConfig tcfg;

    // transfer (optional)
    bool has_transfer = false;
    train::TransferConfig transfer;

    // data
    std::string train_path, val_path, test_path;
    std::string embeddings_path;  // empty = random embeddings
    std::string stopwords_path;   // empty = builtin list
    std::size_t nextutt_pair_cap = 1000000;
    std::uint64_t vocab_seed = 12345;

    std::vector<std::uint64_t> seeds;  // default 1..16
    std::string out_dir = "out";

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);
    void set(const std::string& key, const std::string& value);

    // Materializes every default; the snapshot reproduces the run exactly.
    std::string serialize() const;

    // Collects all validation problems at once.
    std::vector<std::string> validate() const;

    models::TaskHead head() const;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace sps::run
