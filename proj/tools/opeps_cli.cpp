#include "opeps/harness.hpp"
#include "opeps/scheme.hpp"

#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace {

using namespace opeps;

struct CommonFlags {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::vector<double> epsilons;
    std::string partition_spec;
    std::vector<int> neighbors;
    int trials = 0;
    std::string out_dir;
};

void add_common(CLI::App *cmd, CommonFlags &flags) {
    cmd->add_option("--config", flags.config_path,
                    "JSON experiment configuration");
    cmd->add_option("--seed", flags.seed, "master seed override")
        ->each([&flags](const std::string &) { flags.seed_set = true; });
    cmd->add_option("--epsilon", flags.epsilons,
                    "scheme epsilon override (repeatable)");
    cmd->add_option("--partition", flags.partition_spec,
                    "partition override, e.g. equi_depth:100, equi_length:10,"
                    " identity");
    cmd->add_option("--neighbors", flags.neighbors,
                    "neighbor interval widths l (repeatable)");
    cmd->add_option("--trials", flags.trials, "trial count override");
    cmd->add_option("--out-dir", flags.out_dir, "output directory override");
}

ExperimentConfig load_config(const CommonFlags &flags) {
    ExperimentConfig cfg;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in)
            throw ingestion_error("cannot open config " + flags.config_path);
        nlohmann::json doc;
        in >> doc;
        cfg = ExperimentConfig::from_json(doc);
    }
    if (flags.seed_set)
        cfg.seed = flags.seed;
    if (!flags.epsilons.empty()) {
        cfg.epsilons = flags.epsilons;
        cfg.ldp_epsilons = flags.epsilons;
        cfg.leakage.epsilons = flags.epsilons;
    }
    if (!flags.neighbors.empty())
        cfg.neighbors = flags.neighbors;
    if (flags.trials > 0)
        cfg.trials = flags.trials;
    if (!flags.out_dir.empty())
        cfg.out_dir = flags.out_dir;
    if (!flags.partition_spec.empty()) {
        const auto colon = flags.partition_spec.find(':');
        const std::string kind = flags.partition_spec.substr(0, colon);
        if (kind == "identity") {
            cfg.partition.kind = PartitionSpec::Kind::identity;
        } else if (kind == "equi_depth" || kind == "equi_length") {
            if (colon == std::string::npos)
                throw argument_error("partition spec needs a size, e.g. " +
                                     kind + ":10");
            cfg.partition.kind = kind == "equi_depth"
                                     ? PartitionSpec::Kind::equi_depth
                                     : PartitionSpec::Kind::equi_length;
            cfg.partition.sizes = {
                std::stoi(flags.partition_spec.substr(colon + 1))};
        } else {
            throw argument_error("unknown partition spec " +
                                 flags.partition_spec);
        }
    }
    return cfg;
}

std::vector<int64_t> read_values(const std::string &path) {
    std::istream *in = &std::cin;
    std::ifstream file;
    if (!path.empty() && path != "-") {
        file.open(path);
        if (!file)
            throw ingestion_error("cannot open " + path);
        in = &file;
    }
    std::vector<int64_t> values;
    std::string token;
    while (*in >> token)
        values.push_back(std::stoll(token));
    return values;
}

Partition single_partition(const ExperimentConfig &cfg, const Dataset &data) {
    switch (cfg.partition.kind) {
    case PartitionSpec::Kind::identity:
        return Partition::identity(cfg.domain);
    case PartitionSpec::Kind::equi_length:
        return Partition::equi_length(cfg.domain, cfg.partition.sizes.at(0));
    case PartitionSpec::Kind::equi_depth:
        return equi_depth_partition(data, cfg.partition.sizes.at(0));
    case PartitionSpec::Kind::explicit_bounds: {
        std::vector<int64_t> encodings(cfg.partition.boundaries.size());
        std::iota(encodings.begin(), encodings.end(), int64_t{1});
        return Partition(cfg.domain, cfg.partition.boundaries, encodings);
    }
    case PartitionSpec::Kind::workload:
        throw argument_error(
            "workload partitions require the range-exp command");
    }
    throw argument_error("unhandled partition kind");
}

int cmd_encode(const CommonFlags &flags, const std::string &input,
               const std::string &model_out) {
    ExperimentConfig cfg = load_config(flags);
    const auto values = read_values(input);
    Dataset data(cfg.domain, values);
    const Partition partition = single_partition(cfg, data);
    const Prior prior =
        values.empty()
            ? Prior::uniform(cfg.domain)
            : build_prior(PriorSpec{PriorSpec::Kind::from_data}, cfg.domain,
                          &data);
    const double epsilon = cfg.ldp_epsilons.at(0);
    const EncodingModel model =
        EncodingModel::build(partition, prior, epsilon);
    if (!model_out.empty()) {
        std::ofstream out(model_out);
        out << model.to_json().dump(2) << '\n';
    }
    Rng rng = make_rng(cfg.seed);
    for (int64_t v : values)
        std::cout << model.encode(v, rng) << '\n';
    return 0;
}

int cmd_encrypt(const CommonFlags &flags, const std::string &input,
                const std::string &out_path, const std::string &state_out,
                const std::string &key_seed) {
    ExperimentConfig cfg = load_config(flags);
    const auto values = read_values(input);
    if (values.empty())
        throw argument_error("nothing to encrypt");
    Dataset data(cfg.domain, values);
    const Partition partition = single_partition(cfg, data);
    const Prior prior =
        build_prior(PriorSpec{PriorSpec::Kind::from_data}, cfg.domain, &data);
    OpepsScheme scheme(key_seed.empty() ? "opeps:" + std::to_string(cfg.seed)
                                        : key_seed,
                       partition, prior, cfg.epsilons.at(0));
    Rng rng = make_rng(cfg.seed);
    const auto records = scheme.encrypt_dataset(data, rng);

    std::ostream *out = &std::cout;
    std::ofstream file;
    if (!out_path.empty() && out_path != "-") {
        file.open(out_path, std::ios::binary);
        if (!file)
            throw error("cannot write " + out_path);
        out = &file;
    }
    write_encrypted_dataset(*out, scheme, records);
    if (!state_out.empty()) {
        const auto blob = scheme.engine().checkpoint();
        std::ofstream state(state_out, std::ios::binary);
        state.write(reinterpret_cast<const char *>(blob.data()),
                    static_cast<std::streamsize>(blob.size()));
    }
    return 0;
}

int cmd_inspect_state(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ingestion_error("cannot open " + path);
    std::vector<uint8_t> blob((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    const OpeEngine engine = OpeEngine::restore(blob);
    const auto entries = engine.entries();
    std::cout << "entries: " << entries.size() << '\n';
    if (!entries.empty()) {
        std::cout << "plaintext range: [" << entries.front().plaintext << ", "
                  << entries.back().plaintext << "]\n";
        std::cout << "token range: [" << to_hex(entries.front().token) << ", "
                  << to_hex(entries.back().token) << "]\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"differentially private order-preserving encoding and "
                 "encrypted range queries"};
    app.require_subcommand(1);

    CommonFlags encode_flags, encrypt_flags, range_flags, ldp_flags,
        leakage_flags;
    std::string encode_input, encode_model_out;
    std::string encrypt_input, encrypt_out, encrypt_state_out, encrypt_key;
    std::string inspect_path;

    auto *encode = app.add_subcommand(
        "encode", "encode newline-delimited integers under the local model");
    add_common(encode, encode_flags);
    encode->add_option("--input", encode_input,
                       "value file (default stdin)");
    encode->add_option("--model-out", encode_model_out,
                       "write the encoder model as JSON");

    auto *encrypt = app.add_subcommand(
        "encrypt", "encrypt a column into an order-token dataset file");
    add_common(encrypt, encrypt_flags);
    encrypt->add_option("--input", encrypt_input,
                        "value file (default stdin)");
    encrypt->add_option("--out", encrypt_out, "encrypted dataset path");
    encrypt->add_option("--state-out", encrypt_state_out,
                        "write the engine state checkpoint");
    encrypt->add_option("--key-seed", encrypt_key,
                        "key material seed (defaults to the master seed)");

    auto *range = app.add_subcommand("range-exp",
                                     "range-query utility experiment");
    add_common(range, range_flags);
    auto *ldp = app.add_subcommand("ldp-exp",
                                   "local-model estimation experiment");
    add_common(ldp, ldp_flags);
    auto *leakage = app.add_subcommand("leakage",
                                       "leakage matrices and attack bounds");
    add_common(leakage, leakage_flags);

    auto *inspect = app.add_subcommand("inspect-state",
                                       "summarize an engine checkpoint");
    inspect->add_option("--state", inspect_path, "checkpoint path")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (encode->parsed())
            return cmd_encode(encode_flags, encode_input, encode_model_out);
        if (encrypt->parsed())
            return cmd_encrypt(encrypt_flags, encrypt_input, encrypt_out,
                               encrypt_state_out, encrypt_key);
        if (range->parsed()) {
            const ExperimentConfig cfg = load_config(range_flags);
            const auto result = run_range_experiment(cfg);
            for (const auto &path : write_range_outputs(cfg, result))
                std::cout << "wrote " << path.string() << '\n';
            return 0;
        }
        if (ldp->parsed()) {
            const ExperimentConfig cfg = load_config(ldp_flags);
            const auto result = run_ldp_experiment(cfg);
            for (const auto &path : write_ldp_outputs(cfg, result))
                std::cout << "wrote " << path.string() << '\n';
            return 0;
        }
        if (leakage->parsed()) {
            const ExperimentConfig cfg = load_config(leakage_flags);
            const auto result = run_leakage_report(cfg);
            for (const auto &path : write_leakage_outputs(cfg, result))
                std::cout << "wrote " << path.string() << '\n';
            return 0;
        }
        if (inspect->parsed())
            return cmd_inspect_state(inspect_path);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
