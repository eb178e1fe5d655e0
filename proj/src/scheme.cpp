#include "opeps/scheme.hpp"

#include <istream>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

namespace opeps {

namespace {

std::string engine_seed(std::string_view seed) {
    // Keep the engine stream distinct from the sealing key derivation.
    const SealKey derived = derive_seal_key(seed, "opeps/order-engine");
    return std::string(derived.bytes.begin(), derived.bytes.end());
}

} // namespace

OpepsScheme::OpepsScheme(std::string_view seed, const Partition &partition,
                         const Prior &prior, double scheme_epsilon)
    : scheme_epsilon_(scheme_epsilon),
      model_(EncodingModel::build(partition, prior, scheme_epsilon / 2.0)),
      engine_(engine_seed(seed)),
      seal_key_(derive_seal_key(seed, "opeps/record-seal")) {}

OpepsScheme::OpepsScheme(std::string_view seed, EncodingModel model,
                         double scheme_epsilon)
    : scheme_epsilon_(scheme_epsilon), model_(std::move(model)),
      engine_(engine_seed(seed)),
      seal_key_(derive_seal_key(seed, "opeps/record-seal")) {
    const bool both_infinite =
        std::isinf(model_.epsilon()) && std::isinf(scheme_epsilon_);
    if (!both_infinite &&
        std::abs(model_.epsilon() - scheme_epsilon_ / 2.0) > 1e-12)
        throw argument_error("encoder budget must be half the scheme budget");
}

std::vector<AugmentedCiphertext> OpepsScheme::encrypt_dataset(
    const Dataset &data, Rng &rng) {
    last_encodings_.clear();
    last_encodings_.reserve(data.size());
    for (int64_t x : data.values)
        last_encodings_.push_back(model_.encode(x, rng));
    const RandomizedOrder gamma =
        sample_randomized_order(last_encodings_, rng);

    std::vector<AugmentedCiphertext> out;
    out.reserve(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        const u128 token =
            engine_.encrypt(last_encodings_[i], gamma.perm[i]).token;
        out.push_back({token, seal_value(seal_key_, random_nonce(rng),
                                         data.values[i])});
    }
    return out;
}

std::vector<AugmentedCiphertext> OpepsScheme::encrypt_dataset(
    const Dataset &data, const RandomizedOrder &gamma, Rng &rng) {
    if (gamma.size() != data.size() || !gamma.is_permutation())
        throw argument_error("gamma must be a permutation of {1..n}");
    last_encodings_.clear();
    last_encodings_.reserve(data.size());
    std::vector<AugmentedCiphertext> out;
    out.reserve(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        const int64_t encoding = model_.encode(data.values[i], rng);
        last_encodings_.push_back(encoding);
        const u128 token = engine_.encrypt(encoding, gamma.perm[i]).token;
        out.push_back({token, seal_value(seal_key_, random_nonce(rng),
                                         data.values[i])});
    }
    return out;
}

int64_t OpepsScheme::decrypt_encoding(u128 token) const {
    return engine_.decrypt(token);
}

int64_t OpepsScheme::unseal(const AugmentedCiphertext &ct) const {
    return unseal_value(seal_key_, ct.sealed);
}

std::vector<AugmentedCiphertext>
encrypt_record_multi(std::span<OpepsScheme> columns,
                     std::span<const int64_t> row, Rng &rng) {
    if (columns.size() != row.size())
        throw argument_error("row arity does not match column schemes");
    std::vector<AugmentedCiphertext> out;
    out.reserve(row.size());
    for (size_t c = 0; c < row.size(); ++c) {
        Dataset cell(columns[c].model().partition().domain(), {row[c]});
        auto cts = columns[c].encrypt_dataset(cell, rng);
        out.push_back(std::move(cts.front()));
    }
    return out;
}

double consumed_budget(std::span<const OpepsScheme> columns) {
    double total = 0;
    for (const auto &scheme : columns)
        total += scheme.scheme_epsilon();
    return total;
}

void write_encrypted_dataset(std::ostream &out, const OpepsScheme &scheme,
                             const std::vector<AugmentedCiphertext> &records) {
    nlohmann::json header;
    header["format"] = "opeps-dataset/1";
    const auto &partition = scheme.model().partition();
    header["domain"] = {{"lo", partition.domain().lo},
                        {"hi", partition.domain().hi}};
    header["boundaries"] = partition.boundaries();
    if (std::isinf(scheme.scheme_epsilon()))
        header["epsilon"] = "inf";
    else
        header["epsilon"] = scheme.scheme_epsilon();
    out << header.dump() << '\n';
    for (const auto &record : records)
        out << to_hex(record.order_token) << ','
            << base64_encode(record.sealed) << '\n';
}

EncryptedDatasetFile read_encrypted_dataset(std::istream &in) {
    std::string line;
    if (!std::getline(in, line))
        throw ingestion_error("empty encrypted dataset stream");
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != "opeps-dataset/1")
        throw ingestion_error("unsupported encrypted dataset format");

    double epsilon;
    if (header.at("epsilon").is_string())
        epsilon = std::numeric_limits<double>::infinity();
    else
        epsilon = header.at("epsilon").get<double>();

    EncryptedDatasetFile file{
        DiscreteDomain(header.at("domain").at("lo").get<int64_t>(),
                       header.at("domain").at("hi").get<int64_t>()),
        header.at("boundaries").get<std::vector<int64_t>>(), epsilon, {}};
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ingestion_error("record line " + std::to_string(line_no) +
                                  " is not token,blob");
        file.records.push_back(
            {u128_from_hex(std::string_view(line).substr(0, comma)),
             base64_decode(std::string_view(line).substr(comma + 1))});
    }
    return file;
}

} // namespace opeps
