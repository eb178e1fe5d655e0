#pragma once

#include "opeps/codec.hpp"
#include "opeps/core.hpp"
#include "opeps/encoder.hpp"
#include "opeps/ope_engine.hpp"
#include "opeps/sealing.hpp"

#include <iosfwd>
#include <span>
#include <string_view>

namespace opeps {

// Order component plus sealed exact value.
struct AugmentedCiphertext {
    u128 order_token;
    std::vector<uint8_t> sealed;
};

// Composition of the distance-private encoder with the stateful OPE engine
// and an authenticated-encryption piggyback. The advertised scheme-level
// budget epsilon funds the encoder at epsilon/2; the remaining factor covers
// the order leakage of the composed ciphertexts.
//
// Encrypting a dataset mutates the engine state and is sequential;
// independent schemes may run in parallel.
class OpepsScheme {
  public:
    OpepsScheme(std::string_view seed, const Partition &partition,
                const Prior &prior, double scheme_epsilon);
    // Reuses a prebuilt encoder; its budget must equal scheme_epsilon / 2.
    OpepsScheme(std::string_view seed, EncodingModel model,
                double scheme_epsilon);

    double scheme_epsilon() const { return scheme_epsilon_; }
    const EncodingModel &model() const { return model_; }
    OpeEngine &engine() { return engine_; }
    const OpeEngine &engine() const { return engine_; }
    const SealKey &seal_key() const { return seal_key_; }

    // Encodes, inserts into the OPE state under a fresh randomized order of
    // the encoding sequence, and seals each exact value.
    std::vector<AugmentedCiphertext> encrypt_dataset(const Dataset &data,
                                                     Rng &rng);
    // Caller-chosen order; must be a permutation of {1..n}. Leakage equals
    // gamma only when gamma is a randomized order of the realized encodings.
    std::vector<AugmentedCiphertext>
    encrypt_dataset(const Dataset &data, const RandomizedOrder &gamma,
                    Rng &rng);

    // Realized encodings of the most recent encrypt_dataset call, aligned
    // with its input order.
    const std::vector<int64_t> &last_encodings() const {
        return last_encodings_;
    }

    int64_t decrypt_encoding(u128 token) const;
    int64_t unseal(const AugmentedCiphertext &ct) const;

  private:
    double scheme_epsilon_;
    EncodingModel model_;
    OpeEngine engine_;
    SealKey seal_key_;
    std::vector<int64_t> last_encodings_;
};

// Per-column encryption of one row; consumes every scheme's budget once.
std::vector<AugmentedCiphertext>
encrypt_record_multi(std::span<OpepsScheme> columns,
                     std::span<const int64_t> row, Rng &rng);

// Additive budget over per-column guarantees.
double consumed_budget(std::span<const OpepsScheme> columns);

// Newline-delimited encrypted dataset: a JSON metadata header line, then one
// "token_hex,sealed_base64" line per record.
void write_encrypted_dataset(std::ostream &out, const OpepsScheme &scheme,
                             const std::vector<AugmentedCiphertext> &records);

struct EncryptedDatasetFile {
    DiscreteDomain domain;
    std::vector<int64_t> boundaries;
    double scheme_epsilon;
    std::vector<AugmentedCiphertext> records;
};

EncryptedDatasetFile read_encrypted_dataset(std::istream &in);

} // namespace opeps
