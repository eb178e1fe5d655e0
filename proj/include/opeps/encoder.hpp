#pragma once

#include "opeps/core.hpp"

#include <cmath>

#include <nlohmann/json_fwd.hpp>

namespace opeps {

// Distance-scaled LDP order-preserving encoder. Each input x maps to the
// encoding of interval i with probability proportional to
// exp(-|x - d_i| * epsilon / 2), where d_i is the weighted median of
// interval i under the prior. epsilon = +infinity collapses every row to a
// point mass at the correct encoding.
//
// Immutable after construction; safe to share across threads. encode() draws
// from a caller-owned generator.
class EncodingModel {
  public:
    static EncodingModel build(const Partition &partition, const Prior &prior,
                               double epsilon);
    // Rebuilds a model from previously computed central tendencies
    // (deserialization path; probability tables are always recomputed).
    static EncodingModel from_tendencies(const Partition &partition,
                                         std::vector<double> tendencies,
                                         double epsilon);

    const Partition &partition() const { return partition_; }
    double epsilon() const { return epsilon_; }
    bool infinite_budget() const { return std::isinf(epsilon_); }
    const std::vector<double> &tendencies() const { return tendencies_; }

    // Pr[encoding of x is the encoding with 0-based index i].
    double probability(int64_t x, int index) const;
    // Full probability row for x, in encoding order.
    std::vector<double> probabilities(int64_t x) const;
    // Index of the most probable encoding for x (smallest index on ties).
    int argmax_index(int64_t x) const;

    int64_t encode(int64_t x, Rng &rng) const;

    // Exact Pr[encode(x_hi) >= encode(x_lo)] for independent draws,
    // requires x_hi > x_lo.
    double order_agreement_probability(int64_t x_hi, int64_t x_lo) const;

    nlohmann::json to_json() const;
    static EncodingModel from_json(const nlohmann::json &doc);

  private:
    EncodingModel(Partition partition, std::vector<double> tendencies,
                  double epsilon);

    void fill_row(int64_t x, double *row) const;
    // Row pointer when the eager table is present, else nullptr.
    const double *table_row(int64_t x) const;

    Partition partition_;
    double epsilon_;
    std::vector<double> tendencies_;
    // Eager |domain| x k probability table; skipped above a size cap, in
    // which case rows are recomputed per call.
    std::vector<double> table_;
    bool eager_ = false;
};

} // namespace opeps
