#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace opeps {

// Seedable generator passed explicitly wherever randomness is consumed.
// Generators are owned per task and never shared across threads.
using Rng = std::mt19937_64;

Rng make_rng(uint64_t seed);
// Derives an independent stream for a sub-task (e.g. one Monte Carlo trial).
Rng derive_rng(uint64_t master_seed, uint64_t stream);

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct domain_error : error {
    using error::error;
};
struct argument_error : error {
    using error::error;
};
struct degenerate_prior_error : error {
    using error::error;
};
struct lookup_error : error {
    using error::error;
};
struct integrity_error : error {
    using error::error;
};
struct ingestion_error : error {
    using error::error;
};

// Integer interval [lo, hi], both ends inclusive.
struct DiscreteDomain {
    int64_t lo;
    int64_t hi;

    DiscreteDomain(int64_t lo_, int64_t hi_);

    int64_t size() const { return hi - lo + 1; }
    bool contains(int64_t x) const { return x >= lo && x <= hi; }
    // 0-based offset of x inside the domain.
    int64_t index_of(int64_t x) const;
    bool operator==(const DiscreteDomain &) const = default;
};

// Ordered, non-overlapping intervals tiling a domain, plus one strictly
// ascending integer encoding per interval. Interval i (0-based) covers
// (boundary[i-1], boundary[i]]; the first interval starts at domain.lo.
class Partition {
  public:
    Partition(DiscreteDomain domain, std::vector<int64_t> boundaries,
              std::vector<int64_t> encodings);

    static Partition identity(DiscreteDomain domain);
    static Partition equi_length(DiscreteDomain domain, int k);
    static Partition single(DiscreteDomain domain, int64_t encoding = 1);

    const DiscreteDomain &domain() const { return domain_; }
    int size() const { return static_cast<int>(boundaries_.size()); }

    int interval_index(int64_t x) const;
    int64_t encoding_of(int64_t x) const;
    int64_t encoding_at(int index) const;
    int index_of_encoding(int64_t encoding) const;
    int64_t interval_lo(int index) const;
    int64_t interval_hi(int index) const;

    const std::vector<int64_t> &boundaries() const { return boundaries_; }
    const std::vector<int64_t> &encodings() const { return encodings_; }
    bool is_identity() const;
    bool operator==(const Partition &) const = default;

  private:
    DiscreteDomain domain_;
    std::vector<int64_t> boundaries_;
    std::vector<int64_t> encodings_;
};

// Probability mass function over a discrete domain; weights must be
// non-negative and sum to 1 within 1e-9.
class Prior {
  public:
    Prior(DiscreteDomain domain, std::vector<double> pmf);

    static Prior uniform(DiscreteDomain domain);
    static Prior from_counts(DiscreteDomain domain,
                             const std::vector<int64_t> &values);

    const DiscreteDomain &domain() const { return domain_; }
    double mass(int64_t x) const;
    const std::vector<double> &pmf() const { return pmf_; }
    // Total mass on [a, b] intersected with the domain.
    double mass_between(int64_t a, int64_t b) const;

  private:
    DiscreteDomain domain_;
    std::vector<double> pmf_;
};

struct Dataset {
    DiscreteDomain domain;
    std::vector<int64_t> values;

    Dataset(DiscreteDomain domain_, std::vector<int64_t> values_);
    size_t size() const { return values.size(); }
};

// Permutation of {1..n} whose inverse sorts the tagged dataset; ties among
// equal values may appear in any rank order.
struct RandomizedOrder {
    std::vector<uint32_t> perm;

    size_t size() const { return perm.size(); }
    bool is_permutation() const;
    bool valid_for(const std::vector<int64_t> &values) const;
};

// Weighted median of interval `interval_index` under `prior`, restricted and
// renormalized to the interval. With L the smallest value whose cumulative
// weight reaches 1/2 and U the smallest exceeding 1/2, returns (L+U)/2.
double weighted_median(const Partition &partition, int interval_index,
                       const Prior &prior);

// Uniform sample among the randomized orders of `x` (ties shuffled).
RandomizedOrder sample_randomized_order(const std::vector<int64_t> &x,
                                        Rng &rng);
RandomizedOrder sample_randomized_order(const Dataset &x, Rng &rng);

// Uniform sample among the orders valid for both datasets, or nullopt when
// the datasets order some index pair inconsistently.
std::optional<RandomizedOrder>
common_randomized_order(const std::vector<int64_t> &x0,
                        const std::vector<int64_t> &x1, Rng &rng);

} // namespace opeps
