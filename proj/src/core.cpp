#include "opeps/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace opeps {

Rng make_rng(uint64_t seed) { return Rng(seed); }

Rng derive_rng(uint64_t master_seed, uint64_t stream) {
    // splitmix64 finalizer over (seed, stream) keeps streams uncorrelated.
    auto mix = [](uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return Rng(mix(mix(master_seed) ^ mix(stream + 0x632be59bd9b4e019ULL)));
}

DiscreteDomain::DiscreteDomain(int64_t lo_, int64_t hi_) : lo(lo_), hi(hi_) {
    if (lo > hi)
        throw argument_error("domain bounds inverted: [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
}

int64_t DiscreteDomain::index_of(int64_t x) const {
    if (!contains(x))
        throw domain_error("value " + std::to_string(x) +
                           " outside domain [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    return x - lo;
}

Partition::Partition(DiscreteDomain domain, std::vector<int64_t> boundaries,
                     std::vector<int64_t> encodings)
    : domain_(domain), boundaries_(std::move(boundaries)),
      encodings_(std::move(encodings)) {
    if (boundaries_.empty())
        throw argument_error("partition needs at least one interval");
    if (boundaries_.size() != encodings_.size())
        throw argument_error("boundary/encoding count mismatch");
    if (boundaries_.back() != domain_.hi)
        throw argument_error("last boundary must equal the domain upper end");
    int64_t prev = domain_.lo - 1;
    for (size_t i = 0; i < boundaries_.size(); ++i) {
        if (boundaries_[i] <= prev)
            throw argument_error("boundaries must be strictly ascending and "
                                 "leave every interval non-empty");
        prev = boundaries_[i];
    }
    for (size_t i = 1; i < encodings_.size(); ++i)
        if (encodings_[i] <= encodings_[i - 1])
            throw argument_error("encodings must be strictly ascending");
}

Partition Partition::identity(DiscreteDomain domain) {
    std::vector<int64_t> bounds(domain.size());
    std::iota(bounds.begin(), bounds.end(), domain.lo);
    std::vector<int64_t> encodings = bounds;
    return Partition(domain, std::move(bounds), std::move(encodings));
}

Partition Partition::equi_length(DiscreteDomain domain, int k) {
    if (k < 1 || k > domain.size())
        throw argument_error("equi-length partition size out of range");
    std::vector<int64_t> bounds;
    bounds.reserve(k);
    for (int i = 1; i <= k; ++i)
        bounds.push_back(domain.lo - 1 +
                         domain.size() * static_cast<int64_t>(i) / k);
    std::vector<int64_t> encodings(k);
    std::iota(encodings.begin(), encodings.end(), int64_t{1});
    return Partition(domain, std::move(bounds), std::move(encodings));
}

Partition Partition::single(DiscreteDomain domain, int64_t encoding) {
    return Partition(domain, {domain.hi}, {encoding});
}

int Partition::interval_index(int64_t x) const {
    if (!domain_.contains(x))
        throw domain_error("value " + std::to_string(x) +
                           " outside partitioned domain");
    auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), x);
    return static_cast<int>(it - boundaries_.begin());
}

int64_t Partition::encoding_of(int64_t x) const {
    return encodings_[interval_index(x)];
}

int64_t Partition::encoding_at(int index) const {
    if (index < 0 || index >= size())
        throw argument_error("interval index out of range");
    return encodings_[index];
}

int Partition::index_of_encoding(int64_t encoding) const {
    auto it =
        std::lower_bound(encodings_.begin(), encodings_.end(), encoding);
    if (it == encodings_.end() || *it != encoding)
        throw argument_error("unknown encoding " + std::to_string(encoding));
    return static_cast<int>(it - encodings_.begin());
}

int64_t Partition::interval_lo(int index) const {
    if (index < 0 || index >= size())
        throw argument_error("interval index out of range");
    return index == 0 ? domain_.lo : boundaries_[index - 1] + 1;
}

int64_t Partition::interval_hi(int index) const {
    if (index < 0 || index >= size())
        throw argument_error("interval index out of range");
    return boundaries_[index];
}

bool Partition::is_identity() const {
    if (static_cast<int64_t>(boundaries_.size()) != domain_.size())
        return false;
    for (int i = 0; i < size(); ++i)
        if (boundaries_[i] != domain_.lo + i)
            return false;
    return true;
}

Prior::Prior(DiscreteDomain domain, std::vector<double> pmf)
    : domain_(domain), pmf_(std::move(pmf)) {
    if (static_cast<int64_t>(pmf_.size()) != domain_.size())
        throw argument_error("pmf length must match domain size");
    double total = 0;
    for (double w : pmf_) {
        if (!(w >= 0))
            throw argument_error("pmf weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw argument_error("pmf must sum to 1 (got " +
                             std::to_string(total) + ")");
}

Prior Prior::uniform(DiscreteDomain domain) {
    std::vector<double> pmf(domain.size(), 1.0 / domain.size());
    return Prior(domain, std::move(pmf));
}

Prior Prior::from_counts(DiscreteDomain domain,
                         const std::vector<int64_t> &values) {
    if (values.empty())
        throw degenerate_prior_error("cannot build a prior from no values");
    std::vector<double> pmf(domain.size(), 0.0);
    for (int64_t v : values)
        pmf[domain.index_of(v)] += 1.0;
    for (double &w : pmf)
        w /= values.size();
    return Prior(domain, std::move(pmf));
}

double Prior::mass(int64_t x) const { return pmf_[domain_.index_of(x)]; }

double Prior::mass_between(int64_t a, int64_t b) const {
    a = std::max(a, domain_.lo);
    b = std::min(b, domain_.hi);
    double total = 0;
    for (int64_t v = a; v <= b; ++v)
        total += pmf_[v - domain_.lo];
    return total;
}

Dataset::Dataset(DiscreteDomain domain_, std::vector<int64_t> values_)
    : domain(domain_), values(std::move(values_)) {
    for (int64_t v : values)
        if (!domain.contains(v))
            throw domain_error("dataset value " + std::to_string(v) +
                               " outside declared domain");
}

bool RandomizedOrder::is_permutation() const {
    std::vector<bool> seen(perm.size(), false);
    for (uint32_t g : perm) {
        if (g < 1 || g > perm.size() || seen[g - 1])
            return false;
        seen[g - 1] = true;
    }
    return true;
}

bool RandomizedOrder::valid_for(const std::vector<int64_t> &values) const {
    if (values.size() != perm.size() || !is_permutation())
        return false;
    const size_t n = values.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (values[i] > values[j] && perm[i] <= perm[j])
                return false;
            if (perm[i] > perm[j] && values[i] < values[j])
                return false;
        }
    return true;
}

double weighted_median(const Partition &partition, int interval_index,
                       const Prior &prior) {
    if (interval_index < 0 || interval_index >= partition.size())
        throw argument_error("interval index out of range");
    if (!(prior.domain() == partition.domain()))
        throw argument_error("prior and partition domains differ");
    const int64_t lo = partition.interval_lo(interval_index);
    const int64_t hi = partition.interval_hi(interval_index);
    const double total = prior.mass_between(lo, hi);
    if (total <= 0)
        throw degenerate_prior_error(
            "prior places no mass on interval " +
            std::to_string(interval_index + 1));

    double cum = 0;
    double lower = 0, upper = 0;
    bool have_lower = false, have_upper = false;
    for (int64_t v = lo; v <= hi && !have_upper; ++v) {
        cum += prior.mass(v) / total;
        if (!have_lower && cum >= 0.5 - 1e-15) {
            lower = static_cast<double>(v);
            have_lower = true;
        }
        if (!have_upper && cum > 0.5 + 1e-15) {
            upper = static_cast<double>(v);
            have_upper = true;
        }
    }
    if (!have_upper)
        upper = static_cast<double>(hi);
    if (!have_lower)
        lower = upper;
    return (lower + upper) / 2.0;
}

namespace {

// Ranks indices so that the induced permutation is a randomized order for
// every key: groups tied under `equal` keep a uniformly shuffled order.
RandomizedOrder rank_with_shuffled_ties(
    size_t n, const std::function<bool(size_t, size_t)> &less,
    const std::function<bool(size_t, size_t)> &equal, Rng &rng) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::stable_sort(idx.begin(), idx.end(), less);
    size_t run = 0;
    while (run < n) {
        size_t end = run + 1;
        while (end < n && equal(idx[run], idx[end]))
            ++end;
        std::shuffle(idx.begin() + run, idx.begin() + end, rng);
        run = end;
    }
    RandomizedOrder order;
    order.perm.resize(n);
    for (size_t pos = 0; pos < n; ++pos)
        order.perm[idx[pos]] = static_cast<uint32_t>(pos + 1);
    return order;
}

} // namespace

RandomizedOrder sample_randomized_order(const std::vector<int64_t> &x,
                                        Rng &rng) {
    return rank_with_shuffled_ties(
        x.size(), [&](size_t a, size_t b) { return x[a] < x[b]; },
        [&](size_t a, size_t b) { return x[a] == x[b]; }, rng);
}

RandomizedOrder sample_randomized_order(const Dataset &x, Rng &rng) {
    return sample_randomized_order(x.values, rng);
}

std::optional<RandomizedOrder>
common_randomized_order(const std::vector<int64_t> &x0,
                        const std::vector<int64_t> &x1, Rng &rng) {
    if (x0.size() != x1.size())
        throw argument_error("datasets must have equal length");
    const size_t n = x0.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const bool up0 = x0[i] > x0[j], down0 = x0[i] < x0[j];
            const bool up1 = x1[i] > x1[j], down1 = x1[i] < x1[j];
            if ((up0 && down1) || (down0 && up1))
                return std::nullopt;
        }
    // Conflict-free pairs admit the merged lexicographic order; indices tied
    // in both datasets are the only remaining freedom.
    return rank_with_shuffled_ties(
        n,
        [&](size_t a, size_t b) {
            if (x0[a] != x0[b])
                return x0[a] < x0[b];
            return x1[a] < x1[b];
        },
        [&](size_t a, size_t b) { return x0[a] == x0[b] && x1[a] == x1[b]; },
        rng);
}

} // namespace opeps
