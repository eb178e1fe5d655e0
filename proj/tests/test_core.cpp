#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opeps/core.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace opeps;

TEST_CASE("domain invariants") {
    DiscreteDomain d(1, 100);
    CHECK(d.size() == 100);
    CHECK(d.index_of(45) == 44);
    CHECK_THROWS_AS(d.index_of(0), domain_error);
    CHECK_THROWS_AS(DiscreteDomain(5, 4), argument_error);
    CHECK(DiscreteDomain(7, 7).size() == 1);
}

TEST_CASE("partition maps values to interval encodings") {
    const DiscreteDomain d(1, 100);
    const Partition ten = Partition::equi_length(d, 10);
    CHECK(ten.encoding_of(45) == 5);
    CHECK(ten.encoding_of(1) == 1);
    CHECK(ten.encoding_of(100) == 10);
    CHECK(ten.encoding_of(10) == 1);
    CHECK(ten.encoding_of(11) == 2);

    const Partition whole = Partition::single(d, 7);
    CHECK(whole.encoding_of(1) == 7);
    CHECK(whole.encoding_of(99) == 7);

    const Partition identity = Partition::identity(DiscreteDomain(1, 5));
    CHECK(identity.encoding_of(3) == 3);
    CHECK(identity.is_identity());

    CHECK_THROWS_AS(ten.encoding_of(101), domain_error);
}

TEST_CASE("partition_map is monotone") {
    const DiscreteDomain d(-20, 43);
    for (int k : {1, 2, 5, 13, 64}) {
        const Partition p = Partition::equi_length(d, k);
        for (int64_t x = d.lo; x < d.hi; ++x)
            CHECK(p.encoding_of(x) <= p.encoding_of(x + 1));
    }
}

TEST_CASE("partition rejects malformed boundaries") {
    const DiscreteDomain d(1, 10);
    CHECK_THROWS_AS(Partition(d, {5, 5, 10}, {1, 2, 3}), argument_error);
    CHECK_THROWS_AS(Partition(d, {5, 9}, {1, 2}), argument_error);
    CHECK_THROWS_AS(Partition(d, {5, 10}, {2, 2}), argument_error);
    CHECK_THROWS_AS(Partition(d, {5, 10}, {2}), argument_error);
}

TEST_CASE("weighted median follows the midpoint convention") {
    const DiscreteDomain d(1, 100);
    const Partition p(d, {20, 80, 100}, {1, 2, 3});
    const Prior uniform = Prior::uniform(d);
    CHECK(weighted_median(p, 0, uniform) == 10.5);
    CHECK(weighted_median(p, 1, uniform) == 50.5);
    CHECK(weighted_median(p, 2, uniform) == 90.5);
}

TEST_CASE("weighted median of a point mass is the point") {
    const DiscreteDomain d(1, 10);
    const Partition p(d, {6, 10}, {1, 2});
    std::vector<double> pmf(10, 0.0);
    pmf[3] = 1.0; // all mass at value 4
    CHECK(weighted_median(p, 0, Prior(d, pmf)) == 4.0);
    CHECK_THROWS_AS(weighted_median(p, 1, Prior(d, pmf)),
                    degenerate_prior_error);
}

TEST_CASE("weighted median scans cumulative interval weight") {
    const DiscreteDomain d(4, 6);
    const Partition p = Partition::single(d);
    CHECK(weighted_median(p, 0, Prior(d, {0.1, 0.2, 0.7})) == 6.0);
}

TEST_CASE("prior validation") {
    const DiscreteDomain d(1, 3);
    CHECK_THROWS_AS(Prior(d, {0.5, 0.5}), argument_error);
    CHECK_THROWS_AS(Prior(d, {0.5, 0.6, 0.2}), argument_error);
    CHECK_THROWS_AS(Prior(d, {-0.1, 0.6, 0.5}), argument_error);
    CHECK(Prior(d, {0.2, 0.3, 0.5}).mass(3) == 0.5);
}

TEST_CASE("dataset values must lie inside the declared domain") {
    CHECK_THROWS_AS(Dataset(DiscreteDomain(1, 5), {1, 6}), domain_error);
    CHECK(Dataset(DiscreteDomain(1, 5), {1, 5, 3}).size() == 3);
}

TEST_CASE("sampled randomized orders are valid and sort the data") {
    Rng rng = make_rng(42);
    const std::vector<int64_t> x{9, 40, 15, 76, 15, 76};
    for (int rep = 0; rep < 200; ++rep) {
        const RandomizedOrder gamma = sample_randomized_order(x, rng);
        REQUIRE(gamma.valid_for(x));
        // the inverse permutation lays the data out in sorted order
        std::vector<int64_t> arranged(x.size());
        for (size_t i = 0; i < x.size(); ++i)
            arranged[gamma.perm[i] - 1] = x[i];
        CHECK(std::is_sorted(arranged.begin(), arranged.end()));
    }
}

TEST_CASE("the tied dataset has exactly four randomized orders") {
    Rng rng = make_rng(7);
    const std::vector<int64_t> x{9, 40, 15, 76, 15, 76};
    std::set<std::vector<uint32_t>> seen;
    for (int rep = 0; rep < 2000; ++rep)
        seen.insert(sample_randomized_order(x, rng).perm);
    CHECK(seen.size() == 4);
    CHECK(seen.count({1, 4, 2, 5, 3, 6}) == 1);
    CHECK(seen.count({1, 4, 3, 5, 2, 6}) == 1);
    CHECK(seen.count({1, 4, 2, 6, 3, 5}) == 1);
    CHECK(seen.count({1, 4, 3, 6, 2, 5}) == 1);
}

TEST_CASE("strictly increasing data yields the identity order") {
    Rng rng = make_rng(3);
    const std::vector<int64_t> x{-5, 0, 2, 9, 11};
    for (int rep = 0; rep < 20; ++rep) {
        const RandomizedOrder gamma = sample_randomized_order(x, rng);
        for (size_t i = 0; i < x.size(); ++i)
            CHECK(gamma.perm[i] == i + 1);
    }
}

TEST_CASE("all-equal data is shuffled uniformly") {
    Rng rng = make_rng(99);
    const std::vector<int64_t> x{4, 4, 4};
    std::map<std::vector<uint32_t>, int> counts;
    const int samples = 60000;
    for (int rep = 0; rep < samples; ++rep)
        ++counts[sample_randomized_order(x, rng).perm];
    REQUIRE(counts.size() == 6);
    // chi-square with 5 dof; 20.52 is the 0.001 critical value
    const double expected = samples / 6.0;
    double chi2 = 0;
    for (const auto &[perm, count] : counts)
        chi2 += (count - expected) * (count - expected) / expected;
    CHECK(chi2 < 20.52);
}

TEST_CASE("common randomized order of the shared-order example") {
    Rng rng = make_rng(5);
    const std::vector<int64_t> x0{9, 40, 15, 76, 15, 76};
    const std::vector<int64_t> x1{22, 94, 23, 94, 36, 94};
    const auto gamma = common_randomized_order(x0, x1, rng);
    REQUIRE(gamma.has_value());
    CHECK(gamma->valid_for(x0));
    CHECK(gamma->valid_for(x1));
}

TEST_CASE("identical datasets always share an order") {
    Rng rng = make_rng(6);
    const std::vector<int64_t> x{3, 3, 1, 9};
    const auto gamma = common_randomized_order(x, x, rng);
    REQUIRE(gamma.has_value());
    CHECK(gamma->valid_for(x));
}

TEST_CASE("conflicting pairs have no common order") {
    Rng rng = make_rng(6);
    CHECK_FALSE(common_randomized_order({1, 2}, {2, 1}, rng).has_value());
    CHECK_THROWS_AS(common_randomized_order({1, 2}, {1, 2, 3}, rng),
                    argument_error);
}

namespace {

// Exhaustive search over all n! permutations for a common valid order.
bool brute_force_common(const std::vector<int64_t> &x0,
                        const std::vector<int64_t> &x1) {
    std::vector<uint32_t> perm(x0.size());
    for (size_t i = 0; i < perm.size(); ++i)
        perm[i] = static_cast<uint32_t>(i + 1);
    std::sort(perm.begin(), perm.end());
    do {
        RandomizedOrder order{perm};
        if (order.valid_for(x0) && order.valid_for(x1))
            return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

} // namespace

TEST_CASE("common-order existence agrees with brute force") {
    Rng rng = make_rng(1234);
    for (size_t n : {2, 3, 4, 5, 6}) {
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<int64_t> x0(n), x1(n);
            for (size_t i = 0; i < n; ++i) {
                x0[i] = static_cast<int64_t>(rng() % 3);
                x1[i] = static_cast<int64_t>(rng() % 3);
            }
            const auto gamma = common_randomized_order(x0, x1, rng);
            CHECK(gamma.has_value() == brute_force_common(x0, x1));
            if (gamma) {
                CHECK(gamma->valid_for(x0));
                CHECK(gamma->valid_for(x1));
            }
        }
    }
}

TEST_CASE("derived generator streams are reproducible and distinct") {
    Rng a = derive_rng(10, 0);
    Rng b = derive_rng(10, 0);
    Rng c = derive_rng(10, 1);
    CHECK(a() == b());
    CHECK(a() != c());
}
