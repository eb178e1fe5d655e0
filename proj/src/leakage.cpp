#include "opeps/leakage.hpp"

#include "opeps/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace opeps {

namespace {

std::vector<double> log_factorials(int n) {
    std::vector<double> lf(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 2; i <= n; ++i)
        lf[static_cast<size_t>(i)] =
            lf[static_cast<size_t>(i) - 1] + std::log(static_cast<double>(i));
    return lf;
}

// Multinomial term count_below/count_eq/count_above with probabilities
// (p_less, p_eq, p_greater); zero-probability factors with positive
// exponents kill the term, zero exponents contribute factor 1.
double multinomial_term(const std::vector<double> &lf, int n, int below,
                        int eq, int above, double p_less, double p_eq,
                        double p_greater) {
    double log_term = lf[static_cast<size_t>(n)] -
                      lf[static_cast<size_t>(below)] -
                      lf[static_cast<size_t>(eq)] -
                      lf[static_cast<size_t>(above)];
    if (below > 0) {
        if (p_less <= 0)
            return 0;
        log_term += below * std::log(p_less);
    }
    if (eq > 0) {
        if (p_eq <= 0)
            return 0;
        log_term += eq * std::log(p_eq);
    }
    if (above > 0) {
        if (p_greater <= 0)
            return 0;
        log_term += above * std::log(p_greater);
    }
    return std::exp(log_term);
}

double rank_value_pmf(const std::vector<double> &lf, int n, int rank,
                      double p_less, double p_eq, double p_greater) {
    if (p_eq <= 0)
        return 0;
    // Sum over the multiplicity j of the value and the sorted position k of
    // its first occurrence; the rank must land inside [k, k + j - 1].
    double total = 0;
    for (int j = 1; j <= n; ++j) {
        const int k_lo = std::max(1, rank - j + 1);
        const int k_hi = std::min(rank, n - j + 1);
        for (int k = k_lo; k <= k_hi; ++k)
            total += multinomial_term(lf, n, k - 1, j, n - k - j + 1, p_less,
                                      p_eq, p_greater);
    }
    return total;
}

} // namespace

double order_statistic_pmf(const std::vector<double> &pmf, int n, int rank,
                           int index) {
    if (n < 1)
        throw argument_error("need at least one draw");
    if (rank < 1 || rank > n)
        throw argument_error("rank out of range");
    if (index < 0 || index >= static_cast<int>(pmf.size()))
        throw argument_error("support index out of range");
    double p_less = 0;
    for (int i = 0; i < index; ++i)
        p_less += pmf[static_cast<size_t>(i)];
    const double p_eq = pmf[static_cast<size_t>(index)];
    double p_greater = 0;
    for (size_t i = static_cast<size_t>(index) + 1; i < pmf.size(); ++i)
        p_greater += pmf[i];
    const auto lf = log_factorials(n);
    return rank_value_pmf(lf, n, rank, p_less, p_eq, p_greater);
}

double order_statistic_pmf(const Prior &prior, int n, int rank, int64_t s) {
    return order_statistic_pmf(prior.pmf(), n, rank,
                               static_cast<int>(prior.domain().index_of(s)));
}

std::vector<double> rank_distribution(const std::vector<double> &pmf, int n,
                                      int rank) {
    if (n < 1)
        throw argument_error("need at least one draw");
    if (rank < 1 || rank > n)
        throw argument_error("rank out of range");
    const auto lf = log_factorials(n);
    std::vector<double> out(pmf.size(), 0.0);
    double below = 0;
    double above = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (size_t i = 0; i < pmf.size(); ++i) {
        above -= pmf[i];
        out[i] = rank_value_pmf(lf, n, rank, below, pmf[i],
                                std::max(above, 0.0));
        below += pmf[i];
    }
    return out;
}

int default_bit_count(const DiscreteDomain &domain) {
    const uint64_t span = static_cast<uint64_t>(domain.hi - domain.lo);
    int bits = 1;
    while ((span >> bits) != 0)
        ++bits;
    return bits;
}

bool value_bit(const DiscreteDomain &domain, int64_t s, int bit, int m) {
    if (bit < 1 || bit > m)
        throw argument_error("bit index out of range");
    const uint64_t offset = static_cast<uint64_t>(domain.index_of(s));
    return (offset >> (m - bit)) & 1;
}

namespace {

int guess_from_rank_distribution(const std::vector<double> &rank_dist,
                                 const DiscreteDomain &domain, int bit,
                                 int m) {
    double mass_one = 0;
    for (size_t i = 0; i < rank_dist.size(); ++i)
        if (value_bit(domain, domain.lo + static_cast<int64_t>(i), bit, m))
            mass_one += rank_dist[i];
    return mass_one > 0.5 ? 1 : 0;
}

double bit_hit_probability(const std::vector<double> &rank_dist,
                           const DiscreteDomain &domain, int bit, int m,
                           int guess) {
    double mass = 0;
    for (size_t i = 0; i < rank_dist.size(); ++i)
        if (value_bit(domain, domain.lo + static_cast<int64_t>(i), bit, m) ==
            (guess == 1))
            mass += rank_dist[i];
    return mass;
}

// Rank-conditional plaintext law when ranks are taken over noisy encodings:
// Pr[value at encoding-rank r equals s]
//   = prior(s) * sum_v Pr[rank r encoding = v] * p_{s,v} / pushforward(v).
std::vector<double> encoded_rank_plaintext_law(const Prior &prior,
                                               const EncodingModel &model,
                                               int n, int rank) {
    const DiscreteDomain &domain = prior.domain();
    const int k = model.partition().size();
    const int64_t size = domain.size();

    std::vector<double> pushforward(static_cast<size_t>(k), 0.0);
    for (int64_t x = domain.lo; x <= domain.hi; ++x) {
        const auto row = model.probabilities(x);
        for (int v = 0; v < k; ++v)
            pushforward[static_cast<size_t>(v)] +=
                prior.mass(x) * row[static_cast<size_t>(v)];
    }
    const auto encoding_rank = rank_distribution(pushforward, n, rank);

    std::vector<double> law(static_cast<size_t>(size), 0.0);
    for (int64_t x = domain.lo; x <= domain.hi; ++x) {
        const auto row = model.probabilities(x);
        double mix = 0;
        for (int v = 0; v < k; ++v) {
            // Encodings without push-forward mass cannot occupy a rank.
            if (pushforward[static_cast<size_t>(v)] <= 0)
                continue;
            mix += encoding_rank[static_cast<size_t>(v)] *
                   row[static_cast<size_t>(v)] /
                   pushforward[static_cast<size_t>(v)];
        }
        law[static_cast<size_t>(domain.index_of(x))] = prior.mass(x) * mix;
    }
    return law;
}

} // namespace

int adversary_bit_guess(const Prior &aux, int n, int rank, int bit, int m) {
    const auto dist = rank_distribution(aux.pmf(), n, rank);
    return guess_from_rank_distribution(dist, aux.domain(), bit, m);
}

double LeakageMatrix::mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

LeakageMatrix leakage_matrix_ope(const Prior &truth, const Prior &aux, int n,
                                 int m) {
    if (!(truth.domain() == aux.domain()))
        throw argument_error("true and auxiliary priors must share a domain");
    if (truth.domain().size() > (int64_t{1} << m))
        throw argument_error("domain does not fit in the bit budget");
    LeakageMatrix matrix;
    matrix.n = n;
    matrix.m = m;
    matrix.values.resize(static_cast<size_t>(n) * m);
    for (int rank = 1; rank <= n; ++rank) {
        const auto dist_truth = rank_distribution(truth.pmf(), n, rank);
        const auto dist_aux = rank_distribution(aux.pmf(), n, rank);
        for (int bit = 1; bit <= m; ++bit) {
            const int guess = guess_from_rank_distribution(
                dist_aux, aux.domain(), bit, m);
            matrix.values[static_cast<size_t>(rank - 1) * m + (bit - 1)] =
                bit_hit_probability(dist_truth, truth.domain(), bit, m,
                                    guess);
        }
    }
    return matrix;
}

LeakageMatrix leakage_matrix_opeps(const Prior &truth, const Prior &aux,
                                   const EncodingModel &model, int n, int m) {
    if (!(truth.domain() == aux.domain()))
        throw argument_error("true and auxiliary priors must share a domain");
    if (!(model.partition().domain() == truth.domain()))
        throw argument_error("encoder domain must match the priors");
    if (truth.domain().size() > (int64_t{1} << m))
        throw argument_error("domain does not fit in the bit budget");
    LeakageMatrix matrix;
    matrix.n = n;
    matrix.m = m;
    matrix.values.resize(static_cast<size_t>(n) * m);
    for (int rank = 1; rank <= n; ++rank) {
        const auto law_truth =
            encoded_rank_plaintext_law(truth, model, n, rank);
        const auto law_aux = encoded_rank_plaintext_law(aux, model, n, rank);
        for (int bit = 1; bit <= m; ++bit) {
            const int guess = guess_from_rank_distribution(
                law_aux, aux.domain(), bit, m);
            matrix.values[static_cast<size_t>(rank - 1) * m + (bit - 1)] =
                bit_hit_probability(law_truth, truth.domain(), bit, m,
                                    guess);
        }
    }
    return matrix;
}

GameBound attack_bound(double epsilon, double beta, int64_t domain_size,
                       int q) {
    if (!(epsilon >= 0))
        throw argument_error("epsilon must be non-negative");
    if (!(beta > 0) || beta > 1)
        throw argument_error("beta must lie in (0, 1]");
    if (q < 1)
        throw argument_error("candidate set must be non-empty");
    GameBound bound;
    bound.q = q;
    bound.epsilon_star =
        epsilon * std::ceil(beta * static_cast<double>(domain_size));
    // e^{eps*}/(q + e^{eps*}) computed as 1/(1 + q e^{-eps*}) to stay finite.
    const double win_cap =
        1.0 / (1.0 + static_cast<double>(q) * std::exp(-bound.epsilon_star));
    bound.bound = win_cap - 1.0 / (q + 1.0);
    return bound;
}

RiGameResult simulate_ri_game(const EncodingModel &model,
                              double scheme_epsilon, int64_t x0, double beta,
                              uint64_t trials, Rng &rng) {
    const DiscreteDomain &domain = model.partition().domain();
    domain.index_of(x0);
    if (trials == 0)
        throw argument_error("need at least one trial");
    const int64_t radius = static_cast<int64_t>(
        std::ceil(beta * static_cast<double>(domain.size())));
    std::vector<int64_t> candidates{x0};
    for (int64_t x = std::max(domain.lo, x0 - radius);
         x <= std::min(domain.hi, x0 + radius); ++x)
        if (x != x0)
            candidates.push_back(x);
    const int q = static_cast<int>(candidates.size()) - 1;
    if (q < 1)
        throw argument_error("no candidate within the game radius");

    std::vector<std::vector<double>> rows;
    rows.reserve(candidates.size());
    for (int64_t c : candidates)
        rows.push_back(model.probabilities(c));

    std::uniform_int_distribution<int> pick(0, q);
    std::vector<int> ties;
    uint64_t wins = 0;
    for (uint64_t t = 0; t < trials; ++t) {
        const int p = pick(rng);
        const int64_t encoding = model.encode(candidates[p], rng);
        const int v = model.partition().index_of_encoding(encoding);
        // Maximum-likelihood guess over candidates, ties broken uniformly.
        double best = -1;
        ties.clear();
        for (size_t c = 0; c < rows.size(); ++c) {
            const double likelihood = rows[c][static_cast<size_t>(v)];
            if (likelihood > best + 1e-15) {
                best = likelihood;
                ties.clear();
                ties.push_back(static_cast<int>(c));
            } else if (likelihood >= best - 1e-15) {
                ties.push_back(static_cast<int>(c));
            }
        }
        int guess = ties.front();
        if (ties.size() > 1) {
            std::uniform_int_distribution<size_t> pick_tie(0,
                                                           ties.size() - 1);
            guess = ties[pick_tie(rng)];
        }
        if (guess == p)
            ++wins;
    }
    RiGameResult result;
    result.trials = trials;
    result.q = q;
    result.win_rate =
        static_cast<double>(wins) / static_cast<double>(trials);
    result.baseline = 1.0 / (q + 1.0);
    result.advantage = std::abs(result.win_rate - result.baseline);
    result.std_err = std::sqrt(result.win_rate * (1.0 - result.win_rate) /
                               static_cast<double>(trials));
    result.bound = attack_bound(scheme_epsilon, beta, domain.size(), q);
    return result;
}

RiGameResult simulate_ri_game(const OpepsScheme &scheme, int64_t x0,
                              double beta, uint64_t trials, Rng &rng) {
    return simulate_ri_game(scheme.model(), scheme.scheme_epsilon(), x0,
                            beta, trials, rng);
}

} // namespace opeps
