#pragma once

#include "opeps/core.hpp"
#include "opeps/encoder.hpp"

namespace opeps {

class OpepsScheme;

// Pr[the rank-th smallest of n i.i.d. draws equals the value at `index`],
// for a pmf over an ordered support. Evaluated by the three-case multinomial
// expansion over (below, equal, above) counts. Ranks are 1-based.
double order_statistic_pmf(const std::vector<double> &pmf, int n, int rank,
                           int index);
double order_statistic_pmf(const Prior &prior, int n, int rank, int64_t s);

// Full distribution of the rank-th order statistic over the support.
std::vector<double> rank_distribution(const std::vector<double> &pmf, int n,
                                      int rank);

// Number of bits in the offset representation (x - lo) of a domain.
int default_bit_count(const DiscreteDomain &domain);

// Bit `bit` (1 = most significant of m) of the offset of s inside domain.
bool value_bit(const DiscreteDomain &domain, int64_t s, int bit, int m);

// Bayes-optimal guess for the bit of the rank-th plaintext under the
// auxiliary prior: 1 when the rank-conditional mass of that bit exceeds 1/2,
// 0 otherwise (ties resolve to 0).
int adversary_bit_guess(const Prior &aux, int n, int rank, int bit, int m);

struct LeakageMatrix {
    int n = 0; // dataset size (rank rows)
    int m = 0; // bit columns
    std::vector<double> values; // row-major, rank-major

    double at(int rank0, int bit0) const {
        return values[static_cast<size_t>(rank0) * m + bit0];
    }
    double mean() const;
};

// Per-rank, per-bit probability that an adversary with auxiliary prior `aux`
// recovers plaintext bits from the revealed order alone (order leakage of a
// frequency-hiding OPE over the raw values).
LeakageMatrix leakage_matrix_ope(const Prior &truth, const Prior &aux, int n,
                                 int m);

// Same adversary against ciphertexts whose order reflects noisy encodings:
// rank statistics run over the encoder push-forward of each prior, and the
// rank-conditional plaintext law follows from the Bayes quotient of encoder
// probabilities. Guesses mirror the construction under the auxiliary prior.
LeakageMatrix leakage_matrix_opeps(const Prior &truth, const Prior &aux,
                                   const EncodingModel &model, int n, int m);

struct GameBound {
    double epsilon_star = 0;
    int q = 0;
    double bound = 0;
};

// Advantage cap for distinguishing a record from q candidates within
// distance ceil(beta * N): e^{eps*}/(q + e^{eps*}) - 1/(q + 1) with
// eps* = epsilon * ceil(beta * N).
GameBound attack_bound(double epsilon, double beta, int64_t domain_size,
                       int q);

struct RiGameResult {
    uint64_t trials = 0;
    int q = 0;
    double win_rate = 0;
    double baseline = 0;  // 1 / (q + 1)
    double advantage = 0; // |win_rate - baseline|
    double std_err = 0;   // binomial standard error of win_rate
    GameBound bound;
};

// Record-indistinguishability game against the maximum-likelihood adversary
// who knows the encoder tables and observes the encoding of the hidden
// candidate. scheme_epsilon is the advertised budget (encoder runs at half).
RiGameResult simulate_ri_game(const EncodingModel &model,
                              double scheme_epsilon, int64_t x0, double beta,
                              uint64_t trials, Rng &rng);
RiGameResult simulate_ri_game(const OpepsScheme &scheme, int64_t x0,
                              double beta, uint64_t trials, Rng &rng);

} // namespace opeps
