#pragma once

#include "opeps/core.hpp"
#include "opeps/encoder.hpp"

#include <Eigen/Dense>

namespace opeps {

// Per-input encoding distribution of an identity-partition encoder,
// arranged so that matrix * true_counts = expected report histogram
// (column c holds the output distribution of input value lo + c).
class ChannelMatrix {
  public:
    static ChannelMatrix build(const EncodingModel &model);

    int size() const { return static_cast<int>(matrix_.rows()); }
    const DiscreteDomain &domain() const { return domain_; }
    // Pr[report = output | true value = input], 0-based domain offsets.
    double prob(int input, int output) const {
        return matrix_(output, input);
    }
    const Eigen::MatrixXd &matrix() const { return matrix_; }

    struct Inverse {
        Eigen::MatrixXd matrix;
        double rcond = 0;
        bool ok = false;
    };
    // Partial-pivot LU inverse with a reciprocal condition estimate.
    Inverse inverse() const;

  private:
    ChannelMatrix(DiscreteDomain domain, Eigen::MatrixXd matrix)
        : domain_(domain), matrix_(std::move(matrix)) {}

    DiscreteDomain domain_;
    Eigen::MatrixXd matrix_;
};

enum class EstimateMethod { exact_inverse, nnls };

struct FrequencyEstimate {
    std::vector<double> counts;
    EstimateMethod method = EstimateMethod::nnls;
    // Set when an exact-inverse request fell back to the solver.
    bool fallback_warning = false;
};

std::vector<double> histogram(const std::vector<int64_t> &reports,
                              const DiscreteDomain &domain);

// De-biases a report histogram through the channel. The default solves the
// non-negative least-squares program; exact_inverse applies the LU inverse
// (estimates may be negative) and falls back to the solver when the channel
// is numerically singular.
FrequencyEstimate
estimate_frequencies(const std::vector<int64_t> &reports,
                     const ChannelMatrix &channel,
                     EstimateMethod method = EstimateMethod::nnls);
FrequencyEstimate estimate_frequencies_from_histogram(
    const std::vector<double> &report_counts, const ChannelMatrix &channel,
    EstimateMethod method = EstimateMethod::nnls);

double estimate_mean(const FrequencyEstimate &estimate,
                     const DiscreteDomain &domain);

// Estimated count of values in [a, b].
double estimate_range(const FrequencyEstimate &estimate,
                      const DiscreteDomain &domain, int64_t a, int64_t b);

// Closed-form variance of coordinate i of the exact-inverse estimator
// A^{-1} * Y for true counts X', expanded over per-report indicator
// variances p(1-p) and covariances -p_j1 p_j2.
double analytic_count_variance(const ChannelMatrix &channel,
                               const Eigen::MatrixXd &channel_inverse,
                               const std::vector<double> &true_counts, int i);

// Percentage of reports at each encoding-index distance from the correct
// encoding; entry k is the share with distance exactly k, summing to 100.
std::vector<double> ordinal_accuracy(const Dataset &truth,
                                     const std::vector<int64_t> &reports,
                                     const Partition &partition);

// k-ary randomized response baseline at standard (non-distance) LDP budget.
int64_t krr_encode(int64_t x, const DiscreteDomain &domain, double epsilon,
                   Rng &rng);
std::vector<double> krr_estimate(const std::vector<int64_t> &reports,
                                 const DiscreteDomain &domain,
                                 double epsilon);

// Laplace-on-value mean estimation baseline at standard LDP budget.
double laplace_mean_estimate(const std::vector<int64_t> &values,
                             const DiscreteDomain &domain, double epsilon,
                             Rng &rng);

} // namespace opeps
