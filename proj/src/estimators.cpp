#include "opeps/estimators.hpp"

#include "opeps/nnls.hpp"

#include <algorithm>
#include <cmath>

namespace opeps {

ChannelMatrix ChannelMatrix::build(const EncodingModel &model) {
    if (!model.partition().is_identity())
        throw argument_error(
            "channel matrix requires the identity partition");
    const DiscreteDomain &domain = model.partition().domain();
    const int m = static_cast<int>(domain.size());
    Eigen::MatrixXd matrix(m, m);
    for (int input = 0; input < m; ++input) {
        const auto row = model.probabilities(domain.lo + input);
        for (int output = 0; output < m; ++output)
            matrix(output, input) = row[static_cast<size_t>(output)];
    }
    return ChannelMatrix(domain, std::move(matrix));
}

ChannelMatrix::Inverse ChannelMatrix::inverse() const {
    Inverse inv;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix_);
    inv.rcond = lu.rcond();
    inv.ok = inv.rcond > 1e-14 && std::isfinite(inv.rcond);
    if (inv.ok)
        inv.matrix = lu.inverse();
    return inv;
}

std::vector<double> histogram(const std::vector<int64_t> &reports,
                              const DiscreteDomain &domain) {
    std::vector<double> counts(static_cast<size_t>(domain.size()), 0.0);
    for (int64_t r : reports)
        counts[static_cast<size_t>(domain.index_of(r))] += 1.0;
    return counts;
}

FrequencyEstimate estimate_frequencies_from_histogram(
    const std::vector<double> &report_counts, const ChannelMatrix &channel,
    EstimateMethod method) {
    const int m = channel.size();
    if (static_cast<int>(report_counts.size()) != m)
        throw argument_error("histogram length must match channel size");
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i)
        y[i] = report_counts[static_cast<size_t>(i)];

    FrequencyEstimate estimate;
    if (method == EstimateMethod::exact_inverse) {
        const auto inv = channel.inverse();
        if (inv.ok) {
            const Eigen::VectorXd x = inv.matrix * y;
            estimate.method = EstimateMethod::exact_inverse;
            estimate.counts.assign(x.data(), x.data() + m);
            return estimate;
        }
        estimate.fallback_warning = true;
    }
    const auto solved = nnls(channel.matrix(), y);
    estimate.method = EstimateMethod::nnls;
    estimate.counts.assign(solved.x.data(), solved.x.data() + m);
    return estimate;
}

FrequencyEstimate estimate_frequencies(const std::vector<int64_t> &reports,
                                       const ChannelMatrix &channel,
                                       EstimateMethod method) {
    return estimate_frequencies_from_histogram(
        histogram(reports, channel.domain()), channel, method);
}

double estimate_mean(const FrequencyEstimate &estimate,
                     const DiscreteDomain &domain) {
    if (static_cast<int64_t>(estimate.counts.size()) != domain.size())
        throw argument_error("estimate length must match domain size");
    double total = 0, weighted = 0;
    for (size_t i = 0; i < estimate.counts.size(); ++i) {
        total += estimate.counts[i];
        weighted +=
            estimate.counts[i] * static_cast<double>(domain.lo +
                                                     static_cast<int64_t>(i));
    }
    if (total == 0)
        throw degenerate_prior_error("mean undefined for all-zero counts");
    return weighted / total;
}

double estimate_range(const FrequencyEstimate &estimate,
                      const DiscreteDomain &domain, int64_t a, int64_t b) {
    if (a > b)
        throw argument_error("range bounds inverted");
    domain.index_of(a);
    domain.index_of(b);
    double total = 0;
    for (int64_t v = a; v <= b; ++v)
        total += estimate.counts[static_cast<size_t>(domain.index_of(v))];
    return total;
}

double analytic_count_variance(const ChannelMatrix &channel,
                               const Eigen::MatrixXd &channel_inverse,
                               const std::vector<double> &true_counts,
                               int i) {
    const int m = channel.size();
    if (static_cast<int>(true_counts.size()) != m)
        throw argument_error("true counts length must match channel size");
    if (i < 0 || i >= m)
        throw argument_error("coordinate index out of range");
    if (channel_inverse.rows() != m || channel_inverse.cols() != m)
        throw argument_error("inverse has wrong shape");

    // Each report with true value k contributes a single categorical draw;
    // records are independent, so per-value contributions add linearly.
    double variance = 0;
    for (int k = 0; k < m; ++k) {
        double cell = 0;
        for (int j = 0; j < m; ++j) {
            const double p = channel.prob(k, j);
            cell += channel_inverse(i, j) * channel_inverse(i, j) * p *
                    (1.0 - p);
        }
        for (int j1 = 0; j1 < m; ++j1)
            for (int j2 = j1 + 1; j2 < m; ++j2)
                cell += 2.0 * channel_inverse(i, j1) *
                        channel_inverse(i, j2) *
                        (-channel.prob(k, j1) * channel.prob(k, j2));
        variance += true_counts[static_cast<size_t>(k)] * cell;
    }
    return variance;
}

std::vector<double> ordinal_accuracy(const Dataset &truth,
                                     const std::vector<int64_t> &reports,
                                     const Partition &partition) {
    if (truth.size() != reports.size())
        throw argument_error("truth and report lengths differ");
    if (truth.size() == 0)
        throw argument_error("ordinal accuracy needs at least one report");
    std::vector<double> profile(static_cast<size_t>(partition.size()), 0.0);
    for (size_t i = 0; i < reports.size(); ++i) {
        const int correct = partition.interval_index(truth.values[i]);
        const int reported = partition.index_of_encoding(reports[i]);
        profile[static_cast<size_t>(std::abs(correct - reported))] += 1.0;
    }
    for (double &share : profile)
        share *= 100.0 / static_cast<double>(reports.size());
    return profile;
}

int64_t krr_encode(int64_t x, const DiscreteDomain &domain, double epsilon,
                   Rng &rng) {
    domain.index_of(x);
    const double m = static_cast<double>(domain.size());
    const double keep = std::exp(epsilon) / (std::exp(epsilon) + m - 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < keep)
        return x;
    std::uniform_int_distribution<int64_t> other(0, domain.size() - 2);
    int64_t draw = domain.lo + other(rng);
    if (draw >= x)
        ++draw;
    return draw;
}

std::vector<double> krr_estimate(const std::vector<int64_t> &reports,
                                 const DiscreteDomain &domain,
                                 double epsilon) {
    const double m = static_cast<double>(domain.size());
    const double e = std::exp(epsilon);
    const double keep = e / (e + m - 1.0);
    const double flip = 1.0 / (e + m - 1.0);
    const double n = static_cast<double>(reports.size());
    auto counts = histogram(reports, domain);
    for (double &c : counts)
        c = (c - n * flip) / (keep - flip);
    return counts;
}

double laplace_mean_estimate(const std::vector<int64_t> &values,
                             const DiscreteDomain &domain, double epsilon,
                             Rng &rng) {
    if (values.empty())
        throw argument_error("mean of empty dataset");
    const double sensitivity =
        static_cast<double>(domain.hi - domain.lo);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    double total = 0;
    for (int64_t v : values) {
        const double u = unit(rng);
        const double noise = -(sensitivity / epsilon) *
                             std::copysign(1.0, u) *
                             std::log(1.0 - 2.0 * std::abs(u));
        total += static_cast<double>(v) + noise;
    }
    return total / static_cast<double>(values.size());
}

} // namespace opeps
