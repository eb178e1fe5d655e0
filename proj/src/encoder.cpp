#include "opeps/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace opeps {

namespace {

// Above this many table cells, rows are recomputed per call instead of
// being stored.
constexpr int64_t kEagerCellCap = int64_t{1} << 24;

} // namespace

EncodingModel::EncodingModel(Partition partition,
                             std::vector<double> tendencies, double epsilon)
    : partition_(std::move(partition)), epsilon_(epsilon),
      tendencies_(std::move(tendencies)) {
    if (!(epsilon_ > 0))
        throw argument_error("epsilon must be positive or +infinity");
    if (static_cast<int>(tendencies_.size()) != partition_.size())
        throw argument_error("one central tendency per interval required");
    for (size_t i = 1; i < tendencies_.size(); ++i)
        if (!(tendencies_[i] > tendencies_[i - 1]))
            throw argument_error("central tendencies must be strictly "
                                 "increasing across intervals");

    const int64_t cells = partition_.domain().size() *
                          static_cast<int64_t>(partition_.size());
    eager_ = cells <= kEagerCellCap;
    if (eager_) {
        table_.resize(static_cast<size_t>(cells));
        const int k = partition_.size();
        for (int64_t x = partition_.domain().lo; x <= partition_.domain().hi;
             ++x)
            fill_row(x, table_.data() + partition_.domain().index_of(x) * k);
    }
}

EncodingModel EncodingModel::build(const Partition &partition,
                                   const Prior &prior, double epsilon) {
    std::vector<double> tendencies(partition.size());
    for (int i = 0; i < partition.size(); ++i)
        tendencies[i] = weighted_median(partition, i, prior);
    return EncodingModel(partition, std::move(tendencies), epsilon);
}

EncodingModel EncodingModel::from_tendencies(const Partition &partition,
                                             std::vector<double> tendencies,
                                             double epsilon) {
    return EncodingModel(partition, std::move(tendencies), epsilon);
}

void EncodingModel::fill_row(int64_t x, double *row) const {
    const int k = partition_.size();
    if (infinite_budget()) {
        std::fill(row, row + k, 0.0);
        row[partition_.interval_index(x)] = 1.0;
        return;
    }
    // exp(-|x-d_i| eps/2), shifted by the smallest distance so the largest
    // exponent is 0 before normalizing.
    double min_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
        min_dist = std::min(min_dist, std::abs(x - tendencies_[i]));
    double total = 0;
    for (int i = 0; i < k; ++i) {
        const double d = std::abs(x - tendencies_[i]) - min_dist;
        row[i] = std::exp(-d * epsilon_ / 2.0);
        total += row[i];
    }
    for (int i = 0; i < k; ++i)
        row[i] /= total;
}

const double *EncodingModel::table_row(int64_t x) const {
    if (!eager_)
        return nullptr;
    return table_.data() +
           partition_.domain().index_of(x) * partition_.size();
}

double EncodingModel::probability(int64_t x, int index) const {
    if (index < 0 || index >= partition_.size())
        throw argument_error("encoding index out of range");
    partition_.domain().index_of(x); // domain check
    if (const double *row = table_row(x))
        return row[index];
    std::vector<double> row(partition_.size());
    fill_row(x, row.data());
    return row[index];
}

std::vector<double> EncodingModel::probabilities(int64_t x) const {
    partition_.domain().index_of(x); // domain check
    std::vector<double> row(partition_.size());
    if (const double *cached = table_row(x))
        std::copy(cached, cached + partition_.size(), row.begin());
    else
        fill_row(x, row.data());
    return row;
}

int EncodingModel::argmax_index(int64_t x) const {
    const auto row = probabilities(x);
    return static_cast<int>(std::max_element(row.begin(), row.end()) -
                            row.begin());
}

int64_t EncodingModel::encode(int64_t x, Rng &rng) const {
    partition_.domain().index_of(x); // domain check
    const int k = partition_.size();
    if (infinite_budget() || k == 1)
        return partition_.encoding_of(x);
    const auto row = probabilities(x);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0;
    for (int i = 0; i < k; ++i) {
        cum += row[i];
        if (u < cum)
            return partition_.encoding_at(i);
    }
    return partition_.encoding_at(k - 1);
}

double EncodingModel::order_agreement_probability(int64_t x_hi,
                                                  int64_t x_lo) const {
    if (x_hi <= x_lo)
        throw argument_error("order agreement requires x_hi > x_lo");
    const auto hi = probabilities(x_hi);
    const auto lo = probabilities(x_lo);
    // Pr[draw(x_hi) >= draw(x_lo)] via the CDF of the lower value.
    double agree = 0, lo_cum = 0;
    for (size_t i = 0; i < hi.size(); ++i) {
        lo_cum += lo[i];
        agree += hi[i] * lo_cum;
    }
    return agree;
}

nlohmann::json EncodingModel::to_json() const {
    nlohmann::json doc;
    doc["format"] = "opeps-model/1";
    doc["domain"] = {{"lo", partition_.domain().lo},
                     {"hi", partition_.domain().hi}};
    doc["boundaries"] = partition_.boundaries();
    doc["encodings"] = partition_.encodings();
    if (infinite_budget())
        doc["epsilon"] = "inf";
    else
        doc["epsilon"] = epsilon_;
    doc["tendencies"] = tendencies_;
    return doc;
}

EncodingModel EncodingModel::from_json(const nlohmann::json &doc) {
    if (doc.value("format", "") != "opeps-model/1")
        throw argument_error("unsupported model format");
    DiscreteDomain domain(doc.at("domain").at("lo").get<int64_t>(),
                          doc.at("domain").at("hi").get<int64_t>());
    Partition partition(domain,
                        doc.at("boundaries").get<std::vector<int64_t>>(),
                        doc.at("encodings").get<std::vector<int64_t>>());
    double epsilon;
    if (doc.at("epsilon").is_string()) {
        if (doc.at("epsilon").get<std::string>() != "inf")
            throw argument_error("epsilon must be a number or \"inf\"");
        epsilon = std::numeric_limits<double>::infinity();
    } else {
        epsilon = doc.at("epsilon").get<double>();
    }
    return from_tendencies(partition,
                           doc.at("tendencies").get<std::vector<double>>(),
                           epsilon);
}

} // namespace opeps
