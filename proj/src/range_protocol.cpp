#include "opeps/range_protocol.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace opeps {

ServerStore::ServerStore(std::vector<ServerRecord> records)
    : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(),
              [](const ServerRecord &a, const ServerRecord &b) {
                  return a.ct.order_token < b.ct.order_token;
              });
    for (size_t i = 1; i < records_.size(); ++i)
        if (records_[i - 1].ct.order_token == records_[i].ct.order_token)
            throw argument_error("duplicate order token in store");
}

std::vector<ServerRecord> ServerStore::filter(const TokenRange &range) const {
    if (range.empty)
        return {};
    auto lo = std::lower_bound(
        records_.begin(), records_.end(), range.lo,
        [](const ServerRecord &r, u128 t) { return r.ct.order_token < t; });
    auto hi = std::upper_bound(
        records_.begin(), records_.end(), range.hi,
        [](u128 t, const ServerRecord &r) { return t < r.ct.order_token; });
    return std::vector<ServerRecord>(lo, hi);
}

ClientState
build_client_state(const std::vector<std::pair<u128, int64_t>> &tokens) {
    ClientState state;
    for (const auto &[token, encoding] : tokens) {
        auto [it, inserted] =
            state.spans.try_emplace(encoding, token, token);
        if (!inserted) {
            it->second.first = std::min(it->second.first, token);
            it->second.second = std::max(it->second.second, token);
        }
    }
    return state;
}

ClientState build_client_state(const OpepsScheme &scheme,
                               const ServerStore &store) {
    std::vector<std::pair<u128, int64_t>> tokens;
    tokens.reserve(store.size());
    for (const auto &record : store.records())
        tokens.emplace_back(record.ct.order_token,
                            scheme.decrypt_encoding(record.ct.order_token));
    return build_client_state(tokens);
}

TokenRange transform_query(const ClientState &state,
                           const Partition &partition, int64_t a, int64_t b,
                           int neighbors) {
    if (a > b)
        throw argument_error("range query bounds inverted");
    if (neighbors < 0)
        throw argument_error("neighbor count must be non-negative");
    const int k = partition.size();
    const int lo_idx =
        std::max(0, partition.interval_index(a) - neighbors);
    const int hi_idx =
        std::min(k - 1, partition.interval_index(b) + neighbors);

    TokenRange range;
    const int64_t enc_lo = partition.encoding_at(lo_idx);
    const int64_t enc_hi = partition.encoding_at(hi_idx);
    auto first = state.spans.lower_bound(enc_lo);
    if (first == state.spans.end() || first->first > enc_hi)
        return range; // nothing stored in the widened encodings
    auto last = state.spans.upper_bound(enc_hi);
    --last;
    range.lo = first->second.first;
    range.hi = last->second.second;
    range.empty = false;
    return range;
}

std::vector<ServerRecord> server_filter(const ServerStore &store,
                                        const TokenRange &range) {
    return store.filter(range);
}

VerifiedResult client_verify(const std::vector<ServerRecord> &records,
                             const SealKey &key, int64_t a, int64_t b) {
    VerifiedResult out;
    out.returned = records.size();
    for (const auto &record : records) {
        int64_t value;
        try {
            value = unseal_value(key, record.ct.sealed);
        } catch (const integrity_error &) {
            throw integrity_error("record " +
                                  std::to_string(record.record_id) +
                                  " failed authentication");
        }
        if (value >= a && value <= b) {
            out.kept_ids.push_back(record.record_id);
            ++out.kept;
        } else {
            ++out.discarded;
        }
    }
    return out;
}

QueryMetrics compute_metrics(const VerifiedResult &verified, size_t correct,
                             size_t dataset_size) {
    QueryMetrics metrics;
    metrics.returned = verified.returned;
    metrics.correct = correct;
    metrics.extra = verified.discarded;
    metrics.missing = correct - std::min(correct, verified.kept);
    metrics.rho_m =
        correct == 0 ? 0.0
                     : 100.0 * static_cast<double>(metrics.missing) /
                           static_cast<double>(correct);
    metrics.rho_e = dataset_size == 0
                        ? 0.0
                        : 100.0 * static_cast<double>(metrics.extra) /
                              static_cast<double>(dataset_size);
    return metrics;
}

Partition
build_workload_partition(const std::vector<std::pair<int64_t, int64_t>> &queries,
                         const DiscreteDomain &domain) {
    std::vector<std::pair<int64_t, int64_t>> sorted;
    sorted.reserve(queries.size());
    for (const auto &[s, e] : queries) {
        if (s > e)
            throw argument_error("workload query bounds inverted");
        domain.index_of(s);
        domain.index_of(e);
        sorted.emplace_back(s, e);
    }
    std::sort(sorted.begin(), sorted.end());

    auto covered = [&](int64_t v) {
        for (const auto &[s, e] : sorted)
            if (v >= s && v <= e)
                return true;
        return false;
    };

    std::set<int64_t> cuts{domain.lo};
    for (const auto &[s, e] : sorted) {
        cuts.insert(s);
        if (e + 1 <= domain.hi && !covered(e + 1))
            cuts.insert(e + 1);
    }

    std::vector<int64_t> boundaries;
    for (auto it = std::next(cuts.begin()); it != cuts.end(); ++it)
        boundaries.push_back(*it - 1);
    boundaries.push_back(domain.hi);

    std::vector<int64_t> encodings(boundaries.size());
    std::iota(encodings.begin(), encodings.end(), int64_t{1});
    return Partition(domain, std::move(boundaries), std::move(encodings));
}

std::vector<int64_t> cut_points(const Partition &partition) {
    std::vector<int64_t> cuts{partition.domain().lo};
    const auto &bounds = partition.boundaries();
    for (size_t i = 0; i + 1 < bounds.size(); ++i)
        cuts.push_back(bounds[i] + 1);
    return cuts;
}

nlohmann::json query_to_json(const QueryRequest &request) {
    nlohmann::json doc;
    if (request.range.empty) {
        doc["query"] = {{"lo_token", nullptr}, {"hi_token", nullptr}};
    } else {
        doc["query"] = {{"lo_token", to_hex(request.range.lo)},
                        {"hi_token", to_hex(request.range.hi)}};
    }
    return doc;
}

nlohmann::json result_to_json(const QueryResponse &response) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto &record : response.records)
        ids.push_back(record.record_id);
    return nlohmann::json{{"result", ids}};
}

std::string metrics_csv_header() {
    return "epsilon,partition_k,l,rho_M,rho_E";
}

std::string metrics_csv_row(double epsilon, int partition_k, int neighbors,
                            const QueryMetrics &metrics) {
    std::ostringstream row;
    row.precision(9);
    row << epsilon << ',' << partition_k << ',' << neighbors << ','
        << metrics.rho_m << ',' << metrics.rho_e;
    return row.str();
}

} // namespace opeps
