#pragma once

#include "opeps/codec.hpp"
#include "opeps/core.hpp"
#include "opeps/scheme.hpp"

#include <map>
#include <nlohmann/json_fwd.hpp>

namespace opeps {

// Closed token interval shipped to the server; empty means "no records".
struct TokenRange {
    u128 lo = 0;
    u128 hi = 0;
    bool empty = true;
};

struct ServerRecord {
    uint64_t record_id = 0;
    AugmentedCiphertext ct;
};

// Immutable ciphertext store sorted by order token; queries may be served
// concurrently.
class ServerStore {
  public:
    explicit ServerStore(std::vector<ServerRecord> records);

    const std::vector<ServerRecord> &records() const { return records_; }
    size_t size() const { return records_.size(); }
    // Records with token inside the closed range, in token order.
    std::vector<ServerRecord> filter(const TokenRange &range) const;

  private:
    std::vector<ServerRecord> records_;
};

// Request/response pairs crossing the querier/server boundary; in-process
// now, the same shapes would bind to a socket transport.
struct QueryRequest {
    TokenRange range;
};
struct QueryResponse {
    std::vector<ServerRecord> records;
};

class RangeTransport {
  public:
    virtual ~RangeTransport() = default;
    virtual QueryResponse ask(const QueryRequest &request) = 0;
};

class InProcessTransport final : public RangeTransport {
  public:
    explicit InProcessTransport(const ServerStore &store) : store_(store) {}
    QueryResponse ask(const QueryRequest &request) override {
        return {store_.filter(request.range)};
    }

  private:
    const ServerStore &store_;
};

// Querier-side state: min/max order token per encoding present in the
// encrypted dataset. Read-only after build.
struct ClientState {
    std::map<int64_t, std::pair<u128, u128>> spans;
};

ClientState
build_client_state(const std::vector<std::pair<u128, int64_t>> &tokens);
// Decrypts each stored order token through the scheme's engine.
ClientState build_client_state(const OpepsScheme &scheme,
                               const ServerStore &store);

// Widens [P(a), P(b)] by `neighbors` encodings on each side, clamps to the
// encodings present in the client state, and returns the covering token
// interval (empty when no present encoding falls inside).
TokenRange transform_query(const ClientState &state,
                           const Partition &partition, int64_t a, int64_t b,
                           int neighbors = 0);

std::vector<ServerRecord> server_filter(const ServerStore &store,
                                        const TokenRange &range);

struct VerifiedResult {
    std::vector<uint64_t> kept_ids;
    size_t returned = 0;
    size_t kept = 0;
    size_t discarded = 0;
};

// Unseals every returned record and keeps those with exact value in [a, b];
// an authentication failure aborts with the offending record id.
VerifiedResult client_verify(const std::vector<ServerRecord> &records,
                             const SealKey &key, int64_t a, int64_t b);

struct QueryMetrics {
    size_t returned = 0;
    size_t correct = 0;
    size_t missing = 0;
    size_t extra = 0;
    double rho_m = 0; // 100 * missing / correct (0 when correct == 0)
    double rho_e = 0; // 100 * extra / dataset size
};

QueryMetrics compute_metrics(const VerifiedResult &verified, size_t correct,
                             size_t dataset_size);

// Coarsest partition answering the workload at interval granularity: cut
// points at every query start and after the end of every maximal covered
// run of queried values.
Partition
build_workload_partition(const std::vector<std::pair<int64_t, int64_t>> &queries,
                         const DiscreteDomain &domain);

// Left endpoints of the partition's intervals.
std::vector<int64_t> cut_points(const Partition &partition);

// Transcript shapes used when the harness records protocol runs.
nlohmann::json query_to_json(const QueryRequest &request);
nlohmann::json result_to_json(const QueryResponse &response);
std::string metrics_csv_header();
std::string metrics_csv_row(double epsilon, int partition_k, int neighbors,
                            const QueryMetrics &metrics);

} // namespace opeps
