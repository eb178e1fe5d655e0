#pragma once

#include "opeps/core.hpp"
#include "opeps/encoder.hpp"
#include "opeps/estimators.hpp"
#include "opeps/leakage.hpp"
#include "opeps/range_protocol.hpp"

#include <filesystem>
#include <nlohmann/json_fwd.hpp>

namespace opeps {

struct SyntheticSpec {
    enum class Kind { uniform, zipf, binned_gaussian };
    Kind kind = Kind::uniform;
    size_t n = 0;
    double zipf_exponent = 1.1;
    double gauss_mean = 0;  // defaults to the domain midpoint when 0
    double gauss_stddev = 0; // defaults to 1/8 of the domain span when 0
};

struct DatasetSpec {
    enum class Kind { synthetic, csv };
    Kind kind = Kind::synthetic;
    SyntheticSpec synthetic;
    std::string csv_path;
    std::string csv_column;
    double csv_scale = 1.0;
    bool csv_has_header = true;
};

struct PartitionSpec {
    enum class Kind { equi_length, equi_depth, explicit_bounds, workload,
                      identity };
    Kind kind = Kind::equi_depth;
    std::vector<int> sizes{10}; // swept for equi_length / equi_depth
    std::vector<int64_t> boundaries;
};

struct QuerySpec {
    enum class Kind { random, explicit_list, workload };
    Kind kind = Kind::random;
    size_t count = 100;
    std::vector<std::pair<int64_t, int64_t>> list;
    size_t workload_size = 10;
};

struct PriorSpec {
    enum class Kind { uniform, zipf, binned_gaussian, from_data };
    Kind kind = Kind::uniform;
    double zipf_exponent = 1.1;
    double gauss_mean = 0;
    double gauss_stddev = 0;
};

struct LeakageSpec {
    PriorSpec true_prior;
    PriorSpec aux_prior;
    int n = 20;
    int bits = 0; // 0 selects the bit width of the domain span
    std::vector<double> epsilons{1.0, 0.1};
    std::vector<double> betas{0.05};
    uint64_t ri_trials = 100000;
    double advantage_threshold = 0.1;
};

struct ExperimentConfig {
    uint64_t seed = 1;
    int trials = 1;
    std::string out_dir = "out";
    DiscreteDomain domain{1, 100};
    DatasetSpec dataset;
    PartitionSpec partition;
    std::vector<double> epsilons{1.0};
    std::vector<int> neighbors{0};
    QuerySpec queries;
    std::vector<double> ldp_epsilons{1.0};
    int ordinal_bins = 10;
    int64_t range_query_size = 20;
    LeakageSpec leakage;

    static ExperimentConfig from_json(const nlohmann::json &doc);
    nlohmann::json to_json() const;
};

struct IngestResult {
    Dataset dataset;
    size_t accepted = 0;
    size_t rejected = 0; // out-of-domain rows
    bool empty_warning = false;
};

// Reads one column of a CSV file, quantizing with the scale factor; rows
// outside the domain are rejected and counted, malformed cells abort with
// their row number.
IngestResult ingest_csv(const std::string &path, const std::string &column,
                        const DiscreteDomain &domain, double scale = 1.0,
                        bool has_header = true);

// Boundaries at empirical quantiles so intervals hold near-equal record
// counts; a boundary never splits the occurrences of one value.
Partition equi_depth_partition(const Dataset &data, int k);

Dataset synthesize_dataset(const SyntheticSpec &spec,
                           const DiscreteDomain &domain, Rng &rng);
Prior build_prior(const PriorSpec &spec, const DiscreteDomain &domain,
                  const Dataset *data = nullptr);

struct RangeExperimentRow {
    double epsilon = 0;
    int partition_k = 0;
    int neighbors = 0;
    int trials = 0;
    double rho_m_mean = 0, rho_m_std = 0;
    double rho_e_mean = 0, rho_e_std = 0;
};

struct RangeExperimentResult {
    std::vector<RangeExperimentRow> rows;
    std::string metrics_csv;
    nlohmann::json report() const;
};

RangeExperimentResult run_range_experiment(const ExperimentConfig &cfg);

struct LdpExperimentResult {
    struct Row {
        double epsilon = 0;
        std::vector<double> sigma_profile;
        double freq_mae = 0, freq_baseline_mae = 0;
        double mean_abs_err = 0, mean_baseline_abs_err = 0;
        double range_err_per_point = 0, point_err_per_point = 0;
    };
    std::vector<Row> rows;
    std::string sigma_csv;
    std::string errors_csv;
    nlohmann::json report() const;
};

LdpExperimentResult run_ldp_experiment(const ExperimentConfig &cfg);

struct LeakageReportResult {
    LeakageMatrix ope;
    std::vector<std::pair<double, LeakageMatrix>> opeps; // per epsilon
    struct BoundRow {
        double epsilon = 0, beta = 0;
        GameBound bound;
        RiGameResult game;
    };
    std::vector<BoundRow> bounds;
    // Per epsilon: largest distance whose two-candidate advantage cap stays
    // below the configured threshold.
    std::vector<std::pair<double, int64_t>> indistinguishability_radius;
    std::string bounds_csv;
    nlohmann::json report() const;
};

LeakageReportResult run_leakage_report(const ExperimentConfig &cfg);

std::string leakage_matrix_csv(const LeakageMatrix &matrix);

// Writes every artifact of a run (metrics.csv, report.json, leakage CSVs)
// under cfg.out_dir; returns the written paths.
std::vector<std::filesystem::path>
write_range_outputs(const ExperimentConfig &cfg,
                    const RangeExperimentResult &result);
std::vector<std::filesystem::path>
write_ldp_outputs(const ExperimentConfig &cfg,
                  const LdpExperimentResult &result);
std::vector<std::filesystem::path>
write_leakage_outputs(const ExperimentConfig &cfg,
                      const LeakageReportResult &result);

} // namespace opeps
