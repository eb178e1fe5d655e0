#include "opeps/harness.hpp"

#include "opeps/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace opeps {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double mean_of(const std::vector<double> &xs) {
    if (xs.empty())
        return 0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double> &xs) {
    if (xs.size() < 2)
        return 0;
    const double mu = mean_of(xs);
    double ss = 0;
    for (double x : xs)
        ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

int64_t draw_in(const DiscreteDomain &domain, Rng &rng) {
    return domain.lo +
           static_cast<int64_t>(rng() % static_cast<uint64_t>(domain.size()));
}

// Inverse-CDF sampler over explicit weights; deterministic for a fixed
// generator stream.
int64_t draw_weighted(const DiscreteDomain &domain,
                      const std::vector<double> &cdf, Rng &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto idx = std::min<size_t>(static_cast<size_t>(it - cdf.begin()),
                                      cdf.size() - 1);
    return domain.lo + static_cast<int64_t>(idx);
}

std::vector<double> weights_to_cdf(std::vector<double> weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double cum = 0;
    for (double &w : weights) {
        cum += w / total;
        w = cum;
    }
    return weights;
}

std::vector<double> shape_weights(const DiscreteDomain &domain,
                                  PriorSpec::Kind kind, double zipf_exponent,
                                  double gauss_mean, double gauss_stddev) {
    const int64_t size = domain.size();
    std::vector<double> weights(static_cast<size_t>(size), 1.0);
    switch (kind) {
    case PriorSpec::Kind::uniform:
        break;
    case PriorSpec::Kind::zipf:
        for (int64_t i = 0; i < size; ++i)
            weights[static_cast<size_t>(i)] =
                1.0 / std::pow(static_cast<double>(i + 1), zipf_exponent);
        break;
    case PriorSpec::Kind::binned_gaussian: {
        const double mu = gauss_mean != 0
                              ? gauss_mean
                              : static_cast<double>(domain.lo + domain.hi) / 2;
        const double sd = gauss_stddev != 0
                              ? gauss_stddev
                              : std::max(1.0, static_cast<double>(size) / 8);
        for (int64_t i = 0; i < size; ++i) {
            const double x = static_cast<double>(domain.lo + i);
            weights[static_cast<size_t>(i)] =
                std::exp(-(x - mu) * (x - mu) / (2 * sd * sd));
        }
        break;
    }
    case PriorSpec::Kind::from_data:
        throw argument_error("from_data prior needs a dataset");
    }
    return weights;
}

template <typename T>
std::vector<T> run_trials(int trials, const std::function<T(int)> &body) {
    std::vector<T> results(static_cast<size_t>(trials));
    if (trials == 1) {
        results[0] = body(0);
        return results;
    }
    // Worker pool over trials; every trial owns its generator, aggregation
    // happens on the calling thread in trial order.
    std::vector<std::future<T>> futures;
    futures.reserve(static_cast<size_t>(trials));
    for (int t = 0; t < trials; ++t)
        futures.push_back(std::async(std::launch::async, body, t));
    for (int t = 0; t < trials; ++t)
        results[static_cast<size_t>(t)] = futures[static_cast<size_t>(t)].get();
    return results;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json &doc) {
    ExperimentConfig cfg;
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.trials = doc.value("trials", cfg.trials);
    if (cfg.trials < 1)
        throw argument_error("trials must be >= 1");
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    if (doc.contains("domain"))
        cfg.domain = DiscreteDomain(doc["domain"].at("lo").get<int64_t>(),
                                    doc["domain"].at("hi").get<int64_t>());

    if (doc.contains("dataset")) {
        const auto &ds = doc["dataset"];
        const std::string kind = ds.value("kind", "synthetic");
        if (kind == "synthetic") {
            cfg.dataset.kind = DatasetSpec::Kind::synthetic;
            const auto &syn = ds.at("synthetic");
            const std::string shape = syn.value("kind", "uniform");
            if (shape == "uniform")
                cfg.dataset.synthetic.kind = SyntheticSpec::Kind::uniform;
            else if (shape == "zipf")
                cfg.dataset.synthetic.kind = SyntheticSpec::Kind::zipf;
            else if (shape == "binned_gaussian")
                cfg.dataset.synthetic.kind =
                    SyntheticSpec::Kind::binned_gaussian;
            else
                throw argument_error("unknown synthetic kind " + shape);
            cfg.dataset.synthetic.n = syn.value("n", size_t{1000});
            cfg.dataset.synthetic.zipf_exponent =
                syn.value("exponent", 1.1);
            cfg.dataset.synthetic.gauss_mean = syn.value("mean", 0.0);
            cfg.dataset.synthetic.gauss_stddev = syn.value("stddev", 0.0);
        } else if (kind == "csv") {
            cfg.dataset.kind = DatasetSpec::Kind::csv;
            cfg.dataset.csv_path = ds.at("path").get<std::string>();
            cfg.dataset.csv_column = ds.at("column").get<std::string>();
            cfg.dataset.csv_scale = ds.value("scale", 1.0);
            cfg.dataset.csv_has_header = ds.value("has_header", true);
        } else {
            throw argument_error("unknown dataset kind " + kind);
        }
    }

    if (doc.contains("partition")) {
        const auto &ps = doc["partition"];
        const std::string kind = ps.value("kind", "equi_depth");
        if (kind == "equi_depth")
            cfg.partition.kind = PartitionSpec::Kind::equi_depth;
        else if (kind == "equi_length")
            cfg.partition.kind = PartitionSpec::Kind::equi_length;
        else if (kind == "explicit")
            cfg.partition.kind = PartitionSpec::Kind::explicit_bounds;
        else if (kind == "workload")
            cfg.partition.kind = PartitionSpec::Kind::workload;
        else if (kind == "identity")
            cfg.partition.kind = PartitionSpec::Kind::identity;
        else
            throw argument_error("unknown partition kind " + kind);
        if (ps.contains("k")) {
            if (ps["k"].is_array())
                cfg.partition.sizes = ps["k"].get<std::vector<int>>();
            else
                cfg.partition.sizes = {ps["k"].get<int>()};
        }
        if (ps.contains("boundaries"))
            cfg.partition.boundaries =
                ps["boundaries"].get<std::vector<int64_t>>();
    }

    auto read_eps = [](const nlohmann::json &node) {
        if (node.is_string()) {
            if (node.get<std::string>() != "inf")
                throw argument_error("epsilon must be a number or \"inf\"");
            return std::numeric_limits<double>::infinity();
        }
        return node.get<double>();
    };
    auto read_list = [&doc, &read_eps](const char *key,
                                       std::vector<double> fallback) {
        if (!doc.contains(key))
            return fallback;
        std::vector<double> out;
        if (doc[key].is_array())
            for (const auto &node : doc[key])
                out.push_back(read_eps(node));
        else
            out.push_back(read_eps(doc[key]));
        return out;
    };
    cfg.epsilons = read_list("epsilon", cfg.epsilons);
    cfg.ldp_epsilons = read_list("ldp_epsilon", cfg.ldp_epsilons);
    if (doc.contains("neighbors")) {
        if (doc["neighbors"].is_array())
            cfg.neighbors = doc["neighbors"].get<std::vector<int>>();
        else
            cfg.neighbors = {doc["neighbors"].get<int>()};
    }

    if (doc.contains("queries")) {
        const auto &qs = doc["queries"];
        const std::string kind = qs.value("kind", "random");
        if (kind == "random") {
            cfg.queries.kind = QuerySpec::Kind::random;
            cfg.queries.count = qs.value("count", size_t{100});
        } else if (kind == "explicit") {
            cfg.queries.kind = QuerySpec::Kind::explicit_list;
            for (const auto &pair : qs.at("list"))
                cfg.queries.list.emplace_back(pair.at(0).get<int64_t>(),
                                              pair.at(1).get<int64_t>());
        } else if (kind == "workload") {
            cfg.queries.kind = QuerySpec::Kind::workload;
            cfg.queries.workload_size = qs.value("size", size_t{10});
        } else {
            throw argument_error("unknown query kind " + kind);
        }
    }
    cfg.ordinal_bins = doc.value("ordinal_bins", cfg.ordinal_bins);
    cfg.range_query_size = doc.value("range_query_size",
                                     cfg.range_query_size);

    if (doc.contains("leakage")) {
        const auto &ls = doc["leakage"];
        auto parse_prior = [](const nlohmann::json &node) {
            PriorSpec spec;
            const std::string kind = node.value("kind", "uniform");
            if (kind == "uniform")
                spec.kind = PriorSpec::Kind::uniform;
            else if (kind == "zipf")
                spec.kind = PriorSpec::Kind::zipf;
            else if (kind == "binned_gaussian")
                spec.kind = PriorSpec::Kind::binned_gaussian;
            else if (kind == "from_data")
                spec.kind = PriorSpec::Kind::from_data;
            else
                throw argument_error("unknown prior kind " + kind);
            spec.zipf_exponent = node.value("exponent", 1.1);
            spec.gauss_mean = node.value("mean", 0.0);
            spec.gauss_stddev = node.value("stddev", 0.0);
            return spec;
        };
        if (ls.contains("true_prior"))
            cfg.leakage.true_prior = parse_prior(ls["true_prior"]);
        if (ls.contains("aux_prior"))
            cfg.leakage.aux_prior = parse_prior(ls["aux_prior"]);
        cfg.leakage.n = ls.value("n", cfg.leakage.n);
        cfg.leakage.bits = ls.value("bits", cfg.leakage.bits);
        if (ls.contains("epsilon")) {
            cfg.leakage.epsilons.clear();
            for (const auto &node : ls["epsilon"])
                cfg.leakage.epsilons.push_back(read_eps(node));
        }
        if (ls.contains("beta"))
            cfg.leakage.betas = ls["beta"].get<std::vector<double>>();
        cfg.leakage.ri_trials = ls.value("ri_trials", cfg.leakage.ri_trials);
        cfg.leakage.advantage_threshold =
            ls.value("advantage_threshold", cfg.leakage.advantage_threshold);
    }
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    auto eps_list = [](const std::vector<double> &values) {
        nlohmann::json list = nlohmann::json::array();
        for (double v : values) {
            if (std::isinf(v))
                list.push_back("inf");
            else
                list.push_back(v);
        }
        return list;
    };
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["trials"] = trials;
    doc["out_dir"] = out_dir;
    doc["domain"] = {{"lo", domain.lo}, {"hi", domain.hi}};
    doc["epsilon"] = eps_list(epsilons);
    doc["ldp_epsilon"] = eps_list(ldp_epsilons);
    doc["neighbors"] = neighbors;
    doc["ordinal_bins"] = ordinal_bins;
    doc["range_query_size"] = range_query_size;
    switch (partition.kind) {
    case PartitionSpec::Kind::equi_depth:
        doc["partition"] = {{"kind", "equi_depth"}, {"k", partition.sizes}};
        break;
    case PartitionSpec::Kind::equi_length:
        doc["partition"] = {{"kind", "equi_length"}, {"k", partition.sizes}};
        break;
    case PartitionSpec::Kind::explicit_bounds:
        doc["partition"] = {{"kind", "explicit"},
                            {"boundaries", partition.boundaries}};
        break;
    case PartitionSpec::Kind::workload:
        doc["partition"] = {{"kind", "workload"}};
        break;
    case PartitionSpec::Kind::identity:
        doc["partition"] = {{"kind", "identity"}};
        break;
    }
    return doc;
}

IngestResult ingest_csv(const std::string &path, const std::string &column,
                        const DiscreteDomain &domain, double scale,
                        bool has_header) {
    std::ifstream in(path);
    if (!in)
        throw ingestion_error("cannot open " + path);

    auto split = [](const std::string &line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        return cells;
    };

    std::string line;
    size_t column_index = 0;
    size_t row_no = 0;
    if (has_header) {
        if (!std::getline(in, line)) {
            return IngestResult{Dataset(domain, {}), 0, 0, true};
        }
        ++row_no;
        const auto header = split(line);
        auto it = std::find(header.begin(), header.end(), column);
        if (it == header.end())
            throw ingestion_error("column \"" + column + "\" not found in " +
                                  path);
        column_index = static_cast<size_t>(it - header.begin());
    } else {
        try {
            column_index = static_cast<size_t>(std::stoul(column));
        } catch (const std::exception &) {
            throw ingestion_error("headerless ingestion needs a numeric "
                                  "column index");
        }
    }

    IngestResult result{Dataset(domain, {}), 0, 0, false};
    std::vector<int64_t> values;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty())
            continue;
        const auto cells = split(line);
        if (column_index >= cells.size())
            throw ingestion_error("row " + std::to_string(row_no) +
                                  " has too few columns");
        double parsed;
        try {
            size_t used = 0;
            parsed = std::stod(cells[column_index], &used);
            if (used != cells[column_index].size())
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception &) {
            throw ingestion_error("row " + std::to_string(row_no) +
                                  ": non-numeric cell \"" +
                                  cells[column_index] + "\"");
        }
        const int64_t quantized =
            static_cast<int64_t>(std::llround(parsed * scale));
        if (!domain.contains(quantized)) {
            ++result.rejected;
            continue;
        }
        values.push_back(quantized);
        ++result.accepted;
    }
    result.empty_warning = values.empty();
    result.dataset = Dataset(domain, std::move(values));
    return result;
}

Partition equi_depth_partition(const Dataset &data, int k) {
    if (k < 1)
        throw argument_error("partition size must be >= 1");
    std::vector<int64_t> sorted = data.values;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    size_t distinct = 0;
    for (size_t i = 0; i < n; ++i)
        if (i == 0 || sorted[i] != sorted[i - 1])
            ++distinct;
    if (static_cast<size_t>(k) > distinct)
        throw argument_error("equi-depth size exceeds distinct value count");

    std::vector<int64_t> boundaries;
    size_t start = 0;
    for (int i = 1; i <= k; ++i) {
        if (i == k) {
            boundaries.push_back(data.domain.hi);
            break;
        }
        const size_t remaining_intervals = static_cast<size_t>(k - i + 1);
        const size_t remaining = n - start;
        const size_t step =
            (remaining + remaining_intervals - 1) / remaining_intervals;
        size_t idx = start + step - 1;
        // Snap forward so one value never straddles a boundary.
        while (idx + 1 < n && sorted[idx + 1] == sorted[idx])
            ++idx;
        // Fall back to the first run alone when the snap would starve the
        // remaining intervals of distinct values.
        size_t distinct_after = 0;
        for (size_t j = idx + 1; j < n && distinct_after < remaining_intervals;
             ++j)
            if (j == idx + 1 || sorted[j] != sorted[j - 1])
                ++distinct_after;
        if (distinct_after + 1 < remaining_intervals) {
            idx = start;
            while (idx + 1 < n && sorted[idx + 1] == sorted[start])
                ++idx;
        }
        boundaries.push_back(sorted[idx]);
        start = idx + 1;
    }
    std::vector<int64_t> encodings(boundaries.size());
    std::iota(encodings.begin(), encodings.end(), int64_t{1});
    return Partition(data.domain, std::move(boundaries),
                     std::move(encodings));
}

Dataset synthesize_dataset(const SyntheticSpec &spec,
                           const DiscreteDomain &domain, Rng &rng) {
    std::vector<int64_t> values;
    values.reserve(spec.n);
    switch (spec.kind) {
    case SyntheticSpec::Kind::uniform:
        for (size_t i = 0; i < spec.n; ++i)
            values.push_back(draw_in(domain, rng));
        break;
    case SyntheticSpec::Kind::zipf: {
        const auto cdf = weights_to_cdf(
            shape_weights(domain, PriorSpec::Kind::zipf, spec.zipf_exponent,
                          0, 0));
        for (size_t i = 0; i < spec.n; ++i)
            values.push_back(draw_weighted(domain, cdf, rng));
        break;
    }
    case SyntheticSpec::Kind::binned_gaussian: {
        const auto cdf = weights_to_cdf(
            shape_weights(domain, PriorSpec::Kind::binned_gaussian, 0,
                          spec.gauss_mean, spec.gauss_stddev));
        for (size_t i = 0; i < spec.n; ++i)
            values.push_back(draw_weighted(domain, cdf, rng));
        break;
    }
    }
    return Dataset(domain, std::move(values));
}

Prior build_prior(const PriorSpec &spec, const DiscreteDomain &domain,
                  const Dataset *data) {
    if (spec.kind == PriorSpec::Kind::from_data) {
        if (data == nullptr || data->values.empty())
            throw degenerate_prior_error(
                "from_data prior needs a non-empty dataset");
        // Tiny uniform floor so sparsely populated intervals keep positive
        // mass under arbitrary partitions.
        std::vector<double> pmf(static_cast<size_t>(domain.size()), 0.0);
        for (int64_t v : data->values)
            pmf[static_cast<size_t>(domain.index_of(v))] += 1.0;
        const double n = static_cast<double>(data->values.size());
        const double floor_mass = 1e-6 / static_cast<double>(domain.size());
        double total = 0;
        for (double &w : pmf) {
            w = w / n + floor_mass;
            total += w;
        }
        for (double &w : pmf)
            w /= total;
        return Prior(domain, std::move(pmf));
    }
    auto weights = shape_weights(domain, spec.kind, spec.zipf_exponent,
                                 spec.gauss_mean, spec.gauss_stddev);
    const double total =
        std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double &w : weights)
        w /= total;
    return Prior(domain, std::move(weights));
}

namespace {

Dataset materialize_dataset(const ExperimentConfig &cfg) {
    if (cfg.dataset.kind == DatasetSpec::Kind::csv) {
        auto result = ingest_csv(cfg.dataset.csv_path, cfg.dataset.csv_column,
                                 cfg.domain, cfg.dataset.csv_scale,
                                 cfg.dataset.csv_has_header);
        return result.dataset;
    }
    Rng rng = derive_rng(cfg.seed, 0xDA7A);
    return synthesize_dataset(cfg.dataset.synthetic, cfg.domain, rng);
}

std::vector<std::pair<int64_t, int64_t>>
materialize_queries(const ExperimentConfig &cfg) {
    if (cfg.queries.kind == QuerySpec::Kind::explicit_list)
        return cfg.queries.list;
    const size_t count = cfg.queries.kind == QuerySpec::Kind::workload
                             ? cfg.queries.workload_size
                             : cfg.queries.count;
    Rng rng = derive_rng(cfg.seed, 0x9E44);
    std::vector<std::pair<int64_t, int64_t>> queries;
    queries.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        int64_t a = draw_in(cfg.domain, rng);
        int64_t b = draw_in(cfg.domain, rng);
        if (a > b)
            std::swap(a, b);
        queries.emplace_back(a, b);
    }
    return queries;
}

Partition materialize_partition(const ExperimentConfig &cfg,
                                const Dataset &data, int k,
                                const std::vector<std::pair<int64_t, int64_t>>
                                    &queries) {
    switch (cfg.partition.kind) {
    case PartitionSpec::Kind::equi_depth:
        return equi_depth_partition(data, k);
    case PartitionSpec::Kind::equi_length:
        return Partition::equi_length(cfg.domain, k);
    case PartitionSpec::Kind::explicit_bounds: {
        std::vector<int64_t> encodings(cfg.partition.boundaries.size());
        std::iota(encodings.begin(), encodings.end(), int64_t{1});
        return Partition(cfg.domain, cfg.partition.boundaries, encodings);
    }
    case PartitionSpec::Kind::workload:
        return build_workload_partition(queries, cfg.domain);
    case PartitionSpec::Kind::identity:
        return Partition::identity(cfg.domain);
    }
    throw argument_error("unhandled partition kind");
}

struct TrialMetrics {
    double rho_m = 0;
    double rho_e = 0;
};

} // namespace

RangeExperimentResult run_range_experiment(const ExperimentConfig &cfg) {
    const Dataset data = materialize_dataset(cfg);
    const auto queries = materialize_queries(cfg);
    if (data.values.empty())
        throw argument_error("range experiment needs a non-empty dataset");
    if (queries.empty())
        throw argument_error("range experiment needs at least one query");

    std::vector<size_t> correct_counts(queries.size(), 0);
    for (size_t qi = 0; qi < queries.size(); ++qi)
        for (int64_t v : data.values)
            if (v >= queries[qi].first && v <= queries[qi].second)
                ++correct_counts[qi];

    RangeExperimentResult result;
    std::ostringstream csv;
    csv << "epsilon,partition_k,l,trials,rho_M_mean,rho_M_std,rho_E_mean,"
           "rho_E_std\n";

    for (size_t ki = 0; ki < cfg.partition.sizes.size(); ++ki) {
        const int k = cfg.partition.sizes[ki];
        const Partition partition =
            materialize_partition(cfg, data, k, queries);
        const Prior prior =
            build_prior(PriorSpec{PriorSpec::Kind::from_data}, cfg.domain,
                        &data);
        for (size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
            const double epsilon = cfg.epsilons[ei];
            // One encryption per trial; every neighbor width is evaluated
            // against the same realized ciphertexts.
            std::function<std::vector<TrialMetrics>(int)> trial_body =
                [&](int trial) {
                    Rng rng = derive_rng(
                        cfg.seed,
                        (((ki * 131 + ei) * 131) + static_cast<size_t>(trial)) *
                                2 +
                            1);
                    std::string seed_tag = "range:" +
                                           std::to_string(cfg.seed) + ":" +
                                           std::to_string(ki) + ":" +
                                           std::to_string(ei) + ":" +
                                           std::to_string(trial);
                    OpepsScheme scheme(seed_tag, partition, prior, epsilon);
                    const auto cts = scheme.encrypt_dataset(data, rng);
                    std::vector<ServerRecord> records;
                    records.reserve(cts.size());
                    for (size_t i = 0; i < cts.size(); ++i)
                        records.push_back({static_cast<uint64_t>(i), cts[i]});
                    const ServerStore store(std::move(records));
                    const ClientState state =
                        build_client_state(scheme, store);
                    InProcessTransport transport(store);

                    std::vector<TrialMetrics> per_l;
                    per_l.reserve(cfg.neighbors.size());
                    for (int l : cfg.neighbors) {
                        std::vector<double> rho_ms, rho_es;
                        rho_ms.reserve(queries.size());
                        rho_es.reserve(queries.size());
                        for (size_t qi = 0; qi < queries.size(); ++qi) {
                            const auto [a, b] = queries[qi];
                            QueryRequest request{
                                transform_query(state, partition, a, b, l)};
                            const auto response = transport.ask(request);
                            const auto verified = client_verify(
                                response.records, scheme.seal_key(), a, b);
                            const auto metrics = compute_metrics(
                                verified, correct_counts[qi], data.size());
                            rho_ms.push_back(metrics.rho_m);
                            rho_es.push_back(metrics.rho_e);
                        }
                        per_l.push_back(
                            {mean_of(rho_ms), mean_of(rho_es)});
                    }
                    return per_l;
                };
            const auto trials = run_trials(cfg.trials, trial_body);
            for (size_t li = 0; li < cfg.neighbors.size(); ++li) {
                std::vector<double> rho_ms, rho_es;
                for (const auto &trial : trials) {
                    rho_ms.push_back(trial[li].rho_m);
                    rho_es.push_back(trial[li].rho_e);
                }
                RangeExperimentRow row;
                row.epsilon = epsilon;
                row.partition_k = partition.size();
                row.neighbors = cfg.neighbors[li];
                row.trials = cfg.trials;
                row.rho_m_mean = mean_of(rho_ms);
                row.rho_m_std = stddev_of(rho_ms);
                row.rho_e_mean = mean_of(rho_es);
                row.rho_e_std = stddev_of(rho_es);
                result.rows.push_back(row);
                csv << fmt_double(row.epsilon) << ',' << row.partition_k
                    << ',' << row.neighbors << ',' << row.trials << ','
                    << fmt_double(row.rho_m_mean) << ','
                    << fmt_double(row.rho_m_std) << ','
                    << fmt_double(row.rho_e_mean) << ','
                    << fmt_double(row.rho_e_std) << '\n';
            }
        }
    }
    result.metrics_csv = csv.str();
    return result;
}

nlohmann::json RangeExperimentResult::report() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto &row : rows)
        rows_json.push_back({{"epsilon", row.epsilon},
                             {"partition_k", row.partition_k},
                             {"l", row.neighbors},
                             {"trials", row.trials},
                             {"rho_M_mean", row.rho_m_mean},
                             {"rho_M_std", row.rho_m_std},
                             {"rho_E_mean", row.rho_e_mean},
                             {"rho_E_std", row.rho_e_std}});
    return {{"schema", "opeps-report/1"},
            {"kind", "range"},
            {"rows", rows_json}};
}

LdpExperimentResult run_ldp_experiment(const ExperimentConfig &cfg) {
    const Dataset data = materialize_dataset(cfg);
    if (data.values.empty())
        throw argument_error("ldp experiment needs a non-empty dataset");
    const DiscreteDomain &domain = cfg.domain;

    const Partition identity = Partition::identity(domain);
    const Partition ordinal_partition =
        equi_depth_partition(data, cfg.ordinal_bins);
    const Prior data_prior =
        build_prior(PriorSpec{PriorSpec::Kind::from_data}, domain, &data);

    const auto truth_hist = histogram(data.values, domain);
    const double truth_mean = [&] {
        double acc = 0;
        for (int64_t v : data.values)
            acc += static_cast<double>(v);
        return acc / static_cast<double>(data.size());
    }();

    LdpExperimentResult result;
    std::ostringstream sigma_csv, errors_csv;
    sigma_csv << "epsilon,k,sigma_percent\n";
    errors_csv << "epsilon,freq_mae,freq_baseline_mae,mean_abs_err,"
                  "mean_baseline_abs_err,range_err_per_point,"
                  "point_err_per_point\n";

    for (size_t ei = 0; ei < cfg.ldp_epsilons.size(); ++ei) {
        const double epsilon = cfg.ldp_epsilons[ei];
        // In the local setting the encoder itself carries the full
        // distance-LDP budget; there is no composition with an engine here.
        const EncodingModel ordinal_model =
            EncodingModel::build(ordinal_partition, data_prior, epsilon);
        const EncodingModel identity_model =
            EncodingModel::build(identity, data_prior, epsilon);
        const ChannelMatrix channel = ChannelMatrix::build(identity_model);

        std::function<LdpExperimentResult::Row(int)> trial_body =
            [&](int trial) {
                Rng rng =
                    derive_rng(cfg.seed, 0x1D9 + ei * 977 +
                                             static_cast<size_t>(trial));
                LdpExperimentResult::Row row;
                row.epsilon = epsilon;

                std::vector<int64_t> ordinal_reports;
                ordinal_reports.reserve(data.size());
                for (int64_t v : data.values)
                    ordinal_reports.push_back(ordinal_model.encode(v, rng));
                row.sigma_profile =
                    ordinal_accuracy(data, ordinal_reports,
                                     ordinal_partition);

                std::vector<int64_t> reports;
                reports.reserve(data.size());
                for (int64_t v : data.values)
                    reports.push_back(identity_model.encode(v, rng));
                const auto estimate = estimate_frequencies(reports, channel);

                double mae = 0;
                for (size_t i = 0; i < truth_hist.size(); ++i)
                    mae += std::abs(estimate.counts[i] - truth_hist[i]);
                row.freq_mae = mae / static_cast<double>(truth_hist.size());

                std::vector<int64_t> krr_reports;
                krr_reports.reserve(data.size());
                for (int64_t v : data.values)
                    krr_reports.push_back(
                        krr_encode(v, domain, epsilon, rng));
                const auto krr_counts =
                    krr_estimate(krr_reports, domain, epsilon);
                double krr_mae = 0;
                for (size_t i = 0; i < truth_hist.size(); ++i)
                    krr_mae += std::abs(krr_counts[i] - truth_hist[i]);
                row.freq_baseline_mae =
                    krr_mae / static_cast<double>(truth_hist.size());

                row.mean_abs_err =
                    std::abs(estimate_mean(estimate, domain) - truth_mean);
                row.mean_baseline_abs_err = std::abs(
                    laplace_mean_estimate(data.values, domain, epsilon, rng) -
                    truth_mean);

                // One random window: range error per covered point vs the sum
                // of the individual point errors over the same window.
                const int64_t width =
                    std::min<int64_t>(cfg.range_query_size, domain.size());
                const int64_t a =
                    domain.lo + static_cast<int64_t>(
                                    rng() % static_cast<uint64_t>(
                                                domain.size() - width + 1));
                const int64_t b = a + width - 1;
                double truth_range = 0;
                for (int64_t v = a; v <= b; ++v)
                    truth_range += truth_hist[static_cast<size_t>(
                        domain.index_of(v))];
                row.range_err_per_point =
                    std::abs(estimate_range(estimate, domain, a, b) -
                             truth_range) /
                    static_cast<double>(width);
                double point_err = 0;
                for (int64_t v = a; v <= b; ++v)
                    point_err += std::abs(
                        estimate.counts[static_cast<size_t>(
                            domain.index_of(v))] -
                        truth_hist[static_cast<size_t>(domain.index_of(v))]);
                row.point_err_per_point =
                    point_err / static_cast<double>(width);
                return row;
            };

        const auto trials = run_trials(cfg.trials, trial_body);
        LdpExperimentResult::Row mean_row;
        mean_row.epsilon = epsilon;
        mean_row.sigma_profile.assign(
            static_cast<size_t>(ordinal_partition.size()), 0.0);
        for (const auto &row : trials) {
            for (size_t i = 0; i < row.sigma_profile.size(); ++i)
                mean_row.sigma_profile[i] +=
                    row.sigma_profile[i] / cfg.trials;
            mean_row.freq_mae += row.freq_mae / cfg.trials;
            mean_row.freq_baseline_mae +=
                row.freq_baseline_mae / cfg.trials;
            mean_row.mean_abs_err += row.mean_abs_err / cfg.trials;
            mean_row.mean_baseline_abs_err +=
                row.mean_baseline_abs_err / cfg.trials;
            mean_row.range_err_per_point +=
                row.range_err_per_point / cfg.trials;
            mean_row.point_err_per_point +=
                row.point_err_per_point / cfg.trials;
        }
        result.rows.push_back(mean_row);
        for (size_t k = 0; k < mean_row.sigma_profile.size(); ++k)
            sigma_csv << fmt_double(epsilon) << ',' << k << ','
                      << fmt_double(mean_row.sigma_profile[k]) << '\n';
        errors_csv << fmt_double(epsilon) << ','
                   << fmt_double(mean_row.freq_mae) << ','
                   << fmt_double(mean_row.freq_baseline_mae) << ','
                   << fmt_double(mean_row.mean_abs_err) << ','
                   << fmt_double(mean_row.mean_baseline_abs_err) << ','
                   << fmt_double(mean_row.range_err_per_point) << ','
                   << fmt_double(mean_row.point_err_per_point) << '\n';
    }
    result.sigma_csv = sigma_csv.str();
    result.errors_csv = errors_csv.str();
    return result;
}

nlohmann::json LdpExperimentResult::report() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto &row : rows)
        rows_json.push_back(
            {{"epsilon", row.epsilon},
             {"sigma_profile", row.sigma_profile},
             {"freq_mae", row.freq_mae},
             {"freq_baseline_mae", row.freq_baseline_mae},
             {"mean_abs_err", row.mean_abs_err},
             {"mean_baseline_abs_err", row.mean_baseline_abs_err},
             {"range_err_per_point", row.range_err_per_point},
             {"point_err_per_point", row.point_err_per_point}});
    return {{"schema", "opeps-report/1"},
            {"kind", "ldp"},
            {"rows", rows_json}};
}

LeakageReportResult run_leakage_report(const ExperimentConfig &cfg) {
    const DiscreteDomain &domain = cfg.domain;
    std::optional<Dataset> data;
    if (cfg.leakage.true_prior.kind == PriorSpec::Kind::from_data ||
        cfg.leakage.aux_prior.kind == PriorSpec::Kind::from_data)
        data = materialize_dataset(cfg);
    const Prior truth = build_prior(cfg.leakage.true_prior, domain,
                                    data ? &*data : nullptr);
    const Prior aux = build_prior(cfg.leakage.aux_prior, domain,
                                  data ? &*data : nullptr);
    const int m = cfg.leakage.bits > 0 ? cfg.leakage.bits
                                       : default_bit_count(domain);
    const int n = cfg.leakage.n;

    LeakageReportResult result;
    result.ope = leakage_matrix_ope(truth, aux, n, m);
    const Partition identity = Partition::identity(domain);
    for (double epsilon : cfg.leakage.epsilons) {
        // Reported epsilon is the scheme-level budget; the encoder behind
        // the ciphertexts runs at half of it.
        const EncodingModel model =
            EncodingModel::build(identity, truth, epsilon / 2.0);
        result.opeps.emplace_back(
            epsilon, leakage_matrix_opeps(truth, aux, model, n, m));
    }

    std::ostringstream bounds_csv;
    bounds_csv << "epsilon,beta,q,eps_star,bound,win_rate,advantage,std_err\n";
    const int64_t x0 = domain.lo + domain.size() / 2;
    uint64_t stream = 0x5EED;
    for (double epsilon : cfg.leakage.epsilons) {
        const EncodingModel model =
            EncodingModel::build(identity, truth, epsilon / 2.0);
        for (double beta : cfg.leakage.betas) {
            Rng rng = derive_rng(cfg.seed, ++stream);
            LeakageReportResult::BoundRow row;
            row.epsilon = epsilon;
            row.beta = beta;
            row.game = simulate_ri_game(model, epsilon, x0, beta,
                                        cfg.leakage.ri_trials, rng);
            row.bound = row.game.bound;
            result.bounds.push_back(row);
            bounds_csv << fmt_double(epsilon) << ',' << fmt_double(beta)
                       << ',' << row.game.q << ','
                       << fmt_double(row.bound.epsilon_star) << ','
                       << fmt_double(row.bound.bound) << ','
                       << fmt_double(row.game.win_rate) << ','
                       << fmt_double(row.game.advantage) << ','
                       << fmt_double(row.game.std_err) << '\n';
        }
        // Two-candidate distinguishing cap at distance t under the encoder's
        // half-budget: advantage <= 1/(1 + e^{-(eps/2) t}) - 1/2.
        int64_t radius = 0;
        for (int64_t t = 1; t < domain.size(); ++t) {
            const double cap =
                1.0 / (1.0 + std::exp(-(epsilon / 2.0) *
                                      static_cast<double>(t))) -
                0.5;
            if (cap <= cfg.leakage.advantage_threshold)
                radius = t;
            else
                break;
        }
        result.indistinguishability_radius.emplace_back(epsilon, radius);
    }
    result.bounds_csv = bounds_csv.str();
    return result;
}

nlohmann::json LeakageReportResult::report() const {
    nlohmann::json doc;
    doc["schema"] = "opeps-report/1";
    doc["kind"] = "leakage";
    doc["ope_mean"] = ope.mean();
    nlohmann::json per_eps = nlohmann::json::array();
    for (const auto &[epsilon, matrix] : opeps)
        per_eps.push_back({{"epsilon", epsilon}, {"mean", matrix.mean()}});
    doc["opeps_mean"] = per_eps;
    nlohmann::json radius = nlohmann::json::array();
    for (const auto &[epsilon, t] : indistinguishability_radius)
        radius.push_back({{"epsilon", epsilon}, {"max_distance", t}});
    doc["indistinguishability_radius"] = radius;
    nlohmann::json bound_rows = nlohmann::json::array();
    for (const auto &row : bounds)
        bound_rows.push_back({{"epsilon", row.epsilon},
                              {"beta", row.beta},
                              {"q", row.game.q},
                              {"eps_star", row.bound.epsilon_star},
                              {"bound", row.bound.bound},
                              {"win_rate", row.game.win_rate},
                              {"advantage", row.game.advantage},
                              {"std_err", row.game.std_err}});
    doc["bounds"] = bound_rows;
    return doc;
}

std::string leakage_matrix_csv(const LeakageMatrix &matrix) {
    std::ostringstream csv;
    csv << "rank";
    for (int j = 1; j <= matrix.m; ++j)
        csv << ",bit" << j;
    csv << '\n';
    for (int i = 0; i < matrix.n; ++i) {
        csv << (i + 1);
        for (int j = 0; j < matrix.m; ++j)
            csv << ',' << fmt_double(matrix.at(i, j));
        csv << '\n';
    }
    return csv.str();
}

namespace {

std::filesystem::path write_file(const std::filesystem::path &dir,
                                 const std::string &name,
                                 const std::string &content) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw error("cannot write " + path.string());
    out << content;
    return path;
}

std::string eps_tag(double epsilon) {
    std::string tag = fmt_double(epsilon);
    for (char &c : tag)
        if (c == '.')
            c = 'p';
    return tag;
}

} // namespace

std::vector<std::filesystem::path>
write_range_outputs(const ExperimentConfig &cfg,
                    const RangeExperimentResult &result) {
    const std::filesystem::path dir(cfg.out_dir);
    nlohmann::json report = result.report();
    report["config"] = cfg.to_json();
    return {write_file(dir, "metrics.csv", result.metrics_csv),
            write_file(dir, "report.json", report.dump(2) + "\n")};
}

std::vector<std::filesystem::path>
write_ldp_outputs(const ExperimentConfig &cfg,
                  const LdpExperimentResult &result) {
    const std::filesystem::path dir(cfg.out_dir);
    nlohmann::json report = result.report();
    report["config"] = cfg.to_json();
    return {write_file(dir, "ldp_sigma.csv", result.sigma_csv),
            write_file(dir, "ldp_errors.csv", result.errors_csv),
            write_file(dir, "report.json", report.dump(2) + "\n")};
}

std::vector<std::filesystem::path>
write_leakage_outputs(const ExperimentConfig &cfg,
                      const LeakageReportResult &result) {
    const std::filesystem::path dir(cfg.out_dir);
    std::vector<std::filesystem::path> written;
    written.push_back(
        write_file(dir, "leakage_ope.csv", leakage_matrix_csv(result.ope)));
    for (const auto &[epsilon, matrix] : result.opeps)
        written.push_back(write_file(dir,
                                     "leakage_opeps_eps" + eps_tag(epsilon) +
                                         ".csv",
                                     leakage_matrix_csv(matrix)));
    written.push_back(write_file(dir, "bounds.csv", result.bounds_csv));
    nlohmann::json report = result.report();
    report["config"] = cfg.to_json();
    written.push_back(
        write_file(dir, "report.json", report.dump(2) + "\n"));
    return written;
}

} // namespace opeps
