#include "cfx/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "cfx/errors.hpp"
#include "cfx/rng.hpp"
#include "json.hpp"

namespace cfx {

namespace {

// 1-based ranks with ties sharing their group's average rank.
std::vector<double> average_ranks(const std::vector<double>& values) {
    int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double shared = (i + j) / 2.0 + 1.0;
        for (int k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

double mae_bar(const std::vector<std::vector<double>>& true_scores,
               const std::vector<std::vector<double>>& est_scores) {
    if (true_scores.size() != est_scores.size())
        throw ShapeMismatchError("mae_bar: trial counts differ");
    if (true_scores.empty())
        throw ShapeMismatchError("mae_bar: no trials");
    std::size_t vars = true_scores.front().size();
    if (vars == 0) throw ShapeMismatchError("mae_bar: no variables");
    for (std::size_t t = 0; t < true_scores.size(); ++t)
        if (true_scores[t].size() != vars || est_scores[t].size() != vars)
            throw ShapeMismatchError("mae_bar: ragged score matrix at trial " +
                                     std::to_string(t));

    double total = 0.0;
    for (std::size_t v = 0; v < vars; ++v) {
        double err = 0.0;
        for (std::size_t t = 0; t < true_scores.size(); ++t)
            err += std::abs(true_scores[t][v] - est_scores[t][v]);
        total += err / static_cast<double>(true_scores.size());
    }
    return total / static_cast<double>(vars);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ShapeMismatchError("spearman: vector lengths differ");
    int n = static_cast<int>(a.size());
    if (n < 2) throw Error("spearman: need at least two values");
    auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(),
                           [&](double x) { return x == v.front(); });
    };
    if (constant(a)) throw ConstantVectorError("spearman: first vector is constant");
    if (constant(b)) throw ConstantVectorError("spearman: second vector is constant");

    std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
    // Perfect agreement and perfect reversal are exact by construction, not
    // subject to rounding in the correlation arithmetic.
    if (ra == rb) return 1.0;
    bool reversed = true;
    for (int i = 0; i < n && reversed; ++i)
        reversed = ra[i] + rb[i] == n + 1.0;
    if (reversed) return -1.0;

    double ma = mean_of(ra), mb = mean_of(rb);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (int i = 0; i < n; ++i) {
        double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    return cov / std::sqrt(va * vb);
}

std::vector<double> score_vector(const ScoreReport& report) {
    std::vector<double> out;
    out.reserve(report.variables.size());
    for (const VariableScores& v : report.variables) {
        if (!v.has_max)
            throw NoValidPairError("score_vector: no scored pair for " + v.name);
        out.push_back(v.max_nesuf);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PC extension selection

ExtensionSelection select_extension_minmax(const Scorer& scorer,
                                           const std::vector<Dag>& extensions,
                                           int target,
                                           const std::vector<double>& true_scores) {
    if (extensions.empty())
        throw NoExtensionError("select_extension_minmax: no extensions given");

    struct Scored {
        int index;
        ScoreReport report;
        std::optional<double> spr;
    };
    std::vector<Scored> usable;
    std::optional<std::string> first_failure;
    for (int i = 0; i < static_cast<int>(extensions.size()); ++i) {
        try {
            ScoreReport report = scorer.report(&extensions[i], target);
            std::vector<double> est = score_vector(report);
            std::optional<double> spr;
            try {
                spr = spearman(true_scores, est);
            } catch (const ConstantVectorError&) {
            }
            usable.push_back({i, std::move(report), spr});
        } catch (const Error& e) {
            if (!first_failure) first_failure = e.what();
        }
    }
    if (usable.empty())
        throw NoValidPairError("select_extension_minmax: no extension could be "
                               "scored (" + *first_failure + ")");

    const Scored* best = nullptr;
    const Scored* worst = nullptr;
    for (const Scored& s : usable) {
        if (!s.spr) continue;
        if (!best || *s.spr > *best->spr) best = &s;
        if (!worst || *s.spr < *worst->spr) worst = &s;
    }
    if (!best) best = worst = &usable.front();  // nothing rankable

    ExtensionSelection out;
    out.max_report = best->report;
    out.min_report = worst->report;
    out.max_index = best->index;
    out.min_index = worst->index;
    out.max_spr = best->spr;
    out.min_spr = worst->spr;
    return out;
}

ExtensionSelection select_extension_minmax(const std::vector<Dag>& extensions,
                                           const DiscretizedDataset& data,
                                           const std::vector<int>& labels,
                                           const std::vector<double>& true_scores,
                                           const Classifier* model, int target) {
    Scorer scorer(data, labels, model);
    return select_extension_minmax(scorer, extensions, target, true_scores);
}

// ---------------------------------------------------------------------------
// Config

const char* form_name(MechanismKind form) {
    return form == MechanismKind::linear ? "linear" : "nonlinear";
}

const char* noise_name(NoiseFamily noise) {
    return noise == NoiseFamily::uniform ? "uniform" : "gaussian";
}

MechanismKind parse_form(const std::string& text) {
    if (text == "linear") return MechanismKind::linear;
    if (text == "nonlinear") return MechanismKind::quadratic;
    throw SchemaMismatchError("unknown function form \"" + text +
                              "\" (expected linear or nonlinear)");
}

NoiseFamily parse_noise(const std::string& text) {
    if (text == "uniform") return NoiseFamily::uniform;
    if (text == "gaussian") return NoiseFamily::gaussian;
    throw SchemaMismatchError("unknown noise family \"" + text +
                              "\" (expected uniform or gaussian)");
}

DiscoveryMethod parse_method(const std::string& text) {
    for (DiscoveryMethod m : {DiscoveryMethod::pc, DiscoveryMethod::lingam,
                              DiscoveryMethod::resit, DiscoveryMethod::notears})
        if (text == method_name(m)) return m;
    throw SchemaMismatchError("unknown discovery method \"" + text + "\"");
}

PriorMode parse_mode(const std::string& text) {
    for (PriorMode m : {PriorMode::mode0, PriorMode::modeA, PriorMode::modeB,
                        PriorMode::noGraph})
        if (text == mode_name(m)) return m;
    throw SchemaMismatchError("unknown prior mode \"" + text +
                              "\" (expected 0, a, b, or nograph)");
}

std::vector<ExperimentCell> default_cells() {
    std::vector<ExperimentCell> cells;
    for (DiscoveryMethod m : {DiscoveryMethod::lingam, DiscoveryMethod::pc,
                              DiscoveryMethod::resit, DiscoveryMethod::notears})
        for (PriorMode mode : {PriorMode::mode0, PriorMode::modeA, PriorMode::modeB}) {
            bool sink_capable =
                m == DiscoveryMethod::pc || m == DiscoveryMethod::lingam;
            if (mode == PriorMode::modeB && !sink_capable) continue;
            cells.push_back({m, mode});
        }
    cells.push_back({DiscoveryMethod::pc, PriorMode::noGraph});
    return cells;
}

void ExperimentConfig::validate() const {
    if (sample_size < 2) throw Error("experiment config: sample_size must be at least 2");
    if (bins < 2) throw Error("experiment config: bins must be at least 2");
    if (trials < 1) throw Error("experiment config: trials must be at least 1");
    if (forest.trees < 1 || forest.max_depth < 1)
        throw Error("experiment config: classifier needs at least one tree and depth 1");
    if (jobs < 0) throw Error("experiment config: jobs cannot be negative");
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["form"] = form_name(form);
    j["noise"] = noise_name(noise);
    j["sample_size"] = sample_size;
    j["bins"] = bins;
    j["trials"] = trials;
    j["base_seed"] = base_seed;
    j["jobs"] = jobs;
    j["extension_cap"] = discovery.extension_cap;
    j["forest"] = {{"trees", forest.trees},
                   {"max_depth", forest.max_depth},
                   {"features_per_split", forest.features_per_split},
                   {"bootstrap", forest.bootstrap},
                   {"seed", forest.seed}};
    auto cells_json = nlohmann::json::array();
    for (const ExperimentCell& cell : cells) {
        if (cell.mode == PriorMode::noGraph)
            cells_json.push_back({{"mode", "nograph"}});
        else
            cells_json.push_back({{"method", method_name(cell.method)},
                                  {"mode", mode_name(cell.mode)}});
    }
    j["cells"] = std::move(cells_json);
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("experiment config: ") + e.what());
    }
    if (!j.is_object())
        throw SchemaMismatchError("experiment config: expected a JSON object");

    static const char* known[] = {"form",      "noise", "sample_size",
                                  "bins",      "trials", "base_seed",
                                  "jobs",      "extension_cap", "forest",
                                  "cells"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                return key == k;
            }) == std::end(known))
            throw SchemaMismatchError("experiment config: unknown key \"" + key + "\"");
    }

    ExperimentConfig cfg;
    try {
        if (j.contains("form")) cfg.form = parse_form(j["form"].get<std::string>());
        if (j.contains("noise")) cfg.noise = parse_noise(j["noise"].get<std::string>());
        cfg.sample_size = j.value("sample_size", cfg.sample_size);
        cfg.bins = j.value("bins", cfg.bins);
        cfg.trials = j.value("trials", cfg.trials);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        cfg.jobs = j.value("jobs", cfg.jobs);
        cfg.discovery.extension_cap =
            j.value("extension_cap", cfg.discovery.extension_cap);
        if (j.contains("forest")) {
            const auto& f = j["forest"];
            static const char* fkeys[] = {"trees", "max_depth", "features_per_split",
                                          "bootstrap", "seed"};
            for (const auto& [key, value] : f.items()) {
                (void)value;
                if (std::find_if(std::begin(fkeys), std::end(fkeys),
                                 [&](const char* k) { return key == k; }) ==
                    std::end(fkeys))
                    throw SchemaMismatchError(
                        "experiment config: unknown forest key \"" + key + "\"");
            }
            cfg.forest.trees = f.value("trees", cfg.forest.trees);
            cfg.forest.max_depth = f.value("max_depth", cfg.forest.max_depth);
            cfg.forest.features_per_split =
                f.value("features_per_split", cfg.forest.features_per_split);
            cfg.forest.bootstrap = f.value("bootstrap", cfg.forest.bootstrap);
            cfg.forest.seed = f.value("seed", cfg.forest.seed);
        }
        if (j.contains("cells")) {
            for (const auto& c : j["cells"]) {
                if (!c.is_object() || !c.contains("mode"))
                    throw SchemaMismatchError(
                        "experiment config: each cell needs a mode");
                PriorMode mode = parse_mode(c["mode"].get<std::string>());
                ExperimentCell cell;
                cell.mode = mode;
                if (mode != PriorMode::noGraph)
                    cell.method = parse_method(c.at("method").get<std::string>());
                cfg.cells.push_back(cell);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CFX_JOBS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 256)
            return static_cast<int>(v);
    }
    return 1;
}

// ---------------------------------------------------------------------------
// Trials

namespace {

TrialResult error_row(std::uint64_t seed, std::string method, PriorMode mode,
                      const std::string& message) {
    TrialResult row;
    row.seed = seed;
    row.method = std::move(method);
    row.mode = mode;
    row.error = message;
    return row;
}

}  // namespace

std::vector<std::pair<std::string, PriorMode>> row_labels(
    const ExperimentConfig& config) {
    std::vector<std::pair<std::string, PriorMode>> labels;
    labels.emplace_back("true", PriorMode::mode0);
    const std::vector<ExperimentCell>& cells =
        config.cells.empty() ? default_cells() : config.cells;
    for (const ExperimentCell& cell : cells) {
        if (cell.mode == PriorMode::noGraph) {
            labels.emplace_back("nograph", PriorMode::noGraph);
        } else if (cell.method == DiscoveryMethod::pc) {
            labels.emplace_back("pc_max", cell.mode);
            labels.emplace_back("pc_min", cell.mode);
        } else {
            labels.emplace_back(method_name(cell.method), cell.mode);
        }
    }
    return labels;
}

std::vector<TrialResult> run_trial(const ExperimentConfig& config,
                                   std::uint64_t seed) {
    config.validate();
    ScmSpec spec = make_eight_var(config.form, config.noise);
    int target = spec.dag.num_nodes() - 1;
    Dataset raw = sample(spec, config.sample_size, seed);

    Dataset explanatory;
    for (int c = 0; c < raw.num_cols(); ++c) {
        if (c == target) continue;
        explanatory.labels.push_back(raw.labels[c]);
        explanatory.kinds.push_back(raw.kinds[c]);
        explanatory.columns.push_back(raw.columns[c]);
    }
    DiscretizedDataset features = discretize_dataset(explanatory, config.bins);
    std::vector<int> target_codes = make_binary_target(raw.columns[target]);

    ForestConfig forest_config = config.forest;
    forest_config.seed = derive_seed(config.forest.seed, seed);
    Forest forest = fit_forest(features, target_codes, forest_config);
    std::vector<int> labels = forest.predict(features);
    Scorer scorer(features, labels, &forest);

    std::vector<double> truth = score_vector(scorer.report(&spec.dag, target));

    auto scored_row = [&](std::string method, PriorMode mode,
                          std::vector<double> est,
                          std::optional<double> known_spr,
                          bool spr_known) {
        TrialResult row;
        row.seed = seed;
        row.method = std::move(method);
        row.mode = mode;
        row.true_scores = truth;
        row.est_scores = std::move(est);
        double total = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            total += std::abs(truth[i] - row.est_scores[i]);
        row.mae = total / static_cast<double>(truth.size());
        if (spr_known) {
            row.spr = known_spr;
        } else {
            try {
                row.spr = spearman(truth, row.est_scores);
            } catch (const ConstantVectorError&) {
            }
        }
        return row;
    };

    std::vector<TrialResult> rows;
    rows.push_back(scored_row("true", PriorMode::mode0, truth, std::nullopt, false));

    const std::vector<ExperimentCell>& cells =
        config.cells.empty() ? default_cells() : config.cells;
    for (const ExperimentCell& cell : cells) {
        if (cell.mode == PriorMode::noGraph) {
            try {
                std::vector<double> est = score_vector(scorer.report_no_graph());
                rows.push_back(scored_row("nograph", PriorMode::noGraph,
                                          std::move(est), std::nullopt, false));
            } catch (const Error& e) {
                rows.push_back(
                    error_row(seed, "nograph", PriorMode::noGraph, e.what()));
            }
            continue;
        }
        bool is_pc = cell.method == DiscoveryMethod::pc;
        try {
            DiscoveryOutput discovered = discover_with_prior(
                cell.method, cell.mode, raw, target, config.discovery);
            if (is_pc) {
                ExtensionSelection pick = select_extension_minmax(
                    scorer, discovered.dags, target, truth);
                rows.push_back(scored_row("pc_max", cell.mode,
                                          score_vector(pick.max_report),
                                          pick.max_spr, true));
                rows.push_back(scored_row("pc_min", cell.mode,
                                          score_vector(pick.min_report),
                                          pick.min_spr, true));
            } else {
                if (discovered.dags.empty())
                    throw Error("discovery returned no graph");
                std::vector<double> est =
                    score_vector(scorer.report(&discovered.dags[0], target));
                rows.push_back(scored_row(method_name(cell.method), cell.mode,
                                          std::move(est), std::nullopt, false));
            }
        } catch (const Error& e) {
            if (is_pc) {
                rows.push_back(error_row(seed, "pc_max", cell.mode, e.what()));
                rows.push_back(error_row(seed, "pc_min", cell.mode, e.what()));
            } else {
                rows.push_back(error_row(seed, method_name(cell.method),
                                         cell.mode, e.what()));
            }
        }
    }
    return rows;
}

std::vector<TrialResult> run_trials(const ExperimentConfig& config) {
    config.validate();
    int workers = std::min(resolve_jobs(config.jobs), config.trials);
    std::vector<std::vector<TrialResult>> per_trial(config.trials);

    auto run_one = [&](int index) {
        std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(index);
        try {
            per_trial[index] = run_trial(config, seed);
        } catch (const std::exception& e) {
            std::string message = std::string("trial pipeline: ") + e.what();
            for (const auto& [method, mode] : row_labels(config))
                per_trial[index].push_back(error_row(seed, method, mode, message));
        }
    };

    if (workers <= 1) {
        for (int i = 0; i < config.trials; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < config.trials;
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (std::thread& t : pool) t.join();
    }

    std::vector<TrialResult> rows;
    for (auto& trial : per_trial)
        for (TrialResult& row : trial) rows.push_back(std::move(row));
    return rows;
}

// ---------------------------------------------------------------------------
// Summaries

MetricsSummary summarize(const std::vector<TrialResult>& trials) {
    struct Bucket {
        CellSummary cell;
        std::vector<double> maes;
        double spr_sum = 0.0;
    };
    std::vector<Bucket> buckets;
    auto bucket_for = [&](const TrialResult& row) -> Bucket& {
        for (Bucket& b : buckets)
            if (b.cell.method == row.method && b.cell.mode == row.mode) return b;
        buckets.emplace_back();
        buckets.back().cell.method = row.method;
        buckets.back().cell.mode = row.mode;
        return buckets.back();
    };

    for (const TrialResult& row : trials) {
        Bucket& b = bucket_for(row);
        if (!row.ok()) {
            ++b.cell.failed;
            continue;
        }
        b.maes.push_back(row.mae);
        if (row.spr) {
            b.spr_sum += *row.spr;
            ++b.cell.n_spr;
        } else {
            ++b.cell.rank_degenerate;
        }
    }

    MetricsSummary out;
    for (Bucket& b : buckets) {
        CellSummary cell = b.cell;
        cell.n_trials = static_cast<int>(b.maes.size());
        if (cell.n_trials > 0) {
            cell.mae_mean = mean_of(b.maes);
            if (cell.n_trials > 1) {
                double ss = 0.0;
                for (double m : b.maes) {
                    double d = m - cell.mae_mean;
                    ss += d * d;
                }
                cell.mae_stderr = std::sqrt(ss / (cell.n_trials - 1)) /
                                  std::sqrt(static_cast<double>(cell.n_trials));
            }
        }
        if (cell.n_spr > 0) cell.spr_mean = b.spr_sum / cell.n_spr;
        out.cells.push_back(std::move(cell));
    }
    return out;
}

const CellSummary* MetricsSummary::find(const std::string& method,
                                        PriorMode mode) const {
    for (const CellSummary& cell : cells)
        if (cell.method == method && cell.mode == mode) return &cell;
    return nullptr;
}

std::string MetricsSummary::to_csv() const {
    std::ostringstream os;
    os << "method,mode,mae_mean,mae_stderr,spr_mean,n_trials\n";
    os << std::setprecision(10);
    for (const CellSummary& cell : cells) {
        os << cell.method << ',' << mode_name(cell.mode) << ',';
        if (cell.n_trials > 0)
            os << cell.mae_mean << ',' << cell.mae_stderr;
        else
            os << ',';
        os << ',';
        if (cell.spr_mean) os << *cell.spr_mean;
        os << ',' << cell.n_trials << '\n';
    }
    return os.str();
}

}  // namespace cfx
