// cfx: counterfactual-probability explanations for binary classifiers.
//
// Subcommands wire the library end to end: simulate draws from a structural
// model, discover fits a causal graph, explain scores variables through the
// backdoor adjustment, evaluate and reproduce run the benchmark grids, and
// demo-credit walks a synthetic credit pipeline. Exit codes: 0 success,
// 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cfx/data.hpp"
#include "cfx/discovery.hpp"
#include "cfx/errors.hpp"
#include "cfx/eval.hpp"
#include "cfx/graph.hpp"
#include "cfx/model.hpp"
#include "cfx/rng.hpp"
#include "cfx/scm.hpp"
#include "cfx/scoring.hpp"

namespace {

using namespace cfx;

// Flag combinations the parser cannot rule out on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
    if (!out.flush()) throw Error("write to " + path + " failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int target_index(const Dataset& data, const std::string& name) {
    int t = data.index_of(name);
    if (t < 0)
        throw UsageError("column \"" + name + "\" not found in the data (columns: " +
                         [&] {
                             std::string s;
                             for (const auto& l : data.labels)
                                 s += (s.empty() ? "" : ", ") + l;
                             return s;
                         }() + ")");
    return t;
}

Dataset drop_column(const Dataset& data, int col) {
    Dataset out;
    for (int c = 0; c < data.num_cols(); ++c) {
        if (c == col) continue;
        out.labels.push_back(data.labels[c]);
        out.kinds.push_back(data.kinds[c]);
        out.columns.push_back(data.columns[c]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string structure, spec_path, form = "linear", out, spec_out;
    int n = 5000;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    if (a.structure.empty() == a.spec_path.empty())
        throw UsageError("give exactly one of --structure and --spec");

    ScmSpec spec;
    if (!a.spec_path.empty()) {
        spec = ScmSpec::from_json(read_file(a.spec_path));
    } else {
        static const std::map<std::string, BenchmarkStructure> ids = {
            {"A", BenchmarkStructure::A}, {"B", BenchmarkStructure::B},
            {"C", BenchmarkStructure::C}, {"D", BenchmarkStructure::D},
            {"E", BenchmarkStructure::E}};
        auto it = ids.find(a.structure);
        if (it == ids.end())
            throw UsageError("unknown structure \"" + a.structure +
                             "\" (expected A, B, C, D, or E)");
        spec = make_benchmark(it->second, parse_form(a.form));
    }

    Dataset data = sample(spec, a.n, a.seed);
    save_csv(data, a.out);
    std::string spec_out = a.spec_out;
    if (spec_out.empty()) {
        std::filesystem::path p(a.out);
        p.replace_extension();
        spec_out = p.string() + "_spec.json";
    }
    write_file(spec_out, spec.to_json());
    std::printf("wrote %d rows x %d columns to %s (model spec: %s)\n",
                data.num_rows(), data.num_cols(), a.out.c_str(), spec_out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// discover

struct DiscoverArgs {
    std::string data, kinds, target, method, prior = "0", out;
    double alpha = 0.05, hsic_alpha = 0.05, lingam_prune = 0.05;
    std::size_t cap = 10000;
};

DiscoveryConfig discovery_config(double alpha, double hsic_alpha,
                                 double lingam_prune, std::size_t cap) {
    DiscoveryConfig cfg;
    cfg.ci.alpha = alpha;
    cfg.resit.hsic_alpha = hsic_alpha;
    cfg.lingam_prune_threshold = lingam_prune;
    cfg.extension_cap = cap;
    return cfg;
}

nlohmann::json discovery_json(const DiscoveryOutput& out) {
    nlohmann::json j;
    j["method"] = method_name(out.method);
    j["mode"] = mode_name(out.mode);
    j["no_graph"] = out.no_graph;
    auto graphs = nlohmann::json::array();
    for (const Dag& dag : out.dags)
        graphs.push_back(nlohmann::json::parse(dag.to_json()));
    j["graphs"] = std::move(graphs);
    if (out.extensions_capped) j["extensions_capped"] = true;
    if (!out.conflicts.empty())
        j["orientation_conflicts"] = static_cast<int>(out.conflicts.size());
    return j;
}

int cmd_discover(const DiscoverArgs& a) {
    Dataset data = load_csv(a.data);
    if (!a.kinds.empty()) load_kinds(data, a.kinds);
    int target = target_index(data, a.target);

    DiscoveryOutput out = discover_with_prior(
        parse_method(a.method), parse_mode(a.prior), data, target,
        discovery_config(a.alpha, a.hsic_alpha, a.lingam_prune, a.cap));

    write_file(a.out, discovery_json(out).dump(2));
    if (out.no_graph) {
        std::printf("no graph requested; wrote %s\n", a.out.c_str());
    } else {
        std::printf("%s prior %s: %zu graph%s", method_name(out.method),
                    mode_name(out.mode), out.dags.size(),
                    out.dags.size() == 1 ? "" : "s");
        if (!out.dags.empty())
            std::printf(", %d edges in the first", out.dags[0].num_edges());
        if (out.extensions_capped) std::printf(" (extension cap hit)");
        std::printf("; wrote %s\n", a.out.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// explain

struct ExplainArgs {
    std::string data, kinds, target, graph_path, method, prior = "0", labels_csv;
    bool no_graph = false;
    int bins = 10;
    std::string bin_scheme = "width";
    int trees = 100, max_depth = 6;
    std::uint64_t model_seed = 0;
    double alpha = 0.05, hsic_alpha = 0.05, lingam_prune = 0.05;
    std::size_t cap = 10000;
    std::string out_prefix;
};

std::vector<int> load_labels_csv(const std::string& path, int expected_rows) {
    Dataset labels = load_csv(path);
    if (labels.num_cols() != 1)
        throw UsageError("--labels-csv expects a single column, got " +
                         std::to_string(labels.num_cols()));
    if (labels.num_rows() != expected_rows)
        throw UsageError("--labels-csv has " + std::to_string(labels.num_rows()) +
                         " rows but the data has " + std::to_string(expected_rows));
    std::vector<int> out;
    out.reserve(labels.num_rows());
    for (double v : labels.columns[0]) {
        if (v != 0.0 && v != 1.0)
            throw UsageError("--labels-csv entries must be 0 or 1");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// The graph must name either every data column (target included, scored at
// its data position) or exactly the explanatory columns (target = -1), in
// data order; anything else risks silently mismapping variables.
int match_graph(const Dag& dag, const Dataset& data, int target) {
    const auto& names = dag.names();
    auto matches = [&](bool with_target) {
        std::size_t want = data.labels.size() - (with_target ? 0 : 1);
        if (names.size() != want) return false;
        std::size_t g = 0;
        for (int c = 0; c < data.num_cols(); ++c) {
            if (!with_target && c == target) continue;
            if (names[g++] != data.labels[c]) return false;
        }
        return true;
    };
    if (matches(true)) return target;
    if (matches(false)) return -1;
    throw UsageError("graph nodes must match the data columns in order, with the "
                     "target either included or left out entirely");
}

void print_report_table(const ScoreReport& report) {
    std::printf("%-16s %9s %9s %9s\n", "variable", "maxNesuf", "Nec", "Suf");
    int best = -1;
    double best_val = -1.0;
    for (std::size_t v = 0; v < report.variables.size(); ++v) {
        const VariableScores& var = report.variables[v];
        if (var.has_max && var.max_nesuf > best_val) {
            best_val = var.max_nesuf;
            best = static_cast<int>(v);
        }
    }
    for (std::size_t v = 0; v < report.variables.size(); ++v) {
        const VariableScores& var = report.variables[v];
        if (!var.has_max) {
            std::printf("%-16s %9s %9s %9s\n", var.name.c_str(), "n/a", "n/a", "n/a");
            continue;
        }
        const PairScores* at_max = nullptr;
        for (const PairScores& p : var.pairs)
            if (p.scores.nesuf == var.max_nesuf) {
                at_max = &p;
                break;
            }
        std::printf("%-16s %9.4f %9.4f %9.4f%s\n", var.name.c_str(), var.max_nesuf,
                    at_max ? at_max->scores.nec : 0.0,
                    at_max ? at_max->scores.suf : 0.0,
                    static_cast<int>(v) == best ? "  <- largest" : "");
    }
    if (!report.skipped.empty())
        std::printf("(%zu code pair%s skipped as undefined; see the report json)\n",
                    report.skipped.size(), report.skipped.size() == 1 ? "" : "s");
}

int cmd_explain(const ExplainArgs& a) {
    int sources = (!a.graph_path.empty() ? 1 : 0) + (!a.method.empty() ? 1 : 0) +
                  (a.no_graph ? 1 : 0);
    if (sources != 1)
        throw UsageError("give exactly one of --graph, --method, and --no-graph");

    Dataset raw = load_csv(a.data);
    if (!a.kinds.empty()) load_kinds(raw, a.kinds);
    int target = target_index(raw, a.target);

    BinScheme scheme;
    if (a.bin_scheme == "width")
        scheme = BinScheme::equal_width;
    else if (a.bin_scheme == "freq")
        scheme = BinScheme::equal_frequency;
    else
        throw UsageError("--bin-scheme must be width or freq");

    DiscretizedDataset features = discretize_dataset(drop_column(raw, target),
                                                     a.bins, scheme);

    std::vector<int> labels;
    std::optional<Forest> forest;
    if (!a.labels_csv.empty()) {
        labels = load_labels_csv(a.labels_csv, raw.num_rows());
    } else {
        std::vector<int> binary = make_binary_target(raw.columns[target]);
        ForestConfig fc;
        fc.trees = a.trees;
        fc.max_depth = a.max_depth;
        fc.seed = a.model_seed;
        forest = fit_forest(features, binary, fc);
        labels = forest->predict(features);
    }
    Scorer scorer(features, labels, forest ? &*forest : nullptr);

    ScoreReport report;
    if (a.no_graph) {
        report = scorer.report_no_graph();
    } else if (!a.graph_path.empty()) {
        Dag dag = Dag::from_json(read_file(a.graph_path));
        report = scorer.report(&dag, match_graph(dag, raw, target));
    } else {
        DiscoveryOutput found = discover_with_prior(
            parse_method(a.method), parse_mode(a.prior), raw, target,
            discovery_config(a.alpha, a.hsic_alpha, a.lingam_prune, a.cap));
        if (found.no_graph) {
            report = scorer.report_no_graph();
        } else {
            if (found.dags.empty()) throw Error("discovery returned no graph");
            if (found.dags.size() > 1)
                std::fprintf(stderr,
                             "note: %zu equivalent extensions; scoring the first\n",
                             found.dags.size());
            report = scorer.report(&found.dags[0], target);
        }
    }

    write_file(a.out_prefix + ".json", report.to_json());
    write_file(a.out_prefix + ".csv", report.to_csv());
    print_report_table(report);
    std::printf("wrote %s.json and %s.csv\n", a.out_prefix.c_str(),
                a.out_prefix.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string config, out, trials_csv;
    int jobs = 0;
};

std::string trials_to_csv(const std::vector<TrialResult>& rows) {
    std::ostringstream os;
    os << "seed,method,mode,mae,spr,error\n";
    os << std::setprecision(10);
    for (const TrialResult& row : rows) {
        os << row.seed << ',' << row.method << ',' << mode_name(row.mode) << ',';
        if (row.ok()) os << row.mae;
        os << ',';
        if (row.ok() && row.spr) os << *row.spr;
        os << ',';
        // errors may hold commas; quote the field
        if (!row.error.empty()) {
            std::string quoted = row.error;
            std::size_t pos = 0;
            while ((pos = quoted.find('"', pos)) != std::string::npos) {
                quoted.replace(pos, 1, "\"\"");
                pos += 2;
            }
            os << '"' << quoted << '"';
        }
        os << '\n';
    }
    return os.str();
}

int cmd_evaluate(const EvaluateArgs& a) {
    ExperimentConfig cfg = ExperimentConfig::from_json(read_file(a.config));
    if (a.jobs > 0) cfg.jobs = a.jobs;

    std::vector<TrialResult> rows = run_trials(cfg);
    MetricsSummary summary = summarize(rows);
    write_file(a.out, summary.to_csv());
    if (!a.trials_csv.empty()) write_file(a.trials_csv, trials_to_csv(rows));
    std::fputs(summary.to_csv().c_str(), stdout);
    std::printf("wrote %s\n", a.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceArgs {
    std::string tables = "2,3,4,5,6,7", out_dir;
    int trials = 20, n = 5000, jobs = 0, trees = 100;
    std::uint64_t seed = 1;
};

// Mean per-variable maxNesuf of the five three-variable benchmarks, scored
// with the generating graph: the same pipeline a single explain run uses,
// repeated over seeds.
std::string benchmark_table(MechanismKind form, const ReproduceArgs& a) {
    std::ostringstream os;
    os << "structure,x_mean,z_mean\n" << std::setprecision(10);
    for (BenchmarkStructure s :
         {BenchmarkStructure::A, BenchmarkStructure::B, BenchmarkStructure::C,
          BenchmarkStructure::D, BenchmarkStructure::E}) {
        ScmSpec spec = make_benchmark(s, form);
        int target = spec.dag.num_nodes() - 1;
        double x_sum = 0.0, z_sum = 0.0;
        for (int t = 0; t < a.trials; ++t) {
            std::uint64_t seed = a.seed + static_cast<std::uint64_t>(t);
            Dataset raw = sample(spec, a.n, seed);
            DiscretizedDataset features =
                discretize_dataset(drop_column(raw, target), 10);
            ForestConfig fc;
            fc.trees = a.trees;
            fc.seed = derive_seed(0, seed);
            Forest forest = fit_forest(features, make_binary_target(raw.columns[target]), fc);
            Scorer scorer(features, forest.predict(features), &forest);
            ScoreReport report = scorer.report(&spec.dag, target);
            x_sum += report.variable(0).max_nesuf;
            z_sum += report.variable(1).max_nesuf;
        }
        os << "ABCDE"[static_cast<int>(s)] << ',' << x_sum / a.trials << ','
           << z_sum / a.trials << '\n';
    }
    return os.str();
}

std::vector<ExperimentCell> grid_cells(MechanismKind form) {
    std::vector<ExperimentCell> cells;
    if (form == MechanismKind::linear) {
        for (PriorMode m : {PriorMode::mode0, PriorMode::modeA, PriorMode::modeB})
            cells.push_back({DiscoveryMethod::lingam, m});
        for (PriorMode m : {PriorMode::mode0, PriorMode::modeA, PriorMode::modeB})
            cells.push_back({DiscoveryMethod::pc, m});
        for (PriorMode m : {PriorMode::mode0, PriorMode::modeA})
            cells.push_back({DiscoveryMethod::notears, m});
    } else {
        for (PriorMode m : {PriorMode::mode0, PriorMode::modeA})
            cells.push_back({DiscoveryMethod::resit, m});
        for (PriorMode m : {PriorMode::mode0, PriorMode::modeA, PriorMode::modeB})
            cells.push_back({DiscoveryMethod::pc, m});
    }
    cells.push_back({DiscoveryMethod::pc, PriorMode::noGraph});
    return cells;
}

std::string grid_table(MechanismKind form, NoiseFamily noise, const ReproduceArgs& a) {
    ExperimentConfig cfg;
    cfg.form = form;
    cfg.noise = noise;
    cfg.sample_size = a.n;
    cfg.trials = a.trials;
    cfg.base_seed = a.seed;
    cfg.jobs = a.jobs;
    cfg.forest.trees = a.trees;
    cfg.cells = grid_cells(form);
    return summarize(run_trials(cfg)).to_csv();
}

int cmd_reproduce(const ReproduceArgs& a) {
    std::vector<int> tables;
    std::stringstream ss(a.tables);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            tables.push_back(std::stoi(item));
        } catch (const std::exception&) {
            tables.push_back(-1);
        }
        if (tables.back() < 2 || tables.back() > 7)
            throw UsageError("--tables entries must be in 2..7, got \"" + item + "\"");
    }
    if (tables.empty()) throw UsageError("--tables is empty");
    std::filesystem::create_directories(a.out_dir);

    for (int table : tables) {
        std::string csv;
        switch (table) {
            case 2: csv = benchmark_table(MechanismKind::linear, a); break;
            case 3: csv = benchmark_table(MechanismKind::quadratic, a); break;
            case 4: csv = grid_table(MechanismKind::linear, NoiseFamily::uniform, a); break;
            case 5: csv = grid_table(MechanismKind::linear, NoiseFamily::gaussian, a); break;
            case 6: csv = grid_table(MechanismKind::quadratic, NoiseFamily::uniform, a); break;
            case 7: csv = grid_table(MechanismKind::quadratic, NoiseFamily::gaussian, a); break;
        }
        std::string path = a.out_dir + "/table" + std::to_string(table) + ".csv";
        write_file(path, csv);
        std::printf("table %d -> %s\n", table, path.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// demo-credit

struct DemoArgs {
    std::string out_dir;
    std::uint64_t seed = 0;
    int n = 5000, trees = 100;
};

// A small credit-risk world: a discrete industry type nudges every other
// feature and the rating; capital feeds sales and the balance-sheet total.
// The industry edges are deliberately weak and the feature -> rating edges
// strong: industry alone then separates the classes only moderately, so the
// fitted classifier has to lean on the continuous features as well, while
// industry keeps the largest total effect because it shifts all of them.
ScmSpec credit_scm() {
    ScmSpec spec;
    spec.dag = Dag({"industry", "capital", "employees", "sales", "liabilities",
                    "rating"});
    auto edge = [&](int from, int to, double coef) {
        spec.dag.add_edge(from, to);
        spec.coefficients[to][from] = coef;
    };
    spec.coefficients.resize(6);
    spec.mechanisms.assign(6, MechanismKind::linear);
    spec.noises.assign(6, NoiseSpec::uniform01());
    spec.noises[0] = NoiseSpec::bernoulli(0.5);
    spec.noises[5] = NoiseSpec::gaussian(0.0, 0.4);

    edge(0, 1, 0.35);  // industry -> capital
    edge(0, 2, 0.3);   // industry -> employees
    edge(0, 3, 0.25);  // industry -> sales
    edge(0, 4, 0.2);   // industry -> liabilities
    edge(0, 5, 0.2);   // industry -> rating
    edge(1, 3, 0.7);   // capital -> sales
    edge(1, 4, 0.8);   // capital -> liabilities
    edge(2, 5, 0.4);   // employees -> rating
    edge(3, 5, 0.7);   // sales -> rating
    edge(4, 5, 0.5);   // liabilities -> rating
    spec.validate();
    return spec;
}

int cmd_demo_credit(const DemoArgs& a) {
    std::filesystem::create_directories(a.out_dir);
    ScmSpec spec = credit_scm();
    int target = 5;

    Dataset data = sample(spec, a.n, a.seed);
    data.kinds[0] = ColumnKind::discrete;
    save_csv(data, a.out_dir + "/data.csv");
    save_kinds(data, a.out_dir + "/kinds.json");
    write_file(a.out_dir + "/scm.json", spec.to_json());

    DiscretizedDataset features = discretize_dataset(
        drop_column(data, target), 10, BinScheme::equal_frequency);
    ForestConfig fc;
    fc.trees = a.trees;
    fc.seed = derive_seed(a.seed, 77);
    Forest forest = fit_forest(features, make_binary_target(data.columns[target]), fc);
    Scorer scorer(features, forest.predict(features), &forest);

    BackgroundKnowledge bk;
    bk.exogenous = {0};
    bk.sinks = {target};
    Dag dag = direct_lingam(data, bk);
    write_file(a.out_dir + "/graph.json", dag.to_json());

    ScoreReport report = scorer.report(&dag, target);
    ScoreReport truth = scorer.report(&spec.dag, target);
    write_file(a.out_dir + "/report.json", report.to_json());
    write_file(a.out_dir + "/report.csv", report.to_csv());

    std::ostringstream summary;
    summary << "variable,max_nesuf,nec,suf,true_max_nesuf\n" << std::setprecision(10);
    for (std::size_t v = 0; v < report.variables.size(); ++v) {
        const VariableScores& var = report.variables[v];
        const PairScores* at_max = nullptr;
        for (const PairScores& p : var.pairs)
            if (var.has_max && p.scores.nesuf == var.max_nesuf) {
                at_max = &p;
                break;
            }
        summary << var.name << ',';
        if (var.has_max) summary << var.max_nesuf;
        summary << ',';
        if (at_max) summary << at_max->scores.nec;
        summary << ',';
        if (at_max) summary << at_max->scores.suf;
        summary << ',';
        if (truth.variables[v].has_max) summary << truth.variables[v].max_nesuf;
        summary << '\n';
    }
    write_file(a.out_dir + "/summary.csv", summary.str());

    bool industry_root = dag.parents(0).empty();
    bool rating_sink = dag.children(target).empty();
    print_report_table(report);
    std::printf("discovered graph: %d edges, industry %s a root, rating %s a sink\n",
                dag.num_edges(), industry_root ? "is" : "IS NOT",
                rating_sink ? "is" : "IS NOT");
    std::printf("wrote data, scm, graph, report, and summary under %s\n",
                a.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
    CLI::App app{"Counterfactual-probability explanation scores with causal "
                 "structure information"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Sample a structural causal model into a CSV");
    simulate->add_option("--structure", sim.structure,
                         "Benchmark structure id: A, B, C, D, or E");
    simulate->add_option("--spec", sim.spec_path, "Custom model spec JSON");
    simulate->add_option("--form", sim.form, "linear or nonlinear")
        ->default_val("linear");
    simulate->add_option("--n", sim.n, "Rows to draw")->default_val(5000);
    simulate->add_option("--seed", sim.seed, "Sampling seed")->default_val(0);
    simulate->add_option("--out", sim.out, "Output CSV path")->required();
    simulate->add_option("--spec-out", sim.spec_out,
                         "Model spec output path (default: <out>_spec.json)");

    DiscoverArgs dis;
    CLI::App* discover = app.add_subcommand(
        "discover", "Fit a causal graph to a dataset");
    discover->add_option("--data", dis.data, "Input CSV")->required();
    discover->add_option("--kinds", dis.kinds, "Column-kind sidecar JSON");
    discover->add_option("--target", dis.target, "Outcome column name")->required();
    discover->add_option("--method", dis.method, "pc, lingam, resit, or notears")
        ->required();
    discover->add_option("--prior", dis.prior,
                         "Prior knowledge mode: 0, a, b, or nograph")
        ->default_val("0");
    discover->add_option("--alpha", dis.alpha, "CI test level")->default_val(0.05);
    discover->add_option("--hsic-alpha", dis.hsic_alpha, "HSIC test level")
        ->default_val(0.05);
    discover->add_option("--lingam-prune", dis.lingam_prune,
                         "DirectLiNGAM edge pruning threshold")
        ->default_val(0.05);
    discover->add_option("--cap", dis.cap, "Extension enumeration cap")
        ->default_val(10000);
    discover->add_option("--out", dis.out, "Output graph JSON")->required();

    ExplainArgs exp;
    CLI::App* explain = app.add_subcommand(
        "explain", "Score variables by necessity and sufficiency");
    explain->add_option("--data", exp.data, "Input CSV")->required();
    explain->add_option("--kinds", exp.kinds, "Column-kind sidecar JSON");
    explain->add_option("--target", exp.target, "Outcome column name")->required();
    explain->add_option("--graph", exp.graph_path, "Score under this graph JSON");
    explain->add_option("--method", exp.method,
                        "Discover the graph first: pc, lingam, resit, notears");
    explain->add_option("--prior", exp.prior, "Prior mode for --method")
        ->default_val("0");
    explain->add_flag("--no-graph", exp.no_graph,
                      "Conditional probabilities only, no adjustment");
    explain->add_option("--labels-csv", exp.labels_csv,
                        "External 0/1 predictions replacing the built-in model");
    explain->add_option("--bins", exp.bins, "Discretization bins")->default_val(10);
    explain->add_option("--bin-scheme", exp.bin_scheme, "width or freq")
        ->default_val("width");
    explain->add_option("--trees", exp.trees, "Forest size")->default_val(100);
    explain->add_option("--max-depth", exp.max_depth, "Tree depth cap")
        ->default_val(6);
    explain->add_option("--model-seed", exp.model_seed, "Forest seed")
        ->default_val(0);
    explain->add_option("--alpha", exp.alpha, "CI test level")->default_val(0.05);
    explain->add_option("--hsic-alpha", exp.hsic_alpha, "HSIC test level")
        ->default_val(0.05);
    explain->add_option("--lingam-prune", exp.lingam_prune,
                        "DirectLiNGAM edge pruning threshold")
        ->default_val(0.05);
    explain->add_option("--cap", exp.cap, "Extension enumeration cap")
        ->default_val(10000);
    explain->add_option("--out-prefix", exp.out_prefix,
                        "Report path prefix (.json and .csv appended)")
        ->required();

    EvaluateArgs eva;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Run a configured benchmark experiment");
    evaluate->add_option("--config", eva.config, "Experiment config JSON")
        ->required();
    evaluate->add_option("--out", eva.out, "Summary CSV path")->required();
    evaluate->add_option("--trials-csv", eva.trials_csv, "Per-trial rows CSV");
    evaluate->add_option("--jobs", eva.jobs,
                         "Worker threads (default: CFX_JOBS or 1)")
        ->default_val(0);

    ReproduceArgs rep;
    CLI::App* reproduce = app.add_subcommand(
        "reproduce", "Regenerate the benchmark tables");
    reproduce->add_option("--tables", rep.tables, "Comma list from 2..7")
        ->default_val("2,3,4,5,6,7");
    reproduce->add_option("--out-dir", rep.out_dir, "Output directory")->required();
    reproduce->add_option("--trials", rep.trials, "Trials per cell")->default_val(20);
    reproduce->add_option("--n", rep.n, "Sample size per trial")->default_val(5000);
    reproduce->add_option("--seed", rep.seed, "Base seed")->default_val(1);
    reproduce->add_option("--jobs", rep.jobs,
                          "Worker threads (default: CFX_JOBS or 1)")
        ->default_val(0);
    reproduce->add_option("--trees", rep.trees, "Forest size")->default_val(100);

    DemoArgs demo;
    CLI::App* demo_credit = app.add_subcommand(
        "demo-credit", "End-to-end synthetic credit-scoring walkthrough");
    demo_credit->add_option("--out-dir", demo.out_dir, "Output directory")
        ->required();
    demo_credit->add_option("--seed", demo.seed, "Sampling seed")->default_val(0);
    demo_credit->add_option("--n", demo.n, "Rows to draw")->default_val(5000);
    demo_credit->add_option("--trees", demo.trees, "Forest size")->default_val(100);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (simulate->parsed()) return cmd_simulate(sim);
    if (discover->parsed()) return cmd_discover(dis);
    if (explain->parsed()) return cmd_explain(exp);
    if (evaluate->parsed()) return cmd_evaluate(eva);
    if (reproduce->parsed()) return cmd_reproduce(rep);
    if (demo_credit->parsed()) return cmd_demo_credit(demo);
    return 2;  // unreachable: require_subcommand
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const cfx::SchemaMismatchError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const cfx::ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const cfx::UnsupportedModeError& e) {
        std::fprintf(stderr, "unsupported combination: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failed: %s\n", e.what());
        return 1;
    }
}
