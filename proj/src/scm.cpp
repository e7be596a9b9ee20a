#include "cfx/scm.hpp"

#include "cfx/errors.hpp"
#include "cfx/rng.hpp"
#include "json.hpp"

namespace cfx {

NoiseSpec NoiseSpec::gaussian(double mean, double sd) {
    if (!(sd > 0.0)) throw Error("NoiseSpec: gaussian sd must be positive");
    NoiseSpec n;
    n.kind = Kind::gaussian;
    n.mean = mean;
    n.sd = sd;
    return n;
}

NoiseSpec NoiseSpec::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("NoiseSpec: bernoulli p outside [0,1]");
    NoiseSpec n;
    n.kind = Kind::bernoulli;
    n.p = p;
    return n;
}

void ScmSpec::validate() const {
    std::size_t n = static_cast<std::size_t>(dag.num_nodes());
    if (mechanisms.size() != n || coefficients.size() != n || noises.size() != n)
        throw Error("ScmSpec: mechanisms, coefficients, and noises must cover every node");
    for (std::size_t v = 0; v < n; ++v) {
        const auto& parents = dag.parents(static_cast<int>(v));
        if (coefficients[v].size() != parents.size())
            throw Error("ScmSpec: node " + dag.name(static_cast<int>(v)) +
                        " has coefficients that do not match its parents");
        for (const auto& [p, coef] : coefficients[v]) {
            (void)coef;
            if (!parents.count(p))
                throw Error("ScmSpec: coefficient for a non-parent of " +
                            dag.name(static_cast<int>(v)));
        }
        if (noises[v].kind == NoiseSpec::Kind::gaussian && !(noises[v].sd > 0.0))
            throw Error("ScmSpec: gaussian sd must be positive");
        if (noises[v].kind == NoiseSpec::Kind::bernoulli &&
            !(noises[v].p >= 0.0 && noises[v].p <= 1.0))
            throw Error("ScmSpec: bernoulli p outside [0,1]");
    }
    dag.topological_order();  // throws CyclicGraphError on a cycle
}

namespace {

const char* mechanism_name(MechanismKind m) {
    return m == MechanismKind::linear ? "linear" : "quadratic";
}

MechanismKind mechanism_from(const std::string& s) {
    if (s == "linear") return MechanismKind::linear;
    if (s == "quadratic") return MechanismKind::quadratic;
    throw SchemaMismatchError("ScmSpec json: unknown mechanism '" + s + "'");
}

nlohmann::json noise_to_json(const NoiseSpec& n) {
    switch (n.kind) {
        case NoiseSpec::Kind::uniform01:
            return {{"kind", "uniform01"}};
        case NoiseSpec::Kind::gaussian:
            return {{"kind", "gaussian"}, {"mean", n.mean}, {"sd", n.sd}};
        case NoiseSpec::Kind::bernoulli:
            return {{"kind", "bernoulli"}, {"p", n.p}};
    }
    throw Error("unreachable");
}

NoiseSpec noise_from_json(const nlohmann::json& j) {
    std::string kind = j.value("kind", "");
    if (kind == "uniform01") return NoiseSpec::uniform01();
    if (kind == "gaussian") return NoiseSpec::gaussian(j.value("mean", 0.0), j.value("sd", 1.0));
    if (kind == "bernoulli") return NoiseSpec::bernoulli(j.value("p", 0.5));
    throw SchemaMismatchError("ScmSpec json: unknown noise kind '" + kind + "'");
}

}  // namespace

std::string ScmSpec::to_json() const {
    validate();
    nlohmann::json j;
    j["nodes"] = dag.names();
    auto edges = nlohmann::json::array();
    for (int v = 0; v < dag.num_nodes(); ++v)
        for (const auto& [p, coef] : coefficients[v])
            edges.push_back({{"from", p}, {"to", v}, {"coef", coef}});
    j["edges"] = edges;
    auto mechs = nlohmann::json::array();
    for (auto m : mechanisms) mechs.push_back(mechanism_name(m));
    j["mechanisms"] = mechs;
    auto noise_arr = nlohmann::json::array();
    for (const auto& n : noises) noise_arr.push_back(noise_to_json(n));
    j["noises"] = noise_arr;
    return j.dump(2);
}

ScmSpec ScmSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("ScmSpec json: ") + e.what());
    }
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw SchemaMismatchError("ScmSpec json: missing nodes");
    ScmSpec spec;
    spec.dag = Dag(j["nodes"].get<std::vector<std::string>>());
    std::size_t n = static_cast<std::size_t>(spec.dag.num_nodes());
    spec.mechanisms.assign(n, MechanismKind::linear);
    spec.coefficients.resize(n);
    spec.noises.assign(n, NoiseSpec::uniform01());

    if (j.contains("mechanisms")) {
        auto mechs = j["mechanisms"];
        if (mechs.size() != n)
            throw SchemaMismatchError("ScmSpec json: mechanisms length mismatch");
        for (std::size_t v = 0; v < n; ++v)
            spec.mechanisms[v] = mechanism_from(mechs[v].get<std::string>());
    }
    if (j.contains("noises")) {
        auto noise_arr = j["noises"];
        if (noise_arr.size() != n)
            throw SchemaMismatchError("ScmSpec json: noises length mismatch");
        for (std::size_t v = 0; v < n; ++v) spec.noises[v] = noise_from_json(noise_arr[v]);
    }
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
        int from = e.value("from", -1), to = e.value("to", -1);
        if (from < 0 || to < 0 || from >= spec.dag.num_nodes() || to >= spec.dag.num_nodes())
            throw SchemaMismatchError("ScmSpec json: edge endpoint out of range");
        if (!e.contains("coef")) throw SchemaMismatchError("ScmSpec json: edge missing coef");
        spec.dag.add_edge(from, to);
        spec.coefficients[to][from] = e["coef"].get<double>();
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

double draw_noise(const NoiseSpec& n, Rng& rng) {
    switch (n.kind) {
        case NoiseSpec::Kind::uniform01:
            return rng.uniform01();
        case NoiseSpec::Kind::gaussian:
            return n.mean + n.sd * rng.normal();
        case NoiseSpec::Kind::bernoulli:
            return rng.bernoulli(n.p) ? 1.0 : 0.0;
    }
    throw Error("unreachable");
}

}  // namespace

Dataset sample_do(const ScmSpec& spec, const DoAssignment& assignment, int n,
                  std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw Error("sample: need at least 1 row");
    for (const auto& [v, value] : assignment) {
        (void)value;
        if (v < 0 || v >= spec.dag.num_nodes())
            throw Error("sample_do: intervened node index out of range");
    }

    int p = spec.dag.num_nodes();
    Dataset data;
    data.labels = spec.dag.names();
    data.kinds.assign(p, ColumnKind::continuous);
    data.columns.assign(p, std::vector<double>(n));

    for (int v : spec.dag.topological_order()) {
        auto& col = data.columns[v];
        auto pinned = assignment.find(v);
        if (pinned != assignment.end()) {
            std::fill(col.begin(), col.end(), pinned->second);
            continue;
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v)));
        const auto& coefs = spec.coefficients[v];
        bool quadratic = spec.mechanisms[v] == MechanismKind::quadratic;
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (const auto& [parent, coef] : coefs) {
                double pv = data.columns[parent][r];
                acc += coef * (quadratic ? pv * pv : pv);
            }
            col[r] = acc + draw_noise(spec.noises[v], rng);
        }
        if (coefs.empty() && spec.noises[v].kind == NoiseSpec::Kind::bernoulli)
            data.kinds[v] = ColumnKind::discrete;
    }
    return data;
}

Dataset sample(const ScmSpec& spec, int n, std::uint64_t seed) {
    return sample_do(spec, {}, n, seed);
}

// ---------------------------------------------------------------------------
// Benchmarks

ScmSpec make_benchmark(BenchmarkStructure structure, MechanismKind form) {
    ScmSpec spec;
    spec.dag = Dag({"X", "Z", "Y"});
    spec.mechanisms.assign(3, form);
    spec.coefficients.resize(3);
    spec.noises.assign(3, NoiseSpec::uniform01());
    const int x = 0, z = 1, y = 2;

    auto edge = [&](int from, int to, double coef) {
        spec.dag.add_edge(from, to);
        spec.coefficients[to][from] = coef;
    };
    switch (structure) {
        case BenchmarkStructure::A:
            edge(x, y, 1.0);
            edge(z, y, 1.5);
            break;
        case BenchmarkStructure::B:
            edge(x, z, 1.0);
            edge(z, y, 1.0);
            break;
        case BenchmarkStructure::C:
            edge(x, z, 1.0);
            edge(x, y, 1.0);
            edge(z, y, 1.0);
            break;
        case BenchmarkStructure::D:
            edge(z, y, 1.0);
            break;
        case BenchmarkStructure::E:
            edge(z, x, 1.0);
            edge(z, y, 1.0);
            break;
    }
    return spec;
}

ScmSpec make_eight_var(MechanismKind form, NoiseFamily noise, std::uint64_t) {
    ScmSpec spec;
    spec.dag = Dag({"X1", "X2", "X3", "X4", "X5", "X6", "X7", "Y"});
    spec.mechanisms.assign(8, form);
    spec.coefficients.resize(8);
    NoiseSpec n = noise == NoiseFamily::uniform ? NoiseSpec::uniform01()
                                                : NoiseSpec::gaussian(0.0, 1.0);
    spec.noises.assign(8, n);

    auto edge = [&](int from, int to) {
        spec.dag.add_edge(from, to);
        spec.coefficients[to][from] = 1.0;
    };
    const int x1 = 0, x2 = 1, x3 = 2, x4 = 3, x5 = 4, x6 = 5, x7 = 6, y = 7;
    edge(x1, x2);
    edge(x2, x3);
    edge(x3, x4);
    edge(x3, x5);
    edge(x3, x6);
    edge(x3, y);
    edge(x4, y);
    edge(x5, y);
    edge(x6, x7);
    edge(x1, x7);
    return spec;
}

}  // namespace cfx
