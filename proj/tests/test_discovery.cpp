#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cfx/discovery.hpp"
#include "cfx/errors.hpp"
#include "cfx/rng.hpp"
#include "cfx/scm.hpp"

using namespace cfx;

namespace {

ScmSpec two_var_chain(MechanismKind form) {
    ScmSpec spec;
    spec.dag = Dag({"X", "Y"});
    spec.dag.add_edge(0, 1);
    spec.mechanisms.assign(2, form);
    spec.coefficients.resize(2);
    spec.coefficients[1][0] = 1.0;
    spec.noises.assign(2, NoiseSpec::uniform01());
    return spec;
}

// Structural hamming distance with reversals counted once.
int shd(const Dag& a, const Dag& b) {
    int p = a.num_nodes();
    int distance = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            bool a_ij = a.has_edge(i, j), a_ji = a.has_edge(j, i);
            bool b_ij = b.has_edge(i, j), b_ji = b.has_edge(j, i);
            bool in_a = a_ij || a_ji, in_b = b_ij || b_ji;
            if (in_a != in_b)
                ++distance;
            else if (in_a && a_ij != b_ij)
                ++distance;  // reversed
        }
    return distance;
}

}  // namespace

// --------------------------------------------------------------------------
// PC

TEST_CASE("fork data yields the fork skeleton with no spurious edge") {
    auto spec = make_benchmark(BenchmarkStructure::E, MechanismKind::linear);
    auto data = sample(spec, 5000, 1);
    auto result = pc(data);
    const int x = 0, z = 1, y = 2;
    CHECK(result.pdag.adjacent(x, z));
    CHECK(result.pdag.adjacent(z, y));
    CHECK_FALSE(result.pdag.adjacent(x, y));
    // Z separates X and Y, so no collider is oriented at Z.
    CHECK(result.pdag.has_undirected(x, z));
    CHECK(result.pdag.has_undirected(z, y));
    CHECK(result.ci_tests > 0);
    CHECK(result.sepsets.has(x, y));
    CHECK(result.sepsets.contains(x, y, z));
}

TEST_CASE("collider direction is recovered on most seeds") {
    int hits = 0;
    const int seeds = 50;
    for (int seed = 1; seed <= seeds; ++seed) {
        auto spec = make_benchmark(BenchmarkStructure::A, MechanismKind::linear);
        auto data = sample(spec, 5000, static_cast<std::uint64_t>(seed));
        auto result = pc(data);
        const int x = 0, z = 1, y = 2;
        if (result.pdag.has_directed(x, y) && result.pdag.has_directed(z, y) &&
            !result.pdag.adjacent(x, z))
            ++hits;
    }
    CHECK(hits >= 45);
}

TEST_CASE("declared sink pulls its edges inward") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 5000, 4);
    BackgroundKnowledge bk;
    bk.sinks.push_back(2);
    auto result = pc(data, {}, bk);
    CHECK(result.pdag.children(2).empty());
    CHECK(result.pdag.undirected_neighbors(2).empty());
    for (int parent : result.pdag.parents(2)) CHECK(parent != 2);
}

TEST_CASE("pc skeleton does not depend on column order") {
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    auto data = sample(spec, 2000, 3);
    Dataset shuffled;
    for (int c : {1, 2, 0}) {
        shuffled.labels.push_back(data.labels[c]);
        shuffled.kinds.push_back(data.kinds[c]);
        shuffled.columns.push_back(data.columns[c]);
    }
    auto base = pc(data);
    auto perm = pc(shuffled);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            int pa = perm.pdag.index_of(data.labels[a]);
            int pb = perm.pdag.index_of(data.labels[b]);
            CHECK(base.pdag.adjacent(a, b) == perm.pdag.adjacent(pa, pb));
        }
}

TEST_CASE("pc validates column and row counts") {
    Dataset one;
    one.labels = {"x"};
    one.kinds = {ColumnKind::continuous};
    one.columns = {{1.0, 2.0, 3.0, 2.5, 1.5, 0.5, 2.2, 0.9}};
    CHECK_THROWS_AS(pc(one), SchemaMismatchError);

    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto tiny = sample(spec, 6, 1);  // need more than columns + 3 rows
    CHECK_THROWS_AS(pc(tiny), InsufficientSamplesError);
}

// --------------------------------------------------------------------------
// DirectLiNGAM

TEST_CASE("two-variable direction is found on nearly every seed") {
    int hits = 0;
    const int seeds = 100;
    auto spec = two_var_chain(MechanismKind::linear);
    for (int seed = 1; seed <= seeds; ++seed) {
        auto data = sample(spec, 5000, static_cast<std::uint64_t>(seed));
        auto dag = direct_lingam(data);
        if (dag.has_edge(0, 1) && !dag.has_edge(1, 0)) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("declared sink never gains outgoing edges") {
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    for (int seed = 1; seed <= 5; ++seed) {
        auto data = sample(spec, 2000, static_cast<std::uint64_t>(seed));
        BackgroundKnowledge bk;
        bk.sinks.push_back(2);
        auto dag = direct_lingam(data, bk);
        CHECK(dag.children(2).empty());
    }
}

TEST_CASE("eight-variable structure is close to truth on most seeds") {
    auto spec = make_eight_var(MechanismKind::linear, NoiseFamily::uniform);
    int close = 0;
    const int seeds = 10;
    for (int seed = 1; seed <= seeds; ++seed) {
        auto data = sample(spec, 5000, static_cast<std::uint64_t>(seed));
        auto dag = direct_lingam(data);
        if (shd(dag, spec.dag) <= 2) ++close;
    }
    CHECK(close >= 8);
}

TEST_CASE("a fully pinned order reduces to regression with pruning") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 5000, 7);
    BackgroundKnowledge bk;
    bk.exogenous.push_back(0);
    bk.sinks.push_back(2);  // with 3 nodes this pins the order to X, Z, Y
    auto dag = direct_lingam(data, bk);

    Dag expected(data.labels);
    auto x = standardize(data.columns[0]);
    auto z = standardize(data.columns[1]);
    auto y = standardize(data.columns[2]);
    auto fit_z = ols_fit(z, {x});
    if (std::abs(fit_z.coefs[0]) >= 0.05) expected.add_edge(0, 1);
    auto fit_y = ols_fit(y, {x, z});
    if (std::abs(fit_y.coefs[0]) >= 0.05) expected.add_edge(0, 2);
    if (std::abs(fit_y.coefs[1]) >= 0.05) expected.add_edge(1, 2);
    CHECK(dag == expected);
    CHECK(dag.has_edge(0, 1));
    CHECK(dag.has_edge(1, 2));
    CHECK_FALSE(dag.has_edge(0, 2));  // partial coefficient of X vanishes
}

TEST_CASE("lingam rejects unusable input") {
    Dataset one;
    one.labels = {"x"};
    one.kinds = {ColumnKind::continuous};
    one.columns = {{1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(direct_lingam(one), SchemaMismatchError);

    Dataset dup;
    dup.labels = {"a", "b"};
    dup.kinds = {ColumnKind::continuous, ColumnKind::continuous};
    Rng rng(5);
    std::vector<double> col(100);
    for (double& v : col) v = rng.uniform01();
    dup.columns = {col, col};
    CHECK_THROWS_AS(direct_lingam(dup), RankDeficientError);
}

// --------------------------------------------------------------------------
// RESIT

TEST_CASE("quadratic two-variable edge is recovered on most seeds") {
    int hits = 0;
    const int seeds = 20;
    auto spec = two_var_chain(MechanismKind::quadratic);
    for (int seed = 1; seed <= seeds; ++seed) {
        auto data = sample(spec, 2000, static_cast<std::uint64_t>(seed));
        auto dag = resit(data);
        if (dag.has_edge(0, 1) && !dag.has_edge(1, 0)) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("single column gives an empty graph") {
    Dataset one;
    one.labels = {"x"};
    one.kinds = {ColumnKind::continuous};
    one.columns = {{1.0, 2.0, 3.0, 0.5}};
    auto dag = resit(one);
    CHECK(dag.num_nodes() == 1);
    CHECK(dag.num_edges() == 0);
}

TEST_CASE("declared sink is peeled first and stays a sink") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::quadratic);
    auto data = sample(spec, 1500, 2);
    BackgroundKnowledge bk;
    bk.sinks.push_back(2);
    int tests = 0;
    auto dag = resit(data, bk, {}, &tests);
    CHECK(dag.children(2).empty());
    CHECK(tests > 0);
}

// --------------------------------------------------------------------------
// NOTEARS

TEST_CASE("acyclicity function matches its closed forms") {
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
    CHECK(std::abs(notears_h(zero)) < 1e-9);

    Eigen::MatrixXd single = Eigen::MatrixXd::Zero(3, 3);
    single(0, 1) = 0.7;
    CHECK(std::abs(notears_h(single)) < 1e-9);

    Eigen::MatrixXd cycle = Eigen::MatrixXd::Zero(2, 2);
    cycle(0, 1) = 0.8;
    cycle(1, 0) = 0.5;
    // The squared-weight matrix has eigenvalues +-ab, so the trace of its
    // exponential is 2 cosh(ab).
    double expected = 2.0 * std::cosh(0.8 * 0.5) - 2.0;
    CHECK(std::abs(notears_h(cycle) - expected) < 1e-9);
    CHECK(notears_h(cycle) > 0.0);
}

TEST_CASE("acyclicity gradient agrees with finite differences") {
    Rng rng(11);
    Eigen::MatrixXd w(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            w(i, j) = i == j ? 0.0 : (rng.uniform01() - 0.5) * 1.2;
    auto grad = notears_h_gradient(w);
    const double eps = 1e-6;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXd up = w, down = w;
            up(i, j) += eps;
            down(i, j) -= eps;
            double numeric = (notears_h(up) - notears_h(down)) / (2.0 * eps);
            CHECK(grad(i, j) == doctest::Approx(numeric).epsilon(1e-5));
        }
}

TEST_CASE("optimization converges to an acyclic graph on benchmark data") {
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    for (int seed = 1; seed <= 5; ++seed) {
        auto data = sample(spec, 800, static_cast<std::uint64_t>(seed));
        auto result = notears_linear(data);
        CHECK(result.converged);
        CHECK(result.final_h <= 1e-8);
        CHECK(result.dag.is_acyclic());
        CHECK(result.converged == (result.final_h <= 1e-8));
    }
}

TEST_CASE("forbidden entries never carry weight") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 800, 9);
    BackgroundKnowledge bk;
    bk.forbidden.push_back({0, 1});
    auto result = notears_linear(data, {}, bk);
    CHECK(result.weights(0, 1) == 0.0);
    CHECK_FALSE(result.dag.has_edge(0, 1));
}

TEST_CASE("notears handles a single column and rejects bad config") {
    Dataset one;
    one.labels = {"x"};
    one.kinds = {ColumnKind::continuous};
    one.columns = {{1.0, 2.0, 3.0, 0.5, 1.7}};
    auto result = notears_linear(one);
    CHECK(result.converged);
    CHECK(result.dag.num_edges() == 0);

    NotearsConfig bad;
    bad.lambda = -1.0;
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 50, 1);
    CHECK_THROWS_AS(notears_linear(data, bad), Error);
}

// --------------------------------------------------------------------------
// discover_with_prior

TEST_CASE("explanatory-parent mode attaches every variable to the target") {
    auto spec = make_eight_var(MechanismKind::linear, NoiseFamily::uniform);
    auto data = sample(spec, 2000, 5);
    auto out = discover_with_prior(DiscoveryMethod::lingam, PriorMode::modeA, data, 7);
    REQUIRE(out.dags.size() == 1);
    for (int c = 0; c < 7; ++c) CHECK(out.dags[0].has_edge(c, 7));
    CHECK(out.dags[0].children(7).empty());
    CHECK_FALSE(out.no_graph);
}

TEST_CASE("sink mode keeps the target out-degree zero in every extension") {
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    auto data = sample(spec, 3000, 6);
    auto out = discover_with_prior(DiscoveryMethod::pc, PriorMode::modeB, data, 2);
    REQUIRE_FALSE(out.dags.empty());
    CHECK(out.pdag.has_value());
    for (const auto& dag : out.dags) CHECK(dag.children(2).empty());
}

TEST_CASE("sink mode is refused by methods that cannot honor it") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 200, 1);
    CHECK_THROWS_AS(discover_with_prior(DiscoveryMethod::resit, PriorMode::modeB, data, 2),
                    UnsupportedModeError);
    CHECK_THROWS_AS(
        discover_with_prior(DiscoveryMethod::notears, PriorMode::modeB, data, 2),
        UnsupportedModeError);
}

TEST_CASE("no-graph mode carries no structure") {
    auto spec = make_benchmark(BenchmarkStructure::A, MechanismKind::linear);
    auto data = sample(spec, 200, 1);
    auto out = discover_with_prior(DiscoveryMethod::pc, PriorMode::noGraph, data, 2);
    CHECK(out.no_graph);
    CHECK(out.dags.empty());
    CHECK_FALSE(out.pdag.has_value());
}

TEST_CASE("pc extensions enumerate every orientation of the fork chain") {
    auto spec = make_benchmark(BenchmarkStructure::E, MechanismKind::linear);
    auto data = sample(spec, 5000, 1);
    auto out = discover_with_prior(DiscoveryMethod::pc, PriorMode::mode0, data, 2);
    // Undirected X - Z - Y admits the three collider-free orientations.
    CHECK(out.dags.size() == 3);
    for (const auto& dag : out.dags) dag.topological_order();
    CHECK_FALSE(out.extensions_capped);
}

TEST_CASE("explanatory mode with pc orients the attached edges only inward") {
    auto spec = make_benchmark(BenchmarkStructure::E, MechanismKind::linear);
    auto data = sample(spec, 5000, 1);
    auto out = discover_with_prior(DiscoveryMethod::pc, PriorMode::modeA, data, 2);
    CHECK(out.dags.size() == 2);  // X - Z free, both target edges fixed
    for (const auto& dag : out.dags) {
        CHECK(dag.has_edge(0, 2));
        CHECK(dag.has_edge(1, 2));
    }
}

TEST_CASE("target index is validated") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 100, 1);
    CHECK_THROWS_AS(discover_with_prior(DiscoveryMethod::pc, PriorMode::mode0, data, 3),
                    SchemaMismatchError);
    CHECK_THROWS_AS(discover_with_prior(DiscoveryMethod::pc, PriorMode::mode0, data, -1),
                    SchemaMismatchError);
}
