#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cfx/errors.hpp"
#include "cfx/scm.hpp"

using namespace cfx;

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("exogenous uniform column has mean near one half") {
    auto spec = make_benchmark(BenchmarkStructure::D, MechanismKind::linear);
    auto data = sample(spec, 100000, 7);
    // X is isolated in structure D, so its column is a pure uniform01 draw.
    CHECK(mean_of(data.column(0)) > 0.49);
    CHECK(mean_of(data.column(0)) < 0.51);
}

TEST_CASE("unit-coefficient chain adds one twelfth of variance per link") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto data = sample(spec, 100000, 11);
    double vx = var_of(data.column(0));
    double vz = var_of(data.column(1));
    // Z = X + u with independent uniform01 u, so var(Z) = var(X) + 1/12.
    double expected = vx + 1.0 / 12.0;
    CHECK(std::abs(vz - expected) < 0.05 * expected);
}

TEST_CASE("same seed reproduces every column bit for bit") {
    auto spec = make_eight_var(MechanismKind::linear, NoiseFamily::gaussian);
    auto a = sample(spec, 500, 42);
    auto b = sample(spec, 500, 42);
    REQUIRE(a.num_cols() == b.num_cols());
    for (int c = 0; c < a.num_cols(); ++c) CHECK(a.columns[c] == b.columns[c]);

    auto c2 = sample(spec, 500, 43);
    bool any_diff = false;
    for (int c = 0; c < a.num_cols(); ++c)
        if (a.columns[c] != c2.columns[c]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("sample equals sample_do with an empty assignment") {
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::quadratic);
    auto plain = sample(spec, 300, 5);
    auto empty = sample_do(spec, {}, 300, 5);
    for (int c = 0; c < plain.num_cols(); ++c) CHECK(plain.columns[c] == empty.columns[c]);
}

TEST_CASE("intervened node is pinned to its assigned constant") {
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    auto data = sample_do(spec, {{0, 0.3}}, 200, 9);
    for (double v : data.column(0)) CHECK(v == 0.3);
    // Downstream nodes must see the constant: Z = 0.3 + u with u in [0, 1).
    for (double v : data.column(1)) {
        CHECK(v >= 0.3);
        CHECK(v < 1.3);
    }
}

TEST_CASE("intervention on a non-ancestor leaves a column bit-identical") {
    // Fork Z -> X, Z -> Y: X is not an ancestor of Y, so do(X = c) must not
    // disturb Y's noise stream or its value.
    auto spec = make_benchmark(BenchmarkStructure::E, MechanismKind::linear);
    auto obs = sample(spec, 1000, 21);
    for (double c : {0.0, 0.25, 2.0}) {
        auto intervened = sample_do(spec, {{0, c}}, 1000, 21);
        CHECK(intervened.columns[2] == obs.columns[2]);
        CHECK(intervened.columns[1] == obs.columns[1]);
    }
}

TEST_CASE("root intervention shifts children while preserving their noise draws") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto obs = sample(spec, 400, 33);
    auto intervened = sample_do(spec, {{0, 0.9}}, 400, 33);
    for (int r = 0; r < 400; ++r) {
        double noise_obs = obs.columns[1][r] - obs.columns[0][r];
        double noise_do = intervened.columns[1][r] - 0.9;
        CHECK(noise_do == doctest::Approx(noise_obs).epsilon(1e-12));
    }
}

TEST_CASE("intervening elsewhere never shifts another node's noise sequence") {
    // Confounder X -> Z, X -> Y, Z -> Y. Pinning Z removes Z's noise draw
    // entirely, yet X and Y keep exactly the noise values they had before.
    auto spec = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    auto obs = sample(spec, 600, 17);
    auto intervened = sample_do(spec, {{1, 0.7}}, 600, 17);
    CHECK(intervened.columns[0] == obs.columns[0]);
    for (int r = 0; r < 600; ++r) {
        double noise_obs = obs.columns[2][r] - obs.columns[0][r] - obs.columns[1][r];
        double noise_do = intervened.columns[2][r] - intervened.columns[0][r] - 0.7;
        CHECK(noise_do == doctest::Approx(noise_obs).epsilon(1e-12));
    }
}

TEST_CASE("quadratic and linear mechanisms share the same noise streams") {
    auto lin = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    auto quad = make_benchmark(BenchmarkStructure::B, MechanismKind::quadratic);
    auto dl = sample(lin, 250, 77);
    auto dq = sample(quad, 250, 77);
    CHECK(dl.columns[0] == dq.columns[0]);
    for (int r = 0; r < 250; ++r) {
        double noise_lin = dl.columns[1][r] - dl.columns[0][r];
        double noise_quad = dq.columns[1][r] - dq.columns[0][r] * dq.columns[0][r];
        CHECK(noise_quad == doctest::Approx(noise_lin).epsilon(1e-12));
    }
}

TEST_CASE("benchmark structures wire the documented edges and coefficients") {
    auto a = make_benchmark(BenchmarkStructure::A, MechanismKind::linear);
    CHECK(a.dag.has_edge(0, 2));
    CHECK(a.dag.has_edge(1, 2));
    CHECK_FALSE(a.dag.has_edge(0, 1));
    CHECK(a.coefficients[2].at(0) == 1.0);
    CHECK(a.coefficients[2].at(1) == 1.5);

    auto b = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    CHECK(b.dag.has_edge(0, 1));
    CHECK(b.dag.has_edge(1, 2));
    CHECK_FALSE(b.dag.has_edge(0, 2));

    auto c = make_benchmark(BenchmarkStructure::C, MechanismKind::linear);
    CHECK(c.dag.has_edge(0, 1));
    CHECK(c.dag.has_edge(0, 2));
    CHECK(c.dag.has_edge(1, 2));

    auto d = make_benchmark(BenchmarkStructure::D, MechanismKind::linear);
    CHECK(d.dag.parents(0).empty());
    CHECK(d.dag.children(0).empty());
    CHECK(d.dag.has_edge(1, 2));

    auto e = make_benchmark(BenchmarkStructure::E, MechanismKind::quadratic);
    CHECK(e.dag.has_edge(1, 0));
    CHECK(e.dag.has_edge(1, 2));
    CHECK_FALSE(e.dag.has_edge(0, 2));
    for (auto m : e.mechanisms) CHECK(m == MechanismKind::quadratic);
    for (const auto& n : e.noises) CHECK(n.kind == NoiseSpec::Kind::uniform01);
}

TEST_CASE("eight-variable benchmark has the fixed topology with a sink target") {
    auto spec = make_eight_var(MechanismKind::linear, NoiseFamily::uniform);
    REQUIRE(spec.dag.num_nodes() == 8);
    const int y = 7;
    CHECK(spec.dag.children(y).empty());
    CHECK(spec.dag.parents(y) == std::set<int>{2, 3, 4});

    int edge_count = 0;
    for (int v = 0; v < 8; ++v) edge_count += static_cast<int>(spec.dag.parents(v).size());
    CHECK(edge_count == 10);
    for (int v = 0; v < 8; ++v)
        for (int p : spec.dag.parents(v)) CHECK(spec.coefficients[v].at(p) == 1.0);

    // X6 and X7 hang off the target's parents without reaching Y themselves;
    // X7 collects the X6 chain and the X1 shortcut in a collider.
    CHECK(spec.dag.parents(5) == std::set<int>{2});
    CHECK(spec.dag.parents(6) == std::set<int>{0, 5});
    CHECK(spec.dag.children(5) == std::set<int>{6});
    CHECK(spec.dag.children(6).empty());

    for (const auto& n : spec.noises) CHECK(n.kind == NoiseSpec::Kind::uniform01);
    auto gauss = make_eight_var(MechanismKind::linear, NoiseFamily::gaussian);
    for (const auto& n : gauss.noises) {
        CHECK(n.kind == NoiseSpec::Kind::gaussian);
        CHECK(n.mean == 0.0);
        CHECK(n.sd == 1.0);
    }

    CHECK(make_eight_var(MechanismKind::linear, NoiseFamily::uniform).to_json() ==
          spec.to_json());
}

TEST_CASE("shipped eight-variable config matches the built-in spec") {
    std::ifstream in(std::string(CFX_SOURCE_DIR) + "/configs/eight_var_v1.json");
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    auto from_file = ScmSpec::from_json(buf.str());
    auto builtin = make_eight_var(MechanismKind::linear, NoiseFamily::uniform);
    CHECK(from_file.dag == builtin.dag);
    CHECK(from_file.coefficients == builtin.coefficients);
    CHECK(from_file.to_json() == builtin.to_json());
}

TEST_CASE("spec json round trip preserves every field") {
    auto spec = make_benchmark(BenchmarkStructure::A, MechanismKind::quadratic);
    spec.noises[0] = NoiseSpec::gaussian(1.0, 2.5);
    spec.noises[1] = NoiseSpec::bernoulli(0.25);
    auto text = spec.to_json();
    auto back = ScmSpec::from_json(text);
    CHECK(back.to_json() == text);
    CHECK(back.dag == spec.dag);
    CHECK(back.mechanisms == spec.mechanisms);
    CHECK(back.noises[0].kind == NoiseSpec::Kind::gaussian);
    CHECK(back.noises[0].mean == 1.0);
    CHECK(back.noises[0].sd == 2.5);
    CHECK(back.noises[1].p == 0.25);
}

TEST_CASE("json defaults fill mechanisms and noises when omitted") {
    auto spec = ScmSpec::from_json(R"({
        "nodes": ["a", "b"],
        "edges": [{"from": 0, "to": 1, "coef": 2.0}]
    })");
    CHECK(spec.mechanisms == std::vector<MechanismKind>(2, MechanismKind::linear));
    CHECK(spec.noises[0].kind == NoiseSpec::Kind::uniform01);
    CHECK(spec.coefficients[1].at(0) == 2.0);
}

TEST_CASE("malformed spec json is rejected with a schema error") {
    CHECK_THROWS_AS(ScmSpec::from_json("not json"), SchemaMismatchError);
    CHECK_THROWS_AS(ScmSpec::from_json(R"({"edges": []})"), SchemaMismatchError);
    CHECK_THROWS_AS(ScmSpec::from_json(R"({
        "nodes": ["a"], "edges": [{"from": 0, "to": 3, "coef": 1.0}]
    })"),
                    SchemaMismatchError);
    CHECK_THROWS_AS(ScmSpec::from_json(R"({
        "nodes": ["a", "b"], "edges": [{"from": 0, "to": 1}]
    })"),
                    SchemaMismatchError);
    CHECK_THROWS_AS(ScmSpec::from_json(R"({
        "nodes": ["a", "b"], "mechanisms": ["linear"]
    })"),
                    SchemaMismatchError);
    CHECK_THROWS_AS(ScmSpec::from_json(R"({
        "nodes": ["a"], "mechanisms": ["cubic"]
    })"),
                    SchemaMismatchError);
}

TEST_CASE("validate rejects inconsistent specs") {
    auto spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    spec.coefficients[2][0] = 0.5;  // X is not a parent of Y in the chain
    CHECK_THROWS_AS(spec.validate(), Error);

    auto short_spec = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    short_spec.noises.pop_back();
    CHECK_THROWS_AS(short_spec.validate(), Error);

    auto bad_sd = make_benchmark(BenchmarkStructure::B, MechanismKind::linear);
    bad_sd.noises[0].kind = NoiseSpec::Kind::gaussian;
    bad_sd.noises[0].sd = 0.0;
    CHECK_THROWS_AS(bad_sd.validate(), Error);

    ScmSpec cyclic;
    cyclic.dag = Dag({"a", "b"});
    cyclic.dag.add_edge(0, 1);
    cyclic.dag.add_edge(1, 0);
    cyclic.mechanisms.assign(2, MechanismKind::linear);
    cyclic.coefficients.resize(2);
    cyclic.coefficients[0][1] = 1.0;
    cyclic.coefficients[1][0] = 1.0;
    cyclic.noises.assign(2, NoiseSpec::uniform01());
    CHECK_THROWS_AS(cyclic.validate(), CyclicGraphError);
}

TEST_CASE("noise factories reject invalid parameters") {
    CHECK_THROWS_AS(NoiseSpec::gaussian(0.0, -1.0), Error);
    CHECK_THROWS_AS(NoiseSpec::gaussian(0.0, 0.0), Error);
    CHECK_THROWS_AS(NoiseSpec::bernoulli(1.5), Error);
    CHECK_THROWS_AS(NoiseSpec::bernoulli(-0.1), Error);
    CHECK(NoiseSpec::bernoulli(0.0).p == 0.0);
    CHECK(NoiseSpec::bernoulli(1.0).p == 1.0);
}

TEST_CASE("parentless bernoulli nodes are marked discrete and binary") {
    ScmSpec spec;
    spec.dag = Dag({"flag", "out"});
    spec.dag.add_edge(0, 1);
    spec.mechanisms.assign(2, MechanismKind::linear);
    spec.coefficients.resize(2);
    spec.coefficients[1][0] = 1.0;
    spec.noises = {NoiseSpec::bernoulli(0.3), NoiseSpec::uniform01()};
    auto data = sample(spec, 5000, 3);
    CHECK(data.kinds[0] == ColumnKind::discrete);
    CHECK(data.kinds[1] == ColumnKind::continuous);
    for (double v : data.column(0)) CHECK((v == 0.0 || v == 1.0));
    CHECK(mean_of(data.column(0)) == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("every sampled value is finite across benchmark forms") {
    for (auto form : {MechanismKind::linear, MechanismKind::quadratic}) {
        for (auto family : {NoiseFamily::uniform, NoiseFamily::gaussian}) {
            auto spec = make_eight_var(form, family);
            auto data = sample(spec, 2000, 1234);
            for (const auto& col : data.columns)
                for (double v : col) CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("sampling rejects bad arguments") {
    auto spec = make_benchmark(BenchmarkStructure::A, MechanismKind::linear);
    CHECK_THROWS_AS(sample(spec, 0, 1), Error);
    CHECK_THROWS_AS(sample_do(spec, {{5, 1.0}}, 10, 1), Error);
    CHECK_THROWS_AS(sample_do(spec, {{-1, 1.0}}, 10, 1), Error);
}
