#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "cfx/errors.hpp"
#include "cfx/graph.hpp"

using namespace cfx;

namespace {

Dag chain3() {
    Dag g({"X", "Z", "Y"});
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    return g;
}

}  // namespace

TEST_CASE("topological order is smallest-index-first and rejects cycles") {
    Dag g({"a", "b", "c", "d"});
    g.add_edge(2, 0);
    g.add_edge(2, 1);
    g.add_edge(0, 3);
    g.add_edge(1, 3);
    CHECK(g.topological_order() == std::vector<int>{2, 0, 1, 3});

    g.add_edge(3, 2);
    CHECK_FALSE(g.is_acyclic());
    CHECK_THROWS_AS(g.topological_order(), CyclicGraphError);
}

TEST_CASE("descendants excludes the node itself and follows all paths") {
    Dag g({"a", "b", "c", "d", "e"});
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 3);
    CHECK(g.descendants(0) == std::set<int>{1, 2, 3});
    CHECK(g.descendants(1) == std::set<int>{2});
    CHECK(g.descendants(4).empty());
}

TEST_CASE("dag json round trip") {
    Dag g = chain3();
    Dag back = Dag::from_json(g.to_json());
    CHECK(back == g);
    CHECK(back.names() == std::vector<std::string>{"X", "Z", "Y"});
}

TEST_CASE("dag json rejects undirected edges and cycles") {
    CHECK_THROWS_AS(
        Dag::from_json(R"({"nodes":["a","b"],"directed":[],"undirected":[[0,1]]})"),
        SchemaMismatchError);
    CHECK_THROWS_AS(
        Dag::from_json(R"({"nodes":["a","b"],"directed":[[0,1],[1,0]]})"),
        CyclicGraphError);
    CHECK_THROWS_AS(Dag::from_json(R"({"directed":[]})"), SchemaMismatchError);
    CHECK_THROWS_AS(Dag::from_json("not json"), SchemaMismatchError);
}

TEST_CASE("adjacency csv lists parents as rows") {
    CHECK(chain3().adjacency_csv() == ",X,Z,Y\nX,0,1,0\nZ,0,0,1\nY,0,0,0\n");
}

TEST_CASE("pdag json round trip keeps both edge kinds") {
    Pdag p({"a", "b", "c"});
    p.add_directed(0, 1);
    p.add_undirected(1, 2);
    Pdag back = Pdag::from_json(p.to_json());
    CHECK(back.has_directed(0, 1));
    CHECK_FALSE(back.has_directed(1, 0));
    CHECK(back.has_undirected(1, 2));
    CHECK(back.undirected_edges() == std::vector<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("orient undirected edge") {
    Pdag p({"a", "b"});
    p.add_undirected(0, 1);
    p.orient(1, 0);
    CHECK(p.has_directed(1, 0));
    CHECK_FALSE(p.has_undirected(0, 1));
    CHECK_THROWS_AS(p.orient(0, 1), Error);
}

TEST_CASE("collider orientation on the three-node skeleton") {
    // X - Z - Y with X, Y independent marginally: Z is outside sepset(X, Y),
    // so the triple becomes X -> Z <- Y.
    Pdag skel({"X", "Z", "Y"});
    skel.add_undirected(0, 1);
    skel.add_undirected(1, 2);
    SepsetTable seps;
    seps.set(0, 2, {});

    auto res = orient_v_structures(skel, seps);
    CHECK(res.conflicts.empty());
    CHECK(res.pdag.has_directed(0, 1));
    CHECK(res.pdag.has_directed(2, 1));
    CHECK(res.pdag.fully_directed());
}

TEST_CASE("conditioning set containing the middle node blocks the collider") {
    Pdag skel({"X", "Z", "Y"});
    skel.add_undirected(0, 1);
    skel.add_undirected(1, 2);
    SepsetTable seps;
    seps.set(0, 2, {1});

    auto res = orient_v_structures(skel, seps);
    CHECK(res.pdag.has_undirected(0, 1));
    CHECK(res.pdag.has_undirected(1, 2));
}

TEST_CASE("conflicting colliders keep the first orientation and report") {
    // Path 0 - 1 - 2 - 3. Sepset(0,2) = {} orients 0 -> 1 <- 2; sepset(1,3) = {}
    // then wants 1 -> 2, clashing with the already-oriented 2 -> 1.
    Pdag skel({"a", "b", "c", "d"});
    skel.add_undirected(0, 1);
    skel.add_undirected(1, 2);
    skel.add_undirected(2, 3);
    SepsetTable seps;
    seps.set(0, 2, {});
    seps.set(1, 3, {});

    auto res = orient_v_structures(skel, seps);
    CHECK(res.pdag.has_directed(0, 1));
    CHECK(res.pdag.has_directed(2, 1));
    CHECK(res.pdag.has_directed(3, 2));
    CHECK_FALSE(res.pdag.has_directed(1, 2));
    REQUIRE(res.conflicts.size() == 1);
    CHECK(res.conflicts[0].a == 1);
    CHECK(res.conflicts[0].c == 2);
    CHECK(res.conflicts[0].b == 3);
}

TEST_CASE("background knowledge suppresses a collider arm") {
    Pdag skel({"X", "Z", "Y"});
    skel.add_undirected(0, 1);
    skel.add_undirected(1, 2);
    SepsetTable seps;
    seps.set(0, 2, {});
    BackgroundKnowledge bk;
    bk.forbidden.push_back({2, 1});

    auto res = orient_v_structures(skel, seps, bk);
    CHECK(res.pdag.has_directed(0, 1));
    CHECK(res.pdag.has_undirected(1, 2));
}

TEST_CASE("first propagation rule orients away from an arrowhead") {
    // X -> Z, Z - Y, X and Y nonadjacent: Y -> Z would create a fresh
    // collider, so the closure orients Z -> Y.
    Pdag p({"X", "Z", "Y"});
    p.add_directed(0, 1);
    p.add_undirected(1, 2);
    apply_meek_rules(p);
    CHECK(p.has_directed(1, 2));
    CHECK(p.fully_directed());
}

TEST_CASE("propagation avoids directed cycles") {
    // a -> c -> b with a - b undirected: b -> a would close a cycle.
    Pdag p({"a", "b", "c"});
    p.add_directed(0, 2);
    p.add_directed(2, 1);
    p.add_undirected(0, 1);
    apply_meek_rules(p);
    CHECK(p.has_directed(0, 1));
}

TEST_CASE("double parents through undirected links force the shared edge") {
    // a - b, a - c, a - d, c -> b, d -> b, c and d nonadjacent  =>  a -> b.
    Pdag p({"a", "b", "c", "d"});
    p.add_undirected(0, 1);
    p.add_undirected(0, 2);
    p.add_undirected(0, 3);
    p.add_directed(2, 1);
    p.add_directed(3, 1);
    apply_meek_rules(p);
    CHECK(p.has_directed(0, 1));
    CHECK(p.has_undirected(0, 2));
    CHECK(p.has_undirected(0, 3));
}

TEST_CASE("chained arrowheads through an adjacent corner force the edge") {
    // a - b, a - c, c -> d, d -> b, a and d adjacent, c and b nonadjacent.
    Pdag p({"a", "b", "c", "d"});
    p.add_undirected(0, 1);
    p.add_undirected(0, 2);
    p.add_undirected(0, 3);
    p.add_directed(2, 3);
    p.add_directed(3, 1);
    apply_meek_rules(p);
    CHECK(p.has_directed(0, 1));
}

TEST_CASE("an edge with one direction forbidden is oriented the other way") {
    Pdag p({"X", "Z", "Y"});
    p.add_directed(0, 1);
    p.add_undirected(1, 2);
    BackgroundKnowledge bk;
    bk.forbidden.push_back({1, 2});
    apply_meek_rules(p, bk);
    CHECK(p.has_directed(2, 1));

    BackgroundKnowledge both;
    both.forbidden.push_back({1, 2});
    both.forbidden.push_back({2, 1});
    Pdag q({"X", "Z", "Y"});
    q.add_undirected(1, 2);
    CHECK_THROWS_AS(apply_meek_rules(q, both), ConstraintConflictError);
}

TEST_CASE("sink nodes pull their undirected edges inward") {
    Pdag p({"X", "Y", "W"});
    p.add_undirected(0, 1);
    p.add_undirected(1, 2);
    BackgroundKnowledge bk;
    bk.sinks.push_back(1);
    apply_meek_rules(p, bk);
    CHECK(p.has_directed(0, 1));
    CHECK(p.has_directed(2, 1));
}

TEST_CASE("exogenous nodes push their undirected edges outward") {
    Pdag p({"E", "U", "V"});
    p.add_undirected(0, 1);
    p.add_undirected(0, 2);
    BackgroundKnowledge bk;
    bk.exogenous.push_back(0);
    apply_meek_rules(p, bk);
    CHECK(p.has_directed(0, 1));
    CHECK(p.has_directed(0, 2));
}

TEST_CASE("required edges are oriented before propagation") {
    Pdag p({"a", "b", "c"});
    p.add_undirected(0, 1);
    p.add_undirected(1, 2);
    BackgroundKnowledge bk;
    bk.required.push_back({0, 1});
    apply_meek_rules(p, bk);
    CHECK(p.has_directed(0, 1));
    // propagation then runs: a -> b, b - c, a and c nonadjacent forces b -> c
    CHECK(p.has_directed(1, 2));
}

TEST_CASE("unsatisfiable constraints are rejected") {
    SUBCASE("required edge already oriented the other way") {
        Pdag p({"a", "b"});
        p.add_directed(1, 0);
        BackgroundKnowledge bk;
        bk.required.push_back({0, 1});
        CHECK_THROWS_AS(apply_meek_rules(p, bk), ConstraintConflictError);
    }
    SUBCASE("two sinks joined by an edge") {
        Pdag p({"a", "b"});
        p.add_undirected(0, 1);
        BackgroundKnowledge bk;
        bk.sinks = {0, 1};
        CHECK_THROWS_AS(apply_meek_rules(p, bk), ConstraintConflictError);
    }
    SUBCASE("sink with an outgoing directed edge") {
        Pdag p({"a", "b"});
        p.add_directed(0, 1);
        BackgroundKnowledge bk;
        bk.sinks = {0};
        CHECK_THROWS_AS(apply_meek_rules(p, bk), ConstraintConflictError);
    }
}

TEST_CASE("sink and exogenous constraints gate orientations") {
    BackgroundKnowledge bk;
    bk.sinks.push_back(2);
    bk.exogenous.push_back(0);
    CHECK(bk.direction_allowed(1, 2));
    CHECK_FALSE(bk.direction_allowed(2, 1));   // sink cannot point outward
    CHECK_FALSE(bk.direction_allowed(1, 0));   // exogenous admits no parents
    CHECK(bk.direction_allowed(0, 1));
}

TEST_CASE("extension enumeration on the two-edge skeleton") {
    // X - Z - Y admits every orientation except the fresh collider at Z.
    Pdag p({"X", "Z", "Y"});
    p.add_undirected(0, 1);
    p.add_undirected(1, 2);
    auto ext = enumerate_dag_extensions(p);
    CHECK_FALSE(ext.capped);
    REQUIRE(ext.dags.size() == 3);

    Dag chain_xy({"X", "Z", "Y"});
    chain_xy.add_edge(0, 1);
    chain_xy.add_edge(1, 2);
    Dag fork({"X", "Z", "Y"});
    fork.add_edge(1, 0);
    fork.add_edge(1, 2);
    Dag chain_yx({"X", "Z", "Y"});
    chain_yx.add_edge(2, 1);
    chain_yx.add_edge(1, 0);

    CHECK(ext.dags[0] == chain_xy);
    CHECK(ext.dags[1] == fork);
    CHECK(ext.dags[2] == chain_yx);
}

TEST_CASE("existing arrowheads prune extensions that would add a collider") {
    Pdag p({"a", "b", "c"});
    p.add_directed(0, 1);
    p.add_undirected(1, 2);
    auto ext = enumerate_dag_extensions(p);
    REQUIRE(ext.dags.size() == 1);
    CHECK(ext.dags[0].has_edge(0, 1));
    CHECK(ext.dags[0].has_edge(1, 2));
}

TEST_CASE("input colliders survive extension without being treated as fresh") {
    Pdag p({"a", "b", "c", "d"});
    p.add_directed(0, 2);
    p.add_directed(1, 2);  // a -> c <- b with a, b nonadjacent, from the input
    p.add_undirected(2, 3);
    auto ext = enumerate_dag_extensions(p);
    // d -> c would add fresh colliders with a and b, so only c -> d remains;
    // the input collider itself is no obstacle.
    REQUIRE(ext.dags.size() == 1);
    CHECK(ext.dags[0].has_edge(0, 2));
    CHECK(ext.dags[0].has_edge(1, 2));
    CHECK(ext.dags[0].has_edge(2, 3));
}

TEST_CASE("complete skeleton enumerates every ordering") {
    Pdag p({"a", "b", "c", "d"});
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) p.add_undirected(i, j);
    auto ext = enumerate_dag_extensions(p);
    CHECK_FALSE(ext.capped);
    CHECK(ext.dags.size() == 24);  // acyclic tournaments on 4 nodes
    for (const auto& d : ext.dags) CHECK(d.is_acyclic());
}

TEST_CASE("enumeration stops at the cap and flags it") {
    Pdag p({"a", "b", "c", "d"});
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) p.add_undirected(i, j);
    auto ext = enumerate_dag_extensions(p, 10);
    CHECK(ext.capped);
    CHECK(ext.dags.size() == 10);
}

TEST_CASE("cyclic directed core admits no extension") {
    Pdag p({"a", "b", "c"});
    p.add_directed(0, 1);
    p.add_directed(1, 2);
    p.add_directed(2, 0);
    CHECK_THROWS_AS(enumerate_dag_extensions(p), NoExtensionError);
}

TEST_CASE("fully directed acyclic input is its own single extension") {
    Pdag p({"a", "b"});
    p.add_directed(0, 1);
    auto ext = enumerate_dag_extensions(p);
    REQUIRE(ext.dags.size() == 1);
    CHECK(ext.dags[0].has_edge(0, 1));
    CHECK(ext.dags[0].num_edges() == 1);
}
