#include "cfx/graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "cfx/errors.hpp"
#include "json.hpp"

namespace cfx {

namespace {

int find_name(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

void check_node(int v, int n, const char* who) {
    if (v < 0 || v >= n) throw Error(std::string(who) + ": node index out of range");
}

}  // namespace

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(std::vector<std::string> names)
    : names_(std::move(names)), parents_(names_.size()), children_(names_.size()) {}

int Dag::index_of(const std::string& name) const { return find_name(names_, name); }

void Dag::add_edge(int from, int to) {
    check_node(from, num_nodes(), "Dag::add_edge");
    check_node(to, num_nodes(), "Dag::add_edge");
    if (from == to) throw Error("Dag::add_edge: self loop");
    parents_[to].insert(from);
    children_[from].insert(to);
}

void Dag::remove_edge(int from, int to) {
    check_node(from, num_nodes(), "Dag::remove_edge");
    check_node(to, num_nodes(), "Dag::remove_edge");
    parents_[to].erase(from);
    children_[from].erase(to);
}

bool Dag::has_edge(int from, int to) const {
    check_node(from, num_nodes(), "Dag::has_edge");
    check_node(to, num_nodes(), "Dag::has_edge");
    return children_[from].count(to) > 0;
}

int Dag::num_edges() const {
    int m = 0;
    for (const auto& ch : children_) m += static_cast<int>(ch.size());
    return m;
}

std::set<int> Dag::descendants(int v) const {
    check_node(v, num_nodes(), "Dag::descendants");
    std::set<int> seen;
    std::vector<int> stack(children_[v].begin(), children_[v].end());
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (!seen.insert(u).second) continue;
        for (int w : children_[u]) stack.push_back(w);
    }
    return seen;
}

bool Dag::is_acyclic() const {
    try {
        topological_order();
        return true;
    } catch (const CyclicGraphError&) {
        return false;
    }
}

std::vector<int> Dag::topological_order() const {
    int n = num_nodes();
    std::vector<int> indegree(n);
    for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(parents_[v].size());
    std::vector<int> order;
    order.reserve(n);
    std::vector<bool> placed(n, false);
    for (int round = 0; round < n; ++round) {
        int next = -1;
        for (int v = 0; v < n; ++v) {
            if (!placed[v] && indegree[v] == 0) {
                next = v;
                break;
            }
        }
        if (next < 0) throw CyclicGraphError("topological_order: graph contains a cycle");
        placed[next] = true;
        order.push_back(next);
        for (int c : children_[next]) --indegree[c];
    }
    return order;
}

std::string Dag::to_json() const {
    nlohmann::json j;
    j["nodes"] = names_;
    auto edges = nlohmann::json::array();
    for (int v = 0; v < num_nodes(); ++v)
        for (int c : children_[v]) edges.push_back({v, c});
    j["directed"] = edges;
    j["undirected"] = nlohmann::json::array();
    return j.dump(2);
}

Dag Dag::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("graph json: ") + e.what());
    }
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw SchemaMismatchError("graph json: missing nodes array");
    Dag g(j["nodes"].get<std::vector<std::string>>());
    if (j.contains("undirected") && !j["undirected"].empty())
        throw SchemaMismatchError("graph json: DAG cannot carry undirected edges");
    for (const auto& e : j.value("directed", nlohmann::json::array())) {
        if (!e.is_array() || e.size() != 2)
            throw SchemaMismatchError("graph json: edge must be a [from, to] pair");
        int a = e[0].get<int>(), b = e[1].get<int>();
        if (a < 0 || b < 0 || a >= g.num_nodes() || b >= g.num_nodes())
            throw SchemaMismatchError("graph json: edge index out of range");
        g.add_edge(a, b);
    }
    if (!g.is_acyclic()) throw CyclicGraphError("graph json: directed edges form a cycle");
    return g;
}

std::string Dag::adjacency_csv() const {
    std::ostringstream out;
    for (const auto& name : names_) out << ',' << name;
    out << '\n';
    for (int r = 0; r < num_nodes(); ++r) {
        out << names_[r];
        for (int c = 0; c < num_nodes(); ++c) out << ',' << (has_edge(r, c) ? 1 : 0);
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Pdag

Pdag::Pdag(std::vector<std::string> names)
    : names_(std::move(names)),
      parents_(names_.size()),
      children_(names_.size()),
      undirected_(names_.size()) {}

int Pdag::index_of(const std::string& name) const { return find_name(names_, name); }

void Pdag::add_directed(int from, int to) {
    check_node(from, num_nodes(), "Pdag::add_directed");
    check_node(to, num_nodes(), "Pdag::add_directed");
    if (from == to) throw Error("Pdag::add_directed: self loop");
    parents_[to].insert(from);
    children_[from].insert(to);
}

void Pdag::add_undirected(int a, int b) {
    check_node(a, num_nodes(), "Pdag::add_undirected");
    check_node(b, num_nodes(), "Pdag::add_undirected");
    if (a == b) throw Error("Pdag::add_undirected: self loop");
    undirected_[a].insert(b);
    undirected_[b].insert(a);
}

void Pdag::remove_edge(int a, int b) {
    parents_[b].erase(a);
    children_[a].erase(b);
    parents_[a].erase(b);
    children_[b].erase(a);
    undirected_[a].erase(b);
    undirected_[b].erase(a);
}

void Pdag::orient(int from, int to) {
    if (!has_undirected(from, to)) throw Error("Pdag::orient: edge is not undirected");
    undirected_[from].erase(to);
    undirected_[to].erase(from);
    add_directed(from, to);
}

bool Pdag::has_directed(int from, int to) const { return children_.at(from).count(to) > 0; }

bool Pdag::has_undirected(int a, int b) const { return undirected_.at(a).count(b) > 0; }

bool Pdag::adjacent(int a, int b) const {
    return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
}

std::vector<std::pair<int, int>> Pdag::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < num_nodes(); ++v)
        for (int c : children_[v]) out.emplace_back(v, c);
    return out;
}

std::vector<std::pair<int, int>> Pdag::undirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < num_nodes(); ++v)
        for (int u : undirected_[v])
            if (v < u) out.emplace_back(v, u);
    return out;
}

bool Pdag::fully_directed() const {
    for (const auto& nb : undirected_)
        if (!nb.empty()) return false;
    return true;
}

Dag Pdag::to_dag() const {
    if (!fully_directed()) throw Error("Pdag::to_dag: undirected edges remain");
    Dag g(names_);
    for (auto [a, b] : directed_edges()) g.add_edge(a, b);
    return g;
}

std::string Pdag::to_json() const {
    nlohmann::json j;
    j["nodes"] = names_;
    auto dir = nlohmann::json::array();
    for (auto [a, b] : directed_edges()) dir.push_back({a, b});
    j["directed"] = dir;
    auto undir = nlohmann::json::array();
    for (auto [a, b] : undirected_edges()) undir.push_back({a, b});
    j["undirected"] = undir;
    return j.dump(2);
}

Pdag Pdag::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("graph json: ") + e.what());
    }
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw SchemaMismatchError("graph json: missing nodes array");
    Pdag g(j["nodes"].get<std::vector<std::string>>());
    auto read_pair = [&](const nlohmann::json& e) {
        if (!e.is_array() || e.size() != 2)
            throw SchemaMismatchError("graph json: edge must be a [from, to] pair");
        int a = e[0].get<int>(), b = e[1].get<int>();
        if (a < 0 || b < 0 || a >= g.num_nodes() || b >= g.num_nodes())
            throw SchemaMismatchError("graph json: edge index out of range");
        return std::pair<int, int>{a, b};
    };
    for (const auto& e : j.value("directed", nlohmann::json::array())) {
        auto [a, b] = read_pair(e);
        g.add_directed(a, b);
    }
    for (const auto& e : j.value("undirected", nlohmann::json::array())) {
        auto [a, b] = read_pair(e);
        g.add_undirected(a, b);
    }
    return g;
}

// ---------------------------------------------------------------------------
// BackgroundKnowledge

bool BackgroundKnowledge::is_sink(int v) const {
    return std::find(sinks.begin(), sinks.end(), v) != sinks.end();
}

bool BackgroundKnowledge::is_exogenous(int v) const {
    return std::find(exogenous.begin(), exogenous.end(), v) != exogenous.end();
}

bool BackgroundKnowledge::direction_forbidden(int from, int to) const {
    return std::find(forbidden.begin(), forbidden.end(), std::pair<int, int>{from, to}) !=
           forbidden.end();
}

bool BackgroundKnowledge::direction_allowed(int from, int to) const {
    if (direction_forbidden(from, to)) return false;
    if (is_exogenous(to)) return false;
    if (is_sink(from)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// SepsetTable

std::uint64_t SepsetTable::key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

void SepsetTable::set(int a, int b, std::vector<int> sepset) {
    std::sort(sepset.begin(), sepset.end());
    table_[key(a, b)] = std::move(sepset);
}

bool SepsetTable::has(int a, int b) const { return table_.count(key(a, b)) > 0; }

const std::vector<int>& SepsetTable::get(int a, int b) const {
    auto it = table_.find(key(a, b));
    if (it == table_.end()) throw Error("SepsetTable::get: no sepset recorded for pair");
    return it->second;
}

bool SepsetTable::contains(int a, int b, int v) const {
    const auto& s = get(a, b);
    return std::binary_search(s.begin(), s.end(), v);
}

// ---------------------------------------------------------------------------
// v-structures

VStructureResult orient_v_structures(const Pdag& skeleton, const SepsetTable& sepsets,
                                     const BackgroundKnowledge& bk) {
    VStructureResult res{skeleton, {}};
    Pdag& g = res.pdag;
    int n = g.num_nodes();
    for (int c = 0; c < n; ++c) {
        // unshielded triples a - c - b with a, b nonadjacent
        std::vector<int> nbrs;
        for (int v = 0; v < n; ++v)
            if (v != c && g.adjacent(v, c)) nbrs.push_back(v);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
                int a = nbrs[i], b = nbrs[j];
                if (g.adjacent(a, b)) continue;
                if (!sepsets.has(a, b) || sepsets.contains(a, b, c)) continue;
                for (int x : {a, b}) {
                    if (g.has_directed(x, c)) continue;  // already as wanted
                    if (g.has_directed(c, x)) {
                        res.conflicts.push_back(
                            {a, c, b,
                             "collider wants " + g.names()[x] + "->" + g.names()[c] +
                                 " but the reverse is already oriented; keeping first"});
                        continue;
                    }
                    if (!bk.direction_allowed(x, c)) continue;
                    if (g.has_undirected(x, c)) g.orient(x, c);
                }
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Meek rules

namespace {

bool meek_orient(Pdag& g, const BackgroundKnowledge& bk, int from, int to) {
    if (!g.has_undirected(from, to)) return false;
    if (!bk.direction_allowed(from, to)) return false;
    g.orient(from, to);
    return true;
}

// R1: a -> b, b - c, a and c nonadjacent  =>  b -> c
bool meek_r1(Pdag& g, const BackgroundKnowledge& bk) {
    for (auto [a, b] : g.directed_edges()) {
        for (int c : std::set<int>(g.undirected_neighbors(b))) {
            if (c == a || g.adjacent(a, c)) continue;
            if (meek_orient(g, bk, b, c)) return true;
        }
    }
    return false;
}

// R2: a -> c -> b with a - b  =>  a -> b
bool meek_r2(Pdag& g, const BackgroundKnowledge& bk) {
    for (auto [a, b] : g.undirected_edges()) {
        for (int swap = 0; swap < 2; ++swap) {
            int u = swap ? b : a, v = swap ? a : b;
            for (int c : g.children(u)) {
                if (g.has_directed(c, v)) {
                    if (meek_orient(g, bk, u, v)) return true;
                }
            }
        }
    }
    return false;
}

// R3: a - b, a - c, a - d, c -> b, d -> b, c and d nonadjacent  =>  a -> b
bool meek_r3(Pdag& g, const BackgroundKnowledge& bk) {
    for (auto [e1, e2] : g.undirected_edges()) {
        for (int swap = 0; swap < 2; ++swap) {
            int a = swap ? e2 : e1, b = swap ? e1 : e2;
            const auto& nb = g.undirected_neighbors(a);
            std::vector<int> cand;
            for (int c : nb)
                if (c != b && g.has_directed(c, b)) cand.push_back(c);
            bool done = false;
            for (std::size_t i = 0; i < cand.size() && !done; ++i)
                for (std::size_t j = i + 1; j < cand.size() && !done; ++j)
                    if (!g.adjacent(cand[i], cand[j])) done = meek_orient(g, bk, a, b);
            if (done) return true;
        }
    }
    return false;
}

// R4: a - b, a - c, c -> d, d -> b, a and d adjacent, c and b nonadjacent  =>  a -> b
bool meek_r4(Pdag& g, const BackgroundKnowledge& bk) {
    for (auto [e1, e2] : g.undirected_edges()) {
        for (int swap = 0; swap < 2; ++swap) {
            int a = swap ? e2 : e1, b = swap ? e1 : e2;
            for (int c : std::set<int>(g.undirected_neighbors(a))) {
                if (c == b || g.adjacent(c, b)) continue;
                for (int d : g.children(c)) {
                    if (d == a || d == b) continue;
                    if (!g.has_directed(d, b)) continue;
                    if (!g.adjacent(a, d)) continue;
                    if (meek_orient(g, bk, a, b)) return true;
                }
            }
        }
    }
    return false;
}

// Orient what the background knowledge dictates before propagation: required
// edges, all edges incident to sinks (inward) and to exogenous nodes
// (outward). Throws when the constraints cannot hold on this graph.
void pre_apply_bk(Pdag& g, const BackgroundKnowledge& bk) {
    auto edge_name = [&](int a, int b) { return g.names()[a] + "->" + g.names()[b]; };
    for (auto [a, b] : bk.required) {
        check_node(a, g.num_nodes(), "background knowledge");
        check_node(b, g.num_nodes(), "background knowledge");
        if (g.has_directed(b, a))
            throw ConstraintConflictError("required edge " + edge_name(a, b) +
                                          " is already oriented the other way");
        if (!bk.direction_allowed(a, b))
            throw ConstraintConflictError("required edge " + edge_name(a, b) +
                                          " clashes with forbidden/sink/exogenous constraints");
        if (g.has_undirected(a, b)) g.orient(a, b);
    }
    for (auto [a, b] : bk.forbidden) {
        if (a < 0 || b < 0 || a >= g.num_nodes() || b >= g.num_nodes()) continue;
        if (g.has_directed(a, b))
            throw ConstraintConflictError("forbidden edge " + edge_name(a, b) +
                                          " is present as directed");
        // An undirected edge with one leg forbidden has only one way to go.
        if (g.has_undirected(a, b)) {
            if (!bk.direction_allowed(b, a))
                throw ConstraintConflictError("edge " + edge_name(a, b) +
                                              " has no permitted orientation");
            g.orient(b, a);
        }
    }
    for (int s : bk.sinks) {
        check_node(s, g.num_nodes(), "background knowledge");
        if (!g.children(s).empty())
            throw ConstraintConflictError("sink node " + g.names()[s] +
                                          " has an outgoing directed edge");
        for (int u : std::set<int>(g.undirected_neighbors(s))) {
            if (!bk.direction_allowed(u, s))
                throw ConstraintConflictError("edge " + edge_name(u, s) +
                                              " cannot be oriented into the sink");
            g.orient(u, s);
        }
    }
    for (int e : bk.exogenous) {
        check_node(e, g.num_nodes(), "background knowledge");
        if (!g.parents(e).empty())
            throw ConstraintConflictError("exogenous node " + g.names()[e] +
                                          " has an incoming directed edge");
        for (int u : std::set<int>(g.undirected_neighbors(e))) {
            if (!bk.direction_allowed(e, u))
                throw ConstraintConflictError("edge " + edge_name(e, u) +
                                              " cannot be oriented away from the exogenous node");
            g.orient(e, u);
        }
    }
}

}  // namespace

void apply_meek_rules(Pdag& pdag, const BackgroundKnowledge& bk) {
    if (!bk.empty()) pre_apply_bk(pdag, bk);
    bool changed = true;
    while (changed) {
        changed = meek_r1(pdag, bk) || meek_r2(pdag, bk) || meek_r3(pdag, bk) ||
                  meek_r4(pdag, bk);
    }
}

// ---------------------------------------------------------------------------
// DAG extensions

namespace {

struct ExtensionSearch {
    const Pdag& input;
    std::vector<std::pair<int, int>> free_edges;
    std::vector<std::set<int>> parents;   // working directed graph
    std::vector<std::set<int>> children;
    std::size_t cap;
    ExtensionSet out;

    explicit ExtensionSearch(const Pdag& p, std::size_t cap_)
        : input(p), cap(cap_) {
        free_edges = p.undirected_edges();
        int n = p.num_nodes();
        parents.resize(n);
        children.resize(n);
        for (auto [a, b] : p.directed_edges()) {
            parents[b].insert(a);
            children[a].insert(b);
        }
    }

    bool reachable(int from, int to) const {
        if (from == to) return true;
        std::vector<int> stack{from};
        std::set<int> seen;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (u == to) return true;
            if (!seen.insert(u).second) continue;
            for (int c : children[u]) stack.push_back(c);
        }
        return false;
    }

    bool admissible(int from, int to) const {
        if (reachable(to, from)) return false;  // would close a cycle
        for (int p : parents[to]) {
            if (p != from && !input.adjacent(p, from)) return false;  // new collider at `to`
        }
        return true;
    }

    void record() {
        Dag g(input.names());
        for (int v = 0; v < static_cast<int>(children.size()); ++v)
            for (int c : children[v]) g.add_edge(v, c);
        out.dags.push_back(std::move(g));
    }

    void run(std::size_t idx) {
        if (out.capped) return;
        if (out.dags.size() >= cap) {
            out.capped = true;
            return;
        }
        if (idx == free_edges.size()) {
            record();
            return;
        }
        auto [a, b] = free_edges[idx];
        for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
            if (!admissible(from, to)) continue;
            parents[to].insert(from);
            children[from].insert(to);
            run(idx + 1);
            parents[to].erase(from);
            children[from].erase(to);
        }
    }
};

}  // namespace

ExtensionSet enumerate_dag_extensions(const Pdag& pdag, std::size_t cap) {
    ExtensionSearch search(pdag, cap);
    // the fixed directed part must itself be acyclic
    bool cyclic = false;
    {
        Dag probe(pdag.names());
        for (auto [a, b] : pdag.directed_edges()) probe.add_edge(a, b);
        cyclic = !probe.is_acyclic();
    }
    if (!cyclic) search.run(0);
    if (search.out.dags.empty() && !search.out.capped)
        throw NoExtensionError("enumerate_dag_extensions: no consistent extension exists");
    return search.out;
}

}  // namespace cfx
