#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cfx {

// Directed acyclic graph over named nodes. Acyclicity is not enforced on
// every insertion; topological_order() throws CyclicGraphError when violated.
class Dag {
  public:
    Dag() = default;
    explicit Dag(std::vector<std::string> names);

    int num_nodes() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int v) const { return names_.at(v); }
    int index_of(const std::string& name) const;  // -1 if absent

    void add_edge(int from, int to);
    void remove_edge(int from, int to);
    bool has_edge(int from, int to) const;
    int num_edges() const;

    const std::set<int>& parents(int v) const { return parents_.at(v); }
    const std::set<int>& children(int v) const { return children_.at(v); }
    std::set<int> descendants(int v) const;  // excludes v itself
    bool is_acyclic() const;

    // Kahn's algorithm, smallest index first; throws CyclicGraphError.
    std::vector<int> topological_order() const;

    std::string to_json() const;
    static Dag from_json(const std::string& text);
    std::string adjacency_csv() const;  // 0/1 matrix, row = parent, col = child

    bool operator==(const Dag& other) const {
        return names_ == other.names_ && parents_ == other.parents_;
    }

  private:
    std::vector<std::string> names_;
    std::vector<std::set<int>> parents_;
    std::vector<std::set<int>> children_;
};

// Partially directed graph: directed edges plus undirected ones.
class Pdag {
  public:
    Pdag() = default;
    explicit Pdag(std::vector<std::string> names);

    int num_nodes() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    int index_of(const std::string& name) const;

    void add_directed(int from, int to);
    void add_undirected(int a, int b);
    void remove_edge(int a, int b);  // either kind
    // Turn the undirected edge a-b into a->b; edge must exist undirected.
    void orient(int from, int to);

    bool has_directed(int from, int to) const;
    bool has_undirected(int a, int b) const;
    bool adjacent(int a, int b) const;

    const std::set<int>& parents(int v) const { return parents_.at(v); }
    const std::set<int>& children(int v) const { return children_.at(v); }
    const std::set<int>& undirected_neighbors(int v) const { return undirected_.at(v); }

    std::vector<std::pair<int, int>> directed_edges() const;
    std::vector<std::pair<int, int>> undirected_edges() const;  // a < b

    // True when no undirected edges remain; then to_dag() is valid.
    bool fully_directed() const;
    Dag to_dag() const;

    std::string to_json() const;
    static Pdag from_json(const std::string& text);

  private:
    std::vector<std::string> names_;
    std::vector<std::set<int>> parents_;
    std::vector<std::set<int>> children_;
    std::vector<std::set<int>> undirected_;
};

// Orientation constraints fed into discovery and orientation passes.
// required/forbidden hold directed pairs (from, to); sinks get every incident
// edge oriented inward, exogenous nodes admit no incoming edges.
struct BackgroundKnowledge {
    std::vector<std::pair<int, int>> required;
    std::vector<std::pair<int, int>> forbidden;
    std::vector<int> sinks;
    std::vector<int> exogenous;

    bool empty() const {
        return required.empty() && forbidden.empty() && sinks.empty() && exogenous.empty();
    }
    bool is_sink(int v) const;
    bool is_exogenous(int v) const;
    bool direction_forbidden(int from, int to) const;
    // Allowed means: not explicitly forbidden, target not exogenous, source not a sink.
    bool direction_allowed(int from, int to) const;
};

// Separating sets found while pruning the skeleton, keyed by unordered pair.
class SepsetTable {
  public:
    void set(int a, int b, std::vector<int> sepset);
    bool has(int a, int b) const;
    const std::vector<int>& get(int a, int b) const;  // throws if absent
    bool contains(int a, int b, int v) const;         // v in sepset(a,b)?

  private:
    static std::uint64_t key(int a, int b);
    std::unordered_map<std::uint64_t, std::vector<int>> table_;
};

struct OrientationConflict {
    int a = 0;
    int c = 0;
    int b = 0;  // collider triple a -> c <- b that clashed with an earlier orientation
    std::string detail;
};

struct VStructureResult {
    Pdag pdag;
    std::vector<OrientationConflict> conflicts;
};

// Orient unshielded triples a - c - b (a, b nonadjacent, c not in sepset(a,b))
// as a -> c <- b. Conflicts with earlier orientations keep the first
// orientation and are reported. Background knowledge suppresses forbidden
// directions.
VStructureResult orient_v_structures(const Pdag& skeleton, const SepsetTable& sepsets,
                                     const BackgroundKnowledge& bk = {});

// Meek rules R1-R4 to closure. Background knowledge is applied first:
// required edges oriented, edges incident to sinks oriented inward and to
// exogenous nodes outward, and an undirected edge with one direction
// forbidden oriented the other way; ConstraintConflictError if any of that
// is impossible.
void apply_meek_rules(Pdag& pdag, const BackgroundKnowledge& bk = {});

struct ExtensionSet {
    std::vector<Dag> dags;
    bool capped = false;  // enumeration stopped at the cap
};

// Every acyclic orientation of the undirected edges that keeps the directed
// ones and introduces no v-structure absent from the input. Throws
// NoExtensionError when none exists. Deterministic order.
ExtensionSet enumerate_dag_extensions(const Pdag& pdag, std::size_t cap = 10000);

}  // namespace cfx
