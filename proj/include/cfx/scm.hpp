#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfx/data.hpp"
#include "cfx/graph.hpp"

namespace cfx {

struct NoiseSpec {
    enum class Kind { uniform01, gaussian, bernoulli };
    Kind kind = Kind::uniform01;
    double mean = 0.0, sd = 1.0;  // gaussian
    double p = 0.5;               // bernoulli

    static NoiseSpec uniform01() { return {}; }
    static NoiseSpec gaussian(double mean, double sd);
    static NoiseSpec bernoulli(double p);
};

enum class MechanismKind { linear, quadratic };

// Generative structural causal model: each node is a linear combination of
// its parents (or of their squares, for the quadratic mechanism) plus an
// independent noise draw.
struct ScmSpec {
    Dag dag;
    std::vector<MechanismKind> mechanisms;           // per node
    std::vector<std::map<int, double>> coefficients;  // per node: parent -> coef
    std::vector<NoiseSpec> noises;                   // per node

    // Throws Error when mechanisms/noises/coefficients do not line up with
    // the dag; CyclicGraphError when the dag has a cycle.
    void validate() const;
    std::string to_json() const;
    static ScmSpec from_json(const std::string& text);
};

using DoAssignment = std::map<int, double>;

// n rows in topological order. Every node draws its noise from its own
// seeded stream, so an intervention elsewhere never shifts another node's
// noise sequence.
Dataset sample(const ScmSpec& spec, int n, std::uint64_t seed);

// Intervened nodes are pinned to their assigned constants (mechanism and
// noise severed); everything else is generated as in sample with the same
// per-node streams.
Dataset sample_do(const ScmSpec& spec, const DoAssignment& assignment, int n,
                  std::uint64_t seed);

enum class BenchmarkStructure { A, B, C, D, E };

// The five three-variable benchmarks over nodes (X, Z, Y), uniform noise:
//   A  collider   X -> Y <- Z   (coef 1 for X, 1.5 for Z)
//   B  chain      X -> Z -> Y
//   C  confounder X -> Z, X -> Y, Z -> Y
//   D  isolated   Z -> Y, X unconnected
//   E  fork       Z -> X, Z -> Y
// All other coefficients are 1; form picks linear or quadratic mechanisms.
ScmSpec make_benchmark(BenchmarkStructure structure, MechanismKind form);

enum class NoiseFamily { uniform, gaussian };

// The fixed eight-node benchmark (X1..X7 and sink Y, 10 edges, unit
// coefficients); the same topology ships as configs/eight_var_v1.json. The
// seed is accepted for interface stability; the default spec ignores it.
ScmSpec make_eight_var(MechanismKind form, NoiseFamily noise, std::uint64_t seed = 0);

}  // namespace cfx
