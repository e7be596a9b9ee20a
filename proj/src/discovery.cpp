#include "cfx/discovery.hpp"

#include "cfx/errors.hpp"

namespace cfx {

const char* method_name(DiscoveryMethod m) {
    switch (m) {
        case DiscoveryMethod::pc: return "pc";
        case DiscoveryMethod::lingam: return "lingam";
        case DiscoveryMethod::resit: return "resit";
        case DiscoveryMethod::notears: return "notears";
    }
    return "?";
}

const char* mode_name(PriorMode m) {
    switch (m) {
        case PriorMode::mode0: return "0";
        case PriorMode::modeA: return "a";
        case PriorMode::modeB: return "b";
        case PriorMode::noGraph: return "nograph";
    }
    return "?";
}

namespace {

Dataset drop_column(const Dataset& data, int target) {
    Dataset out;
    for (int c = 0; c < data.num_cols(); ++c) {
        if (c == target) continue;
        out.labels.push_back(data.labels[c]);
        out.kinds.push_back(data.kinds[c]);
        out.columns.push_back(data.columns[c]);
    }
    return out;
}

// Maps indices of the explanatory-only dataset back to the full column set.
int unmapped(int explanatory, int target) {
    return explanatory < target ? explanatory : explanatory + 1;
}

Dag attach_target(const Dag& explanatory_dag, const Dataset& data, int target) {
    Dag full(data.labels);
    for (int v = 0; v < explanatory_dag.num_nodes(); ++v)
        for (int parent : explanatory_dag.parents(v))
            full.add_edge(unmapped(parent, target), unmapped(v, target));
    for (int c = 0; c < data.num_cols(); ++c)
        if (c != target) full.add_edge(c, target);
    return full;
}

void run_single_method(DiscoveryMethod method, const Dataset& data,
                       const BackgroundKnowledge& bk, const DiscoveryConfig& config,
                       DiscoveryOutput& out) {
    switch (method) {
        case DiscoveryMethod::lingam:
            out.dags.push_back(direct_lingam(data, bk, config.lingam_prune_threshold));
            break;
        case DiscoveryMethod::resit:
            out.dags.push_back(resit(data, bk, config.resit, &out.diagnostics.hsic_tests));
            break;
        case DiscoveryMethod::notears: {
            auto result = notears_linear(data, config.notears, bk);
            out.diagnostics.outer_iterations = result.outer_iterations;
            out.diagnostics.final_h = result.final_h;
            out.diagnostics.converged = result.converged;
            out.dags.push_back(std::move(result.dag));
            break;
        }
        case DiscoveryMethod::pc:
            break;  // handled by the caller
    }
}

}  // namespace

DiscoveryOutput discover_with_prior(DiscoveryMethod method, PriorMode mode,
                                    const Dataset& data, int target,
                                    const DiscoveryConfig& config) {
    if (target < 0 || target >= data.num_cols())
        throw SchemaMismatchError("discover_with_prior: target index out of range");

    DiscoveryOutput out;
    out.method = method;
    out.mode = mode;

    if (mode == PriorMode::noGraph) {
        out.no_graph = true;
        return out;
    }
    if (mode == PriorMode::modeB &&
        (method == DiscoveryMethod::resit || method == DiscoveryMethod::notears))
        throw UnsupportedModeError(std::string(method_name(method)) +
                                   " cannot constrain the target to be a sink");

    if (mode == PriorMode::modeA) {
        Dataset explanatory = drop_column(data, target);
        if (method == DiscoveryMethod::pc) {
            auto result = pc(explanatory, config.ci);
            out.diagnostics.ci_tests = result.ci_tests;
            for (auto conflict : result.conflicts) {
                conflict.a = unmapped(conflict.a, target);
                conflict.c = unmapped(conflict.c, target);
                conflict.b = unmapped(conflict.b, target);
                out.conflicts.push_back(std::move(conflict));
            }
            // Rebuild on the full column set with every Xi -> target attached.
            Pdag full(data.labels);
            for (auto [a, b] : result.pdag.directed_edges())
                full.add_directed(unmapped(a, target), unmapped(b, target));
            for (auto [a, b] : result.pdag.undirected_edges())
                full.add_undirected(unmapped(a, target), unmapped(b, target));
            for (int c = 0; c < data.num_cols(); ++c)
                if (c != target) full.add_directed(c, target);
            auto extensions = enumerate_dag_extensions(full, config.extension_cap);
            out.pdag = std::move(full);
            out.dags = std::move(extensions.dags);
            out.extensions_capped = extensions.capped;
        } else {
            DiscoveryOutput inner;
            run_single_method(method, explanatory, {}, config, inner);
            out.diagnostics = inner.diagnostics;
            out.dags.push_back(attach_target(inner.dags[0], data, target));
        }
    } else {
        BackgroundKnowledge bk;
        if (mode == PriorMode::modeB) bk.sinks.push_back(target);
        if (method == DiscoveryMethod::pc) {
            auto result = pc(data, config.ci, bk);
            out.diagnostics.ci_tests = result.ci_tests;
            out.conflicts = std::move(result.conflicts);
            auto extensions = enumerate_dag_extensions(result.pdag, config.extension_cap);
            out.pdag = std::move(result.pdag);
            out.dags = std::move(extensions.dags);
            out.extensions_capped = extensions.capped;
        } else {
            run_single_method(method, data, bk, config, out);
        }
    }

    for (const Dag& dag : out.dags) {
        dag.topological_order();  // every output graph must be acyclic
        if (mode == PriorMode::modeA)
            for (int c = 0; c < data.num_cols(); ++c)
                if (c != target && !dag.has_edge(c, target))
                    throw Error("discover_with_prior: missing required parent edge");
        if (mode == PriorMode::modeB && !dag.children(target).empty())
            throw Error("discover_with_prior: target is not a sink");
    }
    return out;
}

}  // namespace cfx
