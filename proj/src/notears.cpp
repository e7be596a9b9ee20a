#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "cfx/discovery.hpp"
#include "cfx/errors.hpp"

namespace cfx {

namespace {

// exp(A) by scaling and squaring with a truncated Taylor series. A = W o W is
// entrywise nonnegative, so the series has no cancellation.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a) {
    int d = static_cast<int>(a.rows());
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    Eigen::MatrixXd b = a;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
        b /= std::pow(2.0, squarings);
    }
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
    for (int k = 1; k <= 30; ++k) {
        term = (term * b) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

struct Objective {
    const Eigen::MatrixXd& gram;  // X^T X / n, standardized columns
    const std::vector<char>& fixed_zero;
    double lambda, rho, alpha;
    int d;

    // Smooth part (quadratic loss + augmented-Lagrangian terms) and the
    // linear l1 term over theta = (w+, w-); gradient written into grad.
    double eval(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
        Eigen::MatrixXd w(d, d);
        int m = d * d;
        for (int i = 0; i < m; ++i)
            w(i / d, i % d) = theta[i] - theta[m + i];

        Eigen::MatrixXd delta = Eigen::MatrixXd::Identity(d, d) - w;
        double loss = 0.5 * (delta.transpose() * gram * delta).trace();
        Eigen::MatrixXd grad_w = gram * (w - Eigen::MatrixXd::Identity(d, d));

        Eigen::MatrixXd hadamard = w.cwiseProduct(w);
        Eigen::MatrixXd expm = matrix_exp(hadamard);
        double h = expm.trace() - d;
        grad_w += (alpha + rho * h) * expm.transpose().cwiseProduct(2.0 * w);

        double value = loss + alpha * h + 0.5 * rho * h * h + lambda * theta.sum();
        for (int i = 0; i < m; ++i) {
            grad[i] = grad_w(i / d, i % d) + lambda;
            grad[m + i] = -grad_w(i / d, i % d) + lambda;
        }
        for (int i = 0; i < m; ++i)
            if (fixed_zero[i]) grad[i] = grad[m + i] = 0.0;
        return value;
    }

    void project(Eigen::VectorXd& theta) const {
        int m = d * d;
        for (int i = 0; i < 2 * m; ++i) theta[i] = std::max(0.0, theta[i]);
        for (int i = 0; i < m; ++i)
            if (fixed_zero[i]) theta[i] = theta[m + i] = 0.0;
    }
};

// Projected quasi-Newton minimization: L-BFGS two-loop direction, projection
// onto the feasible set, monotone Armijo backtracking. Small-scale but exact
// enough for the handful of variables this artifact works with.
void minimize(const Objective& objective, Eigen::VectorXd& theta) {
    const int max_iters = 400, memory = 10;
    const double tol = 1e-7;
    int dim = static_cast<int>(theta.size());
    Eigen::VectorXd grad(dim), new_grad(dim);
    double value = objective.eval(theta, grad);
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;  // (s, y)

    for (int iter = 0; iter < max_iters; ++iter) {
        Eigen::VectorXd check = theta - grad;
        objective.project(check);
        if ((check - theta).lpNorm<Eigen::Infinity>() < tol) break;

        // Two-loop recursion over stored curvature pairs.
        Eigen::VectorXd direction = -grad;
        std::vector<double> a(pairs.size());
        for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = pairs[i];
            a[i] = s.dot(direction) / y.dot(s);
            direction -= a[i] * y;
        }
        if (!pairs.empty()) {
            const auto& [s, y] = pairs.back();
            direction *= y.dot(s) / y.dot(y);
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& [s, y] = pairs[i];
            double b = y.dot(direction) / y.dot(s);
            direction += (a[i] - b) * s;
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd candidate(dim);
        double new_value = 0.0;
        for (int half = 0; half < 40; ++half) {
            candidate = theta + step * direction;
            objective.project(candidate);
            Eigen::VectorXd move = candidate - theta;
            if (move.lpNorm<Eigen::Infinity>() < 1e-16) break;
            new_value = objective.eval(candidate, new_grad);
            if (new_value <= value + 1e-4 * std::min(0.0, grad.dot(move))) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // Fall back to plain projected gradient before giving up.
            step = 1.0;
            for (int half = 0; half < 60 && !accepted; ++half) {
                candidate = theta - step * grad;
                objective.project(candidate);
                Eigen::VectorXd move = candidate - theta;
                if (move.lpNorm<Eigen::Infinity>() < 1e-16) break;
                new_value = objective.eval(candidate, new_grad);
                if (new_value <= value + 1e-4 * std::min(0.0, grad.dot(move)))
                    accepted = true;
                step *= 0.5;
            }
            if (!accepted) break;
        }

        Eigen::VectorXd s = candidate - theta;
        Eigen::VectorXd y = new_grad - grad;
        if (y.dot(s) > 1e-10) {
            pairs.emplace_back(s, y);
            if (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
        }
        theta = candidate;
        grad = new_grad;
        value = new_value;
    }
}

// Depth-first search for a directed cycle; returns it as a node sequence
// v0 -> v1 -> ... -> v0, or empty when the graph is acyclic.
std::vector<int> find_cycle(const std::vector<std::vector<int>>& out_edges) {
    int d = static_cast<int>(out_edges.size());
    std::vector<int> state(d, 0), stack, cycle;
    std::function<bool(int)> visit = [&](int v) {
        state[v] = 1;
        stack.push_back(v);
        for (int u : out_edges[v]) {
            if (state[u] == 1) {
                auto it = std::find(stack.begin(), stack.end(), u);
                cycle.assign(it, stack.end());
                return true;
            }
            if (state[u] == 0 && visit(u)) return true;
        }
        stack.pop_back();
        state[v] = 2;
        return false;
    };
    for (int v = 0; v < d; ++v)
        if (state[v] == 0 && visit(v)) return cycle;
    return {};
}

}  // namespace

double notears_h(const Eigen::MatrixXd& w) {
    return matrix_exp(w.cwiseProduct(w)).trace() - static_cast<double>(w.rows());
}

Eigen::MatrixXd notears_h_gradient(const Eigen::MatrixXd& w) {
    return matrix_exp(w.cwiseProduct(w)).transpose().cwiseProduct(2.0 * w);
}

NotearsResult notears_linear(const Dataset& data, const NotearsConfig& cfg,
                             const BackgroundKnowledge& bk) {
    int d = data.num_cols();
    int n = data.num_rows();
    if (d < 1) throw SchemaMismatchError("notears: no columns");
    if (cfg.lambda < 0 || cfg.weight_threshold < 0 || !(cfg.h_tol > 0))
        throw Error("notears: invalid configuration");

    Eigen::MatrixXd x(n, d);
    for (int c = 0; c < d; ++c) {
        auto std_col = standardize(data.columns[c]);
        for (int r = 0; r < n; ++r) x(r, c) = std_col[r];
    }
    Eigen::MatrixXd gram = (x.transpose() * x) / static_cast<double>(n);

    std::vector<char> fixed_zero(d * d, 0);
    for (int v = 0; v < d; ++v) fixed_zero[v * d + v] = 1;
    for (auto [a, b] : bk.forbidden)
        if (a >= 0 && b >= 0 && a < d && b < d) fixed_zero[a * d + b] = 1;

    int m = d * d;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(2 * m);
    double rho = 1.0, alpha = 0.0, h_val = std::numeric_limits<double>::infinity();
    int outer = 0;
    const double rho_max = 1e16;

    while (outer < cfg.max_outer) {
        Eigen::VectorXd trial = theta;
        double h_new = h_val;
        while (outer < cfg.max_outer) {
            ++outer;
            trial = theta;
            Objective objective{gram, fixed_zero, cfg.lambda, rho, alpha, d};
            minimize(objective, trial);
            Eigen::MatrixXd w(d, d);
            for (int i = 0; i < m; ++i) w(i / d, i % d) = trial[i] - trial[m + i];
            h_new = notears_h(w);
            if (h_new > 0.25 * h_val && rho < rho_max)
                rho *= cfg.rho_growth;
            else
                break;
        }
        theta = trial;
        h_val = h_new;
        alpha += rho * h_val;
        if (h_val <= cfg.h_tol || rho >= rho_max) break;
    }

    NotearsResult result;
    result.weights.resize(d, d);
    for (int i = 0; i < m; ++i)
        result.weights(i / d, i % d) = theta[i] - theta[m + i];
    result.outer_iterations = outer;
    result.final_h = h_val;
    result.converged = h_val <= cfg.h_tol;

    // Threshold, then drop the weakest edge on any remaining cycle until the
    // graph is a DAG.
    Eigen::MatrixXd kept = result.weights;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (std::abs(kept(i, j)) <= cfg.weight_threshold) kept(i, j) = 0.0;
    while (true) {
        std::vector<std::vector<int>> out_edges(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (kept(i, j) != 0.0) out_edges[i].push_back(j);
        auto cycle = find_cycle(out_edges);
        if (cycle.empty()) break;
        int weak_from = -1, weak_to = -1;
        double weak = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            int from = cycle[i], to = cycle[(i + 1) % cycle.size()];
            if (std::abs(kept(from, to)) < weak) {
                weak = std::abs(kept(from, to));
                weak_from = from;
                weak_to = to;
            }
        }
        kept(weak_from, weak_to) = 0.0;
    }

    Dag dag(data.labels);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (kept(i, j) != 0.0) dag.add_edge(i, j);
    result.dag = std::move(dag);
    return result;
}

}  // namespace cfx
