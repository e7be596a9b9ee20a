#include "cfx/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <utility>

#include "cfx/errors.hpp"
#include "json.hpp"

namespace cfx {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

ScoreTriple make_triple(double p_high, double p_low, double d_high, double d_low) {
    ScoreTriple t;
    t.raw_nec = (p_high - d_low) / p_high;
    t.raw_suf = (d_high - p_low) / (1.0 - p_low);
    t.raw_nesuf = d_high - d_low;
    t.nec = clamp01(t.raw_nec);
    t.suf = clamp01(t.raw_suf);
    t.nesuf = clamp01(t.raw_nesuf);
    t.nec_clamped = t.nec != t.raw_nec;
    t.suf_clamped = t.suf != t.raw_suf;
    t.nesuf_clamped = t.nesuf != t.raw_nesuf;
    return t;
}

std::string column_name(const DiscretizedDataset& data, int c) {
    if (c < static_cast<int>(data.labels.size()) && !data.labels[c].empty())
        return data.labels[c];
    return "col" + std::to_string(c);
}

}  // namespace

double cond_prob(const DiscretizedDataset& data, const std::vector<int>& labels,
                 int event, const std::map<int, int>& conditions) {
    int n = data.num_rows();
    if (static_cast<int>(labels.size()) != n)
        throw SchemaMismatchError("cond_prob: labels/rows mismatch");
    if (event != 0 && event != 1) throw Error("cond_prob: event must be 0 or 1");
    for (const auto& [col, code] : conditions) {
        (void)code;
        if (col < 0 || col >= data.num_cols())
            throw SchemaMismatchError("cond_prob: condition column out of range");
    }
    int denom = 0, hits = 0;
    for (int r = 0; r < n; ++r) {
        bool match = true;
        for (const auto& [col, code] : conditions)
            if (data.codes(col)[r] != code) {
                match = false;
                break;
            }
        if (!match) continue;
        ++denom;
        if (labels[r] == event) ++hits;
    }
    if (denom == 0) {
        std::ostringstream msg;
        msg << "cond_prob: no rows match {";
        bool first = true;
        for (const auto& [col, code] : conditions) {
            if (!first) msg << ", ";
            msg << column_name(data, col) << "=" << code;
            first = false;
        }
        msg << "}";
        throw EmptyCellError(msg.str());
    }
    return static_cast<double>(hits) / denom;
}

Scorer::Scorer(const DiscretizedDataset& data, std::vector<int> labels,
               const Classifier* model)
    : data_(&data), model_(model), labels_(std::move(labels)) {
    n_ = data.num_rows();
    p_ = data.num_cols();
    if (p_ < 1) throw SchemaMismatchError("Scorer: dataset has no columns");
    if (n_ < 1) throw InsufficientSamplesError("Scorer: dataset has no rows");
    if (static_cast<int>(labels_.size()) != n_)
        throw SchemaMismatchError("Scorer: labels/rows mismatch");
    for (int l : labels_)
        if (l != 0 && l != 1) throw Error("Scorer: labels must be 0 or 1");
    codes_.resize(p_);
    marginals_.resize(p_);
    for (int c = 0; c < p_; ++c) {
        codes_[c] = data.observed_codes(c);
        const auto& col = data.codes(c);
        for (int r = 0; r < n_; ++r) {
            auto& cell = marginals_[c][col[r]];
            ++cell.first;
            cell.second += labels_[r];
        }
    }
}

double Scorer::conditional(int variable, int code, int event) const {
    const auto& m = marginals_[variable];
    auto it = m.find(code);
    if (it == m.end())
        throw EmptyCellError("cond_prob: no rows match {" + column_name(*data_, variable) +
                             "=" + std::to_string(code) + "}");
    auto [rows, ones] = it->second;
    return static_cast<double>(event == 1 ? ones : rows - ones) / rows;
}

void Scorer::check_graph(const Dag& graph, int target, int variable) const {
    if (variable < 0 || variable >= p_)
        throw SchemaMismatchError("Scorer: variable index out of range");
    if (target < 0) {
        if (graph.num_nodes() < p_)
            throw SchemaMismatchError("Scorer: graph covers fewer nodes than the data");
    } else {
        if (graph.num_nodes() != p_ + 1)
            throw SchemaMismatchError(
                "Scorer: graph must cover the feature columns plus the target");
        if (target > p_) throw SchemaMismatchError("Scorer: target index outside the graph");
    }
}

Scorer::Adjustment Scorer::adjustment_columns(const Dag& graph, int target,
                                              int variable) const {
    Adjustment out;
    int node = (target >= 0 && variable >= target) ? variable + 1 : variable;
    for (int par : graph.parents(node)) {
        if (target >= 0 && par == target) {
            out.uses_label = true;
            continue;
        }
        int c = (target >= 0 && par > target) ? par - 1 : par;
        if (c < p_) out.zcols.push_back(c);
    }
    // parent sets iterate ascending and the label pseudo-column sorts last,
    // so zcols stays sorted (the cache key relies on that)
    if (out.uses_label) out.zcols.push_back(p_);
    return out;
}

bool Scorer::descendant_free(const Dag& graph, int target, int variable) const {
    int node = (target >= 0 && variable >= target) ? variable + 1 : variable;
    for (int d : graph.descendants(node)) {
        if (target >= 0 && d == target) continue;
        int c = (target >= 0 && d > target) ? d - 1 : d;
        if (c < p_) return false;
    }
    return true;
}

const std::vector<int>& Scorer::forced(int variable, int code) const {
    auto key = std::make_pair(variable, code);
    auto it = forced_.find(key);
    if (it != forced_.end()) return it->second;
    std::vector<std::vector<int>> cols;
    cols.reserve(p_);
    for (int c = 0; c < p_; ++c) cols.push_back(data_->codes(c));
    cols[variable].assign(n_, code);
    return forced_.emplace(key, model_->predict_codes(cols)).first->second;
}

double Scorer::forced_mean(int variable, int code, int event) const {
    const auto& preds = forced(variable, code);
    int hits = 0;
    for (int v : preds) hits += v == event;
    return static_cast<double>(hits) / n_;
}

const Scorer::Strata& Scorer::strata_for(const std::vector<int>& zcols) const {
    auto it = strata_.find(zcols);
    if (it != strata_.end()) return it->second;
    Strata s;
    s.of_row.resize(n_);
    std::map<std::vector<int>, int> ids;
    std::vector<int> key(zcols.size());
    for (int r = 0; r < n_; ++r) {
        for (std::size_t j = 0; j < zcols.size(); ++j)
            key[j] = zcols[j] == p_ ? labels_[r] : data_->codes(zcols[j])[r];
        auto [pos, fresh] = ids.emplace(key, static_cast<int>(s.size.size()));
        if (fresh) s.size.push_back(0);
        s.of_row[r] = pos->second;
        ++s.size[pos->second];
    }
    return strata_.emplace(zcols, std::move(s)).first->second;
}

const Scorer::CellTable& Scorer::cells_for(const std::vector<int>& zcols,
                                           int variable) const {
    auto key = std::make_pair(zcols, variable);
    auto it = cell_tables_.find(key);
    if (it != cell_tables_.end()) return it->second;
    const Strata& st = strata_for(zcols);
    CellTable t;
    t.cells.resize(st.size.size());
    const auto& col = data_->codes(variable);
    for (int r = 0; r < n_; ++r) {
        auto& cell = t.cells[st.of_row[r]][col[r]];
        ++cell.first;
        cell.second += labels_[r];
    }
    return cell_tables_.emplace(std::move(key), std::move(t)).first->second;
}

double Scorer::cell_sum(const std::vector<int>& zcols, int variable, int code, int event,
                        bool impute, AdjustmentDiagnostic* diag) const {
    const Strata& st = strata_for(zcols);
    const CellTable& ct = cells_for(zcols, variable);
    int nstrata = static_cast<int>(st.size.size());
    double weighted = 0.0;
    long long kept = 0;
    int empty = 0, imputed = 0;
    std::vector<char> is_empty(nstrata, 0);
    for (int s = 0; s < nstrata; ++s) {
        auto cell = ct.cells[s].find(code);
        if (cell != ct.cells[s].end()) {
            double cond = static_cast<double>(cell->second.second) / cell->second.first;
            if (event == 0) cond = 1.0 - cond;
            weighted += st.size[s] * cond;
            kept += st.size[s];
        } else {
            is_empty[s] = 1;
            ++empty;
        }
    }
    if (empty > 0 && impute) {
        // fill each empty stratum with the classifier's predictions on its
        // own rows, the queried column forced to `code`
        const auto& preds = forced(variable, code);
        std::vector<int> hits(nstrata, 0);
        for (int r = 0; r < n_; ++r)
            if (is_empty[st.of_row[r]] && preds[r] == event) ++hits[st.of_row[r]];
        for (int s = 0; s < nstrata; ++s)
            if (is_empty[s]) {
                weighted += hits[s];
                kept += st.size[s];
                ++imputed;
            }
    }
    if (diag) {
        diag->strata = nstrata;
        diag->empty = empty;
        diag->imputed = imputed;
        diag->coverage = impute ? 1.0 : static_cast<double>(kept) / n_;
    }
    if (kept == 0)
        throw EmptyCellError("do_prob: every stratum empty for " +
                             column_name(*data_, variable) + "=" + std::to_string(code));
    return weighted / kept;
}

double Scorer::do_prob(const Dag* graph, int target, int variable, int code, int event,
                       AdjustmentDiagnostic* diag) const {
    if (variable < 0 || variable >= p_)
        throw SchemaMismatchError("do_prob: variable index out of range");
    if (event != 0 && event != 1) throw Error("do_prob: event must be 0 or 1");
    if (diag) {
        *diag = AdjustmentDiagnostic{};
        diag->variable = variable;
        diag->code = code;
    }
    if (!graph) return conditional(variable, code, event);
    check_graph(*graph, target, variable);
    Adjustment adj = adjustment_columns(*graph, target, variable);
    if (model_) {
        if (!adj.uses_label && descendant_free(*graph, target, variable))
            return forced_mean(variable, code, event);
        if (adj.zcols.empty()) return conditional(variable, code, event);
        return cell_sum(adj.zcols, variable, code, event, true, diag);
    }
    if (adj.zcols.empty()) return conditional(variable, code, event);
    return cell_sum(adj.zcols, variable, code, event, false, diag);
}

ScoreTriple Scorer::pair(const ScoreQuery& query, const Dag* graph, int target) const {
    if (query.variable < 0 || query.variable >= p_)
        throw SchemaMismatchError("pair: variable index out of range");
    if (query.high <= query.low) throw Error("pair: need high > low");
    const auto& m = marginals_[query.variable];
    auto hi = m.find(query.high);
    auto lo = m.find(query.low);
    std::string name = column_name(*data_, query.variable);
    if (hi == m.end())
        throw UndefinedScoreError("no rows with " + name + "=" + std::to_string(query.high));
    if (lo == m.end())
        throw UndefinedScoreError("no rows with " + name + "=" + std::to_string(query.low));
    double p_high = static_cast<double>(hi->second.second) / hi->second.first;
    double p_low = static_cast<double>(lo->second.second) / lo->second.first;
    if (p_high == 0.0)
        throw UndefinedScoreError("P(o | " + name + "=" + std::to_string(query.high) +
                                  ") = 0 (necessity denominator)");
    if (p_low == 1.0)
        throw UndefinedScoreError("P(o' | " + name + "=" + std::to_string(query.low) +
                                  ") = 0 (sufficiency denominator)");
    double d_high = do_prob(graph, target, query.variable, query.high, 1);
    double d_low = do_prob(graph, target, query.variable, query.low, 1);
    return make_triple(p_high, p_low, d_high, d_low);
}

double Scorer::max_nesuf(const Dag* graph, int target, int variable) const {
    if (variable < 0 || variable >= p_)
        throw SchemaMismatchError("max_nesuf: variable index out of range");
    const auto& cs = codes_[variable];
    bool any = false;
    double best = 0.0;
    for (std::size_t j = 1; j < cs.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            try {
                ScoreTriple t = pair({variable, cs[j], cs[i]}, graph, target);
                if (!any || t.nesuf > best) best = t.nesuf;
                any = true;
            } catch (const UndefinedScoreError&) {
            }
        }
    if (!any)
        throw NoValidPairError("max_nesuf: every code pair undefined for " +
                               column_name(*data_, variable));
    return best;
}

ScoreReport Scorer::report(const Dag* graph, int target) const {
    ScoreReport rep;
    if (graph) {
        check_graph(*graph, target, 0);
        rep.graph = *graph;
    }
    for (int v = 0; v < p_; ++v) {
        VariableScores vs;
        vs.variable = v;
        vs.name = column_name(*data_, v);
        vs.codes = codes_[v];
        if (graph && adjustment_columns(*graph, target, v).uses_label)
            rep.reverse_causation.push_back(v);

        std::map<int, double> pc, dp;
        for (int c : vs.codes) {
            pc[c] = conditional(v, c, 1);
            if (!graph) {
                dp[c] = pc[c];
                continue;
            }
            AdjustmentDiagnostic diag;
            try {
                dp[c] = do_prob(graph, target, v, c, 1, &diag);
            } catch (const EmptyCellError&) {
                continue;  // pairs touching this code are skipped below
            }
            if (diag.empty > 0) rep.adjustments.push_back(diag);
        }

        for (std::size_t j = 1; j < vs.codes.size(); ++j)
            for (std::size_t i = 0; i < j; ++i) {
                int high = vs.codes[j], low = vs.codes[i];
                if (pc[high] == 0.0) {
                    rep.skipped.push_back(
                        {v, high, low, "P(o | high) = 0 (necessity denominator)"});
                    continue;
                }
                if (pc[low] == 1.0) {
                    rep.skipped.push_back(
                        {v, high, low, "P(o' | low) = 0 (sufficiency denominator)"});
                    continue;
                }
                if (!dp.count(high) || !dp.count(low)) {
                    rep.skipped.push_back({v, high, low, "interventional estimate undefined"});
                    continue;
                }
                ScoreTriple t = make_triple(pc[high], pc[low], dp[high], dp[low]);
                if (!vs.has_max || t.nesuf > vs.max_nesuf) vs.max_nesuf = t.nesuf;
                vs.has_max = true;
                vs.pairs.push_back({high, low, t});
            }
        rep.variables.push_back(std::move(vs));
    }
    return rep;
}

ScoreReport Scorer::report_no_graph() const { return report(nullptr, -1); }

std::vector<ScoreReport> Scorer::reports(const DiscoveryOutput& graphs, int target) const {
    std::vector<ScoreReport> out;
    if (graphs.no_graph) {
        out.push_back(report_no_graph());
        return out;
    }
    if (graphs.dags.empty()) throw Error("reports: discovery output holds no graphs");
    out.reserve(graphs.dags.size());
    for (const Dag& d : graphs.dags) out.push_back(report(&d, target));
    return out;
}

const VariableScores& ScoreReport::variable(int v) const {
    for (const auto& vs : variables)
        if (vs.variable == v) return vs;
    throw Error("ScoreReport: no entry for variable " + std::to_string(v));
}

std::string ScoreReport::to_json() const {
    nlohmann::json j;
    j["graph"] = graph ? nlohmann::json::parse(graph->to_json()) : nlohmann::json();
    j["variables"] = nlohmann::json::array();
    for (const auto& vs : variables) {
        nlohmann::json v;
        v["variable"] = vs.variable;
        v["name"] = vs.name;
        v["codes"] = vs.codes;
        if (vs.has_max)
            v["max_nesuf"] = vs.max_nesuf;
        else
            v["max_nesuf"] = nullptr;
        v["pairs"] = nlohmann::json::array();
        for (const auto& p : vs.pairs) {
            v["pairs"].push_back({{"high", p.high},
                                  {"low", p.low},
                                  {"nec", p.scores.nec},
                                  {"suf", p.scores.suf},
                                  {"nesuf", p.scores.nesuf},
                                  {"raw_nec", p.scores.raw_nec},
                                  {"raw_suf", p.scores.raw_suf},
                                  {"raw_nesuf", p.scores.raw_nesuf},
                                  {"nec_clamped", p.scores.nec_clamped},
                                  {"suf_clamped", p.scores.suf_clamped},
                                  {"nesuf_clamped", p.scores.nesuf_clamped}});
        }
        j["variables"].push_back(std::move(v));
    }
    j["skipped"] = nlohmann::json::array();
    for (const auto& s : skipped)
        j["skipped"].push_back({{"variable", s.variable},
                                {"high", s.high},
                                {"low", s.low},
                                {"reason", s.reason}});
    j["adjustments"] = nlohmann::json::array();
    for (const auto& a : adjustments)
        j["adjustments"].push_back({{"variable", a.variable},
                                    {"code", a.code},
                                    {"strata", a.strata},
                                    {"empty", a.empty},
                                    {"coverage", a.coverage},
                                    {"imputed", a.imputed}});
    j["reverse_causation"] = reverse_causation;
    return j.dump(2);
}

std::string ScoreReport::to_csv() const {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "variable,x,x_prime,nec,suf,nesuf,clamped,max_nesuf\n";
    for (const auto& vs : variables)
        for (const auto& p : vs.pairs) {
            bool clamped =
                p.scores.nec_clamped || p.scores.suf_clamped || p.scores.nesuf_clamped;
            out << vs.name << ',' << p.high << ',' << p.low << ',' << p.scores.nec << ','
                << p.scores.suf << ',' << p.scores.nesuf << ',' << (clamped ? 1 : 0) << ','
                << vs.max_nesuf << '\n';
        }
    return out.str();
}

double do_prob(const DiscretizedDataset& data, const std::vector<int>& labels,
               const Dag* graph, int variable, int code, int event) {
    return Scorer(data, labels).do_prob(graph, -1, variable, code, event);
}

ScoreTriple scores_for_pair(const ScoreQuery& query, const DiscretizedDataset& data,
                            const std::vector<int>& labels, const Dag* graph) {
    return Scorer(data, labels).pair(query, graph, -1);
}

double max_nesuf(const DiscretizedDataset& data, const std::vector<int>& labels,
                 const Dag* graph, int variable) {
    return Scorer(data, labels).max_nesuf(graph, -1, variable);
}

ScoreReport explain(const DiscretizedDataset& data, const std::vector<int>& labels,
                    const Dag* graph, const Classifier* model, int target) {
    return Scorer(data, labels, model).report(graph, target);
}

std::vector<ScoreReport> explain(const DiscretizedDataset& data,
                                 const std::vector<int>& labels,
                                 const DiscoveryOutput& graphs, int target,
                                 const Classifier* model) {
    return Scorer(data, labels, model).reports(graphs, target);
}

}  // namespace cfx
