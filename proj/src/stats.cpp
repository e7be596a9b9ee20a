#include "cfx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

std::vector<double> standardize(const std::vector<double>& x) {
    if (x.empty()) throw Error("standardize: empty column");
    double mu = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    double sd = std::sqrt(ss / static_cast<double>(x.size()));
    if (sd == 0.0) throw DegenerateColumnError("standardize: constant column");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mu) / sd;
    return out;
}

Eigen::MatrixXd correlation_matrix(const std::vector<std::vector<double>>& cols) {
    int p = static_cast<int>(cols.size());
    if (p == 0) throw Error("correlation_matrix: no columns");
    int n = static_cast<int>(cols[0].size());
    if (n < 3) throw InsufficientSamplesError("correlation_matrix: need at least 3 rows");

    Eigen::MatrixXd z(n, p);
    for (int c = 0; c < p; ++c) {
        if (static_cast<int>(cols[c].size()) != n)
            throw ShapeMismatchError("correlation_matrix: ragged columns");
        std::vector<double> s = standardize(cols[c]);
        for (int r = 0; r < n; ++r) z(r, c) = s[r];
    }
    Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n);
    corr.diagonal().setOnes();
    return corr;
}

double partial_correlation(const Eigen::MatrixXd& corr, int i, int j,
                           const std::vector<int>& cond) {
    int p = static_cast<int>(corr.rows());
    auto check = [&](int v) {
        if (v < 0 || v >= p) throw Error("partial_correlation: index out of range");
    };
    check(i);
    check(j);
    if (cond.empty()) return corr(i, j);

    std::vector<int> sel = {i, j};
    for (int v : cond) {
        check(v);
        sel.push_back(v);
    }
    int k = static_cast<int>(sel.size());
    Eigen::MatrixXd sub(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sub(r, c) = corr(sel[r], sel[c]);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (!lu.isInvertible())
        throw SingularSubmatrixError("partial_correlation: singular correlation submatrix");
    Eigen::MatrixXd prec = lu.inverse();
    return -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
}

// ---------------------------------------------------------------------------
// Distribution quantiles

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("inverse_normal_cdf: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Halley step against the exact cdf
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

namespace {

// regularized lower incomplete gamma P(a, x)
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double sum = 1.0 / a, del = sum, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

}  // namespace

double gamma_quantile(double p, double shape, double scale) {
    if (!(p > 0.0 && p < 1.0)) throw Error("gamma_quantile: p outside (0,1)");
    if (shape <= 0.0 || scale <= 0.0) throw Error("gamma_quantile: bad parameters");
    double hi = shape;
    while (gamma_p(shape, hi) < p) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (gamma_p(shape, mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi) * scale;
}

bool fisher_z_independent(double r, int n, int s, const CiTestConfig& cfg) {
    if (n <= s + 3)
        throw InsufficientSamplesError("fisher_z_independent: need n > s + 3");
    double cap = 1.0 - 1e-12;
    r = std::clamp(r, -cap, cap);
    double z = 0.5 * std::log((1.0 + r) / (1.0 - r));
    double stat = std::sqrt(static_cast<double>(n - s - 3)) * std::fabs(z);
    return stat <= inverse_normal_cdf(1.0 - cfg.alpha / 2.0);
}

double neg_entropy_approx(const std::vector<double>& x) {
    if (x.empty()) throw Error("neg_entropy_approx: empty column");
    {
        double mu = mean_of(x);
        double ss = 0.0;
        for (double v : x) ss += (v - mu) * (v - mu);
        if (ss == 0.0) throw DegenerateColumnError("neg_entropy_approx: constant column");
    }
    const double k1 = 79.047, k2 = 7.4129, gauss_logcosh = 0.37457;
    double m_logcosh = 0.0, m_gaussmom = 0.0;
    for (double v : x) {
        m_logcosh += std::log(std::cosh(v));
        m_gaussmom += v * std::exp(-0.5 * v * v);
    }
    m_logcosh /= static_cast<double>(x.size());
    m_gaussmom /= static_cast<double>(x.size());
    double d1 = m_logcosh - gauss_logcosh;
    return k1 * d1 * d1 + k2 * m_gaussmom * m_gaussmom;
}

// ---------------------------------------------------------------------------
// HSIC

namespace {

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& pts) {
    int m = static_cast<int>(pts.rows());
    Eigen::MatrixXd d2(m, m);
    for (int i = 0; i < m; ++i) {
        d2(i, i) = 0.0;
        for (int j = i + 1; j < m; ++j) {
            double d = (pts.row(i) - pts.row(j)).squaredNorm();
            d2(i, j) = d;
            d2(j, i) = d;
        }
    }
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (d2(i, j) > 0.0) dists.push_back(d2(i, j));
    // median heuristic: sigma = median pairwise distance, so sigma^2 is the
    // median of the squared distances
    double sigma2 = 1.0;
    if (!dists.empty()) {
        auto mid = dists.begin() + dists.size() / 2;
        std::nth_element(dists.begin(), mid, dists.end());
        if (*mid > 0.0) sigma2 = *mid;
    }
    return (-d2 / (2.0 * sigma2)).array().exp().matrix();
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& k) {
    Eigen::VectorXd rowm = k.rowwise().mean();
    double total = rowm.mean();
    Eigen::MatrixXd c = k;
    c.colwise() -= rowm;
    c.rowwise() -= rowm.transpose();
    c.array() += total;
    return c;
}

Eigen::MatrixXd pack_rows(const std::vector<std::vector<double>>& cols,
                          const std::vector<int>& rows) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < rows.size(); ++r) out(r, c) = cols[c][rows[r]];
    return out;
}

}  // namespace

HsicResult hsic_statistic(const std::vector<std::vector<double>>& x_cols,
                          const std::vector<std::vector<double>>& y_cols,
                          double alpha, int max_rows) {
    if (x_cols.empty() || y_cols.empty()) throw Error("hsic_statistic: no columns");
    int n = static_cast<int>(x_cols[0].size());
    for (const auto& c : x_cols)
        if (static_cast<int>(c.size()) != n) throw ShapeMismatchError("hsic: ragged x");
    for (const auto& c : y_cols)
        if (static_cast<int>(c.size()) != n) throw ShapeMismatchError("hsic: ragged y");
    if (n < 20) throw InsufficientSamplesError("hsic_statistic: need at least 20 rows");

    std::vector<int> rows;
    if (n <= max_rows) {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        rows.resize(max_rows);
        for (int i = 0; i < max_rows; ++i)
            rows[i] = static_cast<int>(static_cast<long long>(i) * n / max_rows);
    }
    int m = static_cast<int>(rows.size());

    Eigen::MatrixXd k = gaussian_gram(pack_rows(x_cols, rows));
    Eigen::MatrixXd l = gaussian_gram(pack_rows(y_cols, rows));
    Eigen::MatrixXd kc = double_center(k);
    Eigen::MatrixXd lc = double_center(l);

    double md = static_cast<double>(m);
    double stat = kc.cwiseProduct(lc).sum() / md;

    double mu_x = (k.sum() - md) / (md * (md - 1.0));
    double mu_y = (l.sum() - md) / (md * (md - 1.0));
    double mean_h = (1.0 + mu_x * mu_y - mu_x - mu_y) / md;

    Eigen::ArrayXXd prod = (kc.cwiseProduct(lc) / 6.0).array().square();
    double off_sum = prod.sum() - prod.matrix().trace();
    double var_h = 72.0 * (md - 4.0) * (md - 5.0) /
                   (md * (md - 1.0) * (md - 2.0) * (md - 3.0)) * off_sum /
                   (md * (md - 1.0));

    double threshold = std::numeric_limits<double>::infinity();
    if (mean_h > 0.0 && var_h > 0.0) {
        double shape = mean_h * mean_h / var_h;
        double scale = md * var_h / mean_h;
        threshold = gamma_quantile(1.0 - alpha, shape, scale);
    }
    return {stat, threshold};
}

HsicResult hsic_statistic(const std::vector<double>& x, const std::vector<double>& y,
                          double alpha, int max_rows) {
    return hsic_statistic(std::vector<std::vector<double>>{x},
                          std::vector<std::vector<double>>{y}, alpha, max_rows);
}

// ---------------------------------------------------------------------------
// Regression

OlsFit ols_fit(const std::vector<double>& y,
               const std::vector<std::vector<double>>& predictors) {
    int n = static_cast<int>(y.size());
    if (n < 2) throw Error("ols_fit: need at least 2 rows");
    int p = static_cast<int>(predictors.size());
    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    for (int c = 0; c < p; ++c) {
        if (static_cast<int>(predictors[c].size()) != n)
            throw ShapeMismatchError("ols_fit: ragged predictors");
        for (int r = 0; r < n; ++r) design(r, c + 1) = predictors[c][r];
    }
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p + 1)
        throw RankDeficientError("ols_fit: design matrix is rank deficient");
    Eigen::VectorXd beta = qr.solve(yv);
    Eigen::VectorXd fit = design * beta;

    OlsFit out;
    out.intercept = beta(0);
    out.coefs.assign(p, 0.0);
    for (int c = 0; c < p; ++c) out.coefs[c] = beta(c + 1);
    out.fitted.assign(fit.data(), fit.data() + n);
    out.residuals.resize(n);
    for (int r = 0; r < n; ++r) out.residuals[r] = y[r] - fit(r);
    return out;
}

namespace {

struct TreeFitter {
    const std::vector<double>& y;
    const std::vector<std::vector<double>>& x;
    int min_leaf;
    std::vector<double>& fitted;
    std::vector<int> idx;

    void leaf(int begin, int end) {
        double sum = 0.0;
        for (int i = begin; i < end; ++i) sum += y[idx[i]];
        double mean = sum / (end - begin);
        for (int i = begin; i < end; ++i) fitted[idx[i]] = mean;
    }

    void split(int begin, int end, int depth) {
        int count = end - begin;
        if (depth <= 0 || count < 2 * min_leaf) {
            leaf(begin, end);
            return;
        }
        double total = 0.0, total2 = 0.0;
        for (int i = begin; i < end; ++i) {
            total += y[idx[i]];
            total2 += y[idx[i]] * y[idx[i]];
        }
        double node_sse = total2 - total * total / count;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_sse = node_sse - 1e-12;
        std::vector<int> order(idx.begin() + begin, idx.begin() + end);
        for (std::size_t f = 0; f < x.size(); ++f) {
            const auto& col = x[f];
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return col[a] < col[b]; });
            double lsum = 0.0, lsum2 = 0.0;
            for (int i = 0; i < count - 1; ++i) {
                double v = y[order[i]];
                lsum += v;
                lsum2 += v * v;
                int nl = i + 1, nr = count - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                if (col[order[i]] == col[order[i + 1]]) continue;
                double rsum = total - lsum, rsum2 = total2 - lsum2;
                double sse = (lsum2 - lsum * lsum / nl) + (rsum2 - rsum * rsum / nr);
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (col[order[i]] + col[order[i + 1]]);
                }
            }
        }
        if (best_feature < 0) {
            leaf(begin, end);
            return;
        }
        const auto& col = x[best_feature];
        auto mid_it = std::stable_partition(
            idx.begin() + begin, idx.begin() + end,
            [&](int r) { return col[r] <= best_threshold; });
        int mid = static_cast<int>(mid_it - idx.begin());
        split(begin, mid, depth - 1);
        split(mid, end, depth - 1);
    }
};

}  // namespace

RegressFit tree_regress(const std::vector<double>& y,
                        const std::vector<std::vector<double>>& predictors,
                        int max_depth, int min_leaf) {
    int n = static_cast<int>(y.size());
    if (n < 2) throw Error("tree_regress: need at least 2 rows");
    for (const auto& c : predictors)
        if (static_cast<int>(c.size()) != n)
            throw ShapeMismatchError("tree_regress: ragged predictors");

    RegressFit out;
    out.fitted.assign(n, 0.0);
    if (predictors.empty()) {
        double mean = mean_of(y);
        std::fill(out.fitted.begin(), out.fitted.end(), mean);
    } else {
        TreeFitter fitter{y, predictors, std::max(1, min_leaf), out.fitted, {}};
        fitter.idx.resize(n);
        std::iota(fitter.idx.begin(), fitter.idx.end(), 0);
        fitter.split(0, n, max_depth);
    }
    out.residuals.resize(n);
    for (int r = 0; r < n; ++r) out.residuals[r] = y[r] - out.fitted[r];
    return out;
}

RegressFit kernel_ridge_regress(const std::vector<double>& y,
                                const std::vector<std::vector<double>>& predictors,
                                double lambda) {
    int n = static_cast<int>(y.size());
    if (n < 2) throw Error("kernel_ridge_regress: need at least 2 rows");
    if (predictors.empty()) return tree_regress(y, predictors, 0, 1);
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    Eigen::MatrixXd k = gaussian_gram(pack_rows(predictors, rows));
    Eigen::MatrixXd reg = k + lambda * n * Eigen::MatrixXd::Identity(n, n);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    Eigen::VectorXd alpha = reg.ldlt().solve(yv);
    Eigen::VectorXd fit = k * alpha;

    RegressFit out;
    out.fitted.assign(fit.data(), fit.data() + n);
    out.residuals.resize(n);
    for (int r = 0; r < n; ++r) out.residuals[r] = y[r] - fit(r);
    return out;
}

}  // namespace cfx
