#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cfx {

struct CiTestConfig {
    double alpha = 0.05;
};

// Subtract the mean and divide by the (population) standard deviation.
// Throws DegenerateColumnError on a constant column.
std::vector<double> standardize(const std::vector<double>& x);

// Pearson correlations; unit diagonal. Throws DegenerateColumnError on a
// constant column, InsufficientSamplesError below 3 rows.
Eigen::MatrixXd correlation_matrix(const std::vector<std::vector<double>>& cols);

// Partial correlation of i and j given cond, via inversion of the correlation
// submatrix on {i, j} + cond. Throws SingularSubmatrixError.
double partial_correlation(const Eigen::MatrixXd& corr, int i, int j,
                           const std::vector<int>& cond);

// Quantile function of the standard normal (Acklam's approximation plus one
// Halley refinement); p in (0, 1).
double inverse_normal_cdf(double p);

// Quantile of the Gamma(shape, scale) distribution at probability p.
double gamma_quantile(double p, double shape, double scale);

// True when the z-transformed (partial) correlation is within the two-sided
// acceptance band: sqrt(n - s - 3) * |atanh(r)| <= Phi^-1(1 - alpha/2).
// s is the conditioning-set size. Throws InsufficientSamplesError when
// n <= s + 3.
bool fisher_z_independent(double r, int n, int s, const CiTestConfig& cfg = {});

// Maximum-entropy negentropy approximation from log cosh and Gaussian-moment
// nonlinearities; zero for Gaussian input, positive otherwise (up to noise).
// Input must be standardized.
double neg_entropy_approx(const std::vector<double>& x);

struct HsicResult {
    double statistic;  // m times the biased HSIC estimate
    double threshold;  // gamma-approximation critical value at alpha
    bool independent() const { return statistic <= threshold; }
};

// HSIC independence statistic between two (possibly multivariate) samples
// with Gaussian kernels and median-heuristic bandwidths. Rows beyond max_rows
// are subsampled deterministically with an even stride. Throws
// InsufficientSamplesError below 20 rows.
HsicResult hsic_statistic(const std::vector<std::vector<double>>& x_cols,
                          const std::vector<std::vector<double>>& y_cols,
                          double alpha = 0.05, int max_rows = 1000);
HsicResult hsic_statistic(const std::vector<double>& x, const std::vector<double>& y,
                          double alpha = 0.05, int max_rows = 1000);

struct OlsFit {
    std::vector<double> coefs;  // one per predictor
    double intercept = 0.0;
    std::vector<double> fitted;
    std::vector<double> residuals;
};

// Least squares of y on the predictors plus an intercept.
// Throws RankDeficientError when the design matrix loses rank.
OlsFit ols_fit(const std::vector<double>& y,
               const std::vector<std::vector<double>>& predictors);

struct RegressFit {
    std::vector<double> fitted;
    std::vector<double> residuals;
};

// Piecewise-constant regression tree (squared-error splits).
RegressFit tree_regress(const std::vector<double>& y,
                        const std::vector<std::vector<double>>& predictors,
                        int max_depth = 6, int min_leaf = 5);

// Gaussian-kernel ridge regression; O(n^3), meant for modest sample sizes.
RegressFit kernel_ridge_regress(const std::vector<double>& y,
                                const std::vector<std::vector<double>>& predictors,
                                double lambda = 1e-3);

}  // namespace cfx
