#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "numpar/types.hpp"

namespace numpar {

// Mixture of lognormal-link regressions with K fixed and uniform weights
// pi_k = 1/K:  complexity ~ LogNormal(alpha_k + beta_k * lexicon_size, sigma_k)
// Priors: alpha, beta ~ Normal(0,1); sigma ~ HalfNormal(0,1).
struct MixtureParams {
    int K = 1;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> sigma;
};

struct ParamIntervals {
    std::vector<std::array<double, 2>> alpha;
    std::vector<std::array<double, 2>> beta;
    std::vector<std::array<double, 2>> sigma;
};

struct MixtureFit {
    MixtureParams params;                              // components sorted by beta
    std::vector<std::vector<double>> responsibilities; // L x K, rows sum to 1
    double log_posterior = 0.0;
    ParamIntervals intervals;                          // 95% Laplace intervals
    bool converged = false;
    std::vector<double> objective_trace;               // winning restart, per iteration
    int degenerate_restarts = 0;
};

enum class PredictiveMode { Plugin, Laplace };

struct FitConfig {
    int restarts = 50;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    int max_iter = 2000;
    bool use_priors = true;       // test mode: false drops all prior terms
    PredictiveMode predictive = PredictiveMode::Plugin;
    int threads = 0;              // 0 = auto
};

struct RegressionData {
    std::vector<double> x;  // lexicon sizes
    std::vector<double> y;  // complexities, must be > 0
};

RegressionData to_regression_data(const std::vector<MetricPoint>& points);

// Marginal log posterior (log-sum-exp over components per point, plus priors
// unless disabled). Throws NonPositiveComplexity.
double mixture_log_posterior(const MixtureParams& params, const RegressionData& data,
                             bool use_priors = true);
double mixture_log_posterior(const MixtureParams& params, const std::vector<MetricPoint>& points,
                             bool use_priors = true);

// Posterior membership probabilities under fixed parameters; rows sum to 1.
std::vector<std::vector<double>> responsibilities(const MixtureParams& params,
                                                  const RegressionData& data);

// Log predictive density of one point under the fitted mixture (plug-in MAP).
double log_predictive(const MixtureParams& params, double x, double y);

// MAP-EM: best of `restarts` seeded initializations, ECM updates
// (prior-regularized weighted least squares for alpha/beta, safeguarded
// Newton for sigma), components canonically ordered by beta.
MixtureFit fit_em(const RegressionData& data, int K, const FitConfig& config = {});

struct LooResult {
    double elpd = 0.0;
    std::vector<double> pointwise;
};

// Exact leave-one-out: refit per fold, evaluate the held-out log predictive
// density (plug-in, or Gauss-Hermite-averaged under PredictiveMode::Laplace).
LooResult loo_elpd(const RegressionData& data, int K, const FitConfig& config = {});

// Maximizes the stacked log score over the weight simplex by projected
// gradient ascent (tolerance 1e-10); input rows are points, columns models.
std::vector<double> stacking_weights(const std::vector<std::vector<double>>& pointwise_by_model);

struct ModelComparison {
    std::map<int, double> elpd;
    double elpd_diff = 0.0;  // elpd(K_small) - elpd(K_large) for the first two K
    double se_diff = 0.0;    // sqrt(L * sample variance of pointwise diffs)
    std::vector<double> stacking;             // aligned with sorted K values
    std::map<int, std::vector<double>> pointwise;
};

ModelComparison compare_models(const RegressionData& data, std::vector<int> k_values,
                               const FitConfig& config = {});

}  // namespace numpar
