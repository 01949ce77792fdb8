// MAP-EM for the lognormal mixture regression, Laplace intervals, exact
// leave-one-out ELPD and stacking weights.

#include "numpar/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "numpar/errors.hpp"
#include "numpar/parallel.hpp"
#include "numpar/rng.hpp"

namespace numpar {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSigmaFloor = 1e-6;

double lognormal_logpdf(double y, double mu, double sigma) {
    const double z = (std::log(y) - mu) / sigma;
    return -std::log(y) - std::log(sigma) - 0.5 * kLog2Pi - 0.5 * z * z;
}

double normal_logpdf(double t) { return -0.5 * kLog2Pi - 0.5 * t * t; }

// HalfNormal(0,1) over sigma > 0.
double halfnormal_logpdf(double s) { return 0.5 * std::log(2.0) - 0.5 * kLog2Pi - 0.5 * s * s; }

void check_params(const MixtureParams& params) {
    const auto k = static_cast<std::size_t>(params.K);
    if (params.K < 1 || params.alpha.size() != k || params.beta.size() != k ||
        params.sigma.size() != k) {
        throw InvalidArgument("mixture parameter vectors must all have length K");
    }
    for (double s : params.sigma) {
        if (!(s > 0.0)) throw InvalidArgument("sigma must be positive");
    }
}

void check_data(const RegressionData& data) {
    if (data.x.size() != data.y.size()) {
        throw InvalidArgument("x and y must have equal length");
    }
    for (double y : data.y) {
        if (!(y > 0.0)) throw NonPositiveComplexity(y);
    }
}

double prior_log_density(const MixtureParams& params) {
    double total = 0.0;
    for (int k = 0; k < params.K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        total += normal_logpdf(params.alpha[i]);
        total += normal_logpdf(params.beta[i]);
        total += halfnormal_logpdf(params.sigma[i]);
    }
    return total;
}

// Per-point log mixture density, log-sum-exp stabilized.
double point_log_density(const MixtureParams& params, double x, double y) {
    const double log_pi = -std::log(static_cast<double>(params.K));
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(params.K));
    for (int k = 0; k < params.K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double mu = params.alpha[i] + params.beta[i] * x;
        terms[i] = log_pi + lognormal_logpdf(y, mu, params.sigma[i]);
        max_term = std::max(max_term, terms[i]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

// --- small dense linear algebra for the Laplace step ---

// Cholesky inverse of a symmetric positive definite matrix (row-major n x n).
// Adds growing jitter to the diagonal until the factorization succeeds.
std::vector<double> spd_inverse(std::vector<double> a, std::size_t n) {
    double jitter = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        std::vector<double> m = a;
        if (jitter > 0.0) {
            for (std::size_t i = 0; i < n; ++i) m[i * n + i] += jitter;
        }
        // in-place Cholesky, L in the lower triangle
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = m[i * n + j];
                for (std::size_t p = 0; p < j; ++p) sum -= m[i * n + p] * m[j * n + p];
                if (i == j) {
                    if (!(sum > 0.0)) {
                        ok = false;
                        break;
                    }
                    m[i * n + i] = std::sqrt(sum);
                } else {
                    m[i * n + j] = sum / m[j * n + j];
                }
            }
        }
        if (!ok) {
            jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
            continue;
        }
        // invert via L: solve L z = e_j, then L^T x = z
        std::vector<double> inv(n * n, 0.0);
        std::vector<double> z(n);
        for (std::size_t col = 0; col < n; ++col) {
            for (std::size_t i = 0; i < n; ++i) {
                double sum = (i == col) ? 1.0 : 0.0;
                for (std::size_t p = 0; p < i; ++p) sum -= m[i * n + p] * z[p];
                z[i] = sum / m[i * n + i];
            }
            for (std::size_t i = n; i-- > 0;) {
                double sum = z[i];
                for (std::size_t p = i + 1; p < n; ++p) sum -= m[p * n + i] * inv[p * n + col];
                inv[i * n + col] = sum / m[i * n + i];
            }
        }
        return inv;
    }
    throw DegenerateFit("Laplace Hessian is not positive definite");
}

std::vector<double> flatten_params(const MixtureParams& p) {
    std::vector<double> theta;
    theta.insert(theta.end(), p.alpha.begin(), p.alpha.end());
    theta.insert(theta.end(), p.beta.begin(), p.beta.end());
    theta.insert(theta.end(), p.sigma.begin(), p.sigma.end());
    return theta;
}

MixtureParams unflatten_params(int K, const std::vector<double>& theta) {
    const auto k = static_cast<std::size_t>(K);
    MixtureParams p;
    p.K = K;
    p.alpha.assign(theta.begin(), theta.begin() + k);
    p.beta.assign(theta.begin() + k, theta.begin() + 2 * k);
    p.sigma.assign(theta.begin() + 2 * k, theta.begin() + 3 * k);
    return p;
}

// 95% intervals from the inverse negative Hessian of the log posterior at
// the MAP, central finite differences in the original coordinates.
ParamIntervals laplace_intervals(const MixtureParams& map_params, const RegressionData& data,
                                 bool use_priors, std::vector<double>* covariance_out = nullptr) {
    const std::vector<double> theta0 = flatten_params(map_params);
    const std::size_t n = theta0.size();

    auto eval = [&](const std::vector<double>& theta) {
        MixtureParams p = unflatten_params(map_params.K, theta);
        for (double& s : p.sigma) s = std::max(s, 0.25 * kSigmaFloor);
        return mixture_log_posterior(p, data, use_priors);
    };

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = 1e-4 * (1.0 + std::abs(theta0[i]));
        if (i >= 2 * static_cast<std::size_t>(map_params.K)) {
            h[i] = std::min(h[i], 0.45 * theta0[i]);  // keep sigma positive
        }
    }

    std::vector<double> neg_hessian(n * n, 0.0);
    const double f0 = eval(theta0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double second;
            if (i == j) {
                auto tp = theta0, tm = theta0;
                tp[i] += h[i];
                tm[i] -= h[i];
                second = (eval(tp) - 2.0 * f0 + eval(tm)) / (h[i] * h[i]);
            } else {
                auto tpp = theta0, tpm = theta0, tmp = theta0, tmm = theta0;
                tpp[i] += h[i]; tpp[j] += h[j];
                tpm[i] += h[i]; tpm[j] -= h[j];
                tmp[i] -= h[i]; tmp[j] += h[j];
                tmm[i] -= h[i]; tmm[j] -= h[j];
                second = (eval(tpp) - eval(tpm) - eval(tmp) + eval(tmm)) / (4.0 * h[i] * h[j]);
            }
            neg_hessian[i * n + j] = -second;
            neg_hessian[j * n + i] = -second;
        }
    }

    const std::vector<double> cov = spd_inverse(neg_hessian, n);
    if (covariance_out) *covariance_out = cov;

    ParamIntervals intervals;
    const auto k = static_cast<std::size_t>(map_params.K);
    auto interval_at = [&](std::size_t i) -> std::array<double, 2> {
        const double hw = 1.96 * std::sqrt(std::max(cov[i * n + i], 0.0));
        return {theta0[i] - hw, theta0[i] + hw};
    };
    for (std::size_t i = 0; i < k; ++i) intervals.alpha.push_back(interval_at(i));
    for (std::size_t i = 0; i < k; ++i) intervals.beta.push_back(interval_at(k + i));
    for (std::size_t i = 0; i < k; ++i) intervals.sigma.push_back(interval_at(2 * k + i));
    return intervals;
}

// --- EM machinery ---

struct EmState {
    MixtureParams params;
    std::vector<std::vector<double>> resp;  // L x K
    double log_posterior = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    bool converged = false;
    bool degenerate = false;
};

// Prior-regularized weighted least squares for (alpha_k, beta_k) at the
// current sigma_k, then a prior-penalized sigma_k update: safeguarded Newton
// on d/dsigma [ -R log s - S/(2 s^2) - s^2/2 ] = 0, i.e. s^4 + R s^2 - S = 0,
// started from the closed-form positive root.
bool m_step(const RegressionData& data, const std::vector<std::vector<double>>& resp,
            bool use_priors, MixtureParams& params) {
    const std::size_t L = data.x.size();
    for (int k = 0; k < params.K; ++k) {
        const auto ki = static_cast<std::size_t>(k);
        double w_sum = 0.0, sx = 0.0, sxx = 0.0, sz = 0.0, sxz = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double w = resp[l][ki];
            const double z = std::log(data.y[l]);
            w_sum += w;
            sx += w * data.x[l];
            sxx += w * data.x[l] * data.x[l];
            sz += w * z;
            sxz += w * data.x[l] * z;
        }
        const double s2 = params.sigma[ki] * params.sigma[ki];
        const double ridge = use_priors ? 1.0 : 0.0;
        const double a11 = w_sum / s2 + ridge;
        const double a12 = sx / s2;
        const double a22 = sxx / s2 + ridge;
        const double b1 = sz / s2;
        const double b2 = sxz / s2;
        const double det = a11 * a22 - a12 * a12;
        if (!(std::abs(det) > 1e-300)) return false;
        const double alpha = (b1 * a22 - b2 * a12) / det;
        const double beta = (a11 * b2 - a12 * b1) / det;
        params.alpha[ki] = alpha;
        params.beta[ki] = beta;

        double residual = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double z = std::log(data.y[l]);
            const double e = z - alpha - beta * data.x[l];
            residual += resp[l][ki] * e * e;
        }

        double sigma;
        if (use_priors) {
            // closed-form root of s^4 + R s^2 - S = 0
            const double s2_root = 0.5 * (-w_sum + std::sqrt(w_sum * w_sum + 4.0 * residual));
            sigma = std::sqrt(std::max(s2_root, 0.0));
            if (sigma >= kSigmaFloor) {
                // polish with safeguarded Newton on g(s) = -R/s + S/s^3 - s
                double lo = 0.25 * kSigmaFloor;
                double hi = std::max(2.0 * sigma, 1.0);
                for (int it = 0; it < 64; ++it) {
                    const double g = -w_sum / sigma + residual / (sigma * sigma * sigma) - sigma;
                    if (std::abs(g) < 1e-13) break;
                    if (g > 0.0) lo = sigma; else hi = sigma;
                    const double dg =
                        w_sum / (sigma * sigma) - 3.0 * residual / (sigma * sigma * sigma * sigma) - 1.0;
                    double next = sigma - g / dg;
                    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                    if (std::abs(next - sigma) < 1e-15) {
                        sigma = next;
                        break;
                    }
                    sigma = next;
                }
            }
        } else {
            if (!(w_sum > 0.0)) return false;
            sigma = std::sqrt(residual / w_sum);
        }
        if (!(sigma >= kSigmaFloor)) return false;  // degenerate component
        params.sigma[ki] = sigma;
    }
    return true;
}

// Hard partition stratified along x: contiguous x-ordered blocks at random
// cut points, one block per component.
std::vector<std::vector<double>> initial_responsibilities(const RegressionData& data, int K,
                                                          Rng& rng) {
    const std::size_t L = data.x.size();
    std::vector<std::size_t> order(L);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&data](std::size_t a, std::size_t b) {
        if (data.x[a] != data.x[b]) return data.x[a] < data.x[b];
        return a < b;
    });

    std::vector<int> cuts;  // K-1 distinct positions in 1..L-1
    while (static_cast<int>(cuts.size()) < K - 1) {
        const int c = rng.uniform_int(1, static_cast<int>(L) - 1);
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());

    std::vector<std::vector<double>> resp(L, std::vector<double>(static_cast<std::size_t>(K), 0.0));
    int component = 0;
    for (std::size_t rank = 0; rank < L; ++rank) {
        while (component < K - 1 &&
               rank >= static_cast<std::size_t>(cuts[static_cast<std::size_t>(component)])) {
            ++component;
        }
        resp[order[rank]][static_cast<std::size_t>(component)] = 1.0;
    }
    return resp;
}

EmState run_restart(const RegressionData& data, int K, const FitConfig& config,
                    std::uint64_t restart_seed) {
    Rng rng(restart_seed);

    EmState state;
    state.params.K = K;
    state.params.alpha.assign(static_cast<std::size_t>(K), 0.0);
    state.params.beta.assign(static_cast<std::size_t>(K), 0.0);
    state.params.sigma.assign(static_cast<std::size_t>(K), 1.0);
    state.resp = initial_responsibilities(data, K, rng);

    if (!m_step(data, state.resp, config.use_priors, state.params)) {
        state.degenerate = true;
        return state;
    }

    double previous = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.max_iter; ++iter) {
        state.resp = responsibilities(state.params, data);
        if (!m_step(data, state.resp, config.use_priors, state.params)) {
            state.degenerate = true;
            return state;
        }
        const double lp = mixture_log_posterior(state.params, data, config.use_priors);
        state.trace.push_back(lp);
        state.log_posterior = lp;
        if (std::abs(lp - previous) < config.tol * (1.0 + std::abs(lp))) {
            state.converged = true;
            break;
        }
        previous = lp;
    }
    state.resp = responsibilities(state.params, data);
    return state;
}

void canonicalize(MixtureFit& fit) {
    const int K = fit.params.K;
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&fit](int a, int b) {
        const auto ai = static_cast<std::size_t>(a), bi = static_cast<std::size_t>(b);
        const auto key_a = std::array{fit.params.beta[ai], fit.params.alpha[ai], fit.params.sigma[ai]};
        const auto key_b = std::array{fit.params.beta[bi], fit.params.alpha[bi], fit.params.sigma[bi]};
        return key_a < key_b;
    });

    MixtureParams sorted;
    sorted.K = K;
    for (int k : order) {
        const auto ki = static_cast<std::size_t>(k);
        sorted.alpha.push_back(fit.params.alpha[ki]);
        sorted.beta.push_back(fit.params.beta[ki]);
        sorted.sigma.push_back(fit.params.sigma[ki]);
    }
    fit.params = std::move(sorted);

    for (auto& row : fit.responsibilities) {
        std::vector<double> next(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            next[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        }
        row = std::move(next);
    }
}

}  // namespace

RegressionData to_regression_data(const std::vector<MetricPoint>& points) {
    RegressionData data;
    data.x.reserve(points.size());
    data.y.reserve(points.size());
    for (const MetricPoint& p : points) {
        data.x.push_back(static_cast<double>(p.lexicon_size));
        data.y.push_back(p.complexity);
    }
    return data;
}

double mixture_log_posterior(const MixtureParams& params, const RegressionData& data,
                             bool use_priors) {
    check_params(params);
    check_data(data);
    double total = 0.0;
    for (std::size_t l = 0; l < data.x.size(); ++l) {
        total += point_log_density(params, data.x[l], data.y[l]);
    }
    if (use_priors) total += prior_log_density(params);
    return total;
}

double mixture_log_posterior(const MixtureParams& params, const std::vector<MetricPoint>& points,
                             bool use_priors) {
    return mixture_log_posterior(params, to_regression_data(points), use_priors);
}

std::vector<std::vector<double>> responsibilities(const MixtureParams& params,
                                                  const RegressionData& data) {
    check_params(params);
    check_data(data);
    const std::size_t L = data.x.size();
    std::vector<std::vector<double>> resp(L, std::vector<double>(static_cast<std::size_t>(params.K)));
    for (std::size_t l = 0; l < L; ++l) {
        double max_term = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < params.K; ++k) {
            const auto ki = static_cast<std::size_t>(k);
            const double mu = params.alpha[ki] + params.beta[ki] * data.x[l];
            resp[l][ki] = lognormal_logpdf(data.y[l], mu, params.sigma[ki]);
            max_term = std::max(max_term, resp[l][ki]);
        }
        double norm = 0.0;
        for (double& r : resp[l]) {
            r = std::exp(r - max_term);
            norm += r;
        }
        for (double& r : resp[l]) r /= norm;
    }
    return resp;
}

double log_predictive(const MixtureParams& params, double x, double y) {
    check_params(params);
    if (!(y > 0.0)) throw NonPositiveComplexity(y);
    return point_log_density(params, x, y);
}

MixtureFit fit_em(const RegressionData& data, int K, const FitConfig& config) {
    check_data(data);
    if (K < 1) throw InvalidArgument("K must be >= 1");
    if (data.x.size() < static_cast<std::size_t>(K) + 2) {
        throw InsufficientData(data.x.size(), static_cast<std::size_t>(K) + 2);
    }
    if (config.restarts < 1) throw InvalidArgument("restarts must be >= 1");

    std::vector<EmState> states(static_cast<std::size_t>(config.restarts));
    parallel_for(states.size(), config.threads, [&](std::size_t r) {
        states[r] = run_restart(data, K, config, substream_seed(config.seed, r));
    });

    int degenerate = 0;
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < states.size(); ++r) {
        if (states[r].degenerate) {
            ++degenerate;
            continue;
        }
        if (!best || states[r].log_posterior > states[*best].log_posterior) best = r;
    }
    if (!best) {
        throw DegenerateFit("all " + std::to_string(config.restarts) +
                            " restarts collapsed (sigma below 1e-6)");
    }

    EmState& winner = states[*best];
    MixtureFit fit;
    fit.params = std::move(winner.params);
    fit.responsibilities = std::move(winner.resp);
    fit.log_posterior = winner.log_posterior;
    fit.converged = winner.converged;
    fit.objective_trace = std::move(winner.trace);
    fit.degenerate_restarts = degenerate;
    canonicalize(fit);
    fit.intervals = laplace_intervals(fit.params, data, config.use_priors);
    return fit;
}

namespace {

// Gauss-Hermite abscissas/weights (n=9, physicists' convention), rescaled
// below for N(0,1) expectations.
constexpr std::array<double, 9> kGhNodes = {
    -3.190993201781528, -2.266580584531843, -1.468553289216668, -0.723551018752838,
    0.0,
    0.723551018752838, 1.468553289216668, 2.266580584531843, 3.190993201781528};
constexpr std::array<double, 9> kGhWeights = {
    3.960697726326438e-05, 4.943624275536947e-03, 8.847452739437657e-02,
    4.326515590025558e-01, 7.202352156060510e-01, 4.326515590025558e-01,
    8.847452739437657e-02, 4.943624275536947e-03, 3.960697726326438e-05};

// Laplace-averaged predictive: for each component, integrate the lognormal
// density over the approximate joint normal of (mu(x*), sigma) with a
// two-dimensional Gauss-Hermite rule.
double laplace_predictive(const MixtureParams& params, const std::vector<double>& cov,
                          double x, double y) {
    const int K = params.K;
    const auto n = static_cast<std::size_t>(3 * K);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));

    double mix = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto ki = static_cast<std::size_t>(k);
        const std::size_t ia = ki, ib = static_cast<std::size_t>(K) + ki,
                          is = 2 * static_cast<std::size_t>(K) + ki;
        const double mu_hat = params.alpha[ki] + params.beta[ki] * x;
        const double var_mu = cov[ia * n + ia] + x * x * cov[ib * n + ib] +
                              2.0 * x * cov[ia * n + ib];
        const double var_s = cov[is * n + is];
        const double cov_ms = cov[ia * n + is] + x * cov[ib * n + is];

        // Cholesky of the 2x2 [(var_mu, cov_ms), (cov_ms, var_s)]
        const double l11 = std::sqrt(std::max(var_mu, 0.0));
        const double l21 = l11 > 0.0 ? cov_ms / l11 : 0.0;
        const double l22 = std::sqrt(std::max(var_s - l21 * l21, 0.0));

        double expectation = 0.0;
        for (std::size_t a = 0; a < kGhNodes.size(); ++a) {
            for (std::size_t b = 0; b < kGhNodes.size(); ++b) {
                const double u = std::sqrt(2.0) * kGhNodes[a];
                const double v = std::sqrt(2.0) * kGhNodes[b];
                const double mu = mu_hat + l11 * u;
                const double sigma = std::max(params.sigma[ki] + l21 * u + l22 * v, 0.25 * kSigmaFloor);
                const double w = kGhWeights[a] * kGhWeights[b] * inv_sqrt_pi * inv_sqrt_pi;
                expectation += w * std::exp(lognormal_logpdf(y, mu, sigma));
            }
        }
        mix += expectation / static_cast<double>(K);
    }
    return std::log(std::max(mix, std::numeric_limits<double>::min()));
}

}  // namespace

LooResult loo_elpd(const RegressionData& data, int K, const FitConfig& config) {
    check_data(data);
    const std::size_t L = data.x.size();
    if (L < static_cast<std::size_t>(K) + 3) {
        throw InsufficientData(L, static_cast<std::size_t>(K) + 3);
    }

    LooResult result;
    result.pointwise.assign(L, 0.0);
    std::vector<std::string> failures(L);

    parallel_for(L, config.threads, [&](std::size_t fold) {
        RegressionData rest;
        rest.x.reserve(L - 1);
        rest.y.reserve(L - 1);
        for (std::size_t l = 0; l < L; ++l) {
            if (l == fold) continue;
            rest.x.push_back(data.x[l]);
            rest.y.push_back(data.y[l]);
        }
        FitConfig fold_config = config;
        fold_config.seed = substream_seed(config.seed, 7000003ULL + fold);
        fold_config.threads = 1;
        try {
            if (config.predictive == PredictiveMode::Laplace) {
                // need the covariance, so redo the Laplace step here
                MixtureFit fit = fit_em(rest, K, fold_config);
                std::vector<double> cov;
                laplace_intervals(fit.params, rest, fold_config.use_priors, &cov);
                result.pointwise[fold] =
                    laplace_predictive(fit.params, cov, data.x[fold], data.y[fold]);
            } else {
                MixtureFit fit = fit_em(rest, K, fold_config);
                result.pointwise[fold] = log_predictive(fit.params, data.x[fold], data.y[fold]);
            }
        } catch (const Error& e) {
            failures[fold] = e.what();
        }
    });

    for (std::size_t fold = 0; fold < L; ++fold) {
        if (!failures[fold].empty()) throw FoldFailure(fold, failures[fold]);
    }
    result.elpd = std::accumulate(result.pointwise.begin(), result.pointwise.end(), 0.0);
    return result;
}

namespace {

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    int support = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) {
            tau = candidate;
            support = static_cast<int>(i + 1);
        }
    }
    (void)support;
    for (double& w : v) w = std::max(w - tau, 0.0);
    return v;
}

}  // namespace

std::vector<double> stacking_weights(const std::vector<std::vector<double>>& pointwise_by_model) {
    const std::size_t L = pointwise_by_model.size();
    if (L == 0) throw EmptyInput("stacking: no points");
    const std::size_t M = pointwise_by_model[0].size();
    if (M < 2) throw InvalidArgument("stacking needs at least two models");
    for (const auto& row : pointwise_by_model) {
        if (row.size() != M) throw InvalidArgument("ragged pointwise matrix");
        for (double v : row) {
            if (!std::isfinite(v)) throw NonFiniteInput("non-finite pointwise log density");
        }
    }

    // Row-stabilized exp matrix; the common shift is constant in w.
    std::vector<std::vector<double>> expm(L, std::vector<double>(M));
    for (std::size_t l = 0; l < L; ++l) {
        const double c = *std::max_element(pointwise_by_model[l].begin(), pointwise_by_model[l].end());
        for (std::size_t m = 0; m < M; ++m) expm[l][m] = std::exp(pointwise_by_model[l][m] - c);
    }

    auto score = [&](const std::vector<double>& w) {
        double total = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m) s += w[m] * expm[l][m];
            total += std::log(std::max(s, std::numeric_limits<double>::min()));
        }
        return total;
    };

    std::vector<double> w(M, 1.0 / static_cast<double>(M));
    double current = score(w);
    for (int iter = 0; iter < 100000; ++iter) {
        std::vector<double> grad(M, 0.0);
        for (std::size_t l = 0; l < L; ++l) {
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m) s += w[m] * expm[l][m];
            for (std::size_t m = 0; m < M; ++m) grad[m] += expm[l][m] / s;
        }

        // Line search over projected steps, growing then shrinking.
        double best_score = current;
        std::vector<double> best_w = w;
        double step = 1.0 / static_cast<double>(L);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<double> candidate = w;
            for (std::size_t m = 0; m < M; ++m) candidate[m] += step * grad[m];
            candidate = project_simplex(std::move(candidate));
            const double s = score(candidate);
            if (s > best_score) {
                best_score = s;
                best_w = std::move(candidate);
            }
            step *= 2.0;
        }
        if (best_score - current < 1e-10) {
            w = std::move(best_w);
            break;
        }
        current = best_score;
        w = std::move(best_w);
    }
    return w;
}

ModelComparison compare_models(const RegressionData& data, std::vector<int> k_values,
                               const FitConfig& config) {
    std::sort(k_values.begin(), k_values.end());
    k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
    if (k_values.empty()) throw InvalidArgument("compare_models: no K values");

    ModelComparison comparison;
    for (int K : k_values) {
        FitConfig model_config = config;
        model_config.seed = substream_seed(config.seed, 9000011ULL + static_cast<std::uint64_t>(K));
        const LooResult loo = loo_elpd(data, K, model_config);
        comparison.elpd[K] = loo.elpd;
        comparison.pointwise[K] = loo.pointwise;
    }

    const std::size_t L = data.x.size();
    if (k_values.size() >= 2) {
        const auto& a = comparison.pointwise[k_values[0]];
        const auto& b = comparison.pointwise[k_values[1]];
        double mean = 0.0;
        for (std::size_t l = 0; l < L; ++l) mean += (a[l] - b[l]);
        comparison.elpd_diff = mean;
        mean /= static_cast<double>(L);
        double var = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double d = (a[l] - b[l]) - mean;
            var += d * d;
        }
        var /= static_cast<double>(L - 1);
        comparison.se_diff = std::sqrt(static_cast<double>(L) * var);

        std::vector<std::vector<double>> pointwise_rows(L, std::vector<double>(k_values.size()));
        for (std::size_t m = 0; m < k_values.size(); ++m) {
            for (std::size_t l = 0; l < L; ++l) {
                pointwise_rows[l][m] = comparison.pointwise[k_values[m]][l];
            }
        }
        comparison.stacking = stacking_weights(pointwise_rows);
    } else {
        comparison.elpd_diff = 0.0;
        comparison.se_diff = 0.0;
        comparison.stacking = {1.0};
    }
    return comparison;
}

}  // namespace numpar
