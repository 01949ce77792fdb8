// Inference tests: log posterior against a direct-summation oracle, EM
// recovery and monotonicity, closed-form K=1 stationarity, exact LOO,
// stacking against golden-section search.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "numpar/errors.hpp"
#include "numpar/inference.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace numpar;

namespace {

MixtureParams make_params(std::vector<double> alpha, std::vector<double> beta,
                          std::vector<double> sigma) {
    MixtureParams p;
    p.K = static_cast<int>(alpha.size());
    p.alpha = std::move(alpha);
    p.beta = std::move(beta);
    p.sigma = std::move(sigma);
    return p;
}

}  // namespace

TEST_CASE("mixture_log_posterior") {
    SUBCASE("zero residual point: data term is -log(sigma y sqrt(2 pi))") {
        const double alpha = 0.5, beta = -0.01, sigma = 0.1, x = 30.0;
        const double y = std::exp(alpha + beta * x);
        RegressionData data{{x}, {y}};
        const double lp =
            mixture_log_posterior(make_params({alpha}, {beta}, {sigma}), data, false);
        const double expected = -std::log(sigma * y * std::sqrt(2.0 * std::acos(-1.0)));
        CHECK(lp == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("two identical components collapse to the K=1 term") {
        RegressionData data{{10, 25, 40}, {1.5, 1.3, 1.2}};
        const double one = mixture_log_posterior(make_params({0.4}, {-0.002}, {0.08}), data, false);
        const double two = mixture_log_posterior(
            make_params({0.4, 0.4}, {-0.002, -0.002}, {0.08, 0.08}), data, false);
        CHECK(two == doctest::Approx(one).epsilon(1e-12));
    }

    SUBCASE("five-point dataset against the standardized-normal oracle") {
        RegressionData data{{12, 30, 47, 61, 88}, {1.42, 1.31, 1.26, 1.18, 1.05}};
        const std::vector<double> alpha{0.9, 0.3}, beta{-0.004, -0.001}, sigma{0.05, 0.1};
        const double lp = mixture_log_posterior(make_params(alpha, beta, sigma), data, false);
        double expected = 0.0;
        for (std::size_t l = 0; l < data.x.size(); ++l) {
            expected += test::oracle_point_log_density(alpha, beta, sigma, data.x[l], data.y[l]);
        }
        CHECK(lp == doctest::Approx(expected).epsilon(1e-10));
    }

    SUBCASE("non-positive complexity is rejected") {
        RegressionData data{{10, 20, 30}, {1.2, 0.0, 1.1}};
        CHECK_THROWS_AS(mixture_log_posterior(make_params({0.0}, {0.0}, {1.0}), data),
                        NonPositiveComplexity);
    }
}

TEST_CASE("responsibilities of identical components are exactly one half") {
    RegressionData data{{10, 42, 77}, {1.4, 1.2, 1.1}};
    const auto resp =
        responsibilities(make_params({0.3, 0.3}, {-0.001, -0.001}, {0.05, 0.05}), data);
    for (const auto& row : resp) {
        CHECK(row[0] == 0.5);
        CHECK(row[1] == 0.5);
    }
}

TEST_CASE("responsibilities are invariant under component relabeling") {
    RegressionData data{{12, 33, 54, 80}, {1.5, 1.3, 1.22, 1.07}};
    const MixtureParams params = make_params({0.9, 0.3}, {-0.004, -0.001}, {0.05, 0.1});
    const MixtureParams swapped = make_params({0.3, 0.9}, {-0.001, -0.004}, {0.1, 0.05});
    const auto resp = responsibilities(params, data);
    const auto resp_swapped = responsibilities(swapped, data);
    for (std::size_t l = 0; l < data.x.size(); ++l) {
        CHECK(resp[l][0] == resp_swapped[l][1]);
        CHECK(resp[l][1] == resp_swapped[l][0]);
        CHECK(resp[l][0] + resp[l][1] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("fit_em") {
    SUBCASE("K=1 solves the prior-regularized normal equations") {
        const RegressionData data = test::synthetic_mixture_data(17);
        FitConfig config;
        config.restarts = 4;
        config.seed = 5;
        const MixtureFit fit = fit_em(data, 1, config);
        REQUIRE(fit.params.K == 1);

        // closed-form 2x2 solve at the fitted sigma must reproduce alpha/beta
        const double s2 = fit.params.sigma[0] * fit.params.sigma[0];
        double w = 0.0, sx = 0.0, sxx = 0.0, sz = 0.0, sxz = 0.0;
        for (std::size_t l = 0; l < data.x.size(); ++l) {
            const double z = std::log(data.y[l]);
            w += 1.0;
            sx += data.x[l];
            sxx += data.x[l] * data.x[l];
            sz += z;
            sxz += data.x[l] * z;
        }
        const double a11 = w / s2 + 1.0, a12 = sx / s2, a22 = sxx / s2 + 1.0;
        const double b1 = sz / s2, b2 = sxz / s2;
        const double det = a11 * a22 - a12 * a12;
        const double alpha = (b1 * a22 - b2 * a12) / det;
        const double beta = (a11 * b2 - a12 * b1) / det;
        CHECK(fit.params.alpha[0] == doctest::Approx(alpha).epsilon(1e-7));
        CHECK(fit.params.beta[0] == doctest::Approx(beta).epsilon(1e-7));

        // and sigma satisfies its stationarity condition s^4 + R s^2 - S = 0
        double residual = 0.0;
        for (std::size_t l = 0; l < data.x.size(); ++l) {
            const double e = std::log(data.y[l]) - alpha - beta * data.x[l];
            residual += e * e;
        }
        const double s = fit.params.sigma[0];
        CHECK(s * s * s * s + w * s * s - residual == doctest::Approx(0.0).epsilon(1e-6));
    }

    SUBCASE("recovers the seeded two-component structure") {
        std::vector<int> labels;
        const RegressionData data = test::synthetic_mixture_data(17, &labels);
        FitConfig config;
        config.restarts = 20;
        config.seed = 11;
        const MixtureFit fit = fit_em(data, 2, config);

        REQUIRE(fit.params.K == 2);
        CHECK(fit.converged);
        CHECK(fit.params.beta[0] < fit.params.beta[1]);  // canonical order

        // membership: generating component 0 is canonical component 0
        int confident = 0;
        for (std::size_t l = 0; l < data.x.size(); ++l) {
            const auto k = static_cast<std::size_t>(labels[l]);
            if (fit.responsibilities[l][k] > 0.8) ++confident;
            CHECK(fit.responsibilities[l][0] + fit.responsibilities[l][1] ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
        CHECK(static_cast<double>(confident) > 0.9 * static_cast<double>(data.x.size()));

        // parameter recovery within 3 Laplace half-widths
        const std::vector<double> true_alpha{1.2, 0.4}, true_beta{-0.005, -0.001},
            true_sigma{0.02, 0.05};
        for (int k = 0; k < 2; ++k) {
            const auto ki = static_cast<std::size_t>(k);
            const double hw_a = 0.5 * (fit.intervals.alpha[ki][1] - fit.intervals.alpha[ki][0]);
            const double hw_b = 0.5 * (fit.intervals.beta[ki][1] - fit.intervals.beta[ki][0]);
            const double hw_s = 0.5 * (fit.intervals.sigma[ki][1] - fit.intervals.sigma[ki][0]);
            CHECK(std::abs(fit.params.alpha[ki] - true_alpha[ki]) < 3.0 * hw_a);
            CHECK(std::abs(fit.params.beta[ki] - true_beta[ki]) < 3.0 * hw_b);
            CHECK(std::abs(fit.params.sigma[ki] - true_sigma[ki]) < 3.0 * hw_s);
        }

        // EM monotonicity of the winning restart
        for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
            CHECK(fit.objective_trace[i] >= fit.objective_trace[i - 1] - 1e-10);
        }
    }

    SUBCASE("priors-off scale shift moves alpha by log c only") {
        const RegressionData data = test::synthetic_mixture_data(23);
        FitConfig config;
        config.restarts = 8;
        config.seed = 3;
        config.use_priors = false;
        const MixtureFit base = fit_em(data, 2, config);

        const double c = 3.7;
        RegressionData scaled = data;
        for (double& y : scaled.y) y *= c;
        const MixtureFit shifted = fit_em(scaled, 2, config);

        for (int k = 0; k < 2; ++k) {
            const auto ki = static_cast<std::size_t>(k);
            CHECK(shifted.params.alpha[ki] ==
                  doctest::Approx(base.params.alpha[ki] + std::log(c)).epsilon(1e-6));
            CHECK(shifted.params.beta[ki] == doctest::Approx(base.params.beta[ki]).epsilon(1e-6));
            CHECK(shifted.params.sigma[ki] == doctest::Approx(base.params.sigma[ki]).epsilon(1e-6));
        }
        for (std::size_t l = 0; l < data.x.size(); ++l) {
            CHECK(shifted.responsibilities[l][0] ==
                  doctest::Approx(base.responsibilities[l][0]).epsilon(1e-6));
        }
    }

    SUBCASE("exact-fit data collapses sigma and reports DegenerateFit") {
        RegressionData data{{10, 20, 30, 40, 50}, {1.0, 1.0, 1.0, 1.0, 1.0}};
        FitConfig config;
        config.restarts = 6;
        config.seed = 1;
        CHECK_THROWS_AS(fit_em(data, 1, config), DegenerateFit);
    }

    SUBCASE("insufficient data is rejected") {
        RegressionData data{{10, 20, 30}, {1.2, 1.1, 1.05}};
        CHECK_THROWS_AS(fit_em(data, 2, FitConfig{}), InsufficientData);
    }
}

TEST_CASE("EM objective is monotone on randomized datasets") {
    Rng rng(606);
    for (int trial = 0; trial < 12; ++trial) {
        RegressionData data;
        const int n = rng.uniform_int(12, 40);
        const double a = rng.next_unit() * 1.5;
        const double b = -0.01 * rng.next_unit();
        const double s = 0.02 + 0.1 * rng.next_unit();
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform_int(3, 95);
            data.x.push_back(x);
            data.y.push_back(std::exp(a + b * x + s * rng.gaussian()));
        }
        FitConfig config;
        config.restarts = 3;
        config.seed = static_cast<std::uint64_t>(trial);
        const int K = rng.uniform_int(1, 3);  // K=3 allowed, flagged via converged
        const MixtureFit fit = fit_em(data, K, config);
        for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
            CHECK(fit.objective_trace[i] >= fit.objective_trace[i - 1] - 1e-10);
        }
        for (const auto& row : fit.responsibilities) {
            double total = 0.0;
            for (double r : row) total += r;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("loo_elpd") {
    SUBCASE("exchangeable points give equal pointwise values") {
        // ten fully identical points would collapse sigma in every fold, so
        // alternate two y values; points are then exchangeable within each
        // left-out-value class and pointwise values must match classwise
        RegressionData mixed;
        for (int i = 0; i < 10; ++i) {
            mixed.x.push_back(25.0);
            mixed.y.push_back(i % 2 == 0 ? 1.25 : 1.35);
        }
        FitConfig config;
        config.restarts = 6;
        config.seed = 2;
        const LooResult loo = loo_elpd(mixed, 1, config);
        REQUIRE(loo.pointwise.size() == 10);
        for (std::size_t i = 2; i < 10; i += 2) {
            CHECK(loo.pointwise[i] == doctest::Approx(loo.pointwise[0]).epsilon(1e-6));
            CHECK(loo.pointwise[i + 1] == doctest::Approx(loo.pointwise[1]).epsilon(1e-6));
        }
        const double total =
            std::accumulate(loo.pointwise.begin(), loo.pointwise.end(), 0.0);
        CHECK(loo.elpd == doctest::Approx(total).epsilon(1e-12));
        CHECK(loo.elpd == doctest::Approx(5.0 * (loo.pointwise[0] + loo.pointwise[1]))
                              .epsilon(1e-5));
    }

    SUBCASE("two components beat one on the separated dataset") {
        const RegressionData data = test::synthetic_mixture_data(17);
        FitConfig config;
        config.restarts = 10;
        config.seed = 7;
        const LooResult k1 = loo_elpd(data, 1, config);
        const LooResult k2 = loo_elpd(data, 2, config);
        CHECK(k2.elpd > k1.elpd);
    }

    SUBCASE("laplace predictive runs and stays finite") {
        const RegressionData data = test::synthetic_mixture_data(29);
        FitConfig config;
        config.restarts = 4;
        config.seed = 7;
        config.predictive = PredictiveMode::Laplace;
        const LooResult loo = loo_elpd(data, 1, config);
        for (double v : loo.pointwise) CHECK(std::isfinite(v));
    }

    SUBCASE("a degenerate fold surfaces as FoldFailure") {
        RegressionData data;
        for (int i = 0; i < 8; ++i) {
            data.x.push_back(10.0 + i);
            data.y.push_back(1.0);  // exact fit -> sigma collapse in every fold
        }
        FitConfig config;
        config.restarts = 3;
        config.seed = 4;
        CHECK_THROWS_AS(loo_elpd(data, 1, config), FoldFailure);
    }
}

TEST_CASE("stacking_weights") {
    SUBCASE("identical models tie to uniform") {
        std::vector<std::vector<double>> pointwise(12, std::vector<double>{-1.3, -1.3});
        const auto weights = stacking_weights(pointwise);
        CHECK(weights[0] == 0.5);
        CHECK(weights[1] == 0.5);
    }

    SUBCASE("a strictly better model takes weight one") {
        std::vector<std::vector<double>> pointwise;
        for (int i = 0; i < 15; ++i) pointwise.push_back({-1.0, -2.5});
        const auto weights = stacking_weights(pointwise);
        CHECK(weights[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(weights[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }

    SUBCASE("matches golden-section search on random two-model inputs") {
        Rng rng(501);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<std::vector<double>> pointwise;
            for (int i = 0; i < 20; ++i) {
                pointwise.push_back({-0.5 - 2.0 * rng.next_unit(), -0.5 - 2.0 * rng.next_unit()});
            }
            const auto weights = stacking_weights(pointwise);

            auto objective = [&pointwise](double w) {
                double total = 0.0;
                for (const auto& row : pointwise) {
                    total += std::log(w * std::exp(row[0]) + (1.0 - w) * std::exp(row[1]));
                }
                return total;
            };
            const double expected = test::oracle_golden_section(objective);
            CHECK(weights[0] == doctest::Approx(expected).epsilon(1e-6).scale(1.0));
            CHECK(weights[0] + weights[1] == doctest::Approx(1.0).epsilon(1e-9));

            // never worse than the best single model
            const double stacked = objective(weights[0]);
            CHECK(stacked >= objective(0.0) - 1e-9);
            CHECK(stacked >= objective(1.0) - 1e-9);
        }
    }

    SUBCASE("non-finite input is rejected") {
        std::vector<std::vector<double>> pointwise{{-1.0, std::nan("")}};
        CHECK_THROWS_AS(stacking_weights(pointwise), NonFiniteInput);
    }
}

TEST_CASE("compare_models ties the pieces together") {
    const RegressionData data = test::synthetic_mixture_data(17);
    FitConfig config;
    config.restarts = 8;
    config.seed = 13;
    const ModelComparison comparison = compare_models(data, {1, 2}, config);
    REQUIRE(comparison.elpd.size() == 2);
    // reported convention: diff = elpd(K=1) - elpd(K=2), negative when K=2 wins
    CHECK(comparison.elpd_diff ==
          doctest::Approx(comparison.elpd.at(1) - comparison.elpd.at(2)).epsilon(1e-12));
    CHECK(comparison.elpd_diff < 0.0);
    CHECK(comparison.se_diff >= 0.0);
    REQUIRE(comparison.stacking.size() == 2);
    CHECK(comparison.stacking[0] + comparison.stacking[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(comparison.stacking[1] > 0.5);  // K=2 carries the weight
}
