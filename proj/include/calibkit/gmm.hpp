#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "calibkit/binning.hpp"
#include "calibkit/errors.hpp"
#include "calibkit/estimator.hpp"
#include "calibkit/quadrature.hpp"
#include "calibkit/rng.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

/// Two standard-normal classes centered at -1 and +1 with equal weight,
/// scored by a logistic model. Component 0 is the class at -1, so the
/// perfect model has (beta0, beta1) = (0, -2); (0, 0) is the calibrated
/// constant model.
struct GmmModel {
    double beta0 = 0.0;
    double beta1 = 0.0;

    static GmmModel perfect() { return {0.0, -2.0}; }
    static GmmModel calibrated_constant() { return {0.0, 0.0}; }
};

namespace detail {

inline double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double logit(double t) { return std::log(t / (1.0 - t)); }

inline double std_normal_pdf(double z) {
    return 0.3989422804014326779399460599344 * std::exp(-0.5 * z * z);
}

// Mixture input density 0.5 N(-1,1) + 0.5 N(1,1).
inline double gmm_input_density(double x) {
    return 0.5 * (std_normal_pdf(x + 1.0) + std_normal_pdf(x - 1.0));
}

// Tail mass beyond |x| = 12 is below 1e-30; integrals truncate there.
inline constexpr double kGmmSupport = 12.0;

}  // namespace detail

struct GmmSample {
    std::vector<double> inputs;
    std::vector<int> labels;
};

inline GmmSample gmm_sample(long n, CounterRng& rng) {
    if (n < 1) {
        throw EmptyInput("gmm_sample: n must be >= 1");
    }
    GmmSample out;
    out.inputs.resize(static_cast<std::size_t>(n));
    out.labels.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const int y = rng.next_double() < 0.5 ? 0 : 1;
        const double mean = y == 0 ? -1.0 : 1.0;
        out.labels[static_cast<std::size_t>(i)] = y;
        out.inputs[static_cast<std::size_t>(i)] = mean + rng.next_normal();
    }
    return out;
}

inline SimplexVector gmm_posterior(double x) {
    if (!std::isfinite(x)) {
        throw NonFiniteInput("gmm_posterior: non-finite input");
    }
    const double p0 = detail::sigmoid(-2.0 * x);
    return SimplexVector::unchecked({p0, 1.0 - p0});
}

inline SimplexVector logistic_predict(const GmmModel& model, double x) {
    if (!std::isfinite(x)) {
        throw NonFiniteInput("logistic_predict: non-finite input");
    }
    const double s = detail::sigmoid(model.beta0 + model.beta1 * x);
    return SimplexVector::unchecked({s, 1.0 - s});
}

/// Sample the mixture and score it: the synthetic evaluation dataset used
/// throughout the estimator experiments.
inline LabeledDataset gmm_dataset(const GmmModel& model, long n, CounterRng& rng) {
    const GmmSample sample = gmm_sample(n, rng);
    LabeledDataset data;
    data.predictions.reserve(sample.inputs.size());
    data.labels = sample.labels;
    for (double x : sample.inputs) {
        data.predictions.push_back(logistic_predict(model, x));
    }
    return data;
}

/// Closed-form calibration function value at prediction mu. For beta1 != 0
/// the level set of the model at mu is the single input
/// x* = (logit(mu_0) - beta0) / beta1 and the value is the true posterior
/// there; the constant model returns the marginal (1/2, 1/2).
inline SimplexVector analytic_calibration(const GmmModel& model, const SimplexVector& mu) {
    if (mu.size() != 2) {
        throw DimensionMismatch("analytic_calibration: binary predictions only");
    }
    if (model.beta1 == 0.0) {
        if (model.beta0 == 0.0 && std::abs(mu[0] - 0.5) <= 1e-12) {
            return SimplexVector::unchecked({0.5, 0.5});
        }
        throw NonInvertibleModel("analytic_calibration: beta1 = 0 has no level-set inverse");
    }
    if (mu[0] <= 0.0 || mu[0] >= 1.0) {
        throw DomainError("analytic_calibration: mu_0 must lie strictly inside (0,1)");
    }
    const double x_star = (detail::logit(mu[0]) - model.beta0) / model.beta1;
    return gmm_posterior(x_star);
}

/// Expected miscalibration E d(r(g(X)), g(X)) by adaptive quadrature over
/// the mixture. Exact (no quadrature) for constant models.
inline double analytic_eta(const GmmModel& model, Distance dist, double abs_tol = 1e-8) {
    if (model.beta1 == 0.0) {
        const SimplexVector pred = logistic_predict(model, 0.0);
        const SimplexVector marginal = SimplexVector::unchecked({0.5, 0.5});
        return distance(dist, marginal, pred);
    }
    const auto integrand = [&model, dist](double x) {
        const double s = detail::sigmoid(model.beta0 + model.beta1 * x);
        const double post0 = detail::sigmoid(-2.0 * x);
        const double g[2] = {s, 1.0 - s};
        const double r[2] = {post0, 1.0 - post0};
        return distance(dist, std::span<const double>(r, 2), std::span<const double>(g, 2)) *
               detail::gmm_input_density(x);
    };
    return integrate(integrand, -detail::kGmmSupport, detail::kGmmSupport, abs_tol);
}

/// Calibration curve on the tracked coordinate: r((1-t, t)) tracked
/// component. Requires beta1 != 0.
inline std::function<double(double)> gmm_calibration_curve(const GmmModel& model) {
    if (model.beta1 == 0.0) {
        throw NonInvertibleModel("gmm_calibration_curve: beta1 = 0");
    }
    return [model](double t) {
        const double x_star = (detail::logit(1.0 - t) - model.beta0) / model.beta1;
        return detail::sigmoid(2.0 * x_star);  // posterior tracked component
    };
}

/// Density of the tracked prediction component under the mixture; zero
/// outside the image of |x| <= 12. Requires beta1 != 0.
inline std::function<double(double)> gmm_prediction_density(const GmmModel& model) {
    if (model.beta1 == 0.0) {
        throw NonInvertibleModel("gmm_prediction_density: beta1 = 0");
    }
    return [model](double t) {
        if (t <= 0.0 || t >= 1.0) {
            return 0.0;
        }
        const double s = 1.0 - t;
        const double x = (detail::logit(s) - model.beta0) / model.beta1;
        if (std::abs(x) > detail::kGmmSupport) {
            return 0.0;
        }
        return detail::gmm_input_density(x) / (std::abs(model.beta1) * s * (1.0 - s));
    };
}

/// Population binned miscalibration for a GMM model over a 1-D partition:
/// the deterministic Theorem-2 side of the estimator checks. Constant
/// models are a point mass and evaluated exactly.
inline double gmm_binned_miscalibration(const GmmModel& model, const Partition& partition,
                                        Distance dist, double abs_tol = 1e-8) {
    if (model.beta1 == 0.0) {
        const SimplexVector pred = logistic_predict(model, 0.0);
        const SimplexVector marginal = SimplexVector::unchecked({0.5, 0.5});
        return distance(dist, marginal, pred);
    }
    return analytic_binned_miscalibration(gmm_calibration_curve(model),
                                          gmm_prediction_density(model), partition, dist,
                                          abs_tol);
}

/// Samples of the analytic deviation curve t -> r(t) - t for 1-D diagrams.
inline std::vector<std::pair<double, double>> gmm_deviation_curve(const GmmModel& model,
                                                                  int samples = 201) {
    std::vector<std::pair<double, double>> out;
    if (model.beta1 == 0.0) {
        out.emplace_back(logistic_predict(model, 0.0).tracked(),
                         0.5 - logistic_predict(model, 0.0).tracked());
        return out;
    }
    const auto curve = gmm_calibration_curve(model);
    out.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double t =
            std::clamp(static_cast<double>(i) / (samples - 1), 1e-9, 1.0 - 1e-9);
        out.emplace_back(t, curve(t) - t);
    }
    return out;
}

}  // namespace calibkit
