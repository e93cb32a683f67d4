#include "piwo/pac_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "piwo/errors.hpp"
#include "piwo/estimators.hpp"
#include "piwo/numeric.hpp"

namespace piwo {

PolicyDistribution::PolicyDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) {
        throw ConfigurationError("policy distribution must be nonempty");
    }
    CompensatedSum total;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigurationError("policy distribution weights must be finite and nonnegative");
        }
        total += w;
    }
    const double s = total.value();
    if (std::abs(s - 1.0) > kProbTolerance) {
        throw ConfigurationError("policy distribution sums to " + std::to_string(s));
    }
    if (s != 1.0) {
        for (double& w : weights_) {
            w /= s;
        }
    }
}

PolicyDistribution PolicyDistribution::from_masses(std::vector<double> masses) {
    CompensatedSum total;
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw ArgumentError("distribution masses must be finite and nonnegative");
        }
        total += m;
    }
    const double s = total.value();
    if (!(s > 0.0)) {
        throw ArgumentError("distribution has zero total mass");
    }
    for (double& m : masses) {
        m /= s;
    }
    return PolicyDistribution(std::move(masses));
}

PolicyDistribution PolicyDistribution::uniform(std::size_t size) {
    return PolicyDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

PolicyDistribution PolicyDistribution::point_mass(std::size_t size, std::size_t index) {
    std::vector<double> w(size, 0.0);
    w.at(index) = 1.0;
    return PolicyDistribution(std::move(w));
}

double kl_divergence(const PolicyDistribution& q, const PolicyDistribution& p) {
    if (q.size() != p.size()) {
        throw ArgumentError("kl_divergence: distributions over different classes");
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) {
            continue;
        }
        if (p[i] == 0.0) {
            return kInf;
        }
        total += q[i] * std::log(q[i] / p[i]);
    }
    // Rounding can leave a tiny negative value when q == p.
    return std::max(0.0, total.value());
}

PolicyDistribution gibbs_weights(std::span<const double> estimates, const PolicyDistribution& prior,
                                 double lambda) {
    if (estimates.size() != prior.size()) {
        throw ArgumentError("gibbs_weights: one estimate per prior entry required");
    }
    double shift = -kInf;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (prior[i] > 0.0) {
            shift = std::max(shift, lambda * estimates[i]);
        }
    }
    std::vector<double> masses(estimates.size(), 0.0);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (prior[i] > 0.0) {
            masses[i] = prior[i] * std::exp(lambda * estimates[i] - shift);
        }
    }
    return PolicyDistribution::from_masses(std::move(masses));
}

PolicyDistribution gibbs_posterior(const LoggedDataset& data, const PolicyClass& policies,
                                   const PolicyDistribution& prior, double gamma,
                                   std::optional<double> lambda_override) {
    if (!(gamma > 0.0)) {
        throw ArgumentError("gibbs_posterior: gamma must be positive");
    }
    if (prior.size() != policies.size()) {
        throw ArgumentError("gibbs_posterior: prior must cover the policy class");
    }
    const double lambda = lambda_override.value_or(2.0 * gamma * static_cast<double>(data.size()));
    if (!(lambda >= 0.0)) {
        throw ArgumentError("gibbs_posterior: lambda must be nonnegative");
    }
    std::vector<double> estimates;
    estimates.reserve(policies.size());
    for (const auto& p : policies) {
        estimates.push_back(ix_estimate(data, p, gamma));
    }
    return gibbs_weights(estimates, prior, lambda);
}

double distribution_functional(std::span<const double> values, const PolicyDistribution& q) {
    if (values.size() != q.size()) {
        throw ArgumentError("distribution_functional: one value per policy required");
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) {
            total += q[i] * values[i];
        }
    }
    return total.value();
}

std::size_t sample_policy(const PolicyDistribution& q, std::uint64_t seed) {
    Philox rng(seed, 0);
    return rng.categorical(q.weights());
}

}  // namespace piwo
