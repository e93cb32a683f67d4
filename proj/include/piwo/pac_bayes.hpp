#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "piwo/bandit.hpp"

namespace piwo {

/// Probability weights over the members of a PolicyClass, indexed in class
/// order. Sums to one within kProbTolerance.
class PolicyDistribution {
public:
    /// Throws ConfigurationError unless `weights` is nonnegative and sums to 1
    /// within tolerance.
    explicit PolicyDistribution(std::vector<double> weights);

    /// Normalizes arbitrary nonnegative masses; throws ArgumentError when the
    /// total mass is zero.
    static PolicyDistribution from_masses(std::vector<double> masses);
    static PolicyDistribution uniform(std::size_t size);
    static PolicyDistribution point_mass(std::size_t size, std::size_t index);

    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return weights_.at(i); }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
};

/// KL(q || p) = sum_i q_i log(q_i / p_i), with 0 log 0 = 0 and +inf when q
/// charges an index p does not.
double kl_divergence(const PolicyDistribution& q, const PolicyDistribution& p);

/// Gibbs posterior dQ/dP ∝ exp(lambda * IX estimate). lambda defaults to
/// 2 * gamma * n; `lambda_override` replaces it.
PolicyDistribution gibbs_posterior(const LoggedDataset& data, const PolicyClass& policies,
                                   const PolicyDistribution& prior, double gamma,
                                   std::optional<double> lambda_override = std::nullopt);

/// Gibbs weights from precomputed per-policy estimates.
PolicyDistribution gibbs_weights(std::span<const double> estimates, const PolicyDistribution& prior,
                                 double lambda);

/// sum_i q_i f_i over the support of q.
double distribution_functional(std::span<const double> values, const PolicyDistribution& q);

/// Inverse-CDF draw of a class index, first uniform of Philox(seed, 0).
std::size_t sample_policy(const PolicyDistribution& q, std::uint64_t seed);

}  // namespace piwo
