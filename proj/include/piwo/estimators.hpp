#pragma once

// Off-policy value estimators over logged data.
//
// All three share the form (1/n) sum_t pi(A_t|X_t) * R_t / d(P_t), where P_t
// is the logged propensity and the denominator is
//   IW : d(p) = p
//   IX : d(p) = p + gamma        (implicit exploration)
//   CIW: d(p) = max(p, gamma)    (clipped importance weights)
// so that 0 <= IX <= CIW <= IW for every gamma > 0. Sums are compensated.

#include <cstddef>
#include <string>

#include "piwo/bandit.hpp"

namespace piwo {

enum class EstimatorType { IW, IX, CIW };

struct EstimatorKind {
    EstimatorType type = EstimatorType::IX;
    double gamma = 0.0;
};

EstimatorType parse_estimator_type(const std::string& name);
std::string to_string(EstimatorType type);

/// Importance weight denominator for one logged propensity.
double estimator_denominator(EstimatorKind kind, double propensity) noexcept;

/// Per-record reward term R_t / d(P_t), i.e. the nonzero entry of the gain row.
double weighted_reward(EstimatorKind kind, const LoggedRecord& record) noexcept;

double estimate(const LoggedDataset& data, const TabularPolicy& policy, EstimatorKind kind);

double iw_estimate(const LoggedDataset& data, const TabularPolicy& policy);
double ix_estimate(const LoggedDataset& data, const TabularPolicy& policy, double gamma);
double ciw_estimate(const LoggedDataset& data, const TabularPolicy& policy, double gamma);

/// Exact expectation of a single IX reward term under (nu, mu, r). Equals
/// policy_value - gamma * smoothed_coverage_ratio whenever mu has full
/// support on the rewarded actions of pi.
double expected_ix_value(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                         const TabularPolicy& behavior, double gamma);

/// sqrt(log(2 |Pi| / delta) / n).
double recommended_gamma(std::size_t class_size, double delta, std::size_t n);

}  // namespace piwo
