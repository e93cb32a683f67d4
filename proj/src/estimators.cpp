#include "piwo/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "piwo/errors.hpp"
#include "piwo/numeric.hpp"

namespace piwo {

EstimatorType parse_estimator_type(const std::string& name) {
    if (name == "iw") return EstimatorType::IW;
    if (name == "ix") return EstimatorType::IX;
    if (name == "ciw") return EstimatorType::CIW;
    throw ArgumentError("unknown estimator '" + name + "' (expected iw, ix or ciw)");
}

std::string to_string(EstimatorType type) {
    switch (type) {
        case EstimatorType::IW: return "iw";
        case EstimatorType::IX: return "ix";
        case EstimatorType::CIW: return "ciw";
    }
    return "?";
}

double estimator_denominator(EstimatorKind kind, double propensity) noexcept {
    switch (kind.type) {
        case EstimatorType::IW: return propensity;
        case EstimatorType::IX: return propensity + kind.gamma;
        case EstimatorType::CIW: return std::max(propensity, kind.gamma);
    }
    return propensity;
}

double weighted_reward(EstimatorKind kind, const LoggedRecord& record) noexcept {
    return record.reward / estimator_denominator(kind, record.propensity);
}

double estimate(const LoggedDataset& data, const TabularPolicy& policy, EstimatorKind kind) {
    if (!(kind.gamma >= 0.0)) {
        throw ArgumentError("estimator gamma must be nonnegative");
    }
    if (policy.num_actions() != data.num_actions()) {
        throw ConfigurationError("policy and dataset disagree on the number of actions");
    }
    CompensatedSum total;
    for (const auto& r : data.records()) {
        if (r.context >= policy.num_contexts()) {
            throw ConfigurationError("policy has no row for a logged context");
        }
        const double pi = policy.prob(r.context, r.action);
        if (pi == 0.0) {
            continue;
        }
        // pi * (R / d) is the same product the CSC gain route forms.
        total += pi * weighted_reward(kind, r);
    }
    return total.value() / static_cast<double>(data.size());
}

double iw_estimate(const LoggedDataset& data, const TabularPolicy& policy) {
    return estimate(data, policy, {EstimatorType::IW, 0.0});
}

double ix_estimate(const LoggedDataset& data, const TabularPolicy& policy, double gamma) {
    return estimate(data, policy, {EstimatorType::IX, gamma});
}

double ciw_estimate(const LoggedDataset& data, const TabularPolicy& policy, double gamma) {
    return estimate(data, policy, {EstimatorType::CIW, gamma});
}

double expected_ix_value(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                         const TabularPolicy& behavior, double gamma) {
    if (!(gamma >= 0.0)) {
        throw ArgumentError("expected_ix_value: gamma must be nonnegative");
    }
    require_compatible(instance, policy);
    require_compatible(instance, behavior, "behavior policy");
    CompensatedSum total;
    for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
        double inner = 0.0;
        for (std::size_t a = 0; a < instance.num_actions(); ++a) {
            const double mu = behavior.prob(x, a);
            if (mu == 0.0) {
                continue;  // never logged
            }
            inner += mu * policy.prob(x, a) * instance.mean_reward(x, a) / (mu + gamma);
        }
        total += instance.context_prob(x) * inner;
    }
    return total.value();
}

double recommended_gamma(std::size_t class_size, double delta, std::size_t n) {
    if (class_size == 0) {
        throw ArgumentError("recommended_gamma: class size must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ArgumentError("recommended_gamma: delta must lie in (0,1)");
    }
    if (n == 0) {
        throw ArgumentError("recommended_gamma: n must be positive");
    }
    return std::sqrt(std::log(2.0 * static_cast<double>(class_size) / delta) / static_cast<double>(n));
}

}  // namespace piwo
