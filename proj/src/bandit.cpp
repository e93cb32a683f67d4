#include "piwo/bandit.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "piwo/errors.hpp"
#include "piwo/numeric.hpp"

namespace piwo {

namespace {

// Checks a probability vector sums to one within tolerance and renormalizes.
void normalize_or_throw(std::span<double> row, const std::string& what) {
    CompensatedSum total;
    for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ConfigurationError(what + ": entries must be finite and nonnegative");
        }
        total += p;
    }
    const double s = total.value();
    if (std::abs(s - 1.0) > kProbTolerance) {
        throw ConfigurationError(what + ": sums to " + std::to_string(s) + ", expected 1");
    }
    if (s != 1.0) {
        for (double& p : row) {
            p /= s;
        }
    }
}

}  // namespace

FiniteContextualBandit::FiniteContextualBandit(std::vector<std::string> context_ids,
                                               std::vector<double> context_probs,
                                               std::size_t num_actions,
                                               std::vector<double> mean_rewards, NoiseModel noise,
                                               std::vector<std::vector<double>> features)
    : context_ids_(std::move(context_ids)),
      context_probs_(std::move(context_probs)),
      num_actions_(num_actions),
      mean_rewards_(std::move(mean_rewards)),
      noise_(noise),
      features_(std::move(features)) {
    if (num_actions_ == 0) {
        throw ConfigurationError("instance: number of actions must be positive");
    }
    if (context_ids_.empty()) {
        throw ConfigurationError("instance: at least one context is required");
    }
    if (context_probs_.size() != context_ids_.size()) {
        throw ConfigurationError("instance: one probability per context is required");
    }
    if (mean_rewards_.size() != context_ids_.size() * num_actions_) {
        throw ConfigurationError("instance: mean reward table must be contexts x actions");
    }
    if (!features_.empty() && features_.size() != context_ids_.size()) {
        throw ConfigurationError("instance: feature rows must match contexts");
    }
    for (std::size_t x = 0; x < context_ids_.size(); ++x) {
        if (!index_.emplace(context_ids_[x], x).second) {
            throw ConfigurationError("instance: duplicate context id '" + context_ids_[x] + "'");
        }
    }
    normalize_or_throw(context_probs_, "instance context distribution");
    for (double r : mean_rewards_) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw ConfigurationError("instance: mean rewards must lie in [0,1]");
        }
    }
}

std::optional<std::size_t> FiniteContextualBandit::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

TabularPolicy::TabularPolicy(std::size_t num_actions, std::vector<double> probs)
    : num_actions_(num_actions), probs_(std::move(probs)) {
    if (num_actions_ == 0) {
        throw ConfigurationError("policy: number of actions must be positive");
    }
    if (probs_.empty() || probs_.size() % num_actions_ != 0) {
        throw ConfigurationError("policy: probability table must be contexts x actions");
    }
    for (std::size_t x = 0; x < num_contexts(); ++x) {
        normalize_or_throw(std::span<double>(probs_).subspan(x * num_actions_, num_actions_),
                           "policy row " + std::to_string(x));
    }
}

TabularPolicy TabularPolicy::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw ConfigurationError("policy: no rows");
    }
    const std::size_t k = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * k);
    for (const auto& r : rows) {
        if (r.size() != k) {
            throw ConfigurationError("policy: ragged rows");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return TabularPolicy(k, std::move(flat));
}

TabularPolicy TabularPolicy::deterministic(std::size_t num_actions, std::span<const std::size_t> actions) {
    std::vector<double> flat(actions.size() * num_actions, 0.0);
    for (std::size_t x = 0; x < actions.size(); ++x) {
        if (actions[x] >= num_actions) {
            throw ConfigurationError("policy: action index out of range");
        }
        flat[x * num_actions + actions[x]] = 1.0;
    }
    return TabularPolicy(num_actions, std::move(flat));
}

TabularPolicy TabularPolicy::constant(std::size_t num_contexts, std::size_t num_actions, std::size_t action) {
    const std::vector<std::size_t> actions(num_contexts, action);
    return deterministic(num_actions, actions);
}

TabularPolicy TabularPolicy::uniform(std::size_t num_contexts, std::size_t num_actions) {
    return TabularPolicy(num_actions,
                         std::vector<double>(num_contexts * num_actions, 1.0 / static_cast<double>(num_actions)));
}

PolicyClass::PolicyClass(std::vector<TabularPolicy> policies) : policies_(std::move(policies)) {
    if (policies_.empty()) {
        throw ArgumentError("policy class must be nonempty");
    }
    for (const auto& p : policies_) {
        if (p.num_contexts() != policies_.front().num_contexts() ||
            p.num_actions() != policies_.front().num_actions()) {
            throw ConfigurationError("policy class members must share contexts and actions");
        }
    }
}

LoggedDataset::LoggedDataset(std::vector<LoggedRecord> records, std::size_t num_actions)
    : records_(std::move(records)), num_actions_(num_actions) {
    if (records_.empty()) {
        throw DataError("logged dataset must contain at least one record");
    }
    for (std::size_t t = 0; t < records_.size(); ++t) {
        const auto& r = records_[t];
        if (r.action >= num_actions_) {
            throw DataError("record " + std::to_string(t) + ": action out of range");
        }
        if (!(r.propensity > 0.0 && r.propensity <= 1.0)) {
            throw DataError("record " + std::to_string(t) + ": propensity must lie in (0,1]");
        }
        if (!(r.reward >= 0.0 && r.reward <= 1.0)) {
            throw DataError("record " + std::to_string(t) + ": reward must lie in [0,1]");
        }
    }
}

void require_compatible(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                        const char* what) {
    if (policy.num_contexts() != instance.num_contexts()) {
        throw ConfigurationError(std::string(what) + " has " + std::to_string(policy.num_contexts()) +
                                 " context rows, instance has " + std::to_string(instance.num_contexts()));
    }
    if (policy.num_actions() != instance.num_actions()) {
        throw ConfigurationError(std::string(what) + " action count differs from instance");
    }
}

double policy_value(const FiniteContextualBandit& instance, const TabularPolicy& policy) {
    require_compatible(instance, policy);
    CompensatedSum total;
    for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
        double inner = 0.0;
        for (std::size_t a = 0; a < instance.num_actions(); ++a) {
            inner += policy.prob(x, a) * instance.mean_reward(x, a);
        }
        total += instance.context_prob(x) * inner;
    }
    return total.value();
}

LoggedDataset sample_dataset(const FiniteContextualBandit& instance, const TabularPolicy& behavior,
                             std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw ArgumentError("sample_dataset: n must be positive");
    }
    require_compatible(instance, behavior, "behavior policy");
    Philox rng(seed, 0);
    std::vector<LoggedRecord> records;
    records.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t x = rng.categorical(instance.context_probs());
        const std::size_t a = rng.categorical(behavior.row(x));
        const double u = rng.uniform();
        const double mean = instance.mean_reward(x, a);
        const double reward = instance.noise() == NoiseModel::Bernoulli ? (u < mean ? 1.0 : 0.0) : mean;
        records.push_back({x, a, reward, behavior.prob(x, a)});
    }
    return LoggedDataset(std::move(records), instance.num_actions());
}

double coverage_ratio(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                      const TabularPolicy& behavior) {
    require_compatible(instance, policy);
    require_compatible(instance, behavior, "behavior policy");
    // Accumulated as K + E[inner - K], so pi == mu gives exactly K.
    const double k = static_cast<double>(instance.num_actions());
    CompensatedSum total;
    for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
        const double nu = instance.context_prob(x);
        if (nu == 0.0) {
            continue;
        }
        double inner = 0.0;
        for (std::size_t a = 0; a < instance.num_actions(); ++a) {
            const double pi = policy.prob(x, a);
            if (pi == 0.0) {
                continue;
            }
            const double mu = behavior.prob(x, a);
            if (mu == 0.0) {
                return kInf;
            }
            inner += pi / mu;
        }
        total += nu * (inner - k);
    }
    return k + total.value();
}

double smoothed_coverage_ratio(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                               const TabularPolicy& behavior, double gamma) {
    if (!(gamma >= 0.0)) {
        throw ArgumentError("smoothed_coverage_ratio: gamma must be nonnegative");
    }
    require_compatible(instance, policy);
    require_compatible(instance, behavior, "behavior policy");
    // Accumulated as K + E[inner - K], so pi == mu gives exactly K.
    const double k = static_cast<double>(instance.num_actions());
    CompensatedSum total;
    for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
        const double nu = instance.context_prob(x);
        if (nu == 0.0) {
            continue;
        }
        double inner = 0.0;
        for (std::size_t a = 0; a < instance.num_actions(); ++a) {
            const double weighted = policy.prob(x, a) * instance.mean_reward(x, a);
            if (weighted == 0.0) {
                continue;
            }
            const double denom = behavior.prob(x, a) + gamma;
            if (denom == 0.0) {
                return kInf;
            }
            inner += weighted / denom;
        }
        total += nu * inner;
    }
    return total.value();
}

TabularPolicy random_policy(std::size_t num_contexts, std::size_t num_actions, Philox& rng) {
    std::vector<double> flat(num_contexts * num_actions);
    for (std::size_t x = 0; x < num_contexts; ++x) {
        double total = 0.0;
        for (std::size_t a = 0; a < num_actions; ++a) {
            double u = rng.uniform();
            while (u <= 0.0) {
                u = rng.uniform();
            }
            flat[x * num_actions + a] = -std::log(u);
            total += flat[x * num_actions + a];
        }
        for (std::size_t a = 0; a < num_actions; ++a) {
            flat[x * num_actions + a] /= total;
        }
    }
    return TabularPolicy(num_actions, std::move(flat));
}

FiniteContextualBandit random_instance(std::size_t num_contexts, std::size_t num_actions, Philox& rng) {
    std::vector<std::string> ids;
    for (std::size_t x = 0; x < num_contexts; ++x) {
        ids.push_back("x" + std::to_string(x + 1));
    }
    const TabularPolicy nu = random_policy(1, num_contexts, rng);
    std::vector<double> probs(nu.row(0).begin(), nu.row(0).end());
    std::vector<double> rewards(num_contexts * num_actions);
    for (double& r : rewards) {
        r = rng.uniform();
    }
    return FiniteContextualBandit(std::move(ids), std::move(probs), num_actions, std::move(rewards),
                                  NoiseModel::Bernoulli);
}

}  // namespace piwo
