#pragma once

// Enumerable stochastic contextual bandits, tabular policies and logged data.
//
// Contexts and actions are addressed by 0-based index throughout; context ids
// are carried as strings for file I/O only.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "piwo/rng.hpp"

namespace piwo {

/// Normalization tolerance for probability rows and context distributions.
inline constexpr double kProbTolerance = 1e-12;

enum class NoiseModel { Deterministic, Bernoulli };

/// Ground-truth environment: a finite context distribution, K actions and a
/// mean-reward table in [0,1]. Immutable after construction.
class FiniteContextualBandit {
public:
    /// `mean_rewards` is row-major, one row of `num_actions` per context.
    /// `features` is either empty or holds one row per context.
    FiniteContextualBandit(std::vector<std::string> context_ids,
                           std::vector<double> context_probs, std::size_t num_actions,
                           std::vector<double> mean_rewards, NoiseModel noise,
                           std::vector<std::vector<double>> features = {});

    [[nodiscard]] std::size_t num_contexts() const noexcept { return context_ids_.size(); }
    [[nodiscard]] std::size_t num_actions() const noexcept { return num_actions_; }
    [[nodiscard]] NoiseModel noise() const noexcept { return noise_; }

    [[nodiscard]] const std::string& context_id(std::size_t x) const { return context_ids_.at(x); }
    [[nodiscard]] const std::vector<std::string>& context_ids() const noexcept { return context_ids_; }
    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& id) const;

    [[nodiscard]] double context_prob(std::size_t x) const { return context_probs_.at(x); }
    [[nodiscard]] std::span<const double> context_probs() const noexcept { return context_probs_; }

    [[nodiscard]] double mean_reward(std::size_t x, std::size_t a) const {
        return mean_rewards_[x * num_actions_ + a];
    }
    [[nodiscard]] std::span<const double> reward_row(std::size_t x) const {
        return std::span<const double>(mean_rewards_).subspan(x * num_actions_, num_actions_);
    }

    [[nodiscard]] bool has_features() const noexcept { return !features_.empty(); }
    [[nodiscard]] const std::vector<double>& features(std::size_t x) const { return features_.at(x); }

private:
    std::vector<std::string> context_ids_;
    std::vector<double> context_probs_;
    std::size_t num_actions_;
    std::vector<double> mean_rewards_;
    NoiseModel noise_;
    std::vector<std::vector<double>> features_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Stochastic map from context index to a distribution over K actions.
class TabularPolicy {
public:
    /// `probs` is row-major with `num_actions` entries per context. Rows off
    /// by at most kProbTolerance from 1 are renormalized, others rejected.
    TabularPolicy(std::size_t num_actions, std::vector<double> probs);

    static TabularPolicy from_rows(const std::vector<std::vector<double>>& rows);
    static TabularPolicy deterministic(std::size_t num_actions, std::span<const std::size_t> actions);
    static TabularPolicy constant(std::size_t num_contexts, std::size_t num_actions, std::size_t action);
    static TabularPolicy uniform(std::size_t num_contexts, std::size_t num_actions);

    [[nodiscard]] std::size_t num_contexts() const noexcept { return probs_.size() / num_actions_; }
    [[nodiscard]] std::size_t num_actions() const noexcept { return num_actions_; }

    [[nodiscard]] double prob(std::size_t x, std::size_t a) const { return probs_[x * num_actions_ + a]; }
    [[nodiscard]] std::span<const double> row(std::size_t x) const {
        return std::span<const double>(probs_).subspan(x * num_actions_, num_actions_);
    }

    friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

private:
    std::size_t num_actions_;
    std::vector<double> probs_;
};

/// Nonempty, ordered finite policy class. Order drives tie-breaking.
class PolicyClass {
public:
    explicit PolicyClass(std::vector<TabularPolicy> policies);

    [[nodiscard]] std::size_t size() const noexcept { return policies_.size(); }
    [[nodiscard]] const TabularPolicy& operator[](std::size_t i) const { return policies_.at(i); }
    [[nodiscard]] auto begin() const noexcept { return policies_.begin(); }
    [[nodiscard]] auto end() const noexcept { return policies_.end(); }
    [[nodiscard]] std::size_t num_contexts() const noexcept { return policies_.front().num_contexts(); }
    [[nodiscard]] std::size_t num_actions() const noexcept { return policies_.front().num_actions(); }

private:
    std::vector<TabularPolicy> policies_;
};

struct LoggedRecord {
    std::size_t context = 0;
    std::size_t action = 0;
    double reward = 0.0;
    double propensity = 1.0;  ///< behavior probability of `action` at logging time

    friend bool operator==(const LoggedRecord&, const LoggedRecord&) = default;
};

class LoggedDataset {
public:
    /// Throws DataError on an empty record list or a record outside its
    /// invariants (propensity in (0,1], reward in [0,1], action < K).
    LoggedDataset(std::vector<LoggedRecord> records, std::size_t num_actions);

    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] std::size_t num_actions() const noexcept { return num_actions_; }
    [[nodiscard]] std::span<const LoggedRecord> records() const noexcept { return records_; }
    [[nodiscard]] const LoggedRecord& operator[](std::size_t t) const { return records_[t]; }

    friend bool operator==(const LoggedDataset&, const LoggedDataset&) = default;

private:
    std::vector<LoggedRecord> records_;
    std::size_t num_actions_;
};

/// Throws ConfigurationError unless `policy` has a row for every context of
/// `instance` and the same number of actions.
void require_compatible(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                        const char* what = "policy");

/// Exact value: sum over (x,a) of nu(x) * pi(a|x) * r(x,a).
double policy_value(const FiniteContextualBandit& instance, const TabularPolicy& policy);

/// n i.i.d. records: X ~ nu, A ~ behavior(.|X), R ~ p(.|X,A). Each record
/// consumes three uniforms from Philox(seed, 0) in the order context, action,
/// reward, so the log is a pure function of (instance, behavior, n, seed).
LoggedDataset sample_dataset(const FiniteContextualBandit& instance, const TabularPolicy& behavior,
                             std::size_t n, std::uint64_t seed);

/// E[sum_a pi(a|X) / mu(a|X)]; +inf when pi puts mass on an action mu never
/// plays in a context of positive probability.
double coverage_ratio(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                      const TabularPolicy& behavior);

/// E[sum_a pi(a|X) r(X,a) / (mu(a|X) + gamma)]. At gamma = 0 this is the
/// reward-scaled coverage ratio, which may be +inf.
double smoothed_coverage_ratio(const FiniteContextualBandit& instance, const TabularPolicy& policy,
                               const TabularPolicy& behavior, double gamma);

/// Row-wise Dirichlet(1, ..., 1) policy.
TabularPolicy random_policy(std::size_t num_contexts, std::size_t num_actions, Philox& rng);

/// Random instance with Dirichlet(1) context probabilities and uniform mean
/// rewards; the noise model is Bernoulli.
FiniteContextualBandit random_instance(std::size_t num_contexts, std::size_t num_actions, Philox& rng);

}  // namespace piwo
