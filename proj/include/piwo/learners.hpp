#pragma once

// Policy selection over a finite class through a cost-sensitive
// classification (CSC) oracle.
//
// Every learner reduces to scoring each class member and taking the argmax
// with ties (relative tolerance kTieTolerance) broken towards the lowest class
// index. Scores are kept in the returned Selection so callers can inspect the
// objective that drove the choice.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "piwo/bandit.hpp"
#include "piwo/estimators.hpp"

namespace piwo {

struct CscRow {
    std::size_t context = 0;
    std::vector<double> gains;  ///< one per action; -inf encodes an infinite penalty
};

class CscInstance {
public:
    CscInstance(std::vector<CscRow> rows, std::size_t num_actions);

    [[nodiscard]] std::size_t num_actions() const noexcept { return num_actions_; }
    [[nodiscard]] const std::vector<CscRow>& rows() const noexcept { return rows_; }

private:
    std::vector<CscRow> rows_;
    std::size_t num_actions_;
};

struct Selection {
    std::size_t index = 0;
    std::vector<double> scores;  ///< per class member, in class order
};

/// sum_t sum_a pi(a|x_t) g_t(a), where zero-probability actions contribute
/// nothing even when their gain is -inf.
double csc_objective(const CscInstance& csc, const TabularPolicy& policy);

Selection csc_oracle(const CscInstance& csc, const PolicyClass& policies);

/// Sparse gains g_t(a) = 1{A_t = a} R_t / d(P_t) for the given estimator.
CscInstance importance_gains(const LoggedDataset& data, EstimatorKind kind);

/// g_t(a) = 1{A_t = a} R_t / (P_t + gamma).
CscInstance piwo_ix_gains(const LoggedDataset& data, double gamma);

/// Maximizer of the IX value estimate.
Selection piwo_ix(const LoggedDataset& data, const PolicyClass& policies, double gamma);

/// Maximizer of the clipped-importance-weight estimate.
Selection piwo_clip(const LoggedDataset& data, const PolicyClass& policies, double gamma);

/// Maximizer of iw_estimate(pi) - beta * sum_t sum_a pi(a|X_t) / mu(a|X_t).
/// The adjustment is not normalized by n. With beta > 0 an action mu never
/// plays at a logged context carries gain -inf; beta = 0 disables the
/// adjustment entirely.
Selection piwo_pl(const LoggedDataset& data, const PolicyClass& policies, double beta,
                  const TabularPolicy& behavior);

/// Maximizer of ix_estimate(pi, gamma_pi) - log(2|Pi|/delta) / (2 gamma_pi n).
Selection coverage_scaled_piwo_ix(const LoggedDataset& data, const PolicyClass& policies,
                                  const std::vector<double>& per_policy_gamma, double delta);

/// gamma_pi = sqrt(log(2|Pi|/delta) / (2 C_0(pi) n)), with gamma_pi = 1/n when
/// C_0(pi) is infinite and gamma_pi = 1 when C_0(pi) = 0.
std::vector<double> theorem3_gamma(const PolicyClass& policies, const FiniteContextualBandit& instance,
                                   const TabularPolicy& behavior, double delta, std::size_t n);

/// v(comparator) - v(learned); may be negative.
double regret(const FiniteContextualBandit& instance, const TabularPolicy& learned,
              const TabularPolicy& comparator);

/// Index of the highest-value class member (lowest index among ties).
std::size_t best_in_class(const FiniteContextualBandit& instance, const PolicyClass& policies);

enum class LearnerKind { PiwoIx, PiwoClip, PiwoPl, CoverageScaled };

LearnerKind parse_learner(const std::string& name);
std::string to_string(LearnerKind kind);

struct LearnerParams {
    double gamma = 0.0;
    double beta = 0.0;
    double delta = 0.05;
    std::optional<std::vector<double>> per_policy_gamma;
};

/// Dispatches to one learner. PIWO-PL needs `behavior`; the coverage-scaled
/// variant needs `params.per_policy_gamma`.
Selection run_learner(LearnerKind kind, const LoggedDataset& data, const PolicyClass& policies,
                      const LearnerParams& params, const TabularPolicy* behavior = nullptr);

}  // namespace piwo
