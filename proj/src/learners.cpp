#include "piwo/learners.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "piwo/errors.hpp"
#include "piwo/numeric.hpp"

namespace piwo {

CscInstance::CscInstance(std::vector<CscRow> rows, std::size_t num_actions)
    : rows_(std::move(rows)), num_actions_(num_actions) {
    for (const auto& r : rows_) {
        if (r.gains.size() != num_actions_) {
            throw ArgumentError("CSC rows must all have one gain per action");
        }
        for (double g : r.gains) {
            if (std::isnan(g) || g == kInf) {
                throw ArgumentError("CSC gains must be finite or -inf");
            }
        }
    }
}

double csc_objective(const CscInstance& csc, const TabularPolicy& policy) {
    if (policy.num_actions() != csc.num_actions()) {
        throw ConfigurationError("policy and CSC instance disagree on the number of actions");
    }
    CompensatedSum total;
    for (const auto& row : csc.rows()) {
        if (row.context >= policy.num_contexts()) {
            throw ConfigurationError("policy has no row for a CSC context");
        }
        double inner = 0.0;
        for (std::size_t a = 0; a < row.gains.size(); ++a) {
            const double p = policy.prob(row.context, a);
            if (p == 0.0 || row.gains[a] == 0.0) {
                continue;
            }
            inner += p * row.gains[a];
        }
        if (inner == -kInf) {
            return -kInf;
        }
        total += inner;
    }
    return total.value();
}

Selection csc_oracle(const CscInstance& csc, const PolicyClass& policies) {
    Selection sel;
    sel.scores.reserve(policies.size());
    for (const auto& p : policies) {
        sel.scores.push_back(csc_objective(csc, p));
    }
    sel.index = argmax_lowest_index(sel.scores);
    return sel;
}

CscInstance importance_gains(const LoggedDataset& data, EstimatorKind kind) {
    std::vector<CscRow> rows;
    rows.reserve(data.size());
    for (const auto& r : data.records()) {
        CscRow row{r.context, std::vector<double>(data.num_actions(), 0.0)};
        row.gains[r.action] = weighted_reward(kind, r);
        rows.push_back(std::move(row));
    }
    return CscInstance(std::move(rows), data.num_actions());
}

CscInstance piwo_ix_gains(const LoggedDataset& data, double gamma) {
    if (!(gamma > 0.0)) {
        throw ArgumentError("piwo_ix: gamma must be positive");
    }
    return importance_gains(data, {EstimatorType::IX, gamma});
}

Selection piwo_ix(const LoggedDataset& data, const PolicyClass& policies, double gamma) {
    return csc_oracle(piwo_ix_gains(data, gamma), policies);
}

Selection piwo_clip(const LoggedDataset& data, const PolicyClass& policies, double gamma) {
    if (!(gamma > 0.0)) {
        throw ArgumentError("piwo_clip: gamma must be positive");
    }
    return csc_oracle(importance_gains(data, {EstimatorType::CIW, gamma}), policies);
}

Selection piwo_pl(const LoggedDataset& data, const PolicyClass& policies, double beta,
                  const TabularPolicy& behavior) {
    if (!(beta >= 0.0)) {
        throw ArgumentError("piwo_pl: beta must be nonnegative");
    }
    if (behavior.num_actions() != data.num_actions()) {
        throw ConfigurationError("behavior policy and dataset disagree on the number of actions");
    }
    const double n = static_cast<double>(data.size());
    std::vector<CscRow> rows;
    rows.reserve(data.size());
    for (const auto& r : data.records()) {
        if (r.context >= behavior.num_contexts()) {
            throw ConfigurationError("behavior policy has no row for a logged context");
        }
        CscRow row{r.context, std::vector<double>(data.num_actions(), 0.0)};
        if (beta > 0.0) {
            for (std::size_t a = 0; a < data.num_actions(); ++a) {
                const double mu = behavior.prob(r.context, a);
                row.gains[a] = mu > 0.0 ? -beta / mu : -kInf;
            }
        }
        row.gains[r.action] += r.reward / (n * r.propensity);
        rows.push_back(std::move(row));
    }
    return csc_oracle(CscInstance(std::move(rows), data.num_actions()), policies);
}

Selection coverage_scaled_piwo_ix(const LoggedDataset& data, const PolicyClass& policies,
                                  const std::vector<double>& per_policy_gamma, double delta) {
    if (per_policy_gamma.size() != policies.size()) {
        throw ArgumentError("coverage_scaled_piwo_ix: need one gamma per class member");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ArgumentError("coverage_scaled_piwo_ix: delta must lie in (0,1)");
    }
    for (double g : per_policy_gamma) {
        if (!(g > 0.0)) {
            throw ArgumentError("coverage_scaled_piwo_ix: every gamma_pi must be positive");
        }
    }
    const double log_term = std::log(2.0 * static_cast<double>(policies.size()) / delta);
    const double n = static_cast<double>(data.size());
    const auto penalty = [&](double g) { return log_term / (2.0 * g * n); };

    const bool uniform = std::all_of(per_policy_gamma.begin(), per_policy_gamma.end(),
                                     [&](double g) { return g == per_policy_gamma.front(); });
    if (uniform) {
        // A common penalty is a constant shift, so the IX argmax is the answer.
        Selection sel = piwo_ix(data, policies, per_policy_gamma.front());
        for (double& s : sel.scores) {
            s = s / n - penalty(per_policy_gamma.front());
        }
        return sel;
    }
    Selection sel;
    sel.scores.reserve(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        sel.scores.push_back(ix_estimate(data, policies[i], per_policy_gamma[i]) - penalty(per_policy_gamma[i]));
    }
    sel.index = argmax_lowest_index(sel.scores);
    return sel;
}

std::vector<double> theorem3_gamma(const PolicyClass& policies, const FiniteContextualBandit& instance,
                                   const TabularPolicy& behavior, double delta, std::size_t n) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ArgumentError("theorem3_gamma: delta must lie in (0,1)");
    }
    if (n == 0) {
        throw ArgumentError("theorem3_gamma: n must be positive");
    }
    const double log_term = std::log(2.0 * static_cast<double>(policies.size()) / delta);
    const double nd = static_cast<double>(n);
    std::vector<double> gammas;
    gammas.reserve(policies.size());
    for (const auto& p : policies) {
        const double c0 = smoothed_coverage_ratio(instance, p, behavior, 0.0);
        if (std::isinf(c0)) {
            gammas.push_back(1.0 / nd);
        } else if (c0 == 0.0) {
            gammas.push_back(1.0);
        } else {
            gammas.push_back(std::sqrt(log_term / (2.0 * c0 * nd)));
        }
    }
    return gammas;
}

double regret(const FiniteContextualBandit& instance, const TabularPolicy& learned,
              const TabularPolicy& comparator) {
    return policy_value(instance, comparator) - policy_value(instance, learned);
}

std::size_t best_in_class(const FiniteContextualBandit& instance, const PolicyClass& policies) {
    std::vector<double> values;
    values.reserve(policies.size());
    for (const auto& p : policies) {
        values.push_back(policy_value(instance, p));
    }
    return argmax_lowest_index(values);
}

LearnerKind parse_learner(const std::string& name) {
    if (name == "piwo-ix") return LearnerKind::PiwoIx;
    if (name == "piwo-clip") return LearnerKind::PiwoClip;
    if (name == "piwo-pl") return LearnerKind::PiwoPl;
    if (name == "coverage-scaled") return LearnerKind::CoverageScaled;
    throw ArgumentError("unknown learner '" + name + "' (expected piwo-ix, piwo-clip, piwo-pl or coverage-scaled)");
}

std::string to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::PiwoIx: return "piwo-ix";
        case LearnerKind::PiwoClip: return "piwo-clip";
        case LearnerKind::PiwoPl: return "piwo-pl";
        case LearnerKind::CoverageScaled: return "coverage-scaled";
    }
    return "?";
}

Selection run_learner(LearnerKind kind, const LoggedDataset& data, const PolicyClass& policies,
                      const LearnerParams& params, const TabularPolicy* behavior) {
    switch (kind) {
        case LearnerKind::PiwoIx:
            return piwo_ix(data, policies, params.gamma);
        case LearnerKind::PiwoClip:
            return piwo_clip(data, policies, params.gamma);
        case LearnerKind::PiwoPl:
            if (behavior == nullptr) {
                throw ArgumentError("piwo-pl requires the behavior policy");
            }
            return piwo_pl(data, policies, params.beta, *behavior);
        case LearnerKind::CoverageScaled:
            if (!params.per_policy_gamma) {
                throw ArgumentError("coverage-scaled requires per-policy gammas");
            }
            return coverage_scaled_piwo_ix(data, policies, *params.per_policy_gamma, params.delta);
    }
    throw ArgumentError("unknown learner");
}

}  // namespace piwo
