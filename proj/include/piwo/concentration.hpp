#pragma once

// Monte-Carlo checks of the IX tail bounds and regret guarantees.
//
// Each trial draws a fresh log from the instance, evaluates the left-hand
// side of the target inequality exactly (true values by enumeration, IX
// estimates from the log) and compares it to the exact right-hand side. A
// trial counts as one violation when the inequality fails for any policy or
// probe distribution, since the statements hold simultaneously over the
// class. The empirical violation rate is accepted when it is at most
// delta + 3 sqrt(delta (1 - delta) / trials).
//
// Targets and their per-trial checks, with L = log(|Pi|/delta):
//   lemma1   : v~(pi) - v(pi) <= L / (2 gamma n)                         all pi
//   lemma2   : v(pi) - v~(pi) <= L / (2 gamma n) + 2 gamma C_gamma(pi)   all pi
//   lemma3   : v~(Q) - v(Q)   <= (KL(Q||P) + log(1/delta)) / (2 gamma n)  probe Q
//   lemma4   : v(Q) - v~(Q)   <= same + 2 gamma C_gamma(Q)               probe Q
//   theorem1 : regret of PIWO-IX vs pi* <= log(2|Pi|/delta)/(gamma n) + 2 gamma C_gamma(pi*)
//   theorem2 : regret of the Gibbs posterior vs Q* <= (KL(Q*||P) + log(1/delta))/(gamma n)
//              + 2 gamma C_gamma(Q*), for every probe Q*
//   theorem3 : regret of coverage-scaled PIWO-IX vs pi* <= sqrt(8 C_0(pi*) log(2|Pi|/delta) / n)
//
// Default gamma: recommended_gamma for lemma1/lemma2/theorem1, sqrt(1/n) for
// the distribution-level targets. The probe set is every point mass, the
// uniform distribution, and `probe_mixtures` Dirichlet(1) mixtures.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "piwo/bandit.hpp"
#include "piwo/pac_bayes.hpp"

namespace piwo {

enum class BoundTarget { Lemma1, Lemma2, Lemma3, Lemma4, Theorem1, Theorem2, Theorem3 };

BoundTarget parse_bound_target(const std::string& name);
std::string to_string(BoundTarget target);

struct BoundCheckSpec {
    BoundTarget target = BoundTarget::Lemma1;
    FiniteContextualBandit instance;
    TabularPolicy behavior;
    PolicyClass policies;
    std::optional<PolicyDistribution> prior;              ///< default uniform
    std::optional<std::size_t> comparator;                ///< default best in class
    std::size_t n = 100;
    std::optional<double> gamma;                          ///< default per target
    std::optional<std::vector<double>> per_policy_gamma;  ///< theorem3; default theorem3_gamma
    double delta = 0.1;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::size_t probe_mixtures = 10;
};

struct BoundSummary {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct ViolationReport {
    BoundTarget target = BoundTarget::Lemma1;
    std::size_t trials = 0;
    std::size_t violations = 0;
    double violation_rate = 0.0;
    double delta = 0.0;
    double slack = 0.0;
    double gamma = 0.0;       ///< common gamma (0 for theorem3)
    BoundSummary bound_values;  ///< right-hand sides over policies / probes
    double worst_margin = 0.0;  ///< min over trials and members of (bound - deviation)
    bool passed = false;
};

/// Throws ArgumentError for trials == 0, delta outside (0,1) or gamma <= 0.
ViolationReport run_bound_check(const BoundCheckSpec& spec);

/// Tightest observed slack, min over trials of (bound - deviation).
double worst_case_margin(const BoundCheckSpec& spec);

/// 3 sqrt(delta (1 - delta) / trials).
double violation_slack(double delta, std::size_t trials);

/// Fixed probe distributions for the distribution-level targets.
std::vector<PolicyDistribution> probe_distributions(std::size_t class_size, std::size_t mixtures,
                                                    std::uint64_t seed);

/// Parses a `key = value` spec file. Keys: target, instance, behavior,
/// class (a policy class CSV or `random:N`), class_seed, prior, comparator,
/// n, gamma (a number or `recommended`), delta, trials, seed,
/// probe_mixtures. Relative paths resolve against the spec file's directory.
BoundCheckSpec read_bound_check_spec_file(const std::string& path);

/// `count` Dirichlet(1) tabular policies drawn from Philox(seed).
PolicyClass random_policy_class(std::size_t count, std::size_t num_contexts, std::size_t num_actions,
                                std::uint64_t seed);

std::string report_text(const ViolationReport& report);
std::string report_csv_header();
std::string report_csv_row(const ViolationReport& report);

}  // namespace piwo
