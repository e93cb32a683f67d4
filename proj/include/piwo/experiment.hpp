#pragma once

// Supervised-to-bandit experiments.
//
// A classification table becomes a bandit whose contexts are the table rows
// (uniform distribution) and whose reward for action a at a row labelled y is
// Bernoulli(M[a][y]) for a reward matrix M with unit diagonal. Behavior
// policies are softmax policies over a ridge model of the mean rewards, and
// learners choose from a fixed finite class of linear policies.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "piwo/bandit.hpp"
#include "piwo/learners.hpp"

namespace piwo {

class ClassificationTable {
public:
    /// Labels are 0-based and must be < num_classes; all features finite and
    /// every row of equal width.
    ClassificationTable(std::vector<std::vector<double>> features, std::vector<std::size_t> labels,
                        std::size_t num_classes);

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t num_features() const noexcept { return num_features_; }
    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] const std::vector<double>& features(std::size_t i) const { return features_.at(i); }
    [[nodiscard]] std::size_t label(std::size_t i) const { return labels_.at(i); }
    [[nodiscard]] const std::vector<std::size_t>& labels() const noexcept { return labels_; }

    /// Rows at `indices`, in that order.
    [[nodiscard]] ClassificationTable subset(std::span<const std::size_t> indices) const;

private:
    std::vector<std::vector<double>> features_;
    std::vector<std::size_t> labels_;
    std::size_t num_features_ = 0;
    std::size_t num_classes_ = 0;
};

/// K x K matrix, M(a, y) = mean reward of action a when the true label is y.
class RewardMatrix {
public:
    RewardMatrix(std::size_t num_actions, std::vector<double> entries);

    [[nodiscard]] std::size_t size() const noexcept { return k_; }
    [[nodiscard]] double operator()(std::size_t action, std::size_t label) const { return m_[action * k_ + label]; }
    [[nodiscard]] std::span<const double> entries() const noexcept { return m_; }

private:
    std::size_t k_;
    std::vector<double> m_;
};

/// Unit diagonal, off-diagonal entries uniform on [0,1) from Philox(seed).
RewardMatrix build_reward_matrix(std::size_t num_actions, std::uint64_t seed);

/// Contexts are the table rows ("r1", "r2", ...) with uniform probability and
/// their feature rows attached; mean reward r(x, a) = M(a, label(x)).
FiniteContextualBandit supervised_to_bandit(const ClassificationTable& table, const RewardMatrix& m);

/// Multi-output linear model, prediction_j(x) = coef_j . x + intercept_j.
class RidgeModel {
public:
    RidgeModel(std::vector<std::vector<double>> coefficients, std::vector<double> intercepts, double alpha);

    [[nodiscard]] std::size_t num_outputs() const noexcept { return coef_.size(); }
    [[nodiscard]] std::size_t num_features() const noexcept { return coef_.empty() ? 0 : coef_.front().size(); }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] const std::vector<double>& coefficients(std::size_t j) const { return coef_.at(j); }
    [[nodiscard]] double intercept(std::size_t j) const { return intercept_.at(j); }

    [[nodiscard]] std::vector<double> predict(std::span<const double> x) const;

private:
    std::vector<std::vector<double>> coef_;
    std::vector<double> intercept_;
    double alpha_;
};

/// Solves (X'X + alpha I) w_j = X'y_j for every output column j of `targets`
/// (one row per sample). With `fit_intercept` the data are centered first and
/// the intercept is left unpenalized.
RidgeModel ridge_regression(const std::vector<std::vector<double>>& inputs,
                            const std::vector<std::vector<double>>& targets, double alpha, bool fit_intercept);

/// One output per action with targets M(a, label(x)), intercept included.
RidgeModel fit_ridge(const ClassificationTable& table, const RewardMatrix& m, double alpha);

enum class Direction { Good, Bad };

Direction parse_direction(const std::string& name);
std::string to_string(Direction d);

/// Rows pi(a|x) ∝ exp(±eta * reg(x, a)) over the table rows (sign - for Bad),
/// computed after subtracting the row maximum. Entries that underflow to 0
/// are raised to the smallest normal double; their count is added to
/// `*clamped` when given.
TabularPolicy softmax_behavior(const RidgeModel& model, const ClassificationTable& table, double eta,
                               Direction direction, std::size_t* clamped = nullptr);

/// Gaussian clusters: centers ~ N(0, 4 I), labels uniform over K, features
/// = center(label) + N(0, I). Deterministic per seed.
ClassificationTable generate_synthetic_classification(std::size_t num_rows, std::size_t num_features,
                                                      std::size_t num_classes, std::uint64_t seed);

/// Parses a numeric CSV. A first line containing any non-numeric cell is a
/// header. `label_column` is a header name, a 0-based column index, or
/// "last". Labels may be any token and are remapped to 0..K-1 in order of
/// first appearance.
ClassificationTable load_classification_csv(const std::string& path, const std::string& label_column);
ClassificationTable read_classification_csv(std::istream& in, const std::string& label_column);
void write_classification_csv(std::ostream& out, const ClassificationTable& table);

/// Finite learner class: one ridge scorer per label-noise level j / J
/// (j = 0..J-1), each fitted on a seeded half of the behavior-fit rows, and for
/// each scorer one policy per temperature (inf = greedy, ties to the lowest
/// action). Policies are tabulated over the rows of `contexts`.
PolicyClass build_policy_class(const ClassificationTable& fit_rows, const ClassificationTable& contexts,
                               const RewardMatrix& m, std::size_t num_scorers,
                               std::span<const double> temperatures, double alpha, std::uint64_t seed);

struct SweepConfig {
    std::vector<double> eta_grid;
    std::vector<double> hyper_grid;
    std::vector<LearnerKind> learners;
    std::size_t folds = 10;
    double behavior_fit_fraction = 0.1;
    std::vector<std::uint64_t> seeds{0};
    Direction direction = Direction::Good;
    double ridge_alpha = 1.0;
    std::size_t class_scorers = 10;
    std::vector<double> class_temperatures{std::numeric_limits<double>::infinity(), 10.0};
};

/// Throws ConfigurationError when a grid is empty, folds < 2 or the
/// fraction is outside (0,1).
void validate(const SweepConfig& config);

struct SweepRow {
    LearnerKind learner = LearnerKind::PiwoIx;
    Direction direction = Direction::Good;
    double eta = 0.0;
    double hyperparam = 0.0;
    std::size_t fold = 0;
    double expected_reward = 0.0;
    double regret = 0.0;
    std::size_t n_train = 0;
    std::uint64_t seed = 0;
};

/// Runs every (seed, eta, learner, hyperparameter, fold) cell; rows are
/// returned in that nesting order. The hyperparameter is gamma for
/// piwo-ix/piwo-clip, beta for piwo-pl, and the scale h of
/// gamma_pi = h / sqrt(C_0(pi)) for coverage-scaled.
std::vector<SweepRow> run_sweep(const SweepConfig& config, const ClassificationTable& table, const RewardMatrix& m);

inline constexpr const char* kSweepCsvHeader =
    "learner,direction,eta,hyperparam,fold,expected_reward,regret,n_train,seed";

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// `logspace(lo,hi,count)` (base 10, endpoints included) or a comma list.
std::vector<double> parse_grid(const std::string& text);

/// `key = value` lines mirroring SweepConfig; '#' starts a comment.
SweepConfig parse_sweep_config(std::istream& in);
SweepConfig read_sweep_config_file(const std::string& path);

/// Reward matrix as CSV rows of K reals.
void write_reward_matrix(std::ostream& out, const RewardMatrix& m);
RewardMatrix read_reward_matrix(std::istream& in);
RewardMatrix read_reward_matrix_file(const std::string& path);

}  // namespace piwo
