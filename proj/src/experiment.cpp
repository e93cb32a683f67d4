#include "piwo/experiment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "piwo/errors.hpp"
#include "piwo/io.hpp"
#include "piwo/numeric.hpp"

namespace piwo {

ClassificationTable::ClassificationTable(std::vector<std::vector<double>> features,
                                         std::vector<std::size_t> labels, std::size_t num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
    if (features_.size() != labels_.size()) {
        throw DataError("classification table: one label per feature row required");
    }
    if (num_classes_ == 0) {
        throw DataError("classification table: at least one class required");
    }
    num_features_ = features_.empty() ? 0 : features_.front().size();
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].size() != num_features_) {
            throw DataError("classification table: row " + std::to_string(i) + " has the wrong width");
        }
        for (double v : features_[i]) {
            if (!std::isfinite(v)) {
                throw DataError("classification table: row " + std::to_string(i) + " has a non-finite feature");
            }
        }
        if (labels_[i] >= num_classes_) {
            throw DataError("classification table: row " + std::to_string(i) + " label out of range");
        }
    }
}

ClassificationTable ClassificationTable::subset(std::span<const std::size_t> indices) const {
    std::vector<std::vector<double>> f;
    std::vector<std::size_t> l;
    f.reserve(indices.size());
    l.reserve(indices.size());
    for (std::size_t i : indices) {
        f.push_back(features_.at(i));
        l.push_back(labels_.at(i));
    }
    return ClassificationTable(std::move(f), std::move(l), num_classes_);
}

RewardMatrix::RewardMatrix(std::size_t num_actions, std::vector<double> entries)
    : k_(num_actions), m_(std::move(entries)) {
    if (k_ == 0 || m_.size() != k_ * k_) {
        throw ConfigurationError("reward matrix must be K x K with K >= 1");
    }
    for (std::size_t a = 0; a < k_; ++a) {
        for (std::size_t y = 0; y < k_; ++y) {
            const double v = m_[a * k_ + y];
            if (a == y ? v != 1.0 : !(v >= 0.0 && v < 1.0)) {
                throw ConfigurationError("reward matrix needs a unit diagonal and off-diagonal entries in [0,1)");
            }
        }
    }
}

RewardMatrix build_reward_matrix(std::size_t num_actions, std::uint64_t seed) {
    if (num_actions == 0) {
        throw ArgumentError("build_reward_matrix: K must be positive");
    }
    Philox rng(seed, 0);
    std::vector<double> m(num_actions * num_actions);
    for (std::size_t a = 0; a < num_actions; ++a) {
        for (std::size_t y = 0; y < num_actions; ++y) {
            m[a * num_actions + y] = a == y ? 1.0 : rng.uniform();
        }
    }
    return RewardMatrix(num_actions, std::move(m));
}

FiniteContextualBandit supervised_to_bandit(const ClassificationTable& table, const RewardMatrix& m) {
    if (table.num_classes() != m.size()) {
        throw ConfigurationError("supervised_to_bandit: table and reward matrix disagree on K");
    }
    if (table.size() == 0) {
        throw ConfigurationError("supervised_to_bandit: empty table");
    }
    const std::size_t k = m.size();
    std::vector<std::string> ids;
    std::vector<double> rewards;
    std::vector<std::vector<double>> features;
    ids.reserve(table.size());
    rewards.reserve(table.size() * k);
    for (std::size_t i = 0; i < table.size(); ++i) {
        ids.push_back("r" + std::to_string(i + 1));
        for (std::size_t a = 0; a < k; ++a) {
            rewards.push_back(m(a, table.label(i)));
        }
        if (table.num_features() > 0) {
            features.push_back(table.features(i));
        }
    }
    std::vector<double> probs(table.size(), 1.0 / static_cast<double>(table.size()));
    return FiniteContextualBandit(std::move(ids), std::move(probs), k, std::move(rewards), NoiseModel::Bernoulli,
                                  std::move(features));
}

RidgeModel::RidgeModel(std::vector<std::vector<double>> coefficients, std::vector<double> intercepts, double alpha)
    : coef_(std::move(coefficients)), intercept_(std::move(intercepts)), alpha_(alpha) {
    if (coef_.size() != intercept_.size()) {
        throw ConfigurationError("ridge model: one intercept per output required");
    }
    for (const auto& c : coef_) {
        if (c.size() != num_features()) {
            throw ConfigurationError("ridge model: coefficient rows must share the feature count");
        }
    }
}

std::vector<double> RidgeModel::predict(std::span<const double> x) const {
    if (x.size() != num_features()) {
        throw ConfigurationError("ridge model: feature count mismatch");
    }
    std::vector<double> out(num_outputs());
    for (std::size_t j = 0; j < coef_.size(); ++j) {
        double s = intercept_[j];
        for (std::size_t f = 0; f < x.size(); ++f) {
            s += coef_[j][f] * x[f];
        }
        out[j] = s;
    }
    return out;
}

RidgeModel ridge_regression(const std::vector<std::vector<double>>& inputs,
                            const std::vector<std::vector<double>>& targets, double alpha, bool fit_intercept) {
    if (!(alpha > 0.0)) {
        throw ArgumentError("ridge_regression: alpha must be positive");
    }
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw ArgumentError("ridge_regression: need at least one sample and one target row per sample");
    }
    const auto n = static_cast<Eigen::Index>(inputs.size());
    const auto d = static_cast<Eigen::Index>(inputs.front().size());
    const auto k = static_cast<Eigen::Index>(targets.front().size());
    Eigen::MatrixXd x(n, d);
    Eigen::MatrixXd y(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& xi = inputs[static_cast<std::size_t>(i)];
        const auto& yi = targets[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(xi.size()) != d || static_cast<Eigen::Index>(yi.size()) != k) {
            throw ArgumentError("ridge_regression: ragged input");
        }
        for (Eigen::Index f = 0; f < d; ++f) x(i, f) = xi[static_cast<std::size_t>(f)];
        for (Eigen::Index j = 0; j < k; ++j) y(i, j) = yi[static_cast<std::size_t>(j)];
    }
    Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(d);
    Eigen::RowVectorXd y_mean = Eigen::RowVectorXd::Zero(k);
    if (fit_intercept) {
        x_mean = x.colwise().mean();
        y_mean = y.colwise().mean();
        x.rowwise() -= x_mean;
        y.rowwise() -= y_mean;
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += alpha;
    const Eigen::MatrixXd w = gram.ldlt().solve(x.transpose() * y);  // d x k
    const Eigen::RowVectorXd b = y_mean - x_mean * w;

    std::vector<std::vector<double>> coef(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(d)));
    std::vector<double> intercepts(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index f = 0; f < d; ++f) {
            coef[static_cast<std::size_t>(j)][static_cast<std::size_t>(f)] = w(f, j);
        }
        intercepts[static_cast<std::size_t>(j)] = b(j);
    }
    return RidgeModel(std::move(coef), std::move(intercepts), alpha);
}

namespace {

std::vector<std::vector<double>> reward_targets(const ClassificationTable& table, const RewardMatrix& m,
                                                std::span<const std::size_t> labels) {
    std::vector<std::vector<double>> y(table.size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t a = 0; a < m.size(); ++a) {
            y[i][a] = m(a, labels[i]);
        }
    }
    return y;
}

std::vector<std::vector<double>> feature_rows(const ClassificationTable& table) {
    std::vector<std::vector<double>> x;
    x.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        x.push_back(table.features(i));
    }
    return x;
}

// exp(scale * (s - max s)) normalized; exact zeros raised to DBL_MIN.
void softmax_row(std::span<const double> scores, double scale, std::span<double> out, std::size_t& clamped) {
    double shift = -kInf;
    for (double s : scores) {
        shift = std::max(shift, scale * s);
    }
    double total = 0.0;
    for (std::size_t a = 0; a < scores.size(); ++a) {
        out[a] = std::exp(scale * scores[a] - shift);
        total += out[a];
    }
    for (std::size_t a = 0; a < scores.size(); ++a) {
        out[a] /= total;
        if (out[a] == 0.0) {
            out[a] = std::numeric_limits<double>::min();
            ++clamped;
        }
    }
}

std::size_t argmax_first(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

RidgeModel fit_ridge(const ClassificationTable& table, const RewardMatrix& m, double alpha) {
    if (table.num_classes() != m.size()) {
        throw ConfigurationError("fit_ridge: table and reward matrix disagree on K");
    }
    return ridge_regression(feature_rows(table), reward_targets(table, m, table.labels()), alpha, true);
}

Direction parse_direction(const std::string& name) {
    if (name == "good") return Direction::Good;
    if (name == "bad") return Direction::Bad;
    throw ArgumentError("unknown direction '" + name + "' (expected good or bad)");
}

std::string to_string(Direction d) { return d == Direction::Good ? "good" : "bad"; }

TabularPolicy softmax_behavior(const RidgeModel& model, const ClassificationTable& table, double eta,
                               Direction direction, std::size_t* clamped) {
    if (!(eta >= 0.0)) {
        throw ArgumentError("softmax_behavior: eta must be nonnegative");
    }
    if (table.size() == 0) {
        throw ConfigurationError("softmax_behavior: empty table");
    }
    const std::size_t k = model.num_outputs();
    const double scale = direction == Direction::Good ? eta : -eta;
    std::vector<double> probs(table.size() * k);
    std::size_t count = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto pred = model.predict(table.features(i));
        softmax_row(pred, scale, std::span<double>(probs).subspan(i * k, k), count);
    }
    if (clamped != nullptr) {
        *clamped += count;
    }
    return TabularPolicy(k, std::move(probs));
}

ClassificationTable generate_synthetic_classification(std::size_t num_rows, std::size_t num_features,
                                                      std::size_t num_classes, std::uint64_t seed) {
    if (num_rows == 0 || num_features == 0 || num_classes == 0) {
        throw ArgumentError("generate_synthetic_classification: all sizes must be positive");
    }
    Philox rng(seed, 0);
    std::vector<std::vector<double>> centers(num_classes, std::vector<double>(num_features));
    for (auto& c : centers) {
        for (double& v : c) {
            v = 2.0 * rng.normal();
        }
    }
    std::vector<std::vector<double>> features(num_rows, std::vector<double>(num_features));
    std::vector<std::size_t> labels(num_rows);
    for (std::size_t i = 0; i < num_rows; ++i) {
        labels[i] = static_cast<std::size_t>(rng.below(num_classes));
        for (std::size_t f = 0; f < num_features; ++f) {
            features[i][f] = centers[labels[i]][f] + rng.normal();
        }
    }
    return ClassificationTable(std::move(features), std::move(labels), num_classes);
}

ClassificationTable read_classification_csv(std::istream& in, const std::string& label_column) {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::size_t> line_numbers;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(io::split_csv(raw));
        line_numbers.push_back(line_no);
    }
    if (lines.empty()) {
        throw DataError("classification CSV is empty");
    }

    std::vector<std::string> header;
    const bool has_header = std::any_of(lines.front().begin(), lines.front().end(), [](const std::string& c) {
        try {
            io::parse_real(c, "");
            return false;
        } catch (const DataError&) {
            return true;
        }
    });
    std::size_t first = 0;
    if (has_header) {
        header = lines.front();
        first = 1;
    }
    const std::size_t width = lines.front().size();
    if (first >= lines.size()) {
        throw DataError("classification CSV has a header but no data rows");
    }

    std::size_t label_idx = 0;
    if (label_column == "last") {
        label_idx = width - 1;
    } else if (auto it = std::find(header.begin(), header.end(), label_column); it != header.end()) {
        label_idx = static_cast<std::size_t>(it - header.begin());
    } else {
        try {
            label_idx = io::parse_index(label_column, "label column");
        } catch (const DataError&) {
            throw DataError("label column '" + label_column + "' not found in header");
        }
        if (label_idx >= width) {
            throw DataError("label column index " + label_column + " is out of range (" + std::to_string(width) +
                            " columns)");
        }
    }

    std::map<std::string, std::size_t> remap;
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    for (std::size_t r = first; r < lines.size(); ++r) {
        const auto& cells = lines[r];
        const std::string where = "line " + std::to_string(line_numbers[r]);
        if (cells.size() != width) {
            throw DataError(where + ": expected " + std::to_string(width) + " columns, found " +
                            std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(width - 1);
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_idx) continue;
            row.push_back(io::parse_real(cells[c], where));
        }
        const auto [it, inserted] = remap.try_emplace(cells[label_idx], remap.size());
        labels.push_back(it->second);
        features.push_back(std::move(row));
    }
    return ClassificationTable(std::move(features), std::move(labels), remap.size());
}

ClassificationTable load_classification_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return read_classification_csv(in, label_column);
}

void write_classification_csv(std::ostream& out, const ClassificationTable& table) {
    for (std::size_t f = 0; f < table.num_features(); ++f) {
        out << 'f' << f << ',';
    }
    out << "label\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (double v : table.features(i)) {
            out << io::format_real(v) << ',';
        }
        out << table.label(i) << '\n';
    }
}

PolicyClass build_policy_class(const ClassificationTable& fit_rows, const ClassificationTable& contexts,
                               const RewardMatrix& m, std::size_t num_scorers,
                               std::span<const double> temperatures, double alpha, std::uint64_t seed) {
    if (num_scorers == 0 || temperatures.empty()) {
        throw ConfigurationError("policy class needs at least one scorer and one temperature");
    }
    if (fit_rows.size() < 2) {
        throw ConfigurationError("policy class needs at least two fitting rows");
    }
    const std::size_t k = m.size();
    std::vector<TabularPolicy> policies;
    for (std::size_t j = 0; j < num_scorers; ++j) {
        Philox rng(seed, stream_id({seed, 0x636c617373ull, j}));
        const double noise = static_cast<double>(j) / static_cast<double>(num_scorers);

        std::vector<std::size_t> order(fit_rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
        }
        order.resize(fit_rows.size() / 2);
        const ClassificationTable half = fit_rows.subset(order);

        std::vector<std::size_t> labels = half.labels();
        for (auto& y : labels) {
            if (rng.uniform() < noise) {
                y = static_cast<std::size_t>(rng.below(k));
            }
        }
        const RidgeModel scorer = ridge_regression(feature_rows(half), reward_targets(half, m, labels), alpha, true);

        std::vector<std::vector<double>> predictions;
        predictions.reserve(contexts.size());
        for (std::size_t i = 0; i < contexts.size(); ++i) {
            predictions.push_back(scorer.predict(contexts.features(i)));
        }
        for (double tau : temperatures) {
            std::vector<double> probs(contexts.size() * k, 0.0);
            std::size_t unused = 0;
            for (std::size_t i = 0; i < contexts.size(); ++i) {
                auto row = std::span<double>(probs).subspan(i * k, k);
                if (std::isinf(tau)) {
                    row[argmax_first(predictions[i])] = 1.0;
                } else {
                    softmax_row(predictions[i], tau, row, unused);
                }
            }
            policies.emplace_back(k, std::move(probs));
        }
    }
    return PolicyClass(std::move(policies));
}

void validate(const SweepConfig& c) {
    if (c.eta_grid.empty() || c.hyper_grid.empty() || c.learners.empty() || c.seeds.empty()) {
        throw ConfigurationError("sweep: eta grid, hyper grid, learners and seeds must be nonempty");
    }
    if (c.folds < 2) {
        throw ConfigurationError("sweep: at least two folds are required");
    }
    if (!(c.behavior_fit_fraction > 0.0 && c.behavior_fit_fraction < 1.0)) {
        throw ConfigurationError("sweep: behavior_fit_fraction must lie in (0,1)");
    }
    for (double eta : c.eta_grid) {
        if (!(eta >= 0.0)) throw ConfigurationError("sweep: eta values must be nonnegative");
    }
    for (double h : c.hyper_grid) {
        if (!(h > 0.0)) throw ConfigurationError("sweep: hyperparameters must be positive");
    }
    if (!(c.ridge_alpha > 0.0)) {
        throw ConfigurationError("sweep: ridge_alpha must be positive");
    }
}

namespace {

FiniteContextualBandit reweighted(const FiniteContextualBandit& base, std::span<const std::size_t> support) {
    std::vector<double> probs(base.num_contexts(), 0.0);
    for (std::size_t x : support) {
        probs[x] = 1.0 / static_cast<double>(support.size());
    }
    std::vector<double> rewards;
    for (std::size_t x = 0; x < base.num_contexts(); ++x) {
        const auto row = base.reward_row(x);
        rewards.insert(rewards.end(), row.begin(), row.end());
    }
    return FiniteContextualBandit(base.context_ids(), std::move(probs), base.num_actions(), std::move(rewards),
                                  base.noise());
}

// One logged interaction per training context, in order.
LoggedDataset simulate_log(const FiniteContextualBandit& inst, const TabularPolicy& behavior,
                           std::span<const std::size_t> contexts, std::uint64_t stream_seed) {
    Philox rng(stream_seed, 1);
    std::vector<LoggedRecord> records;
    records.reserve(contexts.size());
    for (std::size_t x : contexts) {
        const std::size_t a = rng.categorical(behavior.row(x));
        const double reward = rng.bernoulli(inst.mean_reward(x, a)) ? 1.0 : 0.0;
        records.push_back({x, a, reward, behavior.prob(x, a)});
    }
    return LoggedDataset(std::move(records), inst.num_actions());
}

std::vector<double> scaled_coverage_gammas(const FiniteContextualBandit& train, const PolicyClass& cls,
                                           const TabularPolicy& behavior, double scale, std::size_t n) {
    std::vector<double> g;
    g.reserve(cls.size());
    for (const auto& p : cls) {
        const double c0 = smoothed_coverage_ratio(train, p, behavior, 0.0);
        if (std::isinf(c0)) {
            g.push_back(1.0 / static_cast<double>(n));
        } else if (c0 == 0.0) {
            g.push_back(1.0);
        } else {
            g.push_back(scale / std::sqrt(c0));
        }
    }
    return g;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config, const ClassificationTable& table, const RewardMatrix& m) {
    validate(config);
    if (table.num_classes() != m.size()) {
        throw ConfigurationError("sweep: table and reward matrix disagree on K");
    }
    const std::size_t n_eta = config.eta_grid.size();
    const std::size_t n_learn = config.learners.size();
    const std::size_t n_h = config.hyper_grid.size();
    const std::size_t k_folds = config.folds;
    std::vector<SweepRow> rows(config.seeds.size() * n_eta * n_learn * n_h * k_folds);
    std::atomic<std::size_t> clamped_total{0};

    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        const std::uint64_t seed = config.seeds[s];

        std::vector<std::size_t> order(table.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Philox shuffle_rng(seed, stream_id({seed, 0x73687566ull}));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);
        }
        const auto n_fit = static_cast<std::size_t>(
            std::ceil(config.behavior_fit_fraction * static_cast<double>(table.size())));
        if (n_fit < 2 || n_fit >= table.size()) {
            throw ConfigurationError("sweep: behavior-fit split must leave rows on both sides");
        }
        const std::vector<std::size_t> fit_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_fit));
        const std::vector<std::size_t> rest_idx(order.begin() + static_cast<std::ptrdiff_t>(n_fit), order.end());
        if (rest_idx.size() < k_folds) {
            throw ConfigurationError("sweep: fold too small to contain data (" + std::to_string(rest_idx.size()) +
                                     " rows for " + std::to_string(k_folds) + " folds)");
        }
        const ClassificationTable fit_rows = table.subset(fit_idx);
        const ClassificationTable rest = table.subset(rest_idx);

        const RidgeModel model = fit_ridge(fit_rows, m, config.ridge_alpha);
        const PolicyClass cls = build_policy_class(fit_rows, rest, m, config.class_scorers,
                                                   config.class_temperatures, config.ridge_alpha, seed);
        const FiniteContextualBandit all = supervised_to_bandit(rest, m);

        // Contiguous folds over the shuffled remainder; local context ids.
        std::vector<std::vector<std::size_t>> fold_members(k_folds);
        for (std::size_t i = 0; i < rest.size(); ++i) {
            fold_members[i * k_folds / rest.size()].push_back(i);
        }
        std::vector<std::size_t> optimal(rest.size());
        for (std::size_t x = 0; x < rest.size(); ++x) {
            optimal[x] = argmax_first(all.reward_row(x));
        }
        const TabularPolicy best = TabularPolicy::deterministic(m.size(), optimal);

        const std::size_t tasks = n_eta * k_folds;
        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            for (std::size_t task = next++; task < tasks; task = next++) {
                const std::size_t e = task / k_folds;
                const std::size_t fold = task % k_folds;
                std::size_t clamped = 0;
                const TabularPolicy behavior =
                    softmax_behavior(model, rest, config.eta_grid[e], config.direction, &clamped);
                clamped_total += clamped;

                std::vector<std::size_t> train_idx;
                for (std::size_t f = 0; f < k_folds; ++f) {
                    if (f != fold) {
                        train_idx.insert(train_idx.end(), fold_members[f].begin(), fold_members[f].end());
                    }
                }
                std::sort(train_idx.begin(), train_idx.end());
                const FiniteContextualBandit train = reweighted(all, train_idx);
                const FiniteContextualBandit test = reweighted(all, fold_members[fold]);
                const LoggedDataset log = simulate_log(all, behavior, train_idx, stream_id({seed, e, fold}));
                const double best_value = policy_value(test, best);

                for (std::size_t l = 0; l < n_learn; ++l) {
                    for (std::size_t h = 0; h < n_h; ++h) {
                        const double hyper = config.hyper_grid[h];
                        LearnerParams params;
                        params.gamma = hyper;
                        params.beta = hyper;
                        if (config.learners[l] == LearnerKind::CoverageScaled) {
                            params.per_policy_gamma =
                                scaled_coverage_gammas(train, cls, behavior, hyper, train_idx.size());
                            params.delta = 0.05;
                        }
                        const Selection sel = run_learner(config.learners[l], log, cls, params, &behavior);
                        const double value = policy_value(test, cls[sel.index]);
                        const std::size_t slot = (((s * n_eta + e) * n_learn + l) * n_h + h) * k_folds + fold;
                        rows[slot] = SweepRow{config.learners[l], config.direction, config.eta_grid[e], hyper, fold,
                                              value,               best_value - value, train_idx.size(), seed};
                    }
                }
            }
        };
        const std::size_t workers =
            std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), tasks));
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (clamped_total > 0) {
        std::clog << "warning: " << clamped_total.load()
                  << " behavior probabilities underflowed to 0 and were clamped to the smallest normal double\n";
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        out << to_string(r.learner) << ',' << to_string(r.direction) << ',' << io::format_real(r.eta) << ','
            << io::format_real(r.hyperparam) << ',' << r.fold << ',' << io::format_real(r.expected_reward) << ','
            << io::format_real(r.regret) << ',' << r.n_train << ',' << r.seed << '\n';
    }
}

std::vector<double> parse_grid(const std::string& text) {
    std::string t;
    for (char c : text) {
        if (c != ' ' && c != '\t') t.push_back(c);
    }
    if (t.rfind("logspace(", 0) == 0) {
        if (t.back() != ')') {
            throw ConfigurationError("grid: unterminated logspace(...)");
        }
        const auto args = io::split_csv(t.substr(9, t.size() - 10));
        if (args.size() != 3) {
            throw ConfigurationError("grid: logspace takes (lo, hi, count)");
        }
        const double lo = io::parse_real(args[0], "logspace lo");
        const double hi = io::parse_real(args[1], "logspace hi");
        const std::size_t count = io::parse_index(args[2], "logspace count");
        if (count == 0) {
            throw ConfigurationError("grid: logspace count must be positive");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < count; ++i) {
            const double e = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
            out.push_back(std::pow(10.0, e));
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& cell : io::split_csv(t)) {
        if (cell == "inf") {
            out.push_back(kInf);
        } else {
            out.push_back(io::parse_real(cell, "grid"));
        }
    }
    if (out.empty()) {
        throw ConfigurationError("grid: empty");
    }
    return out;
}

SweepConfig parse_sweep_config(std::istream& in) {
    SweepConfig c;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = raw.substr(0, raw.find('#'));
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw ConfigurationError("sweep config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto cells = io::split_csv(line.substr(0, eq));
        const std::string key = cells.empty() ? "" : cells.front();
        std::string value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t\r") + 1);
        const std::string where = "sweep config line " + std::to_string(line_no);
        if (key == "eta_grid") {
            c.eta_grid = parse_grid(value);
        } else if (key == "hyper_grid") {
            c.hyper_grid = parse_grid(value);
        } else if (key == "learners") {
            c.learners.clear();
            for (const auto& name : io::split_csv(value)) c.learners.push_back(parse_learner(name));
        } else if (key == "folds") {
            c.folds = io::parse_index(value, where);
        } else if (key == "behavior_fit_fraction") {
            c.behavior_fit_fraction = io::parse_real(value, where);
        } else if (key == "seeds") {
            c.seeds.clear();
            for (const auto& s : io::split_csv(value)) c.seeds.push_back(io::parse_index(s, where));
        } else if (key == "direction") {
            c.direction = parse_direction(value);
        } else if (key == "ridge_alpha") {
            c.ridge_alpha = io::parse_real(value, where);
        } else if (key == "class_scorers") {
            c.class_scorers = io::parse_index(value, where);
        } else if (key == "class_temperatures") {
            c.class_temperatures = parse_grid(value);
        } else {
            throw ConfigurationError(where + ": unknown key '" + key + "'");
        }
    }
    validate(c);
    return c;
}

SweepConfig read_sweep_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("cannot open '" + path + "'");
    }
    return parse_sweep_config(in);
}

void write_reward_matrix(std::ostream& out, const RewardMatrix& m) {
    for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t y = 0; y < m.size(); ++y) {
            out << (y ? "," : "") << io::format_real(m(a, y));
        }
        out << '\n';
    }
}

RewardMatrix read_reward_matrix(std::istream& in) {
    std::vector<double> entries;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++rows;
        for (const auto& cell : io::split_csv(line)) {
            entries.push_back(io::parse_real(cell, "reward matrix line " + std::to_string(rows)));
        }
    }
    return RewardMatrix(rows, std::move(entries));
}

RewardMatrix read_reward_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return read_reward_matrix(in);
}

}  // namespace piwo
