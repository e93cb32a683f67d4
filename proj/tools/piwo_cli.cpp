// piwo: command line front end.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "piwo/bandit.hpp"
#include "piwo/concentration.hpp"
#include "piwo/errors.hpp"
#include "piwo/estimators.hpp"
#include "piwo/experiment.hpp"
#include "piwo/io.hpp"
#include "piwo/learners.hpp"
#include "piwo/pac_bayes.hpp"

namespace {

using namespace piwo;

// Writes to `path`, or stdout when the path is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigurationError("cannot write '" + path + "'");
    }
    write(out);
    if (!out) {
        throw ConfigurationError("write failed for '" + path + "'");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

TabularPolicy load_policy_arg(const std::string& spec, const FiniteContextualBandit& inst) {
    if (spec == "uniform") {
        return TabularPolicy::uniform(inst.num_contexts(), inst.num_actions());
    }
    return io::read_policy_file(spec, inst);
}

struct Options {
    std::uint64_t seed = 0;
    std::string out;
    double delta = 0.05;
    std::optional<double> gamma;
    double beta = 0.0;
    std::string estimator = "ix";
    std::string learner = "piwo-ix";
    std::string eta_grid;
    std::string hyper_grid;
    std::optional<std::size_t> folds;
    std::string direction;
    std::string label_col = "last";

    std::string instance;
    std::string data;
    std::string policy_class;
    std::string policy;
    std::string behavior;
    std::string comparator;
    std::string prior;
    std::string spec;
    std::string config;
    std::string input;
    std::string matrix;
    std::string matrix_out;
    std::optional<double> lambda;
    std::size_t rows = 2000;
    std::size_t features = 8;
    std::size_t classes = 10;
    std::size_t n = 100;
    std::optional<std::uint64_t> matrix_seed;
};

void add_shared(CLI::App* cmd, Options& o, bool with_seed = true) {
    if (with_seed) cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "output path (default stdout)");
}

int cmd_generate(const Options& o) {
    const auto table = generate_synthetic_classification(o.rows, o.features, o.classes, o.seed);
    emit(o.out, [&](std::ostream& s) { write_classification_csv(s, table); });
    return 0;
}

int cmd_convert(const Options& o) {
    const auto table = load_classification_csv(o.input, o.label_col);
    const RewardMatrix m = o.matrix.empty() ? build_reward_matrix(table.num_classes(), o.seed)
                                            : read_reward_matrix_file(o.matrix);
    if (m.size() != table.num_classes()) {
        throw ConfigurationError("reward matrix size does not match the number of classes");
    }
    const auto inst = supervised_to_bandit(table, m);
    emit(o.out, [&](std::ostream& s) { io::write_instance(s, inst); });
    if (!o.matrix_out.empty()) {
        emit(o.matrix_out, [&](std::ostream& s) { write_reward_matrix(s, m); });
    }
    return 0;
}

int cmd_sample(const Options& o) {
    const auto inst = io::read_instance_file(o.instance);
    const auto behavior = load_policy_arg(o.behavior, inst);
    const auto data = sample_dataset(inst, behavior, o.n, o.seed);
    emit(o.out, [&](std::ostream& s) { io::write_dataset(s, data, inst); });
    return 0;
}

int cmd_learn(const Options& o) {
    const auto inst = io::read_instance_file(o.instance);
    const auto data = io::read_dataset_file(o.data, inst);
    const auto cls = io::read_policy_class_file(o.policy_class, inst);
    const LearnerKind kind = parse_learner(o.learner);

    std::optional<TabularPolicy> behavior;
    if (!o.behavior.empty()) behavior = load_policy_arg(o.behavior, inst);

    LearnerParams params;
    params.gamma = o.gamma.value_or(0.0);
    params.beta = o.beta;
    params.delta = o.delta;
    if (kind == LearnerKind::CoverageScaled) {
        if (!behavior) {
            throw ConfigurationError("coverage-scaled needs --behavior");
        }
        params.per_policy_gamma = o.gamma ? std::vector<double>(cls.size(), *o.gamma)
                                          : theorem3_gamma(cls, inst, *behavior, o.delta, data.size());
    }
    if (kind == LearnerKind::PiwoPl && !behavior) {
        throw ConfigurationError("piwo-pl needs --behavior");
    }
    if ((kind == LearnerKind::PiwoIx || kind == LearnerKind::PiwoClip) && !o.gamma) {
        throw ConfigurationError(o.learner + " needs --gamma");
    }
    const Selection sel = run_learner(kind, data, cls, params, behavior ? &*behavior : nullptr);

    emit(o.out, [&](std::ostream& s) {
        s << "policy,score,selected\n";
        for (std::size_t i = 0; i < sel.scores.size(); ++i) {
            s << i << ',' << io::format_real(sel.scores[i]) << ',' << (i == sel.index ? 1 : 0) << '\n';
        }
    });
    std::cerr << "selected policy " << sel.index << '\n';
    return 0;
}

int cmd_eval(const Options& o) {
    const auto inst = io::read_instance_file(o.instance);
    const auto pi = io::read_policy_file(o.policy, inst);
    std::vector<std::pair<std::string, double>> metrics;
    metrics.emplace_back("value", policy_value(inst, pi));

    if (!o.policy_class.empty()) {
        const auto cls = io::read_policy_class_file(o.policy_class, inst);
        const std::size_t best = best_in_class(inst, cls);
        metrics.emplace_back("best_in_class", static_cast<double>(best));
        metrics.emplace_back("regret", regret(inst, pi, cls[best]));
    } else if (!o.comparator.empty()) {
        metrics.emplace_back("regret", regret(inst, pi, io::read_policy_file(o.comparator, inst)));
    }
    if (!o.behavior.empty()) {
        const auto mu = load_policy_arg(o.behavior, inst);
        const double g = o.gamma.value_or(0.0);
        metrics.emplace_back("coverage", coverage_ratio(inst, pi, mu));
        metrics.emplace_back("smoothed_coverage", smoothed_coverage_ratio(inst, pi, mu, g));
        metrics.emplace_back("expected_ix", expected_ix_value(inst, pi, mu, g));
    }
    if (!o.data.empty()) {
        const auto data = io::read_dataset_file(o.data, inst);
        const EstimatorKind kind{parse_estimator_type(o.estimator), o.gamma.value_or(0.0)};
        metrics.emplace_back("estimate_" + to_string(kind.type), estimate(data, pi, kind));
    }
    emit(o.out, [&](std::ostream& s) {
        s << "metric,value\n";
        for (const auto& [name, v] : metrics) {
            s << name << ',' << io::format_real(v) << '\n';
        }
    });
    return 0;
}

int cmd_tails(const Options& o, const CLI::App& cmd) {
    BoundCheckSpec spec = read_bound_check_spec_file(o.spec);
    if (cmd.count("--seed")) spec.seed = o.seed;
    if (cmd.count("--delta")) spec.delta = o.delta;
    if (o.gamma) spec.gamma = o.gamma;
    const ViolationReport report = run_bound_check(spec);
    std::cout << report_text(report);
    if (o.out.empty() || o.out == "-") {
        std::cout << report_csv_header() << '\n' << report_csv_row(report) << '\n';
    } else {
        emit(o.out, [&](std::ostream& s) { s << report_csv_header() << '\n' << report_csv_row(report) << '\n'; });
    }
    return report.passed ? 0 : 3;
}

int cmd_pacbayes(const Options& o) {
    const auto inst = io::read_instance_file(o.instance);
    const auto data = io::read_dataset_file(o.data, inst);
    const auto cls = io::read_policy_class_file(o.policy_class, inst);
    const PolicyDistribution prior =
        o.prior.empty() ? PolicyDistribution::uniform(cls.size()) : io::read_distribution_file(o.prior, cls.size());
    if (!o.gamma) {
        throw ConfigurationError("pacbayes needs --gamma");
    }
    const auto q = gibbs_posterior(data, cls, prior, *o.gamma, o.lambda);
    emit(o.out, [&](std::ostream& s) { io::write_distribution(s, q); });
    std::cerr << "KL(posterior||prior) = " << io::format_real(kl_divergence(q, prior)) << '\n';
    return 0;
}

int cmd_sweep(const Options& o, const CLI::App& cmd) {
    SweepConfig config = o.config.empty() ? SweepConfig{} : read_sweep_config_file(o.config);
    if (!o.eta_grid.empty()) config.eta_grid = parse_grid(o.eta_grid);
    if (!o.hyper_grid.empty()) config.hyper_grid = parse_grid(o.hyper_grid);
    if (cmd.count("--learner")) {
        config.learners.clear();
        for (const auto& name : split_list(o.learner)) config.learners.push_back(parse_learner(name));
    }
    if (config.learners.empty()) {
        config.learners = {LearnerKind::PiwoIx, LearnerKind::PiwoClip, LearnerKind::PiwoPl,
                           LearnerKind::CoverageScaled};
    }
    if (o.folds) config.folds = *o.folds;
    if (!o.direction.empty()) config.direction = parse_direction(o.direction);
    if (cmd.count("--seed")) config.seeds = {o.seed};
    validate(config);

    const ClassificationTable table =
        o.input.empty() ? generate_synthetic_classification(o.rows, o.features, o.classes, o.seed)
                        : load_classification_csv(o.input, o.label_col);
    const RewardMatrix m = o.matrix.empty() ? build_reward_matrix(table.num_classes(), o.matrix_seed.value_or(o.seed))
                                            : read_reward_matrix_file(o.matrix);
    const auto rows = run_sweep(config, table, m);
    emit(o.out, [&](std::ostream& s) { write_sweep_csv(s, rows); });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pessimistic off-policy optimization for contextual bandits"};
    app.require_subcommand(1);
    Options o;

    auto* generate = app.add_subcommand("generate", "synthetic classification CSV");
    add_shared(generate, o);
    generate->add_option("--rows", o.rows)->capture_default_str();
    generate->add_option("--features", o.features)->capture_default_str();
    generate->add_option("--classes", o.classes)->capture_default_str();

    auto* convert = app.add_subcommand("convert", "classification CSV to bandit instance and reward matrix");
    add_shared(convert, o);
    convert->add_option("--input", o.input, "classification CSV")->required();
    convert->add_option("--label-col", o.label_col, "header name, 0-based index or 'last'")->capture_default_str();
    convert->add_option("--matrix", o.matrix, "existing reward matrix CSV (default: draw one from --seed)");
    convert->add_option("--matrix-out", o.matrix_out, "where to write the reward matrix");

    auto* sample = app.add_subcommand("sample", "draw a logged dataset from an instance");
    add_shared(sample, o);
    sample->add_option("--instance", o.instance)->required();
    sample->add_option("--behavior", o.behavior, "policy CSV or 'uniform'")->required();
    sample->add_option("--n", o.n)->capture_default_str();

    auto* learn = app.add_subcommand("learn", "run one learner on one dataset");
    add_shared(learn, o, false);
    learn->add_option("--instance", o.instance)->required();
    learn->add_option("--data", o.data, "logged dataset CSV")->required();
    learn->add_option("--class", o.policy_class, "policy class CSV")->required();
    learn->add_option("--learner", o.learner)->capture_default_str();
    learn->add_option("--gamma", o.gamma);
    learn->add_option("--beta", o.beta)->capture_default_str();
    learn->add_option("--delta", o.delta)->capture_default_str();
    learn->add_option("--behavior", o.behavior, "behavior policy CSV or 'uniform'");

    auto* eval = app.add_subcommand("eval", "policy value, regret and estimates");
    add_shared(eval, o, false);
    eval->add_option("--instance", o.instance)->required();
    eval->add_option("--policy", o.policy)->required();
    eval->add_option("--class", o.policy_class, "regret against the best policy in this class");
    eval->add_option("--comparator", o.comparator, "regret against this policy");
    eval->add_option("--behavior", o.behavior, "behavior policy CSV or 'uniform'");
    eval->add_option("--data", o.data, "logged dataset CSV");
    eval->add_option("--estimator", o.estimator)->capture_default_str();
    eval->add_option("--gamma", o.gamma);

    auto* tails = app.add_subcommand("tails", "Monte-Carlo check of a tail or regret bound");
    add_shared(tails, o);
    tails->add_option("--spec", o.spec, "key = value spec file")->required();
    tails->add_option("--delta", o.delta);
    tails->add_option("--gamma", o.gamma);

    auto* pacbayes = app.add_subcommand("pacbayes", "Gibbs posterior over a policy class");
    add_shared(pacbayes, o, false);
    pacbayes->add_option("--instance", o.instance)->required();
    pacbayes->add_option("--data", o.data)->required();
    pacbayes->add_option("--class", o.policy_class)->required();
    pacbayes->add_option("--prior", o.prior, "index,weight CSV (default uniform)");
    pacbayes->add_option("--gamma", o.gamma);
    pacbayes->add_option("--lambda", o.lambda, "default 2 gamma n");

    auto* sweep = app.add_subcommand("sweep", "supervised-to-bandit sweep");
    add_shared(sweep, o);
    sweep->add_option("--config", o.config, "key = value sweep config");
    sweep->add_option("--input", o.input, "classification CSV (default: synthetic)");
    sweep->add_option("--label-col", o.label_col)->capture_default_str();
    sweep->add_option("--rows", o.rows)->capture_default_str();
    sweep->add_option("--features", o.features)->capture_default_str();
    sweep->add_option("--classes", o.classes)->capture_default_str();
    sweep->add_option("--matrix", o.matrix, "reward matrix CSV");
    sweep->add_option("--matrix-seed", o.matrix_seed, "default --seed");
    sweep->add_option("--eta-grid", o.eta_grid, "logspace(lo,hi,count) or a comma list");
    sweep->add_option("--hyper-grid", o.hyper_grid, "logspace(lo,hi,count) or a comma list");
    sweep->add_option("--learner", o.learner, "comma list (default all)");
    sweep->add_option("--folds", o.folds);
    sweep->add_option("--direction", o.direction, "good or bad");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) return cmd_generate(o);
        if (*convert) return cmd_convert(o);
        if (*sample) return cmd_sample(o);
        if (*learn) return cmd_learn(o);
        if (*eval) return cmd_eval(o);
        if (*tails) return cmd_tails(o, *tails);
        if (*pacbayes) return cmd_pacbayes(o);
        if (*sweep) return cmd_sweep(o, *sweep);
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
