#include "piwo/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "piwo/errors.hpp"
#include "piwo/estimators.hpp"
#include "piwo/io.hpp"
#include "piwo/learners.hpp"
#include "piwo/numeric.hpp"

namespace piwo {

BoundTarget parse_bound_target(const std::string& name) {
    if (name == "lemma1") return BoundTarget::Lemma1;
    if (name == "lemma2") return BoundTarget::Lemma2;
    if (name == "lemma3") return BoundTarget::Lemma3;
    if (name == "lemma4") return BoundTarget::Lemma4;
    if (name == "theorem1") return BoundTarget::Theorem1;
    if (name == "theorem2") return BoundTarget::Theorem2;
    if (name == "theorem3") return BoundTarget::Theorem3;
    throw ArgumentError("unknown bound target '" + name + "'");
}

std::string to_string(BoundTarget target) {
    switch (target) {
        case BoundTarget::Lemma1: return "lemma1";
        case BoundTarget::Lemma2: return "lemma2";
        case BoundTarget::Lemma3: return "lemma3";
        case BoundTarget::Lemma4: return "lemma4";
        case BoundTarget::Theorem1: return "theorem1";
        case BoundTarget::Theorem2: return "theorem2";
        case BoundTarget::Theorem3: return "theorem3";
    }
    return "?";
}

double violation_slack(double delta, std::size_t trials) {
    return 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

std::vector<PolicyDistribution> probe_distributions(std::size_t class_size, std::size_t mixtures,
                                                    std::uint64_t seed) {
    std::vector<PolicyDistribution> probes;
    for (std::size_t i = 0; i < class_size; ++i) {
        probes.push_back(PolicyDistribution::point_mass(class_size, i));
    }
    probes.push_back(PolicyDistribution::uniform(class_size));
    Philox rng(seed, stream_id({seed, 0x70726f6265ull}));
    for (std::size_t m = 0; m < mixtures; ++m) {
        const TabularPolicy row = random_policy(1, class_size, rng);
        probes.push_back(PolicyDistribution(std::vector<double>(row.row(0).begin(), row.row(0).end())));
    }
    return probes;
}

namespace {

bool is_distribution_target(BoundTarget t) {
    return t == BoundTarget::Lemma3 || t == BoundTarget::Lemma4 || t == BoundTarget::Theorem2;
}

struct TrialOutcome {
    bool violated = false;
    double margin = kInf;
};

// Exact, data-independent quantities shared by every trial.
struct Precomputed {
    double gamma = 0.0;
    std::vector<double> values;          // v(pi_i)
    std::vector<double> bounds;          // per policy or per probe
    std::vector<PolicyDistribution> probes;
    std::vector<double> probe_values;    // v(Q)
    std::size_t comparator = 0;
    std::vector<double> per_policy_gamma;
    PolicyDistribution prior = PolicyDistribution::uniform(1);
};

Precomputed precompute(const BoundCheckSpec& spec) {
    const auto& inst = spec.instance;
    const auto& cls = spec.policies;
    const double n = static_cast<double>(spec.n);
    const double class_size = static_cast<double>(cls.size());

    Precomputed pre;
    pre.prior = spec.prior.value_or(PolicyDistribution::uniform(cls.size()));
    if (pre.prior.size() != cls.size()) {
        throw ArgumentError("bound check: prior must cover the policy class");
    }
    for (const auto& p : cls) {
        pre.values.push_back(policy_value(inst, p));
    }
    pre.comparator = spec.comparator.value_or(best_in_class(inst, cls));
    if (pre.comparator >= cls.size()) {
        throw ArgumentError("bound check: comparator index out of range");
    }

    if (spec.target == BoundTarget::Theorem3) {
        pre.per_policy_gamma = spec.per_policy_gamma.value_or(theorem3_gamma(cls, inst, spec.behavior, spec.delta, spec.n));
        if (pre.per_policy_gamma.size() != cls.size()) {
            throw ArgumentError("bound check: one gamma per policy required");
        }
        const double log_term = std::log(2.0 * class_size / spec.delta);
        const double c0 = smoothed_coverage_ratio(inst, cls[pre.comparator], spec.behavior, 0.0);
        double bound = 0.0;
        if (!spec.per_policy_gamma && std::isfinite(c0) && c0 > 0.0) {
            bound = std::sqrt(8.0 * c0 * log_term / n);
        } else {
            const double g = pre.per_policy_gamma[pre.comparator];
            if (!(g > 0.0)) {
                throw ArgumentError("bound check: gamma must be positive");
            }
            bound = log_term / (g * n) + 2.0 * g * smoothed_coverage_ratio(inst, cls[pre.comparator], spec.behavior, g);
        }
        pre.bounds = {bound};
        return pre;
    }

    pre.gamma = spec.gamma.value_or(is_distribution_target(spec.target)
                                        ? std::sqrt(1.0 / n)
                                        : recommended_gamma(cls.size(), spec.delta, spec.n));
    if (!(pre.gamma > 0.0)) {
        throw ArgumentError("bound check: gamma must be positive (the bounds are vacuous at 0)");
    }
    const double g = pre.gamma;
    std::vector<double> smoothed;
    for (const auto& p : cls) {
        smoothed.push_back(smoothed_coverage_ratio(inst, p, spec.behavior, g));
    }

    switch (spec.target) {
        case BoundTarget::Lemma1:
        case BoundTarget::Lemma2: {
            const double tail = std::log(class_size / spec.delta) / (2.0 * g * n);
            for (std::size_t i = 0; i < cls.size(); ++i) {
                pre.bounds.push_back(spec.target == BoundTarget::Lemma1 ? tail : tail + 2.0 * g * smoothed[i]);
            }
            break;
        }
        case BoundTarget::Theorem1: {
            const double log_term = std::log(2.0 * class_size / spec.delta);
            pre.bounds = {log_term / (g * n) + 2.0 * g * smoothed[pre.comparator]};
            break;
        }
        case BoundTarget::Lemma3:
        case BoundTarget::Lemma4:
        case BoundTarget::Theorem2: {
            pre.probes = probe_distributions(cls.size(), spec.probe_mixtures, spec.seed);
            const double log_inv_delta = std::log(1.0 / spec.delta);
            for (const auto& q : pre.probes) {
                pre.probe_values.push_back(distribution_functional(pre.values, q));
                const double kl = kl_divergence(q, pre.prior);
                const double c_q = distribution_functional(smoothed, q);
                double bound = 0.0;
                if (spec.target == BoundTarget::Lemma3) {
                    bound = (kl + log_inv_delta) / (2.0 * g * n);
                } else if (spec.target == BoundTarget::Lemma4) {
                    bound = (kl + log_inv_delta) / (2.0 * g * n) + 2.0 * g * c_q;
                } else {
                    bound = (kl + log_inv_delta) / (g * n) + 2.0 * g * c_q;
                }
                pre.bounds.push_back(bound);
            }
            break;
        }
        case BoundTarget::Theorem3:
            break;
    }
    return pre;
}

TrialOutcome run_trial(const BoundCheckSpec& spec, const Precomputed& pre, std::size_t trial) {
    const LoggedDataset data = sample_dataset(spec.instance, spec.behavior, spec.n, stream_id({spec.seed, trial}));
    const auto& cls = spec.policies;
    TrialOutcome out;
    const auto check = [&](double deviation, double bound) {
        // NaN-safe: a NaN deviation counts as a violation.
        if (!(deviation <= bound)) {
            out.violated = true;
        }
        out.margin = std::min(out.margin, bound - deviation);
    };

    switch (spec.target) {
        case BoundTarget::Lemma1:
        case BoundTarget::Lemma2:
            for (std::size_t i = 0; i < cls.size(); ++i) {
                const double est = ix_estimate(data, cls[i], pre.gamma);
                const double dev = spec.target == BoundTarget::Lemma1 ? est - pre.values[i] : pre.values[i] - est;
                check(dev, pre.bounds[i]);
            }
            break;
        case BoundTarget::Theorem1: {
            const Selection sel = piwo_ix(data, cls, pre.gamma);
            check(pre.values[pre.comparator] - pre.values[sel.index], pre.bounds[0]);
            break;
        }
        case BoundTarget::Theorem3: {
            const Selection sel = coverage_scaled_piwo_ix(data, cls, pre.per_policy_gamma, spec.delta);
            check(pre.values[pre.comparator] - pre.values[sel.index], pre.bounds[0]);
            break;
        }
        case BoundTarget::Lemma3:
        case BoundTarget::Lemma4:
        case BoundTarget::Theorem2: {
            std::vector<double> estimates;
            estimates.reserve(cls.size());
            for (const auto& p : cls) {
                estimates.push_back(ix_estimate(data, p, pre.gamma));
            }
            double learned_value = 0.0;
            if (spec.target == BoundTarget::Theorem2) {
                const double lambda = 2.0 * pre.gamma * static_cast<double>(data.size());
                learned_value = distribution_functional(pre.values, gibbs_weights(estimates, pre.prior, lambda));
            }
            for (std::size_t j = 0; j < pre.probes.size(); ++j) {
                const double est_q = distribution_functional(estimates, pre.probes[j]);
                double dev = 0.0;
                if (spec.target == BoundTarget::Lemma3) {
                    dev = est_q - pre.probe_values[j];
                } else if (spec.target == BoundTarget::Lemma4) {
                    dev = pre.probe_values[j] - est_q;
                } else {
                    dev = pre.probe_values[j] - learned_value;
                }
                check(dev, pre.bounds[j]);
            }
            break;
        }
    }
    return out;
}

}  // namespace

ViolationReport run_bound_check(const BoundCheckSpec& spec) {
    if (spec.trials == 0) {
        throw ArgumentError("bound check: trials must be positive");
    }
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
        throw ArgumentError("bound check: delta must lie in (0,1)");
    }
    if (spec.n == 0) {
        throw ArgumentError("bound check: n must be positive");
    }
    require_compatible(spec.instance, spec.behavior, "behavior policy");
    for (const auto& p : spec.policies) {
        require_compatible(spec.instance, p);
    }
    const Precomputed pre = precompute(spec);

    std::vector<TrialOutcome> outcomes(spec.trials);
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), spec.trials));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < spec.trials; t += workers) {
                    outcomes[t] = run_trial(spec, pre, t);
                }
            });
        }
    }

    ViolationReport rep;
    rep.target = spec.target;
    rep.trials = spec.trials;
    rep.delta = spec.delta;
    rep.gamma = pre.gamma;
    rep.worst_margin = kInf;
    for (const auto& o : outcomes) {
        rep.violations += o.violated ? 1 : 0;
        rep.worst_margin = std::min(rep.worst_margin, o.margin);
    }
    rep.violation_rate = static_cast<double>(rep.violations) / static_cast<double>(rep.trials);
    rep.slack = violation_slack(spec.delta, spec.trials);
    rep.passed = rep.violation_rate <= spec.delta + rep.slack;

    CompensatedSum total;
    rep.bound_values.min = kInf;
    rep.bound_values.max = -kInf;
    for (double b : pre.bounds) {
        rep.bound_values.min = std::min(rep.bound_values.min, b);
        rep.bound_values.max = std::max(rep.bound_values.max, b);
        total += b;
    }
    rep.bound_values.mean = total.value() / static_cast<double>(pre.bounds.size());
    return rep;
}

double worst_case_margin(const BoundCheckSpec& spec) {
    return run_bound_check(spec).worst_margin;
}

PolicyClass random_policy_class(std::size_t count, std::size_t num_contexts, std::size_t num_actions,
                                std::uint64_t seed) {
    if (count == 0) {
        throw ArgumentError("random policy class must have at least one member");
    }
    Philox rng(seed, 0);
    std::vector<TabularPolicy> policies;
    policies.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        policies.push_back(random_policy(num_contexts, num_actions, rng));
    }
    return PolicyClass(std::move(policies));
}

BoundCheckSpec read_bound_check_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("cannot open '" + path + "'");
    }
    std::map<std::string, std::string> kv;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = raw.substr(0, raw.find('#'));
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigurationError(path + ": line " + std::to_string(line_no) + ": expected key = value");
        }
        auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    const auto resolve = [&](const std::string& p) { return (base / p).string(); };
    const auto require = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw ConfigurationError(path + ": missing key '" + key + "'");
        }
        return it->second;
    };
    static const char* known[] = {"target", "instance", "behavior", "class", "class_seed", "prior", "comparator",
                                  "n", "gamma", "delta", "trials", "seed", "probe_mixtures"};
    for (const auto& [key, value] : kv) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigurationError(path + ": unknown key '" + key + "'");
        }
    }

    FiniteContextualBandit instance = io::read_instance_file(resolve(require("instance")));
    TabularPolicy behavior = io::read_policy_file(resolve(require("behavior")), instance);
    const std::string& class_spec = require("class");
    const std::uint64_t class_seed = kv.count("class_seed") ? io::parse_index(kv["class_seed"], "class_seed") : 0;
    PolicyClass policies = class_spec.rfind("random:", 0) == 0
                               ? random_policy_class(io::parse_index(class_spec.substr(7), "class"),
                                                     instance.num_contexts(), instance.num_actions(), class_seed)
                               : io::read_policy_class_file(resolve(class_spec), instance);

    BoundCheckSpec spec{
        .target = parse_bound_target(require("target")),
        .instance = std::move(instance),
        .behavior = std::move(behavior),
        .policies = std::move(policies),
    };
    if (kv.count("prior")) {
        spec.prior = io::read_distribution_file(resolve(kv["prior"]), spec.policies.size());
    }
    if (kv.count("comparator")) {
        spec.comparator = io::parse_index(kv["comparator"], "comparator");
    }
    spec.n = io::parse_index(require("n"), "n");
    if (kv.count("gamma") && kv["gamma"] != "recommended") {
        spec.gamma = io::parse_real(kv["gamma"], "gamma");
    }
    spec.delta = io::parse_real(require("delta"), "delta");
    spec.trials = io::parse_index(require("trials"), "trials");
    if (kv.count("seed")) spec.seed = io::parse_index(kv["seed"], "seed");
    if (kv.count("probe_mixtures")) spec.probe_mixtures = io::parse_index(kv["probe_mixtures"], "probe_mixtures");
    return spec;
}

std::string report_text(const ViolationReport& r) {
    std::ostringstream os;
    os.precision(6);
    os << "target          " << to_string(r.target) << '\n'
       << "trials          " << r.trials << '\n'
       << "violations      " << r.violations << '\n'
       << "violation rate  " << r.violation_rate << " (allowed " << r.delta + r.slack << " = delta "
       << r.delta << " + slack " << r.slack << ")\n"
       << "gamma           " << r.gamma << '\n'
       << "bound min/mean/max " << r.bound_values.min << " / " << r.bound_values.mean << " / "
       << r.bound_values.max << '\n'
       << "worst margin    " << r.worst_margin << '\n'
       << "result          " << (r.passed ? "PASS" : "FAIL") << '\n';
    return os.str();
}

std::string report_csv_header() {
    return "target,trials,violations,violation_rate,delta,slack,gamma,bound_min,bound_mean,bound_max,worst_margin,passed";
}

std::string report_csv_row(const ViolationReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d",
                  to_string(r.target).c_str(), r.trials, r.violations, r.violation_rate, r.delta, r.slack,
                  r.gamma, r.bound_values.min, r.bound_values.mean, r.bound_values.max, r.worst_margin,
                  r.passed ? 1 : 0);
    return buf;
}

}  // namespace piwo
