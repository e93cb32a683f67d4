#include "piwo/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "piwo/errors.hpp"

namespace piwo::io {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return in;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string line_ref(std::size_t line_no) { return "line " + std::to_string(line_no); }

std::size_t context_index(const FiniteContextualBandit& inst, const std::string& id, std::size_t line_no) {
    const auto x = inst.index_of(id);
    if (!x) {
        throw DataError(line_ref(line_no) + ": unknown context id '" + id + "'");
    }
    return *x;
}

void expect_header(std::istream& in, const std::string& prefix, const std::string& what) {
    std::string header;
    if (!std::getline(in, header)) {
        throw DataError(what + ": empty file");
    }
    if (trim(header).rfind(prefix, 0) != 0) {
        throw DataError(what + ": line 1: expected header starting with '" + prefix + "'");
    }
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_real(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last) {
        throw DataError(where + ": cannot parse '" + t + "' as a number");
    }
    return v;
}

std::size_t parse_index(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw DataError(where + ": cannot parse '" + t + "' as a nonnegative integer");
    }
    return v;
}

FiniteContextualBandit read_instance(std::istream& in) {
    std::size_t num_actions = 0;
    std::size_t num_features = 0;
    NoiseModel noise = NoiseModel::Deterministic;
    std::vector<std::string> ids;
    std::vector<double> probs;
    std::vector<double> rewards;
    std::vector<std::vector<double>> features;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) {
            tok.push_back(t);
        }
        const std::string where = line_ref(line_no);
        if (key == "actions") {
            if (tok.size() != 1) throw DataError(where + ": 'actions' takes one value");
            num_actions = parse_index(tok[0], where);
        } else if (key == "features") {
            if (tok.size() != 1) throw DataError(where + ": 'features' takes one value");
            num_features = parse_index(tok[0], where);
        } else if (key == "noise") {
            if (tok.size() != 1) throw DataError(where + ": 'noise' takes one value");
            if (tok[0] == "deterministic") {
                noise = NoiseModel::Deterministic;
            } else if (tok[0] == "bernoulli") {
                noise = NoiseModel::Bernoulli;
            } else {
                throw DataError(where + ": unknown noise model '" + tok[0] + "'");
            }
        } else if (key == "context") {
            if (num_actions == 0) {
                throw DataError(where + ": 'actions' must precede the first context");
            }
            if (tok.size() != 2 + num_actions + num_features) {
                throw DataError(where + ": expected id, probability, " + std::to_string(num_actions) +
                                " rewards and " + std::to_string(num_features) + " features");
            }
            ids.push_back(tok[0]);
            probs.push_back(parse_real(tok[1], where));
            for (std::size_t a = 0; a < num_actions; ++a) {
                rewards.push_back(parse_real(tok[2 + a], where));
            }
            if (num_features > 0) {
                std::vector<double> f;
                for (std::size_t j = 0; j < num_features; ++j) {
                    f.push_back(parse_real(tok[2 + num_actions + j], where));
                }
                features.push_back(std::move(f));
            }
        } else {
            throw DataError(where + ": unknown key '" + key + "'");
        }
    }
    if (ids.empty()) {
        throw DataError("instance file has no contexts");
    }
    return FiniteContextualBandit(std::move(ids), std::move(probs), num_actions, std::move(rewards), noise,
                                  std::move(features));
}

FiniteContextualBandit read_instance_file(const std::string& path) {
    auto in = open_in(path);
    return read_instance(in);
}

void write_instance(std::ostream& out, const FiniteContextualBandit& inst) {
    const std::size_t nf = inst.has_features() ? inst.features(0).size() : 0;
    out << "actions " << inst.num_actions() << '\n'
        << "noise " << (inst.noise() == NoiseModel::Bernoulli ? "bernoulli" : "deterministic") << '\n';
    if (nf > 0) {
        out << "features " << nf << '\n';
    }
    for (std::size_t x = 0; x < inst.num_contexts(); ++x) {
        out << "context " << inst.context_id(x) << ' ' << format_real(inst.context_prob(x));
        for (double r : inst.reward_row(x)) {
            out << ' ' << format_real(r);
        }
        if (nf > 0) {
            for (double f : inst.features(x)) {
                out << ' ' << format_real(f);
            }
        }
        out << '\n';
    }
}

LoggedDataset read_dataset(std::istream& in, const FiniteContextualBandit& instance) {
    expect_header(in, "context_id,action,reward,propensity", "dataset");
    std::vector<LoggedRecord> records;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        const std::string where = line_ref(line_no);
        if (cells.size() != 4) {
            throw DataError(where + ": expected 4 columns");
        }
        records.push_back({context_index(instance, cells[0], line_no), parse_index(cells[1], where),
                           parse_real(cells[2], where), parse_real(cells[3], where)});
    }
    return LoggedDataset(std::move(records), instance.num_actions());
}

LoggedDataset read_dataset_file(const std::string& path, const FiniteContextualBandit& instance) {
    auto in = open_in(path);
    return read_dataset(in, instance);
}

void write_dataset(std::ostream& out, const LoggedDataset& data, const FiniteContextualBandit& instance) {
    out << "context_id,action,reward,propensity\n";
    for (const auto& r : data.records()) {
        out << instance.context_id(r.context) << ',' << r.action << ',' << format_real(r.reward) << ','
            << format_real(r.propensity) << '\n';
    }
}

namespace {

std::vector<double> read_prob_cells(const std::vector<std::string>& cells, std::size_t offset, std::size_t k,
                                    std::size_t line_no) {
    if (cells.size() != offset + k) {
        throw DataError(line_ref(line_no) + ": expected " + std::to_string(offset + k) + " columns");
    }
    std::vector<double> row;
    for (std::size_t a = 0; a < k; ++a) {
        row.push_back(parse_real(cells[offset + a], line_ref(line_no)));
    }
    return row;
}

TabularPolicy assemble(std::vector<std::vector<double>>& rows, const FiniteContextualBandit& inst,
                       const std::string& what) {
    std::vector<double> flat;
    for (std::size_t x = 0; x < rows.size(); ++x) {
        if (rows[x].empty()) {
            throw ConfigurationError(what + ": missing row for context '" + inst.context_id(x) + "'");
        }
        flat.insert(flat.end(), rows[x].begin(), rows[x].end());
    }
    return TabularPolicy(inst.num_actions(), std::move(flat));
}

}  // namespace

TabularPolicy read_policy(std::istream& in, const FiniteContextualBandit& instance) {
    expect_header(in, "context_id", "policy");
    std::vector<std::vector<double>> rows(instance.num_contexts());
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        const std::size_t x = context_index(instance, cells.at(0), line_no);
        rows[x] = read_prob_cells(cells, 1, instance.num_actions(), line_no);
    }
    return assemble(rows, instance, "policy");
}

TabularPolicy read_policy_file(const std::string& path, const FiniteContextualBandit& instance) {
    auto in = open_in(path);
    return read_policy(in, instance);
}

void write_policy(std::ostream& out, const TabularPolicy& policy, const FiniteContextualBandit& instance) {
    require_compatible(instance, policy);
    out << "context_id";
    for (std::size_t a = 0; a < policy.num_actions(); ++a) {
        out << ",p" << a;
    }
    out << '\n';
    for (std::size_t x = 0; x < policy.num_contexts(); ++x) {
        out << instance.context_id(x);
        for (double p : policy.row(x)) {
            out << ',' << format_real(p);
        }
        out << '\n';
    }
}

PolicyClass read_policy_class(std::istream& in, const FiniteContextualBandit& instance) {
    expect_header(in, "policy,context_id", "policy class");
    std::map<std::size_t, std::vector<std::vector<double>>> by_index;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() < 2) {
            throw DataError(line_ref(line_no) + ": too few columns");
        }
        const std::size_t idx = parse_index(cells[0], line_ref(line_no));
        auto& rows = by_index[idx];
        rows.resize(instance.num_contexts());
        const std::size_t x = context_index(instance, cells[1], line_no);
        rows[x] = read_prob_cells(cells, 2, instance.num_actions(), line_no);
    }
    std::vector<TabularPolicy> policies;
    std::size_t expected = 0;
    for (auto& [idx, rows] : by_index) {
        if (idx != expected++) {
            throw DataError("policy class: indices must be contiguous from 0");
        }
        policies.push_back(assemble(rows, instance, "policy " + std::to_string(idx)));
    }
    if (policies.empty()) {
        throw DataError("policy class: no policies");
    }
    return PolicyClass(std::move(policies));
}

PolicyClass read_policy_class_file(const std::string& path, const FiniteContextualBandit& instance) {
    auto in = open_in(path);
    return read_policy_class(in, instance);
}

void write_policy_class(std::ostream& out, const PolicyClass& policies, const FiniteContextualBandit& instance) {
    out << "policy,context_id";
    for (std::size_t a = 0; a < policies.num_actions(); ++a) {
        out << ",p" << a;
    }
    out << '\n';
    for (std::size_t i = 0; i < policies.size(); ++i) {
        require_compatible(instance, policies[i]);
        for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
            out << i << ',' << instance.context_id(x);
            for (double p : policies[i].row(x)) {
                out << ',' << format_real(p);
            }
            out << '\n';
        }
    }
}

PolicyDistribution read_distribution(std::istream& in, std::size_t class_size) {
    expect_header(in, "index,weight", "distribution");
    std::vector<double> masses(class_size, 0.0);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 2) {
            throw DataError(line_ref(line_no) + ": expected 2 columns");
        }
        const std::size_t i = parse_index(cells[0], line_ref(line_no));
        if (i >= class_size) {
            throw DataError(line_ref(line_no) + ": index outside the policy class");
        }
        masses[i] = parse_real(cells[1], line_ref(line_no));
    }
    return PolicyDistribution::from_masses(std::move(masses));
}

PolicyDistribution read_distribution_file(const std::string& path, std::size_t class_size) {
    auto in = open_in(path);
    return read_distribution(in, class_size);
}

void write_distribution(std::ostream& out, const PolicyDistribution& q) {
    out << "index,weight\n";
    for (std::size_t i = 0; i < q.size(); ++i) {
        out << i << ',' << format_real(q[i]) << '\n';
    }
}

}  // namespace piwo::io
