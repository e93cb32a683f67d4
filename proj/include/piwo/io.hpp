#pragma once

// Text formats.
//
// Instance file (line oriented, '#' starts a comment):
//     actions 2
//     noise deterministic          # or bernoulli
//     features 0                   # optional; number of trailing feature columns
//     context x1 0.5 1.0 0.0       # id, nu(x), r(x,0..K-1), features...
//     context x2 0.5 0.5 1.0
//
// Logged dataset CSV:  context_id,action,reward,propensity
// Policy CSV:          context_id,p0,...,p{K-1}
// Policy class CSV:    policy,context_id,p0,...,p{K-1}
// Distribution CSV:    index,weight
//
// Actions are 0-based. Reals are written with 17 significant digits so that
// files round-trip exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include "piwo/bandit.hpp"
#include "piwo/pac_bayes.hpp"

namespace piwo::io {

FiniteContextualBandit read_instance(std::istream& in);
FiniteContextualBandit read_instance_file(const std::string& path);
void write_instance(std::ostream& out, const FiniteContextualBandit& instance);

LoggedDataset read_dataset(std::istream& in, const FiniteContextualBandit& instance);
LoggedDataset read_dataset_file(const std::string& path, const FiniteContextualBandit& instance);
void write_dataset(std::ostream& out, const LoggedDataset& data, const FiniteContextualBandit& instance);

TabularPolicy read_policy(std::istream& in, const FiniteContextualBandit& instance);
TabularPolicy read_policy_file(const std::string& path, const FiniteContextualBandit& instance);
void write_policy(std::ostream& out, const TabularPolicy& policy, const FiniteContextualBandit& instance);

PolicyClass read_policy_class(std::istream& in, const FiniteContextualBandit& instance);
PolicyClass read_policy_class_file(const std::string& path, const FiniteContextualBandit& instance);
void write_policy_class(std::ostream& out, const PolicyClass& policies, const FiniteContextualBandit& instance);

PolicyDistribution read_distribution(std::istream& in, std::size_t class_size);
PolicyDistribution read_distribution_file(const std::string& path, std::size_t class_size);
void write_distribution(std::ostream& out, const PolicyDistribution& q);

/// Shortest exact decimal form ("%.17g").
std::string format_real(double v);

/// Splits on commas; no quoting.
std::vector<std::string> split_csv(const std::string& line);

/// Strict double parse; throws DataError naming `where` on failure.
double parse_real(const std::string& text, const std::string& where);
std::size_t parse_index(const std::string& text, const std::string& where);

}  // namespace piwo::io
