#pragma once

#include <vector>

#include "oracle.hpp"
#include "piwo/bandit.hpp"

namespace fixtures {

// Two contexts, two actions, deterministic rewards.
inline piwo::FiniteContextualBandit t1() {
    return piwo::FiniteContextualBandit({"x1", "x2"}, {0.5, 0.5}, 2, {1.0, 0.0, 0.5, 1.0},
                                        piwo::NoiseModel::Deterministic);
}

inline piwo::TabularPolicy mu_t1() { return piwo::TabularPolicy::from_rows({{0.8, 0.2}, {0.5, 0.5}}); }
inline piwo::TabularPolicy pi_a() { return piwo::TabularPolicy::constant(2, 2, 0); }
inline piwo::TabularPolicy pi_b() { return piwo::TabularPolicy::constant(2, 2, 1); }

inline piwo::LoggedDataset d1() {
    return piwo::LoggedDataset({{0, 0, 1.0, 0.8}, {1, 1, 1.0, 0.5}}, 2);
}

inline oracle::Matrix rows(const piwo::TabularPolicy& p) {
    oracle::Matrix m(p.num_contexts());
    for (std::size_t x = 0; x < p.num_contexts(); ++x) {
        m[x].assign(p.row(x).begin(), p.row(x).end());
    }
    return m;
}

inline oracle::Instance view(const piwo::FiniteContextualBandit& inst) {
    oracle::Instance o;
    for (std::size_t x = 0; x < inst.num_contexts(); ++x) {
        o.nu.push_back(inst.context_prob(x));
        o.reward.emplace_back(inst.reward_row(x).begin(), inst.reward_row(x).end());
    }
    return o;
}

inline std::vector<oracle::Record> records(const piwo::LoggedDataset& d) {
    std::vector<oracle::Record> out;
    for (const auto& r : d.records()) out.push_back({r.context, r.action, r.reward, r.propensity});
    return out;
}

}  // namespace fixtures
