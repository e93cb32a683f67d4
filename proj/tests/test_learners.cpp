#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "piwo/errors.hpp"
#include "piwo/numeric.hpp"
#include "piwo/estimators.hpp"
#include "piwo/learners.hpp"
#include "piwo/rng.hpp"

using namespace piwo;
using fixtures::d1;
using fixtures::mu_t1;
using fixtures::pi_a;
using fixtures::pi_b;
using fixtures::t1;

namespace {

PolicyClass ab() { return PolicyClass({pi_a(), pi_b()}); }

PolicyClass random_class(std::size_t size, std::size_t nx, std::size_t k, Philox& rng) {
    std::vector<TabularPolicy> ps;
    for (std::size_t i = 0; i < size; ++i) ps.push_back(random_policy(nx, k, rng));
    return PolicyClass(std::move(ps));
}

}  // namespace

TEST_CASE("CSC oracle picks the highest total gain") {
    const CscInstance csc({{0, {1.0, 0.0}}, {1, {0.0, 2.0}}}, 2);
    const PolicyClass cls({pi_a(), pi_b(), TabularPolicy::uniform(2, 2)});
    const auto sel = csc_oracle(csc, cls);
    CHECK(sel.index == 1);
    CHECK(sel.scores[0] == doctest::Approx(1.0));
    CHECK(sel.scores[1] == doctest::Approx(2.0));
    CHECK(sel.scores[2] == doctest::Approx(1.5));
}

TEST_CASE("CSC oracle with zero gains returns the first policy") {
    const CscInstance csc({{0, {0.0, 0.0}}, {1, {0.0, 0.0}}}, 2);
    CHECK(csc_oracle(csc, PolicyClass({pi_b(), pi_a()})).index == 0);
}

TEST_CASE("CSC gains reject NaN and +inf") {
    CHECK_THROWS_AS(CscInstance({{0, {std::nan(""), 0.0}}}, 2), ArgumentError);
    CHECK_THROWS_AS(CscInstance({{0, {kInf, 0.0}}}, 2), ArgumentError);
    CHECK_NOTHROW(CscInstance({{0, {-kInf, 0.0}}}, 2));
}

TEST_CASE("property: CSC argmax invariant under scaling and per-context shifts") {
    Philox rng(31);
    for (int i = 0; i < 100; ++i) {
        const std::size_t nx = 1 + rng.below(5), k = 1 + rng.below(4);
        const auto cls = random_class(1 + rng.below(6), nx, k, rng);
        std::vector<CscRow> rows, scaled, shifted;
        const double c = 0.5 + 3.0 * rng.uniform();
        for (int t = 0; t < 8; ++t) {
            CscRow r{rng.below(nx), {}};
            for (std::size_t a = 0; a < k; ++a) r.gains.push_back(rng.uniform());
            CscRow s = r, h = r;
            const double shift = rng.uniform() - 0.5;
            for (auto& g : s.gains) g *= c;
            for (auto& g : h.gains) g += shift;
            rows.push_back(r);
            scaled.push_back(s);
            shifted.push_back(h);
        }
        const auto base = csc_oracle(CscInstance(rows, k), cls).index;
        CHECK(csc_oracle(CscInstance(scaled, k), cls).index == base);
        CHECK(csc_oracle(CscInstance(shifted, k), cls).index == base);
    }
}

TEST_CASE("IX gains on the two-record dataset") {
    const auto csc = piwo_ix_gains(d1(), 0.2);
    REQUIRE(csc.rows().size() == 2);
    CHECK(csc.rows()[0].gains[0] == doctest::Approx(1.0));
    CHECK(csc.rows()[0].gains[1] == 0.0);
    CHECK(csc.rows()[1].gains[0] == 0.0);
    CHECK(csc.rows()[1].gains[1] == doctest::Approx(1.0 / 0.7));
    const auto zero = piwo_ix_gains(LoggedDataset({{0, 1, 0.0, 0.3}}, 2), 0.2);
    CHECK(zero.rows()[0].gains == std::vector<double>{0.0, 0.0});
}

TEST_CASE("PIWO-IX and PIWO-Clip on the two-record dataset") {
    const auto ix = piwo_ix(d1(), ab(), 0.2);
    CHECK(ix.index == 1);
    CHECK(ix_estimate(d1(), pi_a(), 0.2) == doctest::Approx(0.5));
    CHECK(ix_estimate(d1(), pi_b(), 0.2) == doctest::Approx(0.714286).epsilon(1e-6));
    CHECK(piwo_clip(d1(), ab(), 0.2).index == 1);
    CHECK(ciw_estimate(d1(), pi_b(), 0.2) == doctest::Approx(1.0));
    CHECK(piwo_ix(d1(), PolicyClass({pi_a()}), 0.2).index == 0);
    const LoggedDataset zero({{0, 0, 0.0, 0.8}, {1, 1, 0.0, 0.5}}, 2);
    CHECK(piwo_ix(zero, PolicyClass({pi_b(), pi_a()}), 0.2).index == 0);
    CHECK_THROWS_AS(piwo_ix(d1(), ab(), 0.0), ArgumentError);
}

TEST_CASE("PIWO-Clip reduces to IW below the smallest propensity and to raw rewards at one") {
    Philox rng(41);
    for (int i = 0; i < 50; ++i) {
        const auto inst = random_instance(4, 3, rng);
        const auto mu = random_policy(4, 3, rng);
        const auto data = sample_dataset(inst, mu, 20, rng());
        const auto cls = random_class(5, 4, 3, rng);
        double pmin = 1.0;
        for (const auto& r : data.records()) pmin = std::min(pmin, r.propensity);
        std::vector<double> iw, raw;
        for (const auto& p : cls) {
            iw.push_back(iw_estimate(data, p));
            double s = 0.0;
            for (const auto& r : data.records()) s += p.prob(r.context, r.action) * r.reward;
            raw.push_back(s / static_cast<double>(data.size()));
        }
        CHECK(piwo_clip(data, cls, pmin / 2.0).index == oracle::first_argmax(iw));
        CHECK(piwo_clip(data, cls, 1.0).index == oracle::first_argmax(raw));
    }
}

TEST_CASE("PIWO-PL ties on the two-record dataset and break towards the first policy") {
    const auto sel = piwo_pl(d1(), ab(), 0.1, mu_t1());
    CHECK(sel.index == 0);
    CHECK(sel.scores[0] == doctest::Approx(0.3));
    CHECK(sel.scores[1] == doctest::Approx(0.3));
}

TEST_CASE("PIWO-PL without adjustment is IW maximization") {
    Philox rng(43);
    for (int i = 0; i < 50; ++i) {
        const auto inst = random_instance(3, 3, rng);
        const auto mu = random_policy(3, 3, rng);
        const auto data = sample_dataset(inst, mu, 15, rng());
        const auto cls = random_class(6, 3, 3, rng);
        std::vector<double> iw;
        for (const auto& p : cls) iw.push_back(iw_estimate(data, p));
        CHECK(piwo_pl(data, cls, 0.0, mu).index == oracle::first_argmax(iw));
    }
}

TEST_CASE("PIWO-PL assigns minus infinity to policies on unplayable actions") {
    const auto mu = TabularPolicy::from_rows({{1.0, 0.0}, {0.5, 0.5}});
    const LoggedDataset data({{0, 0, 0.1, 1.0}, {1, 1, 0.2, 0.5}}, 2);
    const auto bad = TabularPolicy::from_rows({{0.0, 1.0}, {0.0, 1.0}});
    const auto sel = piwo_pl(data, PolicyClass({bad, pi_a()}), 0.01, mu);
    CHECK(sel.scores[0] == -kInf);
    CHECK(std::isfinite(sel.scores[1]));
    CHECK(sel.index == 1);
}

TEST_CASE("coverage-scaled PIWO-IX with per-policy gammas") {
    const auto sel = coverage_scaled_piwo_ix(d1(), ab(), {0.2, 0.5}, 0.5);
    CHECK(sel.index == 1);
    CHECK(sel.scores[0] == doctest::Approx(0.5 - std::log(8.0) / 0.8));
    CHECK(sel.scores[1] == doctest::Approx(0.5 - std::log(8.0) / 2.0));
    CHECK(sel.scores[0] == doctest::Approx(-2.099).epsilon(1e-3));
    CHECK(sel.scores[1] == doctest::Approx(-0.5397).epsilon(1e-3));
    CHECK(coverage_scaled_piwo_ix(d1(), PolicyClass({pi_a()}), {0.3}, 0.5).index == 0);
    CHECK_THROWS_AS(coverage_scaled_piwo_ix(d1(), ab(), {0.2}, 0.5), ArgumentError);
}

TEST_CASE("theorem 3 gammas and their fallbacks") {
    const auto g = theorem3_gamma(ab(), t1(), mu_t1(), 0.5, 2);
    CHECK(g[0] == doctest::Approx(std::sqrt(std::log(8.0) / (2.0 * 1.125 * 2.0))));
    CHECK(g[0] == doctest::Approx(0.6797).epsilon(1e-4));

    const auto mu0 = TabularPolicy::from_rows({{1.0, 0.0}, {1.0, 0.0}});
    const auto inf_g = theorem3_gamma(PolicyClass({pi_b()}), t1(), mu0, 0.5, 40);
    CHECK(inf_g[0] == doctest::Approx(1.0 / 40.0));

    const FiniteContextualBandit z({"x1", "x2"}, {0.5, 0.5}, 2, {0.0, 0.0, 0.0, 0.0}, NoiseModel::Deterministic);
    CHECK(theorem3_gamma(ab(), z, mu_t1(), 0.5, 10)[0] == 1.0);
}

TEST_CASE("regret against a comparator") {
    CHECK(regret(t1(), pi_b(), pi_a()) == doctest::Approx(0.25));
    CHECK(regret(t1(), pi_a(), pi_a()) == 0.0);
    CHECK(best_in_class(t1(), ab()) == 0);
}

TEST_CASE("learner names round-trip and dispatch") {
    for (auto k : {LearnerKind::PiwoIx, LearnerKind::PiwoClip, LearnerKind::PiwoPl, LearnerKind::CoverageScaled}) {
        CHECK(parse_learner(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_learner("greedy"), ArgumentError);
    LearnerParams p;
    p.gamma = 0.2;
    CHECK(run_learner(LearnerKind::PiwoIx, d1(), ab(), p).index == 1);
    CHECK_THROWS_AS(run_learner(LearnerKind::PiwoPl, d1(), ab(), p), ArgumentError);
    CHECK_THROWS_AS(run_learner(LearnerKind::CoverageScaled, d1(), ab(), p), ArgumentError);
}

TEST_CASE("property: oracle equivalence, sparsity, never-rewarded exclusion, uniform scaling") {
    Philox rng(53);
    for (int i = 0; i < 100; ++i) {
        const std::size_t nx = 1 + rng.below(6), k = 1 + rng.below(4);
        const auto inst = random_instance(nx, k, rng);
        const auto mu = random_policy(nx, k, rng);
        const auto data = sample_dataset(inst, mu, 1 + rng.below(40), rng());
        std::vector<TabularPolicy> ps;
        for (int j = 0; j < 6; ++j) ps.push_back(random_policy(nx, k, rng));
        ps.push_back(TabularPolicy::constant(nx, k, 0));
        const PolicyClass cls(std::move(ps));
        const double g = 0.01 + rng.uniform();

        const auto recs = fixtures::records(data);
        std::vector<double> est;
        for (const auto& p : cls) est.push_back(oracle::ix(recs, fixtures::rows(p), g));
        const auto sel = piwo_ix(data, cls, g);
        CHECK(sel.index == oracle::first_argmax(est));

        const auto gains = piwo_ix_gains(data, g);
        for (const auto& row : gains.rows()) {
            int nonzero = 0;
            for (double v : row.gains) nonzero += v != 0.0;
            CHECK(nonzero <= 1);
        }
        bool some_positive = false;
        for (double e : est) some_positive |= e > 0.0;
        if (some_positive) CHECK(est[sel.index] > 0.0);

        CHECK(coverage_scaled_piwo_ix(data, cls, std::vector<double>(cls.size(), g), 0.1).index == sel.index);
    }
}
