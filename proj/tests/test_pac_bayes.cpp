#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "piwo/errors.hpp"
#include "piwo/numeric.hpp"
#include "piwo/estimators.hpp"
#include "piwo/pac_bayes.hpp"
#include "piwo/rng.hpp"

using namespace piwo;
using fixtures::pi_a;
using fixtures::pi_b;
using fixtures::t1;

namespace {

std::vector<double> as_vector(const PolicyDistribution& q) { return {q.weights().begin(), q.weights().end()}; }

PolicyDistribution dirichlet(std::size_t size, Philox& rng) {
    std::vector<double> w;
    for (std::size_t i = 0; i < size; ++i) w.push_back(-std::log(1.0 - rng.uniform()));
    return PolicyDistribution::from_masses(w);
}

double gibbs_objective(const std::vector<double>& est, const PolicyDistribution& q, const PolicyDistribution& p,
                       double lambda) {
    double v = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) v += q[i] * est[i];
    return v - oracle::kl(as_vector(q), as_vector(p)) / lambda;
}

}  // namespace

TEST_CASE("KL divergence closed forms") {
    const auto u = PolicyDistribution::uniform(2);
    CHECK(kl_divergence(u, u) == 0.0);
    CHECK(kl_divergence(PolicyDistribution::point_mass(2, 0), u) == doctest::Approx(std::log(2.0)));
    const PolicyDistribution q({0.75, 0.25});
    CHECK(oracle::kl({0.75, 0.25}, {0.5, 0.5}) == doctest::Approx(0.130812).epsilon(1e-6));
    CHECK(kl_divergence(q, u) == doctest::Approx(oracle::kl({0.75, 0.25}, {0.5, 0.5})).epsilon(1e-15));
    CHECK(std::isinf(kl_divergence(u, PolicyDistribution::point_mass(2, 1))));
}

TEST_CASE("distribution construction validates its weights") {
    CHECK_THROWS_AS(PolicyDistribution({0.5, 0.6}), ConfigurationError);
    CHECK_THROWS_AS(PolicyDistribution({}), ConfigurationError);
    CHECK_THROWS_AS(PolicyDistribution::from_masses({0.0, 0.0}), ArgumentError);
    const auto m = PolicyDistribution::from_masses({1.0, 3.0});
    CHECK(m[1] == doctest::Approx(0.75));
}

TEST_CASE("Gibbs weights") {
    const auto u = PolicyDistribution::uniform(2);
    const std::vector<double> est{0.6, 0.3};
    const auto q = gibbs_weights(est, u, 10.0);
    CHECK(q[0] == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-12));
    CHECK(q[0] == doctest::Approx(0.952574).epsilon(1e-6));
    CHECK(q[1] == doctest::Approx(0.047426).epsilon(1e-5));

    const PolicyDistribution prior({0.2, 0.3, 0.5});
    const std::vector<double> flat{0.4, 0.4, 0.4};
    const auto same = gibbs_weights(flat, prior, 50.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(prior[i]).epsilon(1e-14));

    const std::vector<double> big{900.0, 0.0};
    const auto stable = gibbs_weights(big, u, 10.0);
    CHECK(stable[0] == 1.0);
    CHECK(stable[1] == 0.0);
}

TEST_CASE("Gibbs posterior near zero lambda returns the prior") {
    Philox rng(61);
    const auto data = sample_dataset(t1(), fixtures::mu_t1(), 50, 3);
    const PolicyClass cls({pi_a(), pi_b(), TabularPolicy::uniform(2, 2)});
    const PolicyDistribution prior({0.1, 0.6, 0.3});
    const auto q = gibbs_posterior(data, cls, prior, 0.2, 1e-9);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(q[i] - prior[i]) <= 1e-8);
}

TEST_CASE("Gibbs posterior uses lambda = 2 gamma n by default") {
    const auto data = sample_dataset(t1(), fixtures::mu_t1(), 40, 9);
    const PolicyClass cls({pi_a(), pi_b()});
    const auto prior = PolicyDistribution::uniform(2);
    const auto q = gibbs_posterior(data, cls, prior, 0.1);
    const auto r = gibbs_posterior(data, cls, prior, 0.1, 2.0 * 0.1 * 40.0);
    CHECK(q[0] == r[0]);
    CHECK_THROWS_AS(gibbs_posterior(data, cls, prior, 0.0), ArgumentError);
}

TEST_CASE("distribution functional and policy sampling") {
    const std::vector<double> vals{policy_value(t1(), pi_a()), policy_value(t1(), pi_b())};
    CHECK(distribution_functional(vals, PolicyDistribution::uniform(2)) == doctest::Approx(0.625));
    CHECK(distribution_functional(vals, PolicyDistribution::point_mass(2, 1)) == vals[1]);
    const std::vector<double> c{0.3, 0.3, 0.3};
    CHECK(distribution_functional(c, PolicyDistribution({0.2, 0.5, 0.3})) == doctest::Approx(0.3));

    for (std::uint64_t s = 0; s < 20; ++s) CHECK(sample_policy(PolicyDistribution::point_mass(3, 2), s) == 2);
    CHECK(sample_policy(PolicyDistribution::uniform(4), 123) == sample_policy(PolicyDistribution::uniform(4), 123));
    std::vector<double> freq(4, 0.0);
    for (std::uint64_t s = 0; s < 40000; ++s) freq[sample_policy(PolicyDistribution::uniform(4), s)] += 1.0 / 40000;
    for (double f : freq) CHECK(std::abs(f - 0.25) <= 0.01);
}

TEST_CASE("property: normalization, absolute continuity, variational optimality, concentration in lambda") {
    Philox rng(67);
    for (int i = 0; i < 50; ++i) {
        const std::size_t nx = 1 + rng.below(5), k = 2 + rng.below(3), size = 2 + rng.below(6);
        const auto inst = random_instance(nx, k, rng);
        const auto mu = random_policy(nx, k, rng);
        const auto data = sample_dataset(inst, mu, 5 + rng.below(50), rng());
        std::vector<TabularPolicy> ps;
        for (std::size_t j = 0; j < size; ++j) ps.push_back(random_policy(nx, k, rng));
        const PolicyClass cls(std::move(ps));
        std::vector<double> w = as_vector(dirichlet(size, rng));
        w[0] = 0.0;
        const auto prior = PolicyDistribution::from_masses(w);
        const double g = 0.05 + rng.uniform();
        const auto q = gibbs_posterior(data, cls, prior, g);

        double s = 0.0;
        for (double x : q.weights()) s += x;
        CHECK(std::abs(s - 1.0) <= 1e-12);
        CHECK(q[0] == 0.0);

        std::vector<double> est;
        for (const auto& p : cls) est.push_back(ix_estimate(data, p, g));
        const double lambda = 2.0 * g * static_cast<double>(data.size());
        const double best = gibbs_objective(est, q, prior, lambda);
        for (int j = 0; j < 20; ++j) {
            const auto probe = dirichlet(size, rng);
            CHECK(best >= gibbs_objective(est, probe, prior, lambda) - 1e-12);
        }

        std::size_t top = 1;
        for (std::size_t j = 1; j < size; ++j) {
            if (est[j] > est[top]) top = j;
        }
        double prev = -1.0;
        for (double l : {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
            const double mass = gibbs_weights(est, prior, l)[top];
            CHECK(mass >= prev - 1e-15);
            prev = mass;
        }
    }
}

TEST_CASE("property: KL is nonnegative and zero only on equality") {
    Philox rng(71);
    for (int i = 0; i < 200; ++i) {
        const auto q = dirichlet(5, rng);
        const auto p = dirichlet(5, rng);
        CHECK(kl_divergence(q, p) >= -1e-12);
        CHECK(kl_divergence(q, p) > 0.0);
        CHECK(kl_divergence(q, q) == doctest::Approx(0.0).epsilon(1e-12));
    }
}
