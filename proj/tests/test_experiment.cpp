#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "piwo/errors.hpp"
#include "piwo/experiment.hpp"
#include "piwo/rng.hpp"

using namespace piwo;

namespace {

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

SweepConfig small_config() {
    SweepConfig c;
    c.eta_grid = {1.0};
    c.hyper_grid = {0.1};
    c.learners = {LearnerKind::PiwoIx};
    c.folds = 2;
    c.behavior_fit_fraction = 0.2;
    c.class_scorers = 3;
    return c;
}

}  // namespace

TEST_CASE("reward matrices") {
    const auto one = build_reward_matrix(1, 4);
    CHECK(one.size() == 1);
    CHECK(one(0, 0) == 1.0);
    const auto m = build_reward_matrix(26, 9);
    std::size_t off = 0;
    for (std::size_t a = 0; a < 26; ++a) {
        for (std::size_t y = 0; y < 26; ++y) {
            if (a == y) {
                CHECK(m(a, y) == 1.0);
            } else {
                CHECK(m(a, y) >= 0.0);
                CHECK(m(a, y) < 1.0);
                ++off;
            }
        }
    }
    CHECK(off == 650);
    const auto again = build_reward_matrix(26, 9);
    CHECK(std::equal(m.entries().begin(), m.entries().end(), again.entries().begin()));
    CHECK_THROWS_AS(RewardMatrix(2, {1.0, 1.0, 0.2, 1.0}), ConfigurationError);
}

TEST_CASE("supervised to bandit looks rewards up in the label column") {
    const ClassificationTable table({{0.0}, {1.0}, {2.0}}, {0, 1, 0}, 2);
    const RewardMatrix m(2, {1.0, 0.3, 0.6, 1.0});
    const auto inst = supervised_to_bandit(table, m);
    CHECK(inst.mean_reward(0, 0) == 1.0);
    CHECK(inst.mean_reward(0, 1) == 0.6);
    CHECK(inst.mean_reward(1, 0) == 0.3);
    CHECK(inst.mean_reward(1, 1) == 1.0);
    CHECK(inst.mean_reward(2, 0) == 1.0);
    CHECK(inst.mean_reward(2, 1) == 0.6);
    CHECK(inst.context_prob(1) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(ClassificationTable({{0.0}}, {2}, 2), DataError);
}

TEST_CASE("property: converted instances reward the true label with one") {
    const auto table = generate_synthetic_classification(200, 3, 6, 2);
    const auto inst = supervised_to_bandit(table, build_reward_matrix(6, 5));
    for (std::size_t x = 0; x < table.size(); ++x) {
        CHECK(inst.mean_reward(x, table.label(x)) == 1.0);
        for (std::size_t a = 0; a < 6; ++a) {
            CHECK(inst.mean_reward(x, a) >= 0.0);
            CHECK(inst.mean_reward(x, a) <= 1.0);
        }
    }
}

TEST_CASE("ridge regression closed forms") {
    const auto m = ridge_regression({{1.0}, {2.0}}, {{1.0}, {2.0}}, 1.0, false);
    CHECK(m.coefficients(0)[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    CHECK(m.intercept(0) == 0.0);

    const auto c = ridge_regression({{1.0, 0.5}, {2.0, -1.0}, {-3.0, 4.0}}, {{0.7}, {0.7}, {0.7}}, 1e-12, true);
    for (const auto& x : {std::vector<double>{0.0, 0.0}, std::vector<double>{5.0, -2.0}}) {
        CHECK(std::abs(c.predict(x)[0] - 0.7) <= 1e-6);
    }
    CHECK_THROWS_AS(ridge_regression({{1.0}}, {{1.0}}, 0.0, false), ArgumentError);
}

TEST_CASE("property: ridge normal equations hold") {
    const auto table = generate_synthetic_classification(300, 5, 4, 12);
    const auto m = build_reward_matrix(4, 3);
    const double alpha = 0.7;
    const auto model = fit_ridge(table, m, alpha);
    const std::size_t n = table.size(), f = table.num_features();
    std::vector<double> mean_x(f, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) mean_x[j] += table.features(i)[j] / static_cast<double>(n);
    for (std::size_t a = 0; a < 4; ++a) {
        double mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_y += m(a, table.label(i)) / static_cast<double>(n);
        double res2 = 0.0, rhs2 = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
            double lhs = alpha * model.coefficients(a)[j], rhs = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double xij = table.features(i)[j] - mean_x[j];
                double pred = 0.0;
                for (std::size_t l = 0; l < f; ++l) pred += (table.features(i)[l] - mean_x[l]) * model.coefficients(a)[l];
                lhs += xij * pred;
                rhs += xij * (m(a, table.label(i)) - mean_y);
            }
            res2 += (lhs - rhs) * (lhs - rhs);
            rhs2 += rhs * rhs;
        }
        CHECK(std::sqrt(res2) <= 1e-8 * std::sqrt(rhs2));
    }
}

TEST_CASE("softmax behavior policies") {
    const ClassificationTable one({{0.0}}, {0}, 2);
    const RidgeModel model({{0.0}, {0.0}}, {1.0, 0.0}, 1.0);
    const auto good = softmax_behavior(model, one, std::log(3.0), Direction::Good);
    CHECK(good.prob(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(good.prob(0, 1) == doctest::Approx(0.25).epsilon(1e-14));
    const auto bad = softmax_behavior(model, one, std::log(3.0), Direction::Bad);
    CHECK(bad.prob(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(bad.prob(0, 1) == doctest::Approx(0.75).epsilon(1e-14));

    const auto table = generate_synthetic_classification(50, 3, 5, 1);
    const auto fitted = fit_ridge(table, build_reward_matrix(5, 2), 1.0);
    const auto flat = softmax_behavior(fitted, table, 0.0, Direction::Good);
    for (std::size_t x = 0; x < 50; ++x)
        for (std::size_t a = 0; a < 5; ++a) CHECK(flat.prob(x, a) == doctest::Approx(0.2).epsilon(1e-15));

    std::size_t clamped = 0;
    const auto sharp = softmax_behavior(fitted, table, 1000.0, Direction::Good, &clamped);
    for (std::size_t x = 0; x < 50; ++x) {
        double s = 0.0;
        for (std::size_t a = 0; a < 5; ++a) {
            CHECK(sharp.prob(x, a) > 0.0);
            s += sharp.prob(x, a);
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("synthetic classification data") {
    const auto t = generate_synthetic_classification(100, 4, 5, 7);
    CHECK(t.size() == 100);
    CHECK(t.num_features() == 4);
    std::set<std::size_t> labels(t.labels().begin(), t.labels().end());
    CHECK(labels.size() == 5);
    const auto single = generate_synthetic_classification(20, 2, 1, 7);
    for (auto y : single.labels()) CHECK(y == 0);
    const auto again = generate_synthetic_classification(100, 4, 5, 7);
    CHECK(again.labels() == t.labels());
    CHECK(again.features(42) == t.features(42));
}

TEST_CASE("classification CSV loading") {
    std::istringstream plain("0.5,1.5,0\n2.0,-1.0,1\n3.0,0.0,0\n");
    const auto t = read_classification_csv(plain, "last");
    CHECK(t.size() == 3);
    CHECK(t.num_features() == 2);

    std::istringstream remap("f,label\n1.0,5\n2.0,9\n3.0,5\n");
    const auto r = read_classification_csv(remap, "label");
    CHECK(r.num_classes() == 2);
    CHECK(r.labels() == std::vector<std::size_t>{0, 1, 0});

    std::istringstream by_index("7,0.1\n8,0.2\n7,0.3\n");
    const auto bi = read_classification_csv(by_index, "0");
    CHECK(bi.labels() == std::vector<std::size_t>{0, 1, 0});
    CHECK(bi.features(2)[0] == 0.3);

    std::istringstream bad("a,b,y\n1,2,0\n1,2,0\n1,2,0\n1,2,0\n1,2,0\n1,2.x,0\n");
    CHECK(error_of([&] { read_classification_csv(bad, "y"); }).find("line 7") != std::string::npos);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_classification_csv(empty, "last"), DataError);
    std::istringstream missing("a,b\n1,2\n");
    CHECK_THROWS_AS(read_classification_csv(missing, "label"), DataError);
}

TEST_CASE("grids and sweep configs") {
    const auto g = parse_grid("logspace(-1,3,5)");
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(0.1));
    CHECK(g[2] == doctest::Approx(10.0));
    CHECK(g.back() == doctest::Approx(1000.0));
    CHECK(parse_grid("0.5,2").size() == 2);
    CHECK(std::isinf(parse_grid("inf,10")[0]));

    std::istringstream cfg("eta_grid = logspace(0,1,2)\nhyper_grid = 0.1\nlearners = piwo-ix,piwo-pl\nfolds = 3\n"
                           "direction = bad\nseeds = 1,2\n");
    const auto c = parse_sweep_config(cfg);
    CHECK(c.eta_grid.size() == 2);
    CHECK(c.learners.size() == 2);
    CHECK(c.folds == 3);
    CHECK(c.direction == Direction::Bad);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});

    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(parse_sweep_config(unknown), ConfigurationError);
    SweepConfig v = small_config();
    v.folds = 1;
    CHECK_THROWS_AS(validate(v), ConfigurationError);
    v = small_config();
    v.hyper_grid.clear();
    CHECK_THROWS_AS(validate(v), ConfigurationError);
}

TEST_CASE("sweep cell count, schema and determinism") {
    const auto table = generate_synthetic_classification(120, 3, 4, 5);
    const auto m = build_reward_matrix(4, 6);
    const auto rows = run_sweep(small_config(), table, m);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].fold == 0);
    CHECK(rows[1].fold == 1);
    for (const auto& r : rows) {
        CHECK(r.expected_reward >= 0.0);
        CHECK(r.expected_reward <= 1.0);
        CHECK(r.regret >= -1e-12);
    }
    std::ostringstream a, b;
    write_sweep_csv(a, rows);
    write_sweep_csv(b, run_sweep(small_config(), table, m));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);

    SweepConfig tiny = small_config();
    tiny.folds = 200;
    CHECK_THROWS_AS(run_sweep(tiny, table, m), ConfigurationError);
}
