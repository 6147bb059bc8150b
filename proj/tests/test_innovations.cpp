#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "garchlab/innovations.hpp"
#include "garchlab/tails.hpp"

using namespace garchlab;

namespace {

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("all families are standardized: mean 0, variance 1") {
    const long n = 400000;
    int stream = 0;
    for (const auto& model : {InnovationModel::gaussian(), InnovationModel::student_t(5.0),
                              InnovationModel::student_t(3.0), InnovationModel::pareto_hybrid(2.5),
                              InnovationModel::pareto_hybrid(1.5)}) {
        const auto z = model.sample(n, SeedSpec{42, static_cast<std::uint64_t>(stream++)});
        CHECK(std::abs(sample_mean(z)) < 0.02);
        // Variance-of-variance grows with the Z^4 tail; wide but honest band.
        const double tol = model.square_tail_index() < 2.5 ? 0.25 : 0.05;
        CHECK(sample_var(z) == doctest::Approx(1.0).epsilon(tol));
    }
}

TEST_CASE("sampling is deterministic given (seed, stream)") {
    const auto model = InnovationModel::student_t(3.0);
    const auto a = model.sample(1000, SeedSpec{7, 3});
    const auto b = model.sample(1000, SeedSpec{7, 3});
    CHECK(a == b);
    const auto c = model.sample(1000, SeedSpec{7, 4});
    CHECK(a != c);
    const auto d = model.sample(1000, SeedSpec{8, 3});
    CHECK(a != d);
}

TEST_CASE("tail_prob_z2 matches empirical tail frequencies") {
    const long n = 200000;
    int stream = 0;
    for (const auto& model : {InnovationModel::gaussian(), InnovationModel::student_t(3.0),
                              InnovationModel::pareto_hybrid(1.5)}) {
        const auto z = model.sample(n, SeedSpec{11, static_cast<std::uint64_t>(stream++)});
        for (double y : {0.5, 1.0, 2.0, 5.0}) {
            long count = 0;
            for (double v : z)
                if (v * v > y) ++count;
            const double emp = static_cast<double>(count) / n;
            const double p = model.tail_prob_z2(y);
            const double se = std::sqrt(p * (1.0 - p) / n);
            CHECK(std::abs(emp - p) < 5.0 * se + 1e-6);
        }
    }
}

TEST_CASE("pareto hybrid closed forms at alpha_tail = 1.5") {
    const auto model = InnovationModel::pareto_hybrid(1.5);
    // Variance-1 standardization gives x0 = 1 and P(Z^2 > y) = y^{-3/2}/4.
    CHECK(model.x0() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.tail_prob_z2(4.0) == doctest::Approx(0.25 * std::pow(4.0, -1.5)).epsilon(1e-12));
    CHECK(model.square_tail_index() == doctest::Approx(1.5));
    // a_n closed form: (K n)^{1/a}, K = x0^{2a}/(2a+1) = 1/4.
    for (long n : {100L, 10000L, 1000000L}) {
        const double an = model.normalizing_a_n(n);
        CHECK(an == doctest::Approx(std::pow(0.25 * n, 1.0 / 1.5)).epsilon(1e-12));
        CHECK(model.tail_prob_z2(an) == doctest::Approx(1.0 / n).epsilon(1e-10));
    }
}

TEST_CASE("pareto hybrid tail of |Z| decays with exact slope -2*alpha_tail") {
    const auto model = InnovationModel::pareto_hybrid(1.5);
    // log P(|Z| > x) is exactly linear in log x beyond x0.
    const double p2 = model.tail_prob_z2(4.0);   // |Z| > 2
    const double p8 = model.tail_prob_z2(64.0);  // |Z| > 8
    const double slope = (std::log(p8) - std::log(p2)) / (std::log(8.0) - std::log(2.0));
    CHECK(slope == doctest::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("student t a_n bisection inverts the exact tail function") {
    for (double nu : {3.0, 5.0}) {
        const auto model = InnovationModel::student_t(nu);
        for (long n : {100L, 10000L, 1000000L}) {
            const double an = model.normalizing_a_n(n);
            CHECK(model.tail_prob_z2(an) == doctest::Approx(1.0 / n).epsilon(1e-8));
        }
        // Monotone in n.
        CHECK(model.normalizing_a_n(1000) < model.normalizing_a_n(100000));
    }
}

TEST_CASE("gaussian has no normalizing sequence") {
    CHECK_THROWS_AS((void)InnovationModel::gaussian().normalizing_a_n(100), std::domain_error);
    CHECK_FALSE(InnovationModel::gaussian().heavy_tailed());
    CHECK(InnovationModel::student_t(3.0).heavy_tailed());
}

TEST_CASE("fourth moments") {
    CHECK(InnovationModel::gaussian().fourth_moment() == doctest::Approx(3.0));
    // Rescaled t(nu): E Z^4 = 3(nu-2)/(nu-4) for nu > 4.
    CHECK(InnovationModel::student_t(6.0).fourth_moment() == doctest::Approx(6.0));
    CHECK(std::isinf(InnovationModel::student_t(3.0).fourth_moment()));
    CHECK(std::isinf(InnovationModel::pareto_hybrid(1.5).fourth_moment()));
    // Monte Carlo check where finite.
    const auto m = InnovationModel::pareto_hybrid(3.0);
    const auto z = m.sample(2000000, SeedSpec{5, 0});
    double z4 = 0.0;
    for (double v : z) z4 += v * v * v * v;
    z4 /= static_cast<double>(z.size());
    CHECK(z4 == doctest::Approx(m.fourth_moment()).epsilon(0.05));
}

TEST_CASE("hill estimator recovers the Z^2 tail index") {
    SUBCASE("student t(3): Z^2 tail index 1.5") {
        const auto z = InnovationModel::student_t(3.0).sample(200000, SeedSpec{101, 0});
        std::vector<double> z2(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) z2[i] = z[i] * z[i];
        const auto rep = hill(z2, 2000);
        CHECK(rep.alpha_hat > 1.2);
        CHECK(rep.alpha_hat < 1.8);
    }
    SUBCASE("pareto hybrid(1.5): exact Pareto tail") {
        const auto z = InnovationModel::pareto_hybrid(1.5).sample(200000, SeedSpec{102, 0});
        std::vector<double> z2(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) z2[i] = z[i] * z[i];
        const auto rep = hill(z2, 2000);
        CHECK(rep.alpha_hat == doctest::Approx(1.5).epsilon(0.1));
    }
}

TEST_CASE("quantile_abs inverts the two-sided tail") {
    for (const auto& model : {InnovationModel::gaussian(), InnovationModel::student_t(3.0),
                              InnovationModel::pareto_hybrid(1.5)}) {
        for (double prob : {0.5, 0.9, 0.99, 0.999}) {
            const double x = model.quantile_abs(prob);
            CHECK(model.tail_prob_z2(x * x) == doctest::Approx(1.0 - prob).epsilon(1e-6));
        }
    }
}

TEST_CASE("normalized maxima of Z^2 follow the Frechet law") {
    // For P(Z^2 > y) = K y^{-a}, max of m draws over a_m converges to
    // Frechet(a); with an exactly Pareto tail the KS statistic at finite m is
    // essentially the Monte Carlo error.
    const auto model = InnovationModel::pareto_hybrid(1.5);
    const long m = 10000;
    const int n_rep = 2000;
    const double am = model.normalizing_a_n(m);
    std::vector<double> maxima(n_rep);
    for (int r = 0; r < n_rep; ++r) {
        const auto z = model.sample(m, SeedSpec{2024, static_cast<std::uint64_t>(r)});
        double mx = 0.0;
        for (double v : z) mx = std::max(mx, v * v);
        maxima[r] = mx / am;
    }
    std::sort(maxima.begin(), maxima.end());
    double ks = 0.0;
    for (int i = 0; i < n_rep; ++i) {
        const double f = std::exp(-std::pow(maxima[i], -1.5));
        ks = std::max(ks, std::max(std::abs(f - static_cast<double>(i) / n_rep),
                                   std::abs(f - static_cast<double>(i + 1) / n_rep)));
    }
    CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n_rep)));  // level 0.01
}

TEST_CASE("invalid family parameters are rejected") {
    CHECK_THROWS_AS((void)InnovationModel::student_t(2.0), std::invalid_argument);
    CHECK_THROWS_AS((void)InnovationModel::pareto_hybrid(1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)make_innovation("cauchy", 1.0), std::invalid_argument);
    CHECK_NOTHROW((void)make_innovation("student_t", 2.5));
}
