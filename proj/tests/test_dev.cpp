#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brw/dev.hpp"
#include "brw/rng.hpp"

using namespace brw;

namespace {
ratefn::RateFunction binary_rf() {
    return ratefn::RateFunction(model::binary_model(), env::deterministic_env());
}
double binary_lstar(double a) {
    return a * std::atanh(a) + 0.5 * std::log(1.0 - a * a) - std::log(2.0);
}
}  // namespace

TEST_CASE("a_n sequence validation") {
    CHECK(dev::ANSequence::make(1.0, 0.7).at(100) == doctest::Approx(std::pow(100.0, 0.7)));
    CHECK_THROWS_AS(dev::ANSequence::make(1.0, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(dev::ANSequence::make(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(dev::ANSequence::make(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(dev::ANSequence::make(-1.0, 0.7), std::invalid_argument);
}

TEST_CASE("ldp theory") {
    auto b = binary_rf();
    auto [in0, cl0] = dev::ldp_theory(b, dev::ClosedBox{{0.4}, {0.6}});
    CHECK(in0 == doctest::Approx(-binary_lstar(0.4)).epsilon(1e-8));
    CHECK(in0 == doctest::Approx(0.610864).epsilon(1e-6));
    CHECK(in0 == cl0);

    // box containing the LLN point: rate = Lambda(0) = log E N
    auto [c0, c1] = dev::ldp_theory(b, dev::ClosedBox{{-0.3}, {0.5}});
    CHECK(c0 == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    (void)c1;

    ratefn::RateFunction g(model::gaussian_two_state(2, 1.0, 2.0), env::iid_env({0.5, 0.5}));
    auto [g0, g1] = dev::ldp_theory(g, dev::ClosedBox{{1.0}, {2.0}});
    CHECK(g0 == doctest::Approx(std::log(2.0) - 1.0 / 3.0).epsilon(1e-8));
    CHECK(g0 == doctest::Approx(0.359814).epsilon(1e-6));
    (void)g1;

    // box outside the finite region of Lambda*
    auto far = dev::ldp_theory(b, dev::ClosedBox{{5.0}, {6.0}});
    CHECK(far.first == -std::numeric_limits<double>::infinity());
}

TEST_CASE("binary ldp oracle") {
    dev::IntervalSet A{{{0.4, 0.6}}};
    CHECK(dev::ldp_oracle_binary(1000, A) == doctest::Approx(0.6078274235071153).epsilon(1e-12));
    CHECK(dev::ldp_oracle_binary(1000, A) == doctest::Approx(0.6109).epsilon(1e-2));

    dev::IntervalSet full{{{-1.0, 1.0}}};
    CHECK(dev::ldp_oracle_binary(50, full) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    dev::IntervalSet point{{{1.0, 1.0}}};
    CHECK(dev::ldp_oracle_binary(10, point) == doctest::Approx(0.0));

    dev::IntervalSet empty{{{5.0, 6.0}}};
    CHECK(dev::ldp_oracle_binary(10, empty) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("ldp estimate equals the oracle on the binary model") {
    dev::ClosedBox A{{0.2}, {0.6}};
    dev::IntervalSet iv{{{0.2, 0.6}}};
    auto rep = dev::ldp_estimate(model::binary_model(), env::deterministic_env(), A,
                                 {8, 12, 16, 20}, 3, 77, 10'000'000, 0.2);
    REQUIRE(rep.rows.size() == 4);
    for (const auto& row : rep.rows) {
        double oracle = dev::ldp_oracle_binary(row.n, iv);
        for (double e : row.estimates) CHECK(e == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(row.censored == 0);
        CHECK(row.cap_hits == 0);
    }
}

TEST_CASE("ldp estimate: binary upper bound is hard") {
    // empirical rate never exceeds the closure rate for the deterministic tree
    auto b = binary_rf();
    dev::ClosedBox A{{0.4}, {0.6}};
    dev::IntervalSet iv{{{0.4, 0.6}}};
    double cl = dev::ldp_theory(b, A).second;
    for (int n : {64, 256, 1024}) CHECK(dev::ldp_oracle_binary(n, iv) <= cl + 1e-12);
}

TEST_CASE("ldp estimate: censoring far outside the support") {
    dev::ClosedBox A{{5.0}, {6.0}};
    auto rep = dev::ldp_estimate(model::binary_model(), env::deterministic_env(), A, {10}, 5, 1,
                                 10'000'000, 0.1);
    CHECK(rep.rows[0].censored == 5);
    CHECK(rep.rows[0].estimates.empty());
}

TEST_CASE("monotone window effect") {
    dev::IntervalSet inner{{{0.4, 0.5}}}, outer{{{0.4, 0.7}}};
    for (int n : {100, 1000})
        CHECK(dev::ldp_oracle_binary(n, inner) <= dev::ldp_oracle_binary(n, outer) + 1e-12);
    auto b = binary_rf();
    CHECK(dev::ldp_theory(b, dev::ClosedBox{{0.4}, {0.5}}).second <=
          dev::ldp_theory(b, dev::ClosedBox{{0.4}, {0.7}}).second + 1e-9);
}

TEST_CASE("covariance matrix") {
    auto cb = dev::covariance_C(model::binary_model(), env::deterministic_env());
    CHECK(cb.C[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cb.rank == 1);
    CHECK(cb.centered);
    CHECK(cb.delta > 0.0);

    // two gaussian states sigma^2 in {1,2}, equal weights, d=2 -> 1.5 I
    model::ReproductionLaw g;
    g.dim = 2;
    for (double s2 : {1.0, 2.0}) {
        model::StateLaw s;
        s.offspring = model::OffspringLaw::fixed(2);
        s.displacement = model::DisplacementLaw::gaussian({0.0, 0.0}, s2);
        g.states.push_back(s);
    }
    auto cg = dev::covariance_C(g, env::iid_env({0.5, 0.5}));
    CHECK(cg.C[0][0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cg.C[1][1] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cg.C[0][1] == doctest::Approx(0.0));
    CHECK(cg.rank == 2);

    // nonzero per-state means that cancel under the stationary law
    model::ReproductionLaw drift;
    drift.dim = 1;
    for (double mu : {0.5, -0.5}) {
        model::StateLaw s;
        s.offspring = model::OffspringLaw::fixed(2);
        s.displacement = model::DisplacementLaw::gaussian({mu}, 1.0);
        drift.states.push_back(s);
    }
    auto cd = dev::covariance_C(drift, env::iid_env({0.5, 0.5}));
    CHECK(cd.centered);
    CHECK(cd.C[0][0] == doctest::Approx(1.0).epsilon(1e-12));

    // non-vanishing centering is detected
    model::ReproductionLaw bad = drift;
    auto cbad = dev::covariance_C(bad, env::iid_env({0.9, 0.1}));
    CHECK_FALSE(cbad.centered);
}

TEST_CASE("gamma and gamma-star") {
    auto cb = dev::covariance_C(model::binary_model(), env::deterministic_env());
    CHECK(dev::gamma(cb, {1.0}) == doctest::Approx(0.5));
    CHECK(dev::gamma_star(cb, {0.0}) == doctest::Approx(0.0));

    dev::CovarianceC iso;
    iso.C = {{1.5, 0.0}, {0.0, 1.5}};
    iso.pinv = {{1.0 / 1.5, 0.0}, {0.0, 1.0 / 1.5}};
    iso.rank = 2;
    CHECK(dev::gamma_star(iso, {0.3, 0.0}) == doctest::Approx(0.03).epsilon(1e-12));

    dev::CovarianceC degenerate;
    degenerate.C = {{1.0, 0.0}, {0.0, 0.0}};
    degenerate.pinv = {{1.0, 0.0}, {0.0, 0.0}};
    degenerate.rank = 1;
    CHECK(dev::gamma_star(degenerate, {0.0, 1.0}) == std::numeric_limits<double>::infinity());
    CHECK(dev::gamma_star(degenerate, {0.5, 0.0}) == doctest::Approx(0.125));
}

TEST_CASE("gamma-star is the conjugate of gamma (random spot checks)") {
    for (int i = 0; i < 100; ++i) {
        RngStream rng(88, 0, std::uint64_t(i), 0);
        double c = 0.2 + 2.0 * rng.next_double();
        double x = rng.next_double() * 4 - 2;
        dev::CovarianceC cov;
        cov.C = {{c}};
        cov.pinv = {{1.0 / c}};
        cov.rank = 1;
        // sup_t { tx - c t^2 / 2 } = x^2 / (2c), maximized on a fine grid
        double best = -1e300;
        for (double t = -50.0; t <= 50.0; t += 1e-3)
            best = std::max(best, t * x - dev::gamma(cov, {t}));
        CHECK(dev::gamma_star(cov, {x}) == doctest::Approx(best).epsilon(1e-4));
    }
}

TEST_CASE("lambda_n functional") {
    auto an = dev::ANSequence::make(1.0, 0.7);
    auto bin = model::binary_model();
    auto dpath = env::sample_path(env::deterministic_env(), 2000, 1);

    // t = 0
    CHECK(dev::lambda_n_functional(bin, dpath, an, 2000, {0.0}) == doctest::Approx(0.0));

    // deterministic env, gaussian sigma^2 = 1: exactly Gamma(t) = t^2/2 at every n
    auto g = model::gaussian_model(2, {0.0}, 1.0);
    for (std::int64_t n : {100, 1000, 2000})
        CHECK(dev::lambda_n_functional(g, dpath, an, n, {1.0}) == doctest::Approx(0.5).epsilon(1e-12));

    // gaussian two-state: value = (t^2/2) * average realized variance
    auto g2 = model::gaussian_two_state(2, 1.0, 2.0);
    auto spec = env::markov_env({{0.8, 0.2}, {0.2, 0.8}});
    auto mpath = env::sample_path(spec, 2000, 3);
    double avg = 0.0;
    for (int i = 0; i < 2000; ++i) avg += (mpath.state(i) == 0 ? 1.0 : 2.0);
    avg /= 2000.0;
    CHECK(dev::lambda_n_functional(g2, mpath, an, 2000, {1.0}) ==
          doctest::Approx(0.5 * avg).epsilon(1e-10));
}

TEST_CASE("mdp estimate: exact binary tails") {
    auto an = dev::ANSequence::make(1.0, 0.7);
    dev::IntervalSet A{{{0.5, std::numeric_limits<double>::infinity()}}};
    auto rep = dev::mdp_estimate(model::binary_model(), env::deterministic_env(), an, A, 100000, 0,
                                 1);
    CHECK(rep.target == doctest::Approx(-0.125).epsilon(1e-12));
    CHECK(rep.rows[0].estimates.size() == 1);
    // frozen exact value of the finite-n tail functional
    CHECK(rep.rows[0].median == doctest::Approx(-0.15063240031042385).epsilon(1e-9));

    // interval containing 0: rate tends to 0
    dev::IntervalSet zero{{{-0.5, 0.5}}};
    auto rz = dev::mdp_estimate(model::binary_model(), env::deterministic_env(), an, zero, 100000,
                                0, 1);
    CHECK(rz.target == doctest::Approx(0.0));
    CHECK(std::fabs(rz.rows[0].median) < 1e-4);

    // symmetric two-sided set matches the one-sided rate up to the vanishing log 2
    dev::IntervalSet sym{{{-std::numeric_limits<double>::infinity(), -0.5},
                          {0.5, std::numeric_limits<double>::infinity()}}};
    auto rs = dev::mdp_estimate(model::binary_model(), env::deterministic_env(), an, sym, 100000,
                                0, 1);
    // two equal tails differ from one tail by (n/a_n^2) log 2 ~ 0.007 here
    CHECK(rs.rows[0].median == doctest::Approx(rep.rows[0].median).epsilon(0.05));
    CHECK(rs.target == doctest::Approx(-0.125).epsilon(1e-12));
}

TEST_CASE("mdp estimate rejects uncentered models") {
    model::ReproductionLaw drift;
    drift.dim = 1;
    model::StateLaw s;
    s.offspring = model::OffspringLaw::fixed(2);
    s.displacement = model::DisplacementLaw::gaussian({0.3}, 1.0);
    drift.states.push_back(s);
    auto an = dev::ANSequence::make(1.0, 0.7);
    dev::IntervalSet A{{{0.5, 1.0}}};
    CHECK_THROWS_AS(dev::mdp_estimate(drift, env::deterministic_env(), an, A, 1000, 0, 1),
                    std::runtime_error);
}
