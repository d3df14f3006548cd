#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brw/dev.hpp"
#include "brw/experiments.hpp"
#include "brw/ratefn.hpp"
#include "brw/sim.hpp"

using namespace brw;
using model::Cplx;
using model::CVec;
namespace fs = std::filesystem;

namespace {

void report(int criterion, const char* label, bool ok) {
    std::printf("criterion %2d (%s): %s\n", criterion, label, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", criterion, " failed: ", std::string(label));
}

double binary_lstar(double a) {
    return a * std::atanh(a) + 0.5 * std::log(1.0 - a * a) - std::log(2.0);
}

}  // namespace

TEST_CASE("criterion-1") {  // Legendre conjugate vs closed forms
    bool ok = true;
    ratefn::RateFunction b(model::binary_model(), env::deterministic_env());
    for (int i = 0; i < 50; ++i) {
        double a = -0.95 + 1.9 * i / 49.0;
        ok = ok && std::fabs(ratefn::legendre(b, {a}).value - binary_lstar(a)) < 1e-8;
    }
    ratefn::RateFunction g(model::gaussian_two_state(2, 1.0, 2.0), env::iid_env({0.5, 0.5}));
    for (int i = 0; i < 50; ++i) {
        double a = -3.0 + 6.0 * i / 49.0;
        ok = ok && std::fabs(ratefn::legendre(g, {a}).value - (a * a / 3.0 - std::log(2.0))) < 1e-8;
    }
    report(1, "legendre closed forms", ok);
}

TEST_CASE("criterion-2") {  // exact LDP oracle convergence
    bool ok = true;
    dev::IntervalSet A{{{0.4, 0.6}}};
    for (int n : {256, 512, 1024, 2048, 4096, 8192}) {
        double v = dev::ldp_oracle_binary(n, A);
        ok = ok && std::fabs(v - 0.610864) <= 1.5 * std::log(double(n)) / n;
        if (n == 8192) ok = ok && std::fabs(v - 0.610864) <= 0.01;
    }
    report(2, "binary LDP oracle band", ok);
}

TEST_CASE("criterion-3") {  // LDP band in a random environment
    auto m = model::gaussian_two_state(2, 1.0, 2.0);
    auto espec = env::markov_env({{0.8, 0.2}, {0.2, 0.8}});
    dev::ClosedBox A{{-0.25}, {0.25}};
    auto rep = dev::ldp_estimate(m, espec, A, {20}, 50, 20240803, 10'000'000, 0.1, 4);
    // inf over A of alpha^2 / (2 * 1.5) is 0, so the target is log 2
    bool ok = std::fabs(rep.target - std::log(2.0)) < 1e-8;
    ok = ok && rep.rows[0].cap_hits == 0 && rep.rows[0].censored == 0;
    ok = ok && std::fabs(rep.rows[0].median - rep.target) <= 0.1;
    report(3, "random-environment LDP median", ok);
}

TEST_CASE("criterion-4") {  // martingale normalization + Cauchy increments
    auto m = model::gaussian_model(2, {0.0}, 1.0);
    auto espec = env::deterministic_env();

    auto mean_panel = sim::martingale_panel(m, espec, {CVec{Cplx(0.5, 0.0)}}, {10}, 10000,
                                            10'000'000, 11, 4);
    const auto& row = mean_panel.rows[0];
    double se = std::sqrt(row.var_re / 10000.0);
    bool ok = std::fabs(row.mean_re - 1.0) <= 4.0 * se;

    std::vector<CVec> grid;
    for (int a = -1; a <= 1; ++a)
        for (int bb = -1; bb <= 1; ++bb)
            grid.push_back(CVec{Cplx(0.5 + 0.05 * a, 0.05 * bb)});
    auto panel = sim::martingale_panel(m, espec, grid, {5, 15}, 200, 10'000'000, 12, 4);
    int dec = 0;
    for (const auto& inc : panel.sup_increment) dec += inc[0] > inc[1];
    ok = ok && panel.excluded_cap_hits == 0 && dec >= 160;
    report(4, "W_n mean 1 and shrinking increments", ok);
}

TEST_CASE("criterion-5") {  // envelope inequality, zero violations
    auto r1 = sim::envelope_check(model::binary_model(), 0, CVec{Cplx(0.0, 0.0)}, 0.1, 100, 101);
    auto r2 = sim::envelope_check(model::gaussian_model(2, {0.0}, 1.0), 0, CVec{Cplx(0.5, 0.0)},
                                  0.2, 100, 102);
    model::ReproductionLaw cat;
    cat.dim = 1;
    model::StateLaw s;
    s.offspring = model::OffspringLaw::categorical({0.4, 0.3, 0.3});
    s.displacement = model::DisplacementLaw::categorical({{1.0}, {-1.0}}, {0.5, 0.5});
    cat.states.push_back(s);
    auto r3 = sim::envelope_check(cat, 0, CVec{Cplx(0.2, 0.1)}, 0.15, 100, 103);
    bool ok = r1.violations == 0 && r2.violations == 0 && r3.violations == 0 && !r1.vacuous &&
              !r2.vacuous && !r3.vacuous;
    report(5, "envelope bound holds replicate-wise", ok);
}

TEST_CASE("criterion-6") {  // spine law of large numbers
    const int n = 10000, spines = 100;
    double mean_b = 0.0;
    for (int k = 0; k < spines; ++k) {
        auto path = env::sample_path(env::deterministic_env(), n, 1);
        mean_b += sim::spine_sample(model::binary_model(), path, {1.0}, n,
                                    500 + std::uint64_t(k))
                      .terminal_mean()[0];
    }
    mean_b /= spines;
    double sd_b = 1.0 / std::cosh(1.0);
    bool ok = std::fabs(mean_b - std::tanh(1.0)) <= 4.0 * sd_b / std::sqrt(double(spines) * n);

    auto g2 = model::gaussian_two_state(2, 1.0, 2.0);
    auto espec = env::iid_env({0.5, 0.5});
    double mean_g = 0.0;
    for (int k = 0; k < spines; ++k) {
        auto path = env::sample_path(espec, n, 900 + std::uint64_t(k));
        mean_g += sim::spine_sample(g2, path, {0.5}, n, 1900 + std::uint64_t(k))
                      .terminal_mean()[0];
    }
    mean_g /= spines;
    // step sd is at most sqrt(2); allow the same 4-sigma band
    bool okg = std::fabs(mean_g - 0.75) <= 4.0 * std::sqrt(2.0) / std::sqrt(double(spines) * n);
    report(6, "spine velocity matches grad Lambda", ok && okg);
}

TEST_CASE("criterion-7") {  // Mandelbrot cylinder exponent, exact instance
    const int n = 8, m = 6;
    auto path = env::sample_path(env::deterministic_env(), n + m, 1);
    auto run = sim::run_generations(model::binary_model(), path, n + m, 10'000'000, 1, true);
    bool ok = true;
    for (std::int64_t u = 0; u < std::int64_t(run.frame(n).count()); ++u) {
        auto rw = sim::mandelbrot_ray_weight(run, n, u, {0.0}, m);
        ok = ok && std::fabs(rw.log_weight_rate + std::log(2.0)) < 1e-12;
    }
    report(7, "cylinder mass decays at -log 2 exactly", ok);
}

TEST_CASE("criterion-8") {  // moderate deviations via exact binomial tails
    auto an = dev::ANSequence::make(1.0, 0.7);
    dev::IntervalSet A{{{0.5, std::numeric_limits<double>::infinity()}}};
    auto rep = dev::mdp_estimate(model::binary_model(), env::deterministic_env(), an, A, 100000, 0,
                                 1, 10'000'000, 0.01);
    bool ok = rep.pass;  // |exact - (-0.125)| <= 0.01
    std::printf("    [exact value %.6f, target %.6f, tolerance %.2f]\n", rep.rows[0].median,
                rep.target, rep.tolerance);
    report(8, "MDP tail rate at n=1e5", ok);
}

TEST_CASE("criterion-9") {  // lambda_n functional limit
    auto an = dev::ANSequence::make(1.0, 0.7);
    auto g = model::gaussian_model(2, {0.0}, 1.0);
    auto dpath = env::sample_path(env::deterministic_env(), 100000, 1);
    bool ok = true;
    for (std::int64_t n : {1000, 10000, 100000})
        ok = ok && std::fabs(dev::lambda_n_functional(g, dpath, an, n, {1.0}) - 0.5) < 1e-12;

    auto g2 = model::gaussian_two_state(2, 1.0, 2.0);
    auto espec = env::markov_env({{0.8, 0.2}, {0.2, 0.8}});
    auto cov = dev::covariance_C(g2, espec);
    double gamma1 = dev::gamma(cov, {1.0});  // 0.75
    auto mpath = env::sample_path(espec, 100000, 5);
    double v = dev::lambda_n_functional(g2, mpath, an, 100000, {1.0});
    ok = ok && std::fabs(v - gamma1) <= 0.05 * gamma1;

    // variance decay slope over two decades, 20 environment paths per n
    Vec xs, ys;
    for (std::int64_t n : {1000, 10000, 100000}) {
        double s1 = 0.0, s2 = 0.0;
        for (int p = 0; p < 20; ++p) {
            auto path = env::sample_path(espec, int(n), 3000 + std::uint64_t(p));
            double w = dev::lambda_n_functional(g2, path, an, n, {1.0});
            s1 += w;
            s2 += w * w;
        }
        double var = s2 / 20.0 - (s1 / 20.0) * (s1 / 20.0);
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(var));
    }
    double xbar = (xs[0] + xs[1] + xs[2]) / 3.0, ybar = (ys[0] + ys[1] + ys[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        num += (xs[i] - xbar) * (ys[i] - ybar);
        den += (xs[i] - xbar) * (xs[i] - xbar);
    }
    double slope = num / den;
    std::printf("    [variance-decay slope %.3f]\n", slope);
    ok = ok && slope >= -1.3 && slope <= -0.7;
    report(9, "lambda_n functional converges to Gamma", ok);
}

TEST_CASE("criterion-10") {  // truncation limits
    model::ReproductionLaw law;
    law.dim = 1;
    model::StateLaw s;
    s.offspring = model::OffspringLaw::fixed(2);
    s.displacement =
        model::DisplacementLaw::categorical({{1.0}, {-1.0}, {5.0}, {-5.0}}, {0.25, 0.25, 0.25, 0.25});
    law.states.push_back(s);
    ratefn::RateFunction rf(law, env::deterministic_env());
    std::vector<Vec> tg;
    for (double t = -2.0; t <= 2.0 + 1e-9; t += 0.25) tg.push_back({t});
    auto table = ratefn::truncated_rate(rf, {1.0, 2.0, 4.0, 8.0, 16.0}, tg, {{0.0}, {0.3}});

    bool ok = true;
    for (std::size_t ti = 0; ti < tg.size(); ++ti) {
        for (std::size_t ai = 0; ai + 1 < 5; ++ai)
            ok = ok && table.lambda_a[ai][ti] <= table.lambda_a[ai + 1][ti] + 1e-12;
        // vacuous truncation once a exceeds the largest step norm 5
        ok = ok && std::fabs(table.lambda_a[3][ti] - table.lambda_full[ti]) <= 1e-10;
        ok = ok && std::fabs(table.lambda_a[4][ti] - table.lambda_full[ti]) <= 1e-10;
    }
    for (std::size_t xi = 0; xi < 2; ++xi) {
        for (std::size_t ai = 0; ai + 1 < 5; ++ai)
            ok = ok && table.lambda_a_star[ai][xi] >= table.lambda_a_star[ai + 1][xi] - 1e-8;
        ok = ok && std::fabs(table.lambda_a_star[4][xi] - table.lambda_star_full[xi]) <= 1e-6;
    }
    report(10, "Lambda_a and Lambda_a* converge monotonically", ok);
}

TEST_CASE("criterion-11") {  // one-sided pressure inequality
    auto m = model::gaussian_model(2, {0.0}, 1.0);
    ratefn::RateFunction rf(m, env::deterministic_env());
    const int n = 18, reps = 50;
    std::vector<Vec> grid;
    for (double t = -1.0; t <= 1.0 + 1e-9; t += 0.25) grid.push_back({t});
    int checks = 0, violations = 0;
    for (int r = 0; r < reps; ++r) {
        auto path = env::sample_path(env::deterministic_env(), n, 1);
        auto run = sim::run_generations(m, path, n, 10'000'000, 4000 + std::uint64_t(r), false, 4);
        auto table = ratefn::empirical_pressure(run, grid, rf);
        for (const auto& p : table) {
            ++checks;
            violations += p.empirical > p.lambda + 0.15;
        }
    }
    bool ok = violations <= checks / 20;  // at most 5%
    std::printf("    [%d violations out of %d checks]\n", violations, checks);
    report(11, "empirical pressure below Lambda plus band", ok);
}

TEST_CASE("criterion-12") {  // determinism of every experiment kind across threads
    const char* bin = std::getenv("BRW_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "BRW_CLI must point at the CLI binary");

    const std::pair<const char*, const char*> configs[] = {
        {"simulate", R"({"kind":"simulate","model":{"family":"binary"},"params":{"n":12},"seed":3})"},
        {"martingale",
         R"({"kind":"martingale","model":{"family":"gaussian","b":2,"sigma2":1.0},"params":{"t":0.5,"ns":[3,5],"replicates":20},"seed":3})"},
        {"ldp",
         R"({"kind":"ldp","model":{"family":"gaussian_two_state","b":2,"sigma2":[1.0,2.0]},"environment":{"kind":"markov","transition":[[0.8,0.2],[0.2,0.8]]},"params":{"A":[-0.25,0.25],"ns":[10],"replicates":5},"seed":3})"},
        {"mdp",
         R"({"kind":"mdp","model":{"family":"binary"},"params":{"a_n":{"c":1.0,"kappa":0.7},"A":[[0.5,"inf"]],"n":2000},"seed":3})"},
        {"spectrum",
         R"({"kind":"spectrum","model":{"family":"binary"},"params":{"grid_alpha":[-0.5,0.0,0.5]},"seed":3})"},
        {"rate",
         R"({"kind":"rate","model":{"family":"binary"},"params":{"grid_t":[-1.0,0.0,1.0]},"seed":3})"},
        {"spine",
         R"({"kind":"spine","model":{"family":"binary"},"params":{"t":1.0,"n":500,"spines":10},"seed":3})"},
        {"regions",
         R"({"kind":"regions","model":{"family":"binary"},"params":{"grid_t":[0.0,1.0],"delta":0.1},"seed":3})"},
        {"truncate",
         R"({"kind":"truncate","model":{"family":"categorical","b":2,"steps":[[1.0],[-1.0],[5.0],[-5.0]],"probs":[0.25,0.25,0.25,0.25]},"params":{"a_list":[2.0,8.0],"grid_t":[0.0,1.0],"grid_alpha":[0.0]},"seed":3})"},
    };

    fs::path base = fs::temp_directory_path() / "brw_acceptance_12";
    fs::remove_all(base);
    fs::create_directories(base);
    bool ok = true;
    for (const auto& [kind, cfg] : configs) {
        fs::path cfg_path = base / (std::string(kind) + ".json");
        {
            std::ofstream f(cfg_path);
            f << cfg;
        }
        for (int threads : {1, 4}) {
            std::string out = (base / (std::string(kind) + "_t" + std::to_string(threads))).string();
            std::string cmd = std::string("\"") + bin + "\" " + kind + " --config " +
                              cfg_path.string() + " --out " + out + " --threads " +
                              std::to_string(threads) + " >/dev/null 2>&1";
            int rc = std::system(cmd.c_str());
            if (WEXITSTATUS(rc) != 0) {
                std::printf("    [%s exited %d]\n", kind, WEXITSTATUS(rc));
                ok = false;
            }
        }
        // byte-compare every artifact except the manifest (timestamps)
        fs::path d1 = base / (std::string(kind) + "_t1"), d4 = base / (std::string(kind) + "_t4");
        if (!fs::exists(d1) || !fs::exists(d4)) {
            ok = false;
            continue;
        }
        for (const auto& e : fs::directory_iterator(d1)) {
            std::string name = e.path().filename().string();
            if (name == "manifest.txt") continue;
            std::ifstream a(e.path(), std::ios::binary), b(d4 / name, std::ios::binary);
            std::stringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            if (sa.str() != sb.str() || sa.str().empty()) {
                std::printf("    [%s/%s differs across thread counts]\n", kind, name.c_str());
                ok = false;
            }
        }
    }
    report(12, "bit-identical artifacts across thread counts", ok);
}
