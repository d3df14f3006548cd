#include "brw/dev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "brw/rng.hpp"
#include "brw/sim.hpp"
#include "brw/special.hpp"

namespace brw::dev {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> xs) {
    if (xs.empty()) return -kInf;
    std::sort(xs.begin(), xs.end());
    std::size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}
}  // namespace

ANSequence ANSequence::make(double c, double kappa) {
    if (c <= 0.0) throw std::invalid_argument("a_n sequence: c must be positive");
    if (!(kappa > 0.5 && kappa < 1.0))
        throw std::invalid_argument("a_n sequence: exponent must lie strictly in (1/2, 1)");
    return ANSequence{c, kappa};
}

double ANSequence::at(std::int64_t n) const { return c * std::pow(double(n), kappa); }

bool IntervalSet::contains(double x) const {
    for (const Interval& iv : intervals)
        if (x >= iv.lo && x <= iv.hi) return true;
    return false;
}

bool ClosedBox::contains(const double* x, int d) const {
    for (int j = 0; j < d; ++j)
        if (x[j] < lo[j] || x[j] > hi[j]) return false;
    return true;
}

Vec ClosedBox::project(const Vec& x) const {
    Vec y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = std::clamp(x[j], lo[j], hi[j]);
    return y;
}

std::pair<double, double> ldp_theory(const ratefn::RateFunction& rf, const ClosedBox& A) {
    const int d = rf.dim();
    if (A.dim() != d) throw std::invalid_argument("ldp_theory: box dimension mismatch");
    for (int j = 0; j < d; ++j)
        if (!(A.lo[j] < A.hi[j]) || !std::isfinite(A.lo[j]) || !std::isfinite(A.hi[j]))
            throw std::invalid_argument("ldp_theory: box must be bounded with nonempty interior");

    Vec lln = rf.grad_lambda(Vec(d, 0.0));
    auto eval = [&](const Vec& a) -> std::pair<double, Vec> {
        ratefn::LegendreResult lr = ratefn::legendre(rf, a);
        if (!lr.converged) return {kInf, lr.t_star};
        return {lr.value, lr.t_star};  // grad Lambda*(a) = t_star(a)
    };

    // seeds: projection of the LLN point plus box corners pulled toward it
    std::vector<Vec> seeds{A.project(lln)};
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vec corner(d);
        for (int j = 0; j < d; ++j) corner[j] = (mask >> j & 1) ? A.hi[j] : A.lo[j];
        seeds.push_back(std::move(corner));
    }

    double best = kInf;
    for (Vec alpha : seeds) {
        // contract toward the LLN projection until Lambda* is finite
        auto [f, g] = eval(alpha);
        for (int c = 0; c < 60 && !std::isfinite(f); ++c) {
            for (int j = 0; j < d; ++j) alpha[j] = seeds[0][j] + 0.5 * (alpha[j] - seeds[0][j]);
            std::tie(f, g) = eval(alpha);
        }
        if (!std::isfinite(f)) continue;

        // projected gradient descent on the convex conjugate
        for (int it = 0; it < 100; ++it) {
            double lr = 1.0;
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                Vec cand(d);
                for (int j = 0; j < d; ++j) cand[j] = alpha[j] - lr * g[j];
                cand = A.project(cand);
                auto [cf, cg] = eval(cand);
                if (cf < f - 1e-15) {
                    alpha = cand;
                    f = cf;
                    g = cg;
                    moved = true;
                    break;
                }
                lr *= 0.5;
            }
            if (!moved) break;
        }
        best = std::min(best, f);
    }
    double rate = std::isfinite(best) ? -best : -kInf;
    return {rate, rate};
}

double ldp_oracle_binary(std::int64_t n, const IntervalSet& A) {
    std::vector<double> terms;
    for (std::int64_t k = 0; k <= n; ++k) {
        double alpha = double(2 * k - n) / double(n);
        if (A.contains(alpha)) terms.push_back(log_binomial(n, k));
    }
    if (terms.empty()) return -kInf;
    return log_sum_exp(terms) / double(n);
}

DeviationReport ldp_estimate(const ReproductionLaw& model, const env::EnvironmentSpec& espec,
                             const ClosedBox& A, const std::vector<int>& ns, int replicates,
                             std::uint64_t seed, std::uint64_t cap, double tolerance,
                             int threads) {
    ratefn::RateFunction rf(model, espec);
    DeviationReport rep;
    rep.experiment = "ldp_estimate";
    rep.seed = seed;
    rep.target = ldp_theory(rf, A).second;
    rep.tolerance = tolerance;

    const int d = model.dim;
    for (int n : ns) {
        DeviationReport::Row row;
        row.n = n;
        for (int r = 0; r < replicates; ++r) {
            std::uint64_t rep_seed =
                splitmix64(seed ^ splitmix64(0x6c6470ULL + 1000003ULL * std::uint64_t(r) +
                                             std::uint64_t(n)));
            auto path = env::sample_path(espec, n, splitmix64(rep_seed ^ 0x70617468ULL));
            sim::TreeRun run =
                sim::run_generations(model, path, n, cap, rep_seed, false, threads);
            if (run.cap_hit) {
                ++row.cap_hits;
                continue;
            }
            const sim::GenerationFrame& f = run.frame(n);
            std::int64_t count = 0;
            Vec scaled(d);
            for (std::size_t i = 0; i < f.count(); ++i) {
                const double* x = f.at(i);
                for (int j = 0; j < d; ++j) scaled[j] = x[j] / double(n);
                if (A.contains(scaled.data(), d)) ++count;
            }
            if (count == 0)
                ++row.censored;
            else
                row.estimates.push_back(std::log(double(count)) / double(n));
        }
        row.median = median_of(row.estimates);
        rep.rows.push_back(std::move(row));
    }
    if (!rep.rows.empty())
        rep.pass = std::fabs(rep.rows.back().median - rep.target) <= rep.tolerance;
    return rep;
}

CovarianceC covariance_C(const ReproductionLaw& model, const env::EnvironmentSpec& espec) {
    Vec pi = env::stationary_distribution(espec);
    const int d = model.dim;
    CovarianceC cov;
    cov.C = Mat(d, Vec(d, 0.0));
    cov.centering = Vec(d, 0.0);
    for (int e = 0; e < model.num_states(); ++e) {
        model::FirstMoments fm = model.first_moments(e);
        for (int i = 0; i < d; ++i) {
            cov.centering[i] += pi[e] * fm.ell[i];
            for (int j = 0; j < d; ++j) cov.C[i][j] += pi[e] * fm.sigma[i][j];
        }
    }
    cov.centering_norm = norm2(cov.centering);
    cov.centered = cov.centering_norm <= 1e-12;

    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::fabs(cov.C[i][j] - cov.C[j][i]) > 1e-12)
                throw std::runtime_error("covariance matrix not symmetric");

    Mat vecs;
    Vec eig = symmetric_eigen(cov.C, &vecs);
    double emax = 0.0;
    for (double w : eig) emax = std::max(emax, std::fabs(w));
    double tol = std::max(1e-14, 1e-12 * emax);
    for (double w : eig)
        if (w < -1e-12) throw std::runtime_error("covariance matrix not positive semidefinite");

    cov.pinv = Mat(d, Vec(d, 0.0));
    for (int k = 0; k < d; ++k) {
        if (eig[k] <= tol) continue;
        ++cov.rank;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) cov.pinv[i][j] += vecs[i][k] * vecs[j][k] / eig[k];
    }
    // built-in families have every exponential moment at the state level
    cov.delta = 1.0;
    return cov;
}

double gamma(const CovarianceC& cov, const Vec& t) { return 0.5 * dot(t, matvec(cov.C, t)); }

double gamma_star(const CovarianceC& cov, const Vec& x) {
    Vec y = matvec(cov.pinv, x);
    Vec back = matvec(cov.C, y);
    double resid = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) resid += (back[j] - x[j]) * (back[j] - x[j]);
    if (std::sqrt(resid) > 1e-9 * (1.0 + norm2(x))) return kInf;
    return 0.5 * dot(x, y);
}

double lambda_n_functional(const ReproductionLaw& model, const env::EnvironmentPath& path,
                           const ANSequence& an, std::int64_t n, const Vec& t) {
    if (path.length() < int(n)) throw std::invalid_argument("lambda_n_functional: path too short");
    const double a = an.at(n);
    Vec u(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) u[j] = a * t[j] / double(n);
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        int e = path.state(int(i));
        model::FirstMoments fm = model.first_moments(e);
        sum += model.log_mgf_real(e, u) - model.log_mgf_real(e, Vec(t.size(), 0.0)) -
               dot(u, fm.ell);
    }
    return sum * double(n) / (a * a);
}

DeviationReport mdp_estimate(const ReproductionLaw& model, const env::EnvironmentSpec& espec,
                             const ANSequence& an, const IntervalSet& A, std::int64_t n,
                             int replicates, std::uint64_t seed, std::uint64_t cap,
                             double tolerance) {
    if (model.dim != 1)
        throw std::invalid_argument("mdp_estimate: only scalar models are supported");
    CovarianceC cov = covariance_C(model, espec);
    if (!cov.centered)
        throw std::runtime_error("MDP hypothesis violated (nonzero centering); Gamma* invalid");

    DeviationReport rep;
    rep.experiment = "mdp_estimate";
    rep.seed = seed;
    rep.tolerance = tolerance;
    double inf_gs = kInf;
    for (const Interval& iv : A.intervals) {
        double x = (iv.lo <= 0.0 && iv.hi >= 0.0) ? 0.0
                   : (std::fabs(iv.lo) < std::fabs(iv.hi) ? iv.lo : iv.hi);
        if (!std::isfinite(x)) x = std::isfinite(iv.lo) ? iv.lo : iv.hi;
        inf_gs = std::min(inf_gs, gamma_star(cov, Vec{x}));
    }
    rep.target = -inf_gs;

    const double a = an.at(n);
    DeviationReport::Row row;
    row.n = n;

    // binary +/-1 model with deterministic offspring: exact binomial tails
    bool exact = model.num_states() == 1 && model.states[0].deterministic_children &&
                 model.states[0].offspring.max_count() == 2;
    if (exact && replicates <= 0) {
        std::vector<double> terms;
        for (std::int64_t k = 0; k <= n; ++k) {
            double pos = double(2 * k - n);
            if (A.contains(pos / a)) terms.push_back(log_binomial(n, k));
        }
        if (terms.empty()) {
            ++row.censored;
        } else {
            double log_ratio = log_sum_exp(terms) - double(n) * std::log(2.0);
            row.estimates.push_back(double(n) / (a * a) * log_ratio);
        }
    } else {
        for (int r = 0; r < replicates; ++r) {
            std::uint64_t rep_seed =
                splitmix64(seed ^ splitmix64(0x6d6470ULL + 1000003ULL * std::uint64_t(r)));
            auto path = env::sample_path(espec, int(n), splitmix64(rep_seed ^ 0x70617468ULL));
            sim::TreeRun run = sim::run_generations(model, path, int(n), cap, rep_seed);
            if (run.cap_hit) {
                ++row.cap_hits;
                continue;
            }
            const sim::GenerationFrame& f = run.frame(int(n));
            std::int64_t count = 0;
            for (std::size_t i = 0; i < f.count(); ++i)
                if (A.contains(f.at(i)[0] / a)) ++count;
            if (count == 0)
                ++row.censored;
            else
                row.estimates.push_back(double(n) / (a * a) *
                                        std::log(double(count) / double(f.count())));
        }
    }
    row.median = median_of(row.estimates);
    rep.rows.push_back(std::move(row));
    rep.pass = std::fabs(rep.rows.back().median - rep.target) <= rep.tolerance;
    return rep;
}

}  // namespace brw::dev
