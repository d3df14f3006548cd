#include "brw/ratefn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "brw/rng.hpp"
#include "brw/special.hpp"

namespace brw::ratefn {

RateFunction::RateFunction(ReproductionLaw model, env::EnvironmentSpec espec)
    : model_(std::move(model)), espec_(std::move(espec)) {
    pi_stat_ = env::stationary_distribution(espec_);
    model_.validate(pi_stat_);
}

double RateFunction::lambda(const Vec& t) const {
    double s = 0.0;
    for (int e = 0; e < model_.num_states(); ++e)
        s += pi_stat_[e] * model_.log_mgf_real(e, t);
    return s;
}

Vec RateFunction::grad_lambda(const Vec& t) const {
    Vec g(dim(), 0.0);
    for (int e = 0; e < model_.num_states(); ++e) {
        Vec ge = model_.grad_log_mgf(e, t);
        for (int j = 0; j < dim(); ++j) g[j] += pi_stat_[e] * ge[j];
    }
    return g;
}

Mat RateFunction::hess_lambda(const Vec& t) const {
    const double h = 1e-5;
    Mat hess(dim(), Vec(dim(), 0.0));
    for (int j = 0; j < dim(); ++j) {
        Vec tp = t, tm = t;
        tp[j] += h;
        tm[j] -= h;
        Vec gp = grad_lambda(tp), gm = grad_lambda(tm);
        for (int i = 0; i < dim(); ++i) hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
    }
    // symmetrize
    for (int i = 0; i < dim(); ++i)
        for (int j = i + 1; j < dim(); ++j) {
            double v = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = hess[j][i] = v;
        }
    return hess;
}

LegendreResult legendre(const RateFunction& rf, const Vec& alpha) {
    const int d = rf.dim();
    LegendreResult res;
    res.alpha = alpha;

    // maximize g(t) = <t,alpha> - Lambda(t), concave; Newton with FD Hessian
    // and backtracking, bisection fallback when the Hessian degenerates
    Vec t(d, 0.0);
    auto objective = [&](const Vec& tt) { return dot(tt, alpha) - rf.lambda(tt); };
    double best_val = objective(t);
    Vec best_t = t;
    double residual = 0.0;

    for (int it = 0; it < 200; ++it) {
        Vec grad(d);
        Vec gl = rf.grad_lambda(t);
        for (int j = 0; j < d; ++j) grad[j] = alpha[j] - gl[j];
        residual = norm2(grad);
        double val = objective(t);
        if (val > best_val) {
            best_val = val;
            best_t = t;
        }
        if (residual <= 1e-9) {
            res.converged = true;
            break;
        }

        Vec step;
        bool newton_ok = true;
        try {
            step = solve_linear(rf.hess_lambda(t), grad);  // H dt = grad (H is PSD)
        } catch (const std::exception&) {
            newton_ok = false;
        }
        if (!newton_ok || !std::isfinite(norm2(step))) {
            step = grad;  // gradient ascent fallback
        }
        // backtracking line search on the concave objective
        double lr = 1.0;
        Vec cand(d);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (int j = 0; j < d; ++j) cand[j] = t[j] + lr * step[j];
            double cv = objective(cand);
            if (std::isfinite(cv) && cv > val) {
                t = cand;
                moved = true;
                break;
            }
            lr *= 0.5;
        }
        if (!moved) break;
        if (norm2(t) > 1e6) break;  // supremum not attained; alpha outside gradient range
    }

    Vec gl = rf.grad_lambda(best_t);
    Vec grad(d);
    for (int j = 0; j < d; ++j) grad[j] = alpha[j] - gl[j];
    res.residual = norm2(grad);
    res.converged = res.residual <= 1e-9;
    res.t_star = best_t;
    res.value = best_val;
    if (!std::isfinite(res.value)) throw std::runtime_error("legendre: non-finite objective");
    return res;
}

Alpha0Result alpha0_inf(const ReproductionLaw& model, int state, const CVec& z0, double eps,
                        int resolution) {
    if (eps <= 0.0) throw std::invalid_argument("alpha0_inf: eps must be positive");
    const int d = model.dim;

    auto grid_min = [&](const CVec& center, double radius_x, double radius_y,
                        const CVec& disc_center, double disc_radius) {
        // minimize |m| over the product grid, restricted per coordinate to
        // the disc |zeta_j - z0_j| <= eps
        Alpha0Result best;
        best.value = std::numeric_limits<double>::infinity();
        std::vector<CVec> axis(d);
        for (int j = 0; j < d; ++j) {
            for (int a = 0; a < resolution; ++a)
                for (int b = 0; b < resolution; ++b) {
                    double dx = -radius_x + 2.0 * radius_x * a / (resolution - 1);
                    double dy = -radius_y + 2.0 * radius_y * b / (resolution - 1);
                    Cplx cand = center[j] + Cplx(dx, dy);
                    if (std::abs(cand - disc_center[j]) > disc_radius) continue;
                    axis[j].push_back(cand);
                }
            if (axis[j].empty()) axis[j].push_back(disc_center[j]);
        }
        CVec point(d);
        std::function<void(int)> rec = [&](int j) {
            if (j == d) {
                double v = std::abs(model.mgf(state, point));
                if (v < best.value) {
                    best.value = v;
                    best.argmin = point;
                }
                return;
            }
            for (const Cplx& c : axis[j]) {
                point[j] = c;
                rec(j + 1);
            }
        };
        rec(0);
        best.grid_spacing = 2.0 * radius_x / (resolution - 1);
        return best;
    };

    Alpha0Result coarse = grid_min(z0, eps, eps, z0, eps);
    // one refinement pass on a shrunk box around the argmin
    double shrink = 2.0 * eps / (resolution - 1);
    Alpha0Result fine = grid_min(coarse.argmin, shrink, shrink, z0, eps);
    return fine.value < coarse.value ? fine : coarse;
}

namespace {

// E_xi Z_1(t)^p by full enumeration for categorical laws: sum over offspring
// counts and all step assignments. Throws if the outcome space is too big.
double z1_moment_exact(const ReproductionLaw& model, int state, const Vec& t, double p) {
    const model::StateLaw& s = model.states[state];
    if (s.displacement.kind != model::DisplacementLaw::Kind::categorical)
        throw std::logic_error("exact Z1 moment needs categorical displacements");
    const std::size_t n_steps = s.displacement.steps.size();
    std::vector<double> step_exp(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) step_exp[k] = std::exp(dot(t, s.displacement.steps[k]));

    double total = 0.0;
    for (int nk = 0; nk < s.offspring.max_count(); ++nk) {
        double pn = s.offspring.probs[nk];
        if (pn == 0.0) continue;
        int n = nk + 1;
        if (s.deterministic_children) {
            double z1 = 0.0;
            for (int c = 0; c < n; ++c) z1 += step_exp[c];
            total += pn * std::pow(z1, p);
            continue;
        }
        double combos = std::pow(double(n_steps), n);
        if (combos > 2e6) throw std::runtime_error("outcome space too large for enumeration");
        std::vector<int> assign(n, 0);
        while (true) {
            double prob = 1.0, z1 = 0.0;
            for (int c = 0; c < n; ++c) {
                prob *= s.displacement.probs[assign[c]];
                z1 += step_exp[assign[c]];
            }
            total += pn * prob * std::pow(z1, p);
            int c = 0;
            while (c < n && ++assign[c] == int(n_steps)) assign[c++] = 0;
            if (c == n) break;
        }
    }
    return total;
}

double z1_moment_mc(const ReproductionLaw& model, int state, const Vec& t, double p,
                    std::uint64_t seed, int samples, double* std_error) {
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        RngStream rng(seed, 0x7a31ULL, std::uint64_t(state), std::uint64_t(i));
        model::PointSample ps = model.sample_point_process(state, rng);
        double z1 = 0.0;
        for (const Vec& L : ps.displacements) z1 += std::exp(dot(t, L));
        double v = std::pow(z1, p);
        s1 += v;
        s2 += v * v;
    }
    double mean = s1 / samples;
    if (std_error)
        *std_error = std::sqrt(std::max(0.0, (s2 / samples - mean * mean) / double(samples)));
    return mean;
}

}  // namespace

RegionReport region(const RateFunction& rf, const Vec& t, double delta,
                    const std::vector<double>& p_probes, std::uint64_t mc_seed, int mc_samples) {
    if (delta <= 0.0) throw std::invalid_argument("region: delta must be positive");
    const ReproductionLaw& m = rf.model();
    const Vec& pi = rf.stationary();

    RegionReport rep;
    rep.t = t;
    rep.alpha = rf.grad_lambda(t);
    rep.i_value = dot(t, rep.alpha) - rf.lambda(t);
    rep.in_I = rep.i_value < 0.0;
    rep.delta = delta;

    for (double p : p_probes) {
        RegionReport::Omega1Probe probe;
        probe.p = p;
        probe.value = 0.0;
        probe.std_error = 0.0;
        probe.exact = true;
        for (int e = 0; e < m.num_states(); ++e) {
            double moment, se = 0.0;
            bool exact = true;
            try {
                moment = z1_moment_exact(m, e, t, p);
            } catch (const std::exception&) {
                exact = false;
                moment = z1_moment_mc(m, e, t, p, mc_seed, mc_samples, &se);
            }
            probe.exact = probe.exact && exact;
            probe.value += pi[e] * std::max(0.0, std::log(moment));
            // delta-method SE of log, aggregated conservatively
            if (!exact && moment > 0.0) probe.std_error += pi[e] * se / moment;
        }
        rep.omega1.push_back(probe);
    }

    CVec z0(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) z0[j] = Cplx(t[j], 0.0);
    rep.omega2_value = 0.0;
    for (int e = 0; e < m.num_states(); ++e) {
        double a0 = alpha0_inf(m, e, z0, delta).value;
        rep.omega2_value += pi[e] * std::max(0.0, -std::log(a0));
    }

    LegendreResult lr = legendre(rf, rep.alpha);
    rep.in_J_image = lr.converged && lr.value < 0.0;
    return rep;
}

std::vector<SpectrumPoint> spectrum_curve(const RateFunction& rf, const std::vector<Vec>& alphas) {
    std::vector<SpectrumPoint> out;
    out.reserve(alphas.size());
    for (const Vec& a : alphas) {
        LegendreResult lr = legendre(rf, a);
        SpectrumPoint p;
        p.alpha = a;
        p.dimension = -lr.value;
        p.in_J_tilde = lr.value < 0.0;
        p.converged = lr.converged;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PressurePoint> empirical_pressure(const sim::TreeRun& run, const std::vector<Vec>& ts,
                                              const RateFunction& rf) {
    const int n = int(run.frames.size()) - 1;
    if (n < 1) throw std::invalid_argument("empirical_pressure: run has no frames");
    std::vector<PressurePoint> out;
    for (const Vec& t : ts) {
        PressurePoint p;
        p.t = t;
        p.n = n;
        p.empirical = sim::laplace_log_real(run, n, t) / double(n);
        p.lambda = rf.lambda(t);
        out.push_back(std::move(p));
    }
    return out;
}

TruncatedRateTable truncated_rate(const RateFunction& rf, const std::vector<double>& a_list,
                                  const std::vector<Vec>& t_grid,
                                  const std::vector<Vec>& alpha_grid) {
    TruncatedRateTable table;
    table.a_values = a_list;
    table.t_grid = t_grid;
    table.alpha_grid = alpha_grid;
    for (const Vec& t : t_grid) table.lambda_full.push_back(rf.lambda(t));
    for (const Vec& a : alpha_grid) table.lambda_star_full.push_back(legendre(rf, a).value);

    const Vec& pi = rf.stationary();
    for (double a : a_list) {
        ReproductionLaw trunc = rf.model().truncate(a);
        std::vector<double> row_t;
        for (const Vec& t : t_grid) {
            double v = 0.0;
            for (int e = 0; e < trunc.num_states(); ++e)
                v += pi[e] * trunc.log_mgf_real(e, t);
            row_t.push_back(v);
        }
        table.lambda_a.push_back(std::move(row_t));

        // truncated model may be subcritical, so bypass the RateFunction
        // constructor's supercriticality gate and run the optimizer directly
        std::vector<double> row_a;
        for (const Vec& alpha : alpha_grid) {
            // maximize <t,alpha> - Lambda_a(t) with the generic machinery
            // via a thin lambda evaluator
            const int d = int(alpha.size());
            Vec t(d, 0.0);
            auto lam = [&](const Vec& tt) {
                double v = 0.0;
                for (int e = 0; e < trunc.num_states(); ++e)
                    v += pi[e] * trunc.log_mgf_real(e, tt);
                return v;
            };
            auto grad = [&](const Vec& tt) {
                Vec g(d, 0.0);
                for (int e = 0; e < trunc.num_states(); ++e) {
                    Vec ge = trunc.grad_log_mgf(e, tt);
                    for (int j = 0; j < d; ++j) g[j] += pi[e] * ge[j];
                }
                return g;
            };
            double best = dot(t, alpha) - lam(t);
            for (int it = 0; it < 200; ++it) {
                Vec gl = grad(t);
                Vec gstep(d);
                for (int j = 0; j < d; ++j) gstep[j] = alpha[j] - gl[j];
                if (norm2(gstep) <= 1e-10) break;
                double lr = 1.0;
                bool moved = false;
                for (int bt = 0; bt < 60; ++bt) {
                    Vec cand(d);
                    for (int j = 0; j < d; ++j) cand[j] = t[j] + lr * gstep[j];
                    double cv = dot(cand, alpha) - lam(cand);
                    if (std::isfinite(cv) && cv > best) {
                        best = cv;
                        t = cand;
                        moved = true;
                        break;
                    }
                    lr *= 0.5;
                }
                if (!moved || norm2(t) > 1e6) break;
            }
            row_a.push_back(best);
        }
        table.lambda_a_star.push_back(std::move(row_a));
    }
    return table;
}

}  // namespace brw::ratefn
