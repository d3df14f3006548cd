#include "brw/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "brw/parallel.hpp"
#include "brw/special.hpp"

namespace brw::sim {

const GenerationFrame& TreeRun::frame(int n) const {
    if (n < 0 || n >= int(frames.size()))
        throw std::out_of_range(cap_hit ? "frame not available: run stopped at particle cap"
                                        : "frame not available");
    return frames[std::size_t(n)];
}

namespace {

model::PointSample sample_at(const ReproductionLaw& m, int state, std::uint64_t seed, int gen,
                             std::int64_t particle) {
    const model::StateLaw& s = m.states[state];
    RngStream off_rng(seed, std::uint64_t(gen), std::uint64_t(particle), 0);
    int n = s.offspring.sample(off_rng);
    if (s.offspring_cap < n) n = int(s.offspring_cap);
    model::PointSample out;
    out.displacements.reserve(n);
    for (int c = 0; c < n; ++c) {
        Vec x;
        if (s.deterministic_children) {
            x = s.displacement.steps[c];
        } else {
            RngStream rng(seed, std::uint64_t(gen), std::uint64_t(particle),
                          std::uint64_t(c) + 1);
            x = s.displacement.sample(rng);
        }
        if (s.displacement.truncated() && norm2(x) > s.displacement.radius) continue;
        out.displacements.push_back(std::move(x));
    }
    out.n_children = int(out.displacements.size());
    return out;
}

}  // namespace

TreeRun run_generations(const ReproductionLaw& model, const env::EnvironmentPath& path,
                        int horizon, std::uint64_t cap, std::uint64_t seed, bool genealogy,
                        int threads) {
    if (horizon > path.length())
        throw std::invalid_argument("run_generations: horizon exceeds environment path length");
    if (cap < 1) throw std::invalid_argument("run_generations: cap must be >= 1");

    TreeRun run;
    run.model = model;
    run.path = path;
    run.seed = seed;
    run.cap = cap;
    run.genealogy = genealogy;

    const int d = model.dim;
    GenerationFrame root;
    root.n = 0;
    root.dim = d;
    root.positions.assign(d, 0.0);
    if (genealogy) root.parent.assign(1, -1);
    run.frames.push_back(std::move(root));

    for (int gen = 0; gen < horizon; ++gen) {
        const GenerationFrame& cur = run.frames.back();
        const std::int64_t count = std::int64_t(cur.count());
        const int state = path.state(gen);

        // pass 1: child counts (keyed streams make pass 2 reproduce the draws)
        std::vector<std::int64_t> nchild(count);
        parallel_for(count, threads, [&](std::int64_t i) {
            nchild[i] = sample_at(model, state, seed, gen, i).n_children;
        });
        std::vector<std::int64_t> offset(count + 1, 0);
        std::partial_sum(nchild.begin(), nchild.end(), offset.begin() + 1);
        const std::int64_t total = offset[count];
        if (total == 0) throw std::runtime_error("population died out (truncated model?)");
        if (std::uint64_t(total) > cap) {
            run.cap_hit = true;
            return run;
        }

        GenerationFrame next;
        next.n = gen + 1;
        next.dim = d;
        next.positions.assign(std::size_t(total) * d, 0.0);
        if (genealogy) next.parent.assign(std::size_t(total), -1);

        GenerationFrame* nf = &next;
        const GenerationFrame* cf = &cur;
        parallel_for(count, threads, [&, nf, cf](std::int64_t i) {
            model::PointSample ps = sample_at(model, state, seed, gen, i);
            const double* base = cf->at(std::size_t(i));
            for (int c = 0; c < ps.n_children; ++c) {
                std::int64_t slot = offset[i] + c;
                double* dst = nf->positions.data() + std::size_t(slot) * d;
                for (int j = 0; j < d; ++j) dst[j] = base[j] + ps.displacements[c][j];
                if (!nf->parent.empty()) nf->parent[std::size_t(slot)] = i;
            }
        });
        run.frames.push_back(std::move(next));
    }
    return run;
}

bool Box::contains(const double* x, int dim) const {
    for (int j = 0; j < dim; ++j) {
        if (!lo.empty() && x[j] < lo[j]) return false;
        if (!hi.empty() && x[j] >= hi[j]) return false;
    }
    return true;
}

std::int64_t counting_measure(const TreeRun& run, int n, const Box& box) {
    const GenerationFrame& f = run.frame(n);
    std::int64_t c = 0;
    for (std::size_t i = 0; i < f.count(); ++i)
        if (box.contains(f.at(i), f.dim)) ++c;
    return c;
}

double laplace_log_real(const TreeRun& run, int n, const Vec& t) {
    const GenerationFrame& f = run.frame(n);
    const int d = f.dim;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.count(); ++i) {
        double e = 0.0;
        const double* x = f.at(i);
        for (int j = 0; j < d; ++j) e += t[j] * x[j];
        m = std::max(m, e);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.count(); ++i) {
        double e = 0.0;
        const double* x = f.at(i);
        for (int j = 0; j < d; ++j) e += t[j] * x[j];
        s += std::exp(e - m);
    }
    return m + std::log(s);
}

double log_pn_real(const ReproductionLaw& model, const env::EnvironmentPath& path, int n,
                   const Vec& t) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += model.log_mgf_real(path.state(i), t);
    return s;
}

double w_real(const TreeRun& run, int n, const Vec& t) {
    return std::exp(laplace_log_real(run, n, t) - log_pn_real(run.model, run.path, n, t));
}

LaplaceResult laplace(const TreeRun& run, int n, const CVec& z) {
    const GenerationFrame& f = run.frame(n);
    const int d = f.dim;
    Vec x_part(d), y_part(d);
    for (int j = 0; j < d; ++j) {
        x_part[j] = z[j].real();
        y_part[j] = z[j].imag();
    }
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.count(); ++i) {
        double e = 0.0;
        const double* x = f.at(i);
        for (int j = 0; j < d; ++j) e += x_part[j] * x[j];
        m = std::max(m, e);
    }
    Cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < f.count(); ++i) {
        double re = 0.0, im = 0.0;
        const double* x = f.at(i);
        for (int j = 0; j < d; ++j) {
            re += x_part[j] * x[j];
            im += y_part[j] * x[j];
        }
        acc += std::exp(re - m) * Cplx(std::cos(im), std::sin(im));
    }

    LaplaceResult out;
    out.z_tilde.log_scale = m;
    out.z_tilde.scaled = acc;
    Cplx log_pn(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        Cplx mi = run.model.mgf(run.path.state(i), z);
        // treat numerically-zero m_i as vanished: log would amplify garbage
        if (std::abs(mi) < 1e-12) throw std::runtime_error("Laplace normalizer vanished");
        log_pn += std::log(mi);
    }
    out.log_pn = log_pn;
    out.w = acc * std::exp(Cplx(m, 0.0) - log_pn);
    return out;
}

// ----------------------------------------------------------- martingale panel

MartingalePanel martingale_panel(const ReproductionLaw& model, const env::EnvironmentSpec& espec,
                                 const std::vector<CVec>& grid, const std::vector<int>& ns,
                                 int replicates, std::uint64_t cap, std::uint64_t seed,
                                 int threads) {
    if (replicates < 1) throw std::invalid_argument("martingale_panel: replicates must be >= 1");
    int max_n = 0;
    for (int n : ns) max_n = std::max(max_n, n);
    const int horizon = max_n + 1;  // need W_{n+1} for the Cauchy increments

    struct RepResult {
        bool cap_hit = false;
        std::vector<double> w_re;             // grid x ns
        std::vector<double> sup_inc;          // per ns
    };
    std::vector<RepResult> results(replicates);

    parallel_for(replicates, threads, [&](std::int64_t rep) {
        std::uint64_t rep_seed = splitmix64(seed ^ (0x6d61727469ULL + std::uint64_t(rep)));
        auto path = env::sample_path(espec, horizon, splitmix64(rep_seed ^ 0x70617468ULL));
        TreeRun run = run_generations(model, path, horizon, cap, rep_seed);
        RepResult& r = results[rep];
        if (run.cap_hit && int(run.frames.size()) <= max_n) {
            r.cap_hit = true;
            return;
        }
        r.w_re.resize(grid.size() * ns.size(), 0.0);
        r.sup_inc.assign(ns.size(), 0.0);
        for (std::size_t ni = 0; ni < ns.size(); ++ni) {
            int n = ns[ni];
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                Cplx wn = laplace(run, n, grid[gi]).w;
                r.w_re[gi * ns.size() + ni] = wn.real();
                if (n + 1 < int(run.frames.size())) {
                    Cplx wn1 = laplace(run, n + 1, grid[gi]).w;
                    r.sup_inc[ni] = std::max(r.sup_inc[ni], std::abs(wn1 - wn));
                }
            }
        }
    });

    MartingalePanel panel;
    for (const auto& r : results)
        if (r.cap_hit) ++panel.excluded_cap_hits;
    const double m_eff = double(replicates - panel.excluded_cap_hits);
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        for (std::size_t ni = 0; ni < ns.size(); ++ni) {
            MartingalePanelRow row;
            row.z = grid[gi];
            row.n = ns[ni];
            double s = 0.0, s2 = 0.0;
            for (const auto& r : results) {
                if (r.cap_hit) continue;
                double v = r.w_re[gi * ns.size() + ni];
                s += v;
                s2 += v * v;
            }
            row.mean_re = s / m_eff;
            row.var_re = m_eff > 1 ? (s2 - s * s / m_eff) / (m_eff - 1.0) : 0.0;
            panel.rows.push_back(row);
        }
    for (const auto& r : results)
        if (!r.cap_hit) panel.sup_increment.push_back(r.sup_inc);
    return panel;
}

// ------------------------------------------------------------ envelope check

namespace {

// grid points of the polydisc D(z0, eps): per coordinate a res x res grid on
// the bounding square, masked to the open disc (plus the center row/column)
void polydisc_grid(const CVec& z0, double eps, int res,
                   const std::function<void(const CVec&)>& fn) {
    const int d = int(z0.size());
    std::vector<CVec> axis(d);
    for (int j = 0; j < d; ++j) {
        for (int a = 0; a < res; ++a)
            for (int b = 0; b < res; ++b) {
                double dx = -eps + 2.0 * eps * a / (res - 1);
                double dy = -eps + 2.0 * eps * b / (res - 1);
                if (dx * dx + dy * dy > eps * eps) continue;
                axis[j].push_back(z0[j] + Cplx(dx, dy));
            }
    }
    CVec point(d);
    std::function<void(int)> rec = [&](int j) {
        if (j == d) {
            fn(point);
            return;
        }
        for (const Cplx& c : axis[j]) {
            point[j] = c;
            rec(j + 1);
        }
    };
    rec(0);
}

}  // namespace

EnvelopeReport envelope_check(const ReproductionLaw& model, int state, const CVec& z0, double eps,
                              int replicates, std::uint64_t seed, int grid_res) {
    if (eps <= 0.0) throw std::invalid_argument("envelope_check: eps must be positive");
    const int d = model.dim;

    EnvelopeReport rep;
    rep.replicates = replicates;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    // alpha0 over the same grid as the sup, so the checked inequality is a
    // theorem for the grid (the grid inf of |m| bounds |m| at every point
    // where the sup is evaluated)
    double alpha0 = std::numeric_limits<double>::infinity();
    polydisc_grid(z0, eps, grid_res,
                  [&](const CVec& z) { alpha0 = std::min(alpha0, std::abs(model.mgf(state, z))); });
    rep.alpha0 = alpha0;
    if (alpha0 <= 0.0) {
        rep.vacuous = true;
        return rep;
    }

    // 2^d corner set of real vectors x0^j +/- eps
    Vec x0(d);
    for (int j = 0; j < d; ++j) x0[j] = z0[j].real();
    std::vector<Vec> corners;
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vec s(d);
        for (int j = 0; j < d; ++j) s[j] = x0[j] + ((mask >> j) & 1 ? eps : -eps);
        corners.push_back(std::move(s));
    }

    for (int r = 0; r < replicates; ++r) {
        RngStream rng(seed, 0x656e76656cULL, std::uint64_t(r));
        model::PointSample ps = model.sample_point_process(state, rng);

        auto z1 = [&](const CVec& z) {
            Cplx s(0.0, 0.0);
            for (const Vec& L : ps.displacements) {
                Cplx e(0.0, 0.0);
                for (int j = 0; j < d; ++j) e += z[j] * L[j];
                s += std::exp(e);
            }
            return s;
        };

        double grid_sup = 0.0;
        polydisc_grid(z0, eps, grid_res, [&](const CVec& z) {
            grid_sup = std::max(grid_sup, std::abs(z1(z) / model.mgf(state, z)));
        });

        double corner_sum = 0.0;
        for (const Vec& s : corners) {
            CVec zs(d);
            for (int j = 0; j < d; ++j) zs[j] = Cplx(s[j], 0.0);
            corner_sum += z1(zs).real();
        }
        double bound = corner_sum / alpha0;
        rep.worst_margin = std::min(rep.worst_margin, bound - grid_sup);
        if (grid_sup > bound * (1.0 + 1e-12)) ++rep.violations;
    }
    return rep;
}

// -------------------------------------------------------------------- spine

Vec SpineTrajectory::terminal_mean() const {
    const Vec& s = partial_sums.back();
    Vec m(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) m[j] = s[j] / double(partial_sums.size());
    return m;
}

SpineTrajectory spine_sample(const ReproductionLaw& model, const env::EnvironmentPath& path,
                             const Vec& t, int horizon, std::uint64_t seed) {
    if (horizon > path.length())
        throw std::invalid_argument("spine_sample: horizon exceeds environment path length");
    SpineTrajectory spine;
    spine.t = t;
    Vec pos(model.dim, 0.0);
    for (int k = 0; k < horizon; ++k) {
        RngStream rng(seed, 0x7370696eULL, std::uint64_t(k));
        Vec step = model.tilted_step(path.state(k), t, rng);
        for (int j = 0; j < model.dim; ++j) pos[j] += step[j];
        spine.steps.push_back(std::move(step));
        spine.partial_sums.push_back(pos);
    }
    return spine;
}

// -------------------------------------------------------- Mandelbrot weights

std::vector<std::int64_t> ancestors_at(const TreeRun& run, int n, int m) {
    if (!run.genealogy) throw std::logic_error("ancestors_at requires a genealogy-mode run");
    const GenerationFrame& deep = run.frame(n + m);
    std::vector<std::int64_t> anc(deep.count());
    for (std::size_t i = 0; i < deep.count(); ++i) {
        std::int64_t idx = std::int64_t(i);
        for (int k = n + m; k > n; --k) idx = run.frame(k).parent[std::size_t(idx)];
        anc[i] = idx;
    }
    return anc;
}

RayWeight mandelbrot_ray_weight(const TreeRun& run, int n, std::int64_t ray_index, const Vec& t,
                                int lookahead) {
    const GenerationFrame& fn = run.frame(n);
    const GenerationFrame& fm = run.frame(n + lookahead);  // throws if missing
    if (ray_index < 0 || ray_index >= std::int64_t(fn.count()))
        throw std::out_of_range("ray index outside frame");
    const int d = fn.dim;

    const double* su = fn.at(std::size_t(ray_index));
    double log_xu = 0.0;
    for (int j = 0; j < d; ++j) log_xu += t[j] * su[j];
    log_xu -= log_pn_real(run.model, run.path, n, t);

    // finite-horizon W_m(u,t) from the subtree of u
    auto anc = ancestors_at(run, n, lookahead);
    double log_norm = 0.0;
    for (int i = n; i < n + lookahead; ++i)
        log_norm += run.model.log_mgf_real(run.path.state(i), t);
    std::vector<double> exps;
    for (std::size_t i = 0; i < fm.count(); ++i) {
        if (anc[i] != ray_index) continue;
        double e = 0.0;
        const double* sv = fm.at(i);
        for (int j = 0; j < d; ++j) e += t[j] * (sv[j] - su[j]);
        exps.push_back(e);
    }
    double log_w_sub = log_sum_exp(exps) - log_norm;

    RayWeight out;
    out.w_subtree = std::exp(log_w_sub);
    out.weight = std::exp(log_xu + log_w_sub);
    out.log_weight_rate = (log_xu + log_w_sub) / double(n);
    return out;
}

}  // namespace brw::sim
