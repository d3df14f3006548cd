#include "brw/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "brw/dev.hpp"
#include "brw/ratefn.hpp"
#include "brw/rng.hpp"
#include "brw/sim.hpp"

namespace fs = std::filesystem;

namespace brw::cli {

namespace {

std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Csv {
    std::ostringstream ss;
    bool first_field = true;

    void field(const std::string& s) {
        if (!first_field) ss << ',';
        ss << s;
        first_field = false;
    }
    void field(double x) { field(fmt17(x)); }
    void field(std::int64_t x) { field(std::to_string(x)); }
    void field(std::uint64_t x) { field(std::to_string(x)); }
    void field(int x) { field(std::to_string(x)); }
    void endrow() {
        ss << '\n';
        first_field = true;
    }
    std::string str() const { return ss.str(); }
};

std::vector<Vec> as_vec_list(const json& j, int dim, const std::string& where) {
    if (!j.is_array()) throw std::invalid_argument(where + ": expected an array");
    std::vector<Vec> out;
    for (const auto& e : j) {
        Vec v;
        if (e.is_number())
            v = Vec{e.get<double>()};
        else
            for (const auto& x : e) v.push_back(x.get<double>());
        if (int(v.size()) != dim)
            throw std::invalid_argument(where + ": entry dimension mismatch");
        out.push_back(std::move(v));
    }
    return out;
}

double endpoint(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument(where + ": expected a number, \"inf\" or \"-inf\"");
}

dev::IntervalSet as_intervals(const json& j, const std::string& where) {
    dev::IntervalSet set;
    if (!j.is_array()) throw std::invalid_argument(where + ": expected an array of [lo, hi]");
    auto push = [&](const json& pair) {
        if (!pair.is_array() || pair.size() != 2)
            throw std::invalid_argument(where + ": each interval is [lo, hi]");
        set.intervals.push_back({endpoint(pair[0], where), endpoint(pair[1], where)});
    };
    if (j.size() == 2 && !j[0].is_array())
        push(j);
    else
        for (const auto& e : j) push(e);
    return set;
}

dev::ClosedBox as_box(const json& j, int dim, const std::string& where) {
    dev::ClosedBox box;
    if (j.is_array() && j.size() == 2 && j[0].is_number() && dim == 1) {
        box.lo = {j[0].get<double>()};
        box.hi = {j[1].get<double>()};
        return box;
    }
    if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
        throw std::invalid_argument(where + ": expected [lo, hi] or {\"lo\": [...], \"hi\": [...]}");
    for (const auto& x : j["lo"]) box.lo.push_back(x.get<double>());
    for (const auto& x : j["hi"]) box.hi.push_back(x.get<double>());
    if (int(box.lo.size()) != dim || int(box.hi.size()) != dim)
        throw std::invalid_argument(where + ": box dimension mismatch");
    return box;
}

bool is_binary_model(const model::ReproductionLaw& m) {
    return m.dim == 1 && m.num_states() == 1 && m.states[0].deterministic_children &&
           m.states[0].offspring.max_count() == 2;
}

void emit_summary(RunResult& res, json summary) {
    res.artifacts.emplace_back("summary.json", summary.dump(2) + "\n");
}

// ------------------------------------------------------- experiment bodies

RunResult exp_simulate(const ExperimentConfig& cfg) {
    RunResult res;
    int n = cfg.params.value("n", 10);
    auto path = env::sample_path(cfg.environment, n, splitmix64(cfg.seed ^ 0x70617468ULL));
    sim::TreeRun run =
        sim::run_generations(cfg.model, path, n, cfg.cap, cfg.seed, false, cfg.threads);
    Csv csv;
    csv.field("seed");
    csv.field("n");
    csv.field("count");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("mean_" + std::to_string(j));
    csv.endrow();
    for (const auto& f : run.frames) {
        csv.field(cfg.seed);
        csv.field(f.n);
        csv.field(std::int64_t(f.count()));
        for (int j = 0; j < cfg.model.dim; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < f.count(); ++i) s += f.at(i)[j];
            csv.field(f.count() ? s / double(f.count()) : 0.0);
        }
        csv.endrow();
    }
    res.artifacts.emplace_back("generations.csv", csv.str());
    res.cap_hits = run.cap_hit ? 1 : 0;
    emit_summary(res, json{{"kind", "simulate"},
                           {"seed", cfg.seed},
                           {"n", n},
                           {"final_count", run.frames.back().count()},
                           {"cap_hit", run.cap_hit}});
    if (run.cap_hit) {
        res.exit_code = kExitCapExhausted;
        res.error = "particle cap exhausted before the requested horizon";
    }
    return res;
}

RunResult exp_martingale(const ExperimentConfig& cfg) {
    RunResult res;
    Vec t = cfg.params.contains("t") ? as_vec_list(json::array({cfg.params["t"]}), cfg.model.dim,
                                                   "params.t")[0]
                                     : Vec(cfg.model.dim, 0.5);
    std::vector<int> ns = cfg.params.value("ns", std::vector<int>{5, 10, 15});
    int replicates = cfg.params.value("replicates", 100);
    double h = cfg.params.value("grid_offset", 0.05);

    std::vector<model::CVec> grid;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
            model::CVec z(t.size());
            for (std::size_t j = 0; j < t.size(); ++j) z[j] = model::Cplx(t[j], 0.0);
            z[0] += model::Cplx(a * h, b * h);
            grid.push_back(std::move(z));
        }
    sim::MartingalePanel panel = sim::martingale_panel(cfg.model, cfg.environment, grid, ns,
                                                       replicates, cfg.cap, cfg.seed, cfg.threads);
    Csv csv;
    csv.field("seed");
    csv.field("z_re");
    csv.field("z_im");
    csv.field("n");
    csv.field("mean_re");
    csv.field("var_re");
    csv.endrow();
    for (const auto& row : panel.rows) {
        csv.field(cfg.seed);
        csv.field(row.z[0].real());
        csv.field(row.z[0].imag());
        csv.field(row.n);
        csv.field(row.mean_re);
        csv.field(row.var_re);
        csv.endrow();
    }
    res.artifacts.emplace_back("martingale.csv", csv.str());

    Csv inc;
    inc.field("seed");
    inc.field("replicate");
    inc.field("n_index");
    inc.field("sup_increment");
    inc.endrow();
    for (std::size_t r = 0; r < panel.sup_increment.size(); ++r)
        for (std::size_t k = 0; k < panel.sup_increment[r].size(); ++k) {
            inc.field(cfg.seed);
            inc.field(std::int64_t(r));
            inc.field(std::int64_t(k));
            inc.field(panel.sup_increment[r][k]);
            inc.endrow();
        }
    res.artifacts.emplace_back("increments.csv", inc.str());
    res.cap_hits = panel.excluded_cap_hits;
    emit_summary(res, json{{"kind", "martingale"},
                           {"seed", cfg.seed},
                           {"replicates", replicates},
                           {"excluded_cap_hits", panel.excluded_cap_hits}});
    return res;
}

RunResult exp_ldp(const ExperimentConfig& cfg) {
    RunResult res;
    dev::ClosedBox A = as_box(cfg.params.at("A"), cfg.model.dim, "params.A");
    std::vector<int> ns = cfg.params.value("ns", std::vector<int>{1000});
    double tolerance = cfg.params.value("tolerance", 0.1);
    ratefn::RateFunction rf(cfg.model, cfg.environment);
    double target = dev::ldp_theory(rf, A).second;

    Csv csv;
    csv.field("seed");
    csv.field("n");
    csv.field("median");
    csv.field("censored");
    csv.field("cap_hits");
    csv.endrow();

    double estimate = 0.0;
    bool pass = false;
    if (is_binary_model(cfg.model)) {
        dev::IntervalSet iv;
        iv.intervals.push_back({A.lo[0], A.hi[0]});
        for (int n : ns) {
            double v = dev::ldp_oracle_binary(n, iv);
            csv.field(cfg.seed);
            csv.field(n);
            csv.field(v);
            csv.field(0);
            csv.field(0);
            csv.endrow();
            estimate = v;
        }
        pass = std::fabs(estimate - target) <= tolerance;
    } else {
        int replicates = cfg.params.value("replicates", 50);
        dev::DeviationReport rep = dev::ldp_estimate(cfg.model, cfg.environment, A, ns, replicates,
                                                     cfg.seed, cfg.cap, tolerance, cfg.threads);
        for (const auto& row : rep.rows) {
            csv.field(cfg.seed);
            csv.field(row.n);
            csv.field(row.median);
            csv.field(row.censored);
            csv.field(row.cap_hits);
            csv.endrow();
            res.cap_hits += row.cap_hits;
            if (row.cap_hits + row.censored >= replicates) {
                res.exit_code = kExitCapExhausted;
                res.error = "all replicates censored or cap-exhausted at n=" +
                            std::to_string(row.n);
            }
        }
        estimate = rep.rows.back().median;
        pass = rep.pass;
    }
    res.artifacts.emplace_back("ldp.csv", csv.str());
    emit_summary(res, json{{"kind", "ldp"},
                           {"seed", cfg.seed},
                           {"estimate", estimate},
                           {"target", target},
                           {"tolerance", tolerance},
                           {"pass", pass}});
    return res;
}

RunResult exp_mdp(const ExperimentConfig& cfg) {
    RunResult res;
    const json& anj = cfg.params.at("a_n");
    dev::ANSequence an = dev::ANSequence::make(anj.value("c", 1.0), anj.at("kappa").get<double>());
    dev::IntervalSet A = as_intervals(cfg.params.at("A"), "params.A");
    std::int64_t n = cfg.params.value("n", std::int64_t(100000));
    int replicates = cfg.params.value("replicates", 0);
    double tolerance = cfg.params.value("tolerance", 0.01);

    dev::DeviationReport rep = dev::mdp_estimate(cfg.model, cfg.environment, an, A, n, replicates,
                                                 cfg.seed, cfg.cap, tolerance);
    Csv csv;
    csv.field("seed");
    csv.field("n");
    csv.field("median");
    csv.field("censored");
    csv.field("cap_hits");
    csv.endrow();
    for (const auto& row : rep.rows) {
        csv.field(cfg.seed);
        csv.field(row.n);
        csv.field(row.median);
        csv.field(row.censored);
        csv.field(row.cap_hits);
        csv.endrow();
        res.cap_hits += row.cap_hits;
    }
    res.artifacts.emplace_back("mdp.csv", csv.str());
    emit_summary(res, json{{"kind", "mdp"},
                           {"seed", cfg.seed},
                           {"estimate", rep.rows.back().median},
                           {"target", rep.target},
                           {"tolerance", rep.tolerance},
                           {"pass", rep.pass}});
    return res;
}

RunResult exp_spectrum(const ExperimentConfig& cfg) {
    RunResult res;
    ratefn::RateFunction rf(cfg.model, cfg.environment);
    std::vector<Vec> alphas = as_vec_list(cfg.params.at("grid_alpha"), cfg.model.dim,
                                          "params.grid_alpha");
    auto curve = ratefn::spectrum_curve(rf, alphas);
    Csv csv;
    csv.field("seed");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("alpha_" + std::to_string(j));
    csv.field("dimension");
    csv.field("in_J_tilde");
    csv.field("converged");
    csv.endrow();
    for (const auto& p : curve) {
        csv.field(cfg.seed);
        for (double a : p.alpha) csv.field(a);
        csv.field(p.dimension);
        csv.field(int(p.in_J_tilde));
        csv.field(int(p.converged));
        csv.endrow();
    }
    res.artifacts.emplace_back("spectrum.csv", csv.str());
    emit_summary(res, json{{"kind", "spectrum"}, {"seed", cfg.seed}, {"points", curve.size()}});
    return res;
}

RunResult exp_rate(const ExperimentConfig& cfg) {
    RunResult res;
    ratefn::RateFunction rf(cfg.model, cfg.environment);
    std::vector<Vec> ts = as_vec_list(cfg.params.at("grid_t"), cfg.model.dim, "params.grid_t");
    Csv csv;
    csv.field("seed");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("t_" + std::to_string(j));
    csv.field("lambda");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("grad_" + std::to_string(j));
    csv.field("lambda_star_at_grad");
    csv.endrow();
    for (const Vec& t : ts) {
        csv.field(cfg.seed);
        for (double x : t) csv.field(x);
        csv.field(rf.lambda(t));
        Vec g = rf.grad_lambda(t);
        for (double x : g) csv.field(x);
        csv.field(ratefn::legendre(rf, g).value);
        csv.endrow();
    }
    res.artifacts.emplace_back("rate.csv", csv.str());
    emit_summary(res, json{{"kind", "rate"}, {"seed", cfg.seed}, {"points", ts.size()}});
    return res;
}

RunResult exp_spine(const ExperimentConfig& cfg) {
    RunResult res;
    Vec t = as_vec_list(json::array({cfg.params.at("t")}), cfg.model.dim, "params.t")[0];
    int n = cfg.params.value("n", 1000);
    int spines = cfg.params.value("spines", 100);
    Csv csv;
    csv.field("seed");
    csv.field("spine");
    csv.field("n");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("mean_" + std::to_string(j));
    csv.endrow();
    for (int s = 0; s < spines; ++s) {
        std::uint64_t sseed = splitmix64(cfg.seed ^ splitmix64(0x7370ULL + std::uint64_t(s)));
        auto path = env::sample_path(cfg.environment, n, splitmix64(sseed ^ 0x70617468ULL));
        sim::SpineTrajectory traj = sim::spine_sample(cfg.model, path, t, n, sseed);
        Vec m = traj.terminal_mean();
        csv.field(cfg.seed);
        csv.field(s);
        csv.field(n);
        for (double x : m) csv.field(x);
        csv.endrow();
    }
    res.artifacts.emplace_back("spine.csv", csv.str());
    emit_summary(res, json{{"kind", "spine"}, {"seed", cfg.seed}, {"spines", spines}, {"n", n}});
    return res;
}

RunResult exp_regions(const ExperimentConfig& cfg) {
    RunResult res;
    ratefn::RateFunction rf(cfg.model, cfg.environment);
    std::vector<Vec> ts = as_vec_list(cfg.params.at("grid_t"), cfg.model.dim, "params.grid_t");
    double delta = cfg.params.value("delta", 0.1);
    int mc_samples = cfg.params.value("mc_samples", 100000);
    Csv csv;
    csv.field("seed");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("t_" + std::to_string(j));
    csv.field("in_I");
    csv.field("i_value");
    csv.field("omega1_p1.1");
    csv.field("omega1_p1.5");
    csv.field("omega1_p2");
    csv.field("omega2");
    for (int j = 0; j < cfg.model.dim; ++j) csv.field("alpha_" + std::to_string(j));
    csv.field("in_J_image");
    csv.endrow();
    for (const Vec& t : ts) {
        ratefn::RegionReport rep =
            ratefn::region(rf, t, delta, {1.1, 1.5, 2.0}, cfg.seed, mc_samples);
        csv.field(cfg.seed);
        for (double x : t) csv.field(x);
        csv.field(int(rep.in_I));
        csv.field(rep.i_value);
        for (const auto& p : rep.omega1) csv.field(p.value);
        csv.field(rep.omega2_value);
        for (double a : rep.alpha) csv.field(a);
        csv.field(int(rep.in_J_image));
        csv.endrow();
    }
    res.artifacts.emplace_back("regions.csv", csv.str());
    emit_summary(res, json{{"kind", "regions"}, {"seed", cfg.seed}, {"points", ts.size()}});
    return res;
}

RunResult exp_truncate(const ExperimentConfig& cfg) {
    RunResult res;
    ratefn::RateFunction rf(cfg.model, cfg.environment);
    std::vector<double> a_list = cfg.params.at("a_list").get<std::vector<double>>();
    std::vector<Vec> ts = as_vec_list(cfg.params.at("grid_t"), cfg.model.dim, "params.grid_t");
    std::vector<Vec> alphas = as_vec_list(cfg.params.at("grid_alpha"), cfg.model.dim,
                                          "params.grid_alpha");
    ratefn::TruncatedRateTable table = ratefn::truncated_rate(rf, a_list, ts, alphas);

    Csv lam;
    lam.field("seed");
    lam.field("a");
    for (int j = 0; j < cfg.model.dim; ++j) lam.field("t_" + std::to_string(j));
    lam.field("lambda_a");
    lam.field("lambda");
    lam.endrow();
    for (std::size_t ai = 0; ai < a_list.size(); ++ai)
        for (std::size_t ti = 0; ti < ts.size(); ++ti) {
            lam.field(cfg.seed);
            lam.field(a_list[ai]);
            for (double x : ts[ti]) lam.field(x);
            lam.field(table.lambda_a[ai][ti]);
            lam.field(table.lambda_full[ti]);
            lam.endrow();
        }
    res.artifacts.emplace_back("truncate_lambda.csv", lam.str());

    Csv rate;
    rate.field("seed");
    rate.field("a");
    for (int j = 0; j < cfg.model.dim; ++j) rate.field("alpha_" + std::to_string(j));
    rate.field("lambda_a_star");
    rate.field("lambda_star");
    rate.endrow();
    for (std::size_t ai = 0; ai < a_list.size(); ++ai)
        for (std::size_t xi = 0; xi < alphas.size(); ++xi) {
            rate.field(cfg.seed);
            rate.field(a_list[ai]);
            for (double x : alphas[xi]) rate.field(x);
            rate.field(table.lambda_a_star[ai][xi]);
            rate.field(table.lambda_star_full[xi]);
            rate.endrow();
        }
    res.artifacts.emplace_back("truncate_rate.csv", rate.str());
    emit_summary(res, json{{"kind", "truncate"}, {"seed", cfg.seed}, {"a_count", a_list.size()}});
    return res;
}

// --------------------------------------------------------------- plumbing

void atomic_write(const fs::path& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    fs::path tmp = dir / ("." + name + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string());
        f << content;
    }
    fs::rename(tmp, dir / name);
}

std::string timestamp_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind == "simulate") return exp_simulate(cfg);
    if (cfg.kind == "martingale") return exp_martingale(cfg);
    if (cfg.kind == "ldp") return exp_ldp(cfg);
    if (cfg.kind == "mdp") return exp_mdp(cfg);
    if (cfg.kind == "spectrum") return exp_spectrum(cfg);
    if (cfg.kind == "rate") return exp_rate(cfg);
    if (cfg.kind == "spine") return exp_spine(cfg);
    if (cfg.kind == "regions") return exp_regions(cfg);
    if (cfg.kind == "truncate") return exp_truncate(cfg);
    throw std::invalid_argument("unknown experiment kind '" + cfg.kind + "'");
}

int execute_and_write(const ExperimentConfig& cfg, const std::string& config_path) {
    std::string started = timestamp_now();
    RunResult res = run_experiment(cfg);
    fs::path dir(cfg.out);
    for (const auto& [name, content] : res.artifacts) atomic_write(dir, name, content);

    std::ostringstream man;
    man << "kind: " << cfg.kind << "\n";
    man << "config_path: " << config_path << "\n";
    char hex[24];
    std::snprintf(hex, sizeof hex, "0x%016llx",
                  static_cast<unsigned long long>(config_hash(cfg.raw)));
    man << "config_hash: " << hex << "\n";
    man << "seed: " << cfg.seed << "\n";
    man << "threads: " << cfg.threads << "\n";
    man << "cap: " << cfg.cap << "\n";
    man << "version: " << kToolVersion << "\n";
    man << "started: " << started << "\n";
    man << "finished: " << timestamp_now() << "\n";
    man << "cap_hits: " << res.cap_hits << "\n";
    for (const auto& [name, content] : res.artifacts) man << "artifact: " << name << "\n";
    atomic_write(dir, "manifest.txt", man.str());

    if (res.exit_code != kExitOk && !res.error.empty()) std::fprintf(stderr, "%s\n", res.error.c_str());
    return res.exit_code;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> diags;
    Vec pi = env::stationary_distribution(cfg.environment);
    try {
        cfg.model.validate(pi);
        diags.push_back("pass: offspring >= 1, stationary P(N=1) < 1, supercritical");
    } catch (const std::exception& e) {
        diags.push_back(std::string("warn: reproduction hypothesis fails: ") + e.what());
    }
    env::MixingProfile mix = env::mixing_bound(cfg.environment);
    if (mix.summable())
        diags.push_back("pass: environment phi-mixing, phi(n) <= " + fmt17(mix.c) + " * " +
                        fmt17(mix.r) + "^n");
    else
        diags.push_back("warn: no summable phi-mixing bound certified");
    if (cfg.kind == "mdp") {
        try {
            dev::CovarianceC cov = dev::covariance_C(cfg.model, cfg.environment);
            if (cov.centered)
                diags.push_back("pass: centering sum_e pi(e) ell_e = 0, delta = " +
                                fmt17(cov.delta));
            else
                diags.push_back(
                    "warn: centering sum_e pi(e) ell_e != 0; moderate-deviation rate invalid");
        } catch (const std::exception& e) {
            diags.push_back(std::string("warn: covariance check failed: ") + e.what());
        }
        if (cfg.params.contains("a_n")) {
            double kappa = cfg.params["a_n"].value("kappa", 0.7);
            if (kappa > 0.5 && kappa < 1.0)
                diags.push_back("pass: a_n exponent in (1/2, 1)");
            else
                diags.push_back("warn: a_n exponent must lie strictly in (1/2, 1)");
        }
    }
    return diags;
}

int replay(const std::string& manifest_path, const Overrides& ov) {
    std::ifstream mf(manifest_path);
    if (!mf) {
        std::fprintf(stderr, "replay: cannot open manifest %s\n", manifest_path.c_str());
        return kExitValidation;
    }
    std::string line, config_path;
    Overrides applied = ov;
    std::vector<std::string> artifacts;
    while (std::getline(mf, line)) {
        auto pos = line.find(": ");
        if (pos == std::string::npos) continue;
        std::string key = line.substr(0, pos), val = line.substr(pos + 2);
        if (key == "config_path") config_path = val;
        if (key == "seed" && !ov.seed) applied.seed = std::stoull(val);
        if (key == "threads" && !ov.threads) applied.threads = std::stoi(val);
        if (key == "cap" && !ov.cap) applied.cap = std::stoull(val);
        if (key == "artifact") artifacts.push_back(val);
    }
    std::ifstream cf(config_path);
    if (!cf) {
        std::fprintf(stderr, "replay: cannot open config %s\n", config_path.c_str());
        return kExitValidation;
    }
    std::stringstream cbuf;
    cbuf << cf.rdbuf();
    ExperimentConfig cfg = parse_config(cbuf.str(), applied);
    RunResult res = run_experiment(cfg);

    fs::path dir = fs::path(manifest_path).parent_path();
    for (const auto& [name, content] : res.artifacts) {
        std::ifstream orig(dir / name, std::ios::binary);
        std::stringstream obuf;
        obuf << orig.rdbuf();
        std::string original = obuf.str();
        if (original == content) continue;
        // report the first differing record
        std::istringstream a(original), b(content);
        std::string la, lb;
        int ln = 0;
        while (true) {
            bool ga = bool(std::getline(a, la)), gb = bool(std::getline(b, lb));
            ++ln;
            if (!ga && !gb) break;
            if (la != lb || ga != gb) {
                std::fprintf(stderr, "replay mismatch in %s line %d:\n  original: %s\n  replayed: %s\n",
                             name.c_str(), ln, ga ? la.c_str() : "<eof>", gb ? lb.c_str() : "<eof>");
                return kExitReplayMismatch;
            }
        }
        return kExitReplayMismatch;
    }
    return kExitOk;
}

}  // namespace brw::cli
