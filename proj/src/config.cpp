#include "brw/config.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace brw::cli {

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

Vec as_vec(const json& j, const std::string& where) {
    if (j.is_number()) return Vec{j.get<double>()};
    if (!j.is_array()) throw std::invalid_argument(where + ": expected a number or array");
    Vec v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

Mat as_mat(const json& j, const std::string& where) {
    if (!j.is_array()) throw std::invalid_argument(where + ": expected an array of arrays");
    Mat m;
    for (const auto& row : j) m.push_back(as_vec(row, where));
    return m;
}

const std::set<std::string> kKinds = {"simulate", "martingale", "ldp",     "mdp",     "spectrum",
                                      "rate",     "spine",      "regions", "truncate"};

// per-kind parameter key allowlists
std::set<std::string> param_keys(const std::string& kind) {
    if (kind == "simulate") return {"n"};
    if (kind == "martingale") return {"t", "ns", "replicates", "grid_offset"};
    if (kind == "ldp") return {"A", "ns", "replicates", "tolerance"};
    if (kind == "mdp") return {"a_n", "A", "n", "replicates", "tolerance"};
    if (kind == "spectrum") return {"grid_alpha"};
    if (kind == "rate") return {"grid_t"};
    if (kind == "spine") return {"t", "n", "spines"};
    if (kind == "regions") return {"grid_t", "delta", "mc_samples"};
    if (kind == "truncate") return {"a_list", "grid_t", "grid_alpha"};
    return {};
}

}  // namespace

model::ReproductionLaw build_model(const json& j) {
    reject_unknown(j, {"family", "b", "mean", "sigma2", "steps", "probs"}, "model");
    std::string family = j.at("family").get<std::string>();
    if (family == "binary") return model::binary_model();
    if (family == "gaussian") {
        int b = j.value("b", 2);
        Vec mean = j.contains("mean") ? as_vec(j["mean"], "model.mean") : Vec{0.0};
        double s2 = j.value("sigma2", 1.0);
        return model::gaussian_model(b, mean, s2);
    }
    if (family == "gaussian_two_state") {
        int b = j.value("b", 2);
        Vec s2 = j.contains("sigma2") ? as_vec(j["sigma2"], "model.sigma2") : Vec{1.0, 2.0};
        if (s2.size() != 2)
            throw std::invalid_argument("model.sigma2: two variances required");
        return model::gaussian_two_state(b, s2[0], s2[1]);
    }
    if (family == "categorical") {
        int b = j.value("b", 2);
        if (!j.contains("steps") || !j.contains("probs"))
            throw std::invalid_argument("model: categorical family needs steps and probs");
        Mat steps = as_mat(j["steps"], "model.steps");
        Vec probs = as_vec(j["probs"], "model.probs");
        model::ReproductionLaw law;
        law.dim = int(steps.at(0).size());
        model::StateLaw s;
        s.offspring = model::OffspringLaw::fixed(b);
        s.displacement = model::DisplacementLaw::categorical(steps, probs);
        law.states.push_back(std::move(s));
        return law;
    }
    throw std::invalid_argument("model.family: unknown family '" + family + "'");
}

env::EnvironmentSpec build_environment(const json& j) {
    reject_unknown(j, {"kind", "weights", "transition"}, "environment");
    std::string kind = j.value("kind", "deterministic");
    if (kind == "deterministic") return env::deterministic_env();
    if (kind == "iid") return env::iid_env(as_vec(j.at("weights"), "environment.weights"));
    if (kind == "markov")
        return env::markov_env(as_mat(j.at("transition"), "environment.transition"));
    throw std::invalid_argument("environment.kind: unknown kind '" + kind + "'");
}

ExperimentConfig parse_config(const std::string& text, const Overrides& ov) {
    json raw;
    try {
        raw = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    reject_unknown(raw, {"kind", "model", "environment", "params", "seed", "out", "threads", "cap"},
                   "config");

    ExperimentConfig cfg;
    cfg.raw = raw;
    cfg.kind = raw.at("kind").get<std::string>();
    if (!kKinds.count(cfg.kind))
        throw std::invalid_argument("config.kind: unknown experiment '" + cfg.kind + "'");

    cfg.model = build_model(raw.value("model", json{{"family", "binary"}}));
    cfg.environment = build_environment(raw.value("environment", json{{"kind", "deterministic"}}));
    cfg.environment.validate();

    cfg.params = raw.value("params", json::object());
    reject_unknown(cfg.params, param_keys(cfg.kind), "params (" + cfg.kind + ")");

    cfg.seed = raw.value("seed", std::uint64_t(1));
    cfg.out = raw.value("out", std::string("out"));
    cfg.threads = raw.value("threads", 1);
    cfg.cap = raw.value("cap", std::uint64_t(10'000'000));

    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out) cfg.out = *ov.out;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.cap) cfg.cap = *ov.cap;
    if (cfg.threads < 1) throw std::invalid_argument("threads: must be >= 1");
    return cfg;
}

std::string canonical_dump(const json& raw) {
    // nlohmann objects are key-sorted, so dump() is already canonical
    return raw.dump(2);
}

std::uint64_t config_hash(const json& raw) {
    std::string s = canonical_dump(raw);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace brw::cli
