#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "brw/config.hpp"
#include "brw/experiments.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"branching random walk experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir, manifest_path;
    std::uint64_t seed = 0, cap = 0;
    int threads = 0;
    bool seed_set = false, out_set = false, threads_set = false, cap_set = false;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) c->required();
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--out", out_dir, "output directory override")->each([&](const std::string&) {
            out_set = true;
        });
        sub->add_option("--threads", threads, "worker thread count")->each([&](const std::string&) {
            threads_set = true;
        });
        sub->add_option("--cap", cap, "particle cap override")->each([&](const std::string&) {
            cap_set = true;
        });
    };

    const char* kinds[] = {"simulate", "martingale", "ldp",     "mdp",     "spectrum",
                           "rate",     "spine",      "regions", "truncate"};
    for (const char* k : kinds) add_common(app.add_subcommand(k, k), true);
    add_common(app.add_subcommand("validate", "hypothesis diagnostics"), true);
    auto* rp = app.add_subcommand("replay", "re-run a recorded experiment and compare");
    rp->add_option("--manifest", manifest_path, "manifest of a completed run")->required();
    rp->add_option("--threads", threads, "worker thread count")->each([&](const std::string&) {
        threads_set = true;
    });

    CLI11_PARSE(app, argc, argv);
    std::string sub = app.get_subcommands().front()->get_name();

    try {
        brw::cli::Overrides ov;
        if (seed_set) ov.seed = seed;
        if (const char* es = std::getenv("BRW_SEED"); es && !seed_set) ov.seed = std::stoull(es);
        if (out_set) ov.out = out_dir;
        if (threads_set) ov.threads = threads;
        if (cap_set) ov.cap = cap;

        if (sub == "replay") return brw::cli::replay(manifest_path, ov);

        brw::cli::ExperimentConfig cfg = brw::cli::parse_config(read_file(config_path), ov);
        if (sub == "validate") {
            for (const std::string& d : brw::cli::validate_config(cfg))
                std::printf("%s\n", d.c_str());
            return brw::cli::kExitOk;
        }
        if (cfg.kind != sub) {
            std::fprintf(stderr, "config kind '%s' does not match subcommand '%s'\n",
                         cfg.kind.c_str(), sub.c_str());
            return brw::cli::kExitValidation;
        }
        return brw::cli::execute_and_write(cfg, config_path);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return brw::cli::kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
