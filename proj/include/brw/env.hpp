#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brw/linalg.hpp"

namespace brw::env {

enum class Kind { deterministic, iid, markov };

// Law of the environment sequence xi = (xi_n): finite-state, stationary.
struct EnvironmentSpec {
    Kind kind = Kind::deterministic;
    int num_states = 1;
    Vec weights;     // iid case, size num_states
    Mat transition;  // markov case, row-stochastic

    void validate() const;  // throws std::invalid_argument with a diagnostic
};

// A realization of the environment, plus an origin offset so shifted views
// (the environment seen by a generation-k subtree) share the same storage.
struct EnvironmentPath {
    const EnvironmentSpec* spec = nullptr;
    std::vector<int> states;
    int origin = 0;

    int length() const { return int(states.size()) - origin; }
    int state(int i) const { return states[origin + i]; }
    EnvironmentPath shifted(int k) const {
        EnvironmentPath v = *this;
        v.origin = origin + k;
        return v;
    }
};

// Geometric phi-mixing bound phi(n) <= c * r^n, with the summability
// exponent theta it certifies.
struct MixingProfile {
    double c = 0.0;
    double r = 0.0;
    double theta = 2.0;
    double phi(int n) const;
    bool summable() const { return r < 1.0; }
};

Vec stationary_distribution(const EnvironmentSpec& spec);
EnvironmentPath sample_path(const EnvironmentSpec& spec, int n, std::uint64_t seed);
MixingProfile mixing_bound(const EnvironmentSpec& spec);

// convenience constructors
EnvironmentSpec deterministic_env();
EnvironmentSpec iid_env(Vec weights);
EnvironmentSpec markov_env(Mat transition);

}  // namespace brw::env
