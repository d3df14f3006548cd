#include "brw/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "brw/rng.hpp"

namespace brw::env {

namespace {

void check_prob_vector(const Vec& p, const char* what) {
    double s = 0.0;
    for (double x : p) {
        if (x < 0.0) throw std::invalid_argument(std::string(what) + ": negative entry");
        s += x;
    }
    if (std::fabs(s - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(what) + ": does not sum to 1");
}

// States reachable from `from` in the directed graph of positive transitions.
std::vector<bool> reachable(const Mat& p, int from) {
    int k = int(p.size());
    std::vector<bool> seen(k, false);
    std::vector<int> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int j = 0; j < k; ++j)
            if (p[s][j] > 0.0 && !seen[j]) {
                seen[j] = true;
                stack.push_back(j);
            }
    }
    return seen;
}

}  // namespace

void EnvironmentSpec::validate() const {
    if (num_states < 1) throw std::invalid_argument("environment: num_states < 1");
    switch (kind) {
        case Kind::deterministic:
            if (num_states != 1)
                throw std::invalid_argument("deterministic environment must have 1 state");
            break;
        case Kind::iid:
            if (int(weights.size()) != num_states)
                throw std::invalid_argument("iid environment: weights size mismatch");
            check_prob_vector(weights, "iid weights");
            break;
        case Kind::markov: {
            if (int(transition.size()) != num_states)
                throw std::invalid_argument("markov environment: transition size mismatch");
            for (const auto& row : transition) {
                if (int(row.size()) != num_states)
                    throw std::invalid_argument("markov environment: transition not square");
                check_prob_vector(row, "transition row");
            }
            // irreducibility: every state reaches every other
            for (int s = 0; s < num_states; ++s) {
                auto seen = reachable(transition, s);
                std::ostringstream unreach;
                bool bad = false;
                for (int j = 0; j < num_states; ++j)
                    if (!seen[j]) {
                        bad = true;
                        unreach << ' ' << j;
                    }
                if (bad)
                    throw std::invalid_argument(
                        "markov environment not irreducible: states unreachable from state " +
                        std::to_string(s) + ":" + unreach.str());
            }
            // aperiodicity: some power up to K^2 strictly positive
            Mat pw = transition;
            bool positive = false;
            for (int it = 0; it < num_states * num_states && !positive; ++it) {
                positive = true;
                for (const auto& row : pw)
                    for (double x : row)
                        if (x <= 0.0) positive = false;
                if (!positive) pw = matmul(pw, transition);
            }
            if (!positive)
                throw std::invalid_argument(
                    "markov environment appears periodic: no strictly positive power up to K^2");
            break;
        }
    }
}

Vec stationary_distribution(const EnvironmentSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case Kind::deterministic:
            return Vec{1.0};
        case Kind::iid:
            return spec.weights;
        case Kind::markov: {
            // solve pi (P - I) = 0 with sum(pi) = 1: replace last column by ones
            int k = spec.num_states;
            Mat a(k, Vec(k, 0.0));
            Vec b(k, 0.0);
            for (int j = 0; j < k - 1; ++j) {
                for (int i = 0; i < k; ++i) a[j][i] = spec.transition[i][j];
                a[j][j] -= 1.0;
            }
            for (int i = 0; i < k; ++i) a[k - 1][i] = 1.0;
            b[k - 1] = 1.0;
            Vec pi = solve_linear(a, b);
            for (double& x : pi) x = std::max(x, 0.0);
            double s = 0.0;
            for (double x : pi) s += x;
            for (double& x : pi) x /= s;
            return pi;
        }
    }
    throw std::logic_error("unreachable");
}

EnvironmentPath sample_path(const EnvironmentSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 0) throw std::invalid_argument("sample_path: n < 0");
    EnvironmentPath path;
    path.spec = &spec;
    path.states.resize(n);
    switch (spec.kind) {
        case Kind::deterministic:
            for (int i = 0; i < n; ++i) path.states[i] = 0;
            break;
        case Kind::iid:
            for (int i = 0; i < n; ++i) {
                RngStream rng(seed, 0x456e76ULL, std::uint64_t(i));
                path.states[i] = rng.next_categorical(spec.weights);
            }
            break;
        case Kind::markov: {
            // stationary start; the chain itself is sequential by nature
            Vec pi = stationary_distribution(spec);
            RngStream rng(seed, 0x456e76ULL, 0);
            int s = n > 0 ? rng.next_categorical(pi) : 0;
            for (int i = 0; i < n; ++i) {
                path.states[i] = s;
                s = rng.next_categorical(spec.transition[s]);
            }
            break;
        }
    }
    return path;
}

MixingProfile mixing_bound(const EnvironmentSpec& spec) {
    spec.validate();
    MixingProfile prof;
    prof.theta = 2.0;
    if (spec.kind != Kind::markov) return prof;  // independent => phi == 0

    // sup-norm contraction of P^n towards the stationary law; the decay
    // ratio over doubled horizons estimates the second eigenvalue modulus.
    Vec pi = stationary_distribution(spec);
    int k = spec.num_states;
    auto dist = [&](const Mat& pw) {
        double m = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) m = std::max(m, std::fabs(pw[i][j] - pi[j]));
        return m;
    };
    Mat pw = spec.transition;
    int n1 = 24, n2 = 48;
    for (int i = 1; i < n1; ++i) pw = matmul(pw, spec.transition);
    double d1 = dist(pw);
    for (int i = n1; i < n2; ++i) pw = matmul(pw, spec.transition);
    double d2 = dist(pw);
    double r;
    if (d1 < 1e-280 || d2 < 1e-280) {
        // contraction faster than measurable at this horizon
        r = 0.5;
        double d0 = dist(spec.transition);
        if (d0 < 1e-280) r = 0.0;
    } else {
        r = std::pow(d2 / d1, 1.0 / double(n2 - n1));
    }
    r = std::min(std::max(r, 0.0), 1.0 - 1e-12);
    // phi(n) <= c r^n with c covering the small-n values (phi <= 1 always,
    // and |P^n(i,.) - pi| <= c r^n from the fitted decay)
    double c = 1.0;
    if (r > 0.0) {
        for (int i = 0; i < 8; ++i) {
            Mat q = spec.transition;
            for (int j = 1; j <= i; ++j) q = matmul(q, spec.transition);
            c = std::max(c, dist(q) / std::pow(r, i + 1));
        }
    }
    prof.c = c;
    prof.r = r;
    return prof;
}

double MixingProfile::phi(int n) const { return std::min(1.0, c * std::pow(r, n)); }

EnvironmentSpec deterministic_env() {
    EnvironmentSpec s;
    s.kind = Kind::deterministic;
    s.num_states = 1;
    return s;
}

EnvironmentSpec iid_env(Vec weights) {
    EnvironmentSpec s;
    s.kind = Kind::iid;
    s.num_states = int(weights.size());
    s.weights = std::move(weights);
    return s;
}

EnvironmentSpec markov_env(Mat transition) {
    EnvironmentSpec s;
    s.kind = Kind::markov;
    s.num_states = int(transition.size());
    s.transition = std::move(transition);
    return s;
}

}  // namespace brw::env
