#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "brw/env.hpp"
#include "brw/linalg.hpp"
#include "brw/rng.hpp"

namespace brw::model {

using Cplx = std::complex<double>;
using CVec = std::vector<Cplx>;

// Offspring law on {1,2,...}: either a fixed count or categorical masses
// probs[k] = P(N = k+1).
struct OffspringLaw {
    Vec probs;

    static OffspringLaw fixed(int b);
    static OffspringLaw categorical(Vec probs_from_one);

    double mean() const;
    double mean_capped(std::int64_t cap) const;  // E[N ^ cap]
    double prob_single() const { return probs.empty() ? 0.0 : probs[0]; }
    int sample(RngStream& rng) const;
    int max_count() const { return int(probs.size()); }
};

// Displacement law of a single child in R^d. Gaussian is isotropic.
// `radius` < inf marks a ball truncation: children whose displacement
// leaves the ball are removed from the truncated point process.
struct DisplacementLaw {
    enum class Kind { gaussian, categorical };
    Kind kind = Kind::categorical;
    int dim = 1;

    Vec mean;                 // gaussian
    double sigma2 = 1.0;      // gaussian
    std::vector<Vec> steps;   // categorical
    Vec probs;                // categorical
    double radius = std::numeric_limits<double>::infinity();

    static DisplacementLaw gaussian(Vec mean, double sigma2);
    static DisplacementLaw categorical(std::vector<Vec> steps, Vec probs);

    bool truncated() const { return std::isfinite(radius); }
    // characteristic factor: E[e^{<z,L>} 1{||L|| <= radius}] (no offspring factor)
    Cplx char_factor(const CVec& z) const;
    double char_factor_real(const Vec& t) const;
    Vec grad_log_char(const Vec& t) const;
    double retain_probability() const;  // P(||L|| <= radius)
    Vec sample(RngStream& rng) const;   // untruncated draw
    Vec sample_tilted(const Vec& t, RngStream& rng) const;
    Vec mean_vector() const;            // E L (untruncated laws)
    Mat second_moment_centered() const; // E (L-EL)(L-EL)^T
};

// Per-state reproduction: offspring count plus displacements. Displacements
// are i.i.d. across children unless `deterministic_children` is set, in
// which case child i takes steps[i] (offspring must be fixed and equal to
// the step count); the binary +/-1 model uses that arrangement.
struct StateLaw {
    OffspringLaw offspring;
    DisplacementLaw displacement;
    bool deterministic_children = false;
    std::int64_t offspring_cap = std::numeric_limits<std::int64_t>::max();

    double capped_mean_offspring() const { return offspring.mean_capped(offspring_cap); }
};

struct PointSample {
    int n_children = 0;
    std::vector<Vec> displacements;
};

struct FirstMoments {
    double pi;   // m_e(0) = E N
    Vec ell;     // mean displacement
    Mat sigma;   // per-child centered second moment matrix
};

// Per-environment-state reproduction laws with exact transforms.
struct ReproductionLaw {
    int dim = 1;
    std::vector<StateLaw> states;

    void validate(const Vec& pi_stat) const;  // N>=1, P(N=1)<1 on average, supercriticality

    PointSample sample_point_process(int state, RngStream& rng) const;
    Cplx log_mgf(int state, const CVec& z) const;     // log m_e(z), principal branch
    Cplx mgf(int state, const CVec& z) const;         // m_e(z)
    double log_mgf_real(int state, const Vec& t) const;
    Vec grad_log_mgf(int state, const Vec& t) const;
    Vec tilted_step(int state, const Vec& t, RngStream& rng) const;
    FirstMoments first_moments(int state) const;
    ReproductionLaw truncate(double a) const;  // cap N at floor(a), keep ||L|| <= a

    int num_states() const { return int(states.size()); }
};

// canonical small models used throughout the tests
ReproductionLaw binary_model();                       // N=2, children at +1 and -1, d=1
ReproductionLaw gaussian_model(int b, Vec mean, double sigma2);
ReproductionLaw gaussian_two_state(int b, double s2a, double s2b);

}  // namespace brw::model
