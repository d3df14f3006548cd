#include "brw/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "brw/special.hpp"

namespace brw::model {

// ---------------------------------------------------------------- offspring

OffspringLaw OffspringLaw::fixed(int b) {
    if (b < 1) throw std::invalid_argument("offspring: fixed count must be >= 1");
    OffspringLaw law;
    law.probs.assign(b, 0.0);
    law.probs[b - 1] = 1.0;
    return law;
}

OffspringLaw OffspringLaw::categorical(Vec probs_from_one) {
    if (probs_from_one.empty()) throw std::invalid_argument("offspring: empty law");
    double s = 0.0;
    for (double p : probs_from_one) {
        if (p < 0.0) throw std::invalid_argument("offspring: negative mass");
        s += p;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument("offspring: masses must sum to 1");
    OffspringLaw law;
    law.probs = std::move(probs_from_one);
    return law;
}

double OffspringLaw::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) m += probs[k] * double(k + 1);
    return m;
}

double OffspringLaw::mean_capped(std::int64_t cap) const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k)
        m += probs[k] * double(std::min<std::int64_t>(std::int64_t(k + 1), cap));
    return m;
}

int OffspringLaw::sample(RngStream& rng) const { return rng.next_categorical(probs) + 1; }

// ------------------------------------------------------------- displacement

DisplacementLaw DisplacementLaw::gaussian(Vec mean, double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("displacement: sigma2 must be positive");
    DisplacementLaw law;
    law.kind = Kind::gaussian;
    law.dim = int(mean.size());
    law.mean = std::move(mean);
    law.sigma2 = sigma2;
    return law;
}

DisplacementLaw DisplacementLaw::categorical(std::vector<Vec> steps, Vec probs) {
    if (steps.empty() || steps.size() != probs.size())
        throw std::invalid_argument("displacement: steps/probs mismatch");
    double s = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("displacement: negative mass");
        s += p;
    }
    if (std::fabs(s - 1.0) > 1e-12)
        throw std::invalid_argument("displacement: masses must sum to 1");
    DisplacementLaw law;
    law.kind = Kind::categorical;
    law.dim = int(steps[0].size());
    law.steps = std::move(steps);
    law.probs = std::move(probs);
    return law;
}

double DisplacementLaw::retain_probability() const {
    if (!truncated()) return 1.0;
    if (kind == Kind::categorical) {
        double p = 0.0;
        for (std::size_t k = 0; k < steps.size(); ++k)
            if (norm2(steps[k]) <= radius) p += probs[k];
        return p;
    }
    // ||L||^2 / sigma2 is noncentral chi-square(d, ||mu||^2/sigma2)
    double lambda = dot(mean, mean) / sigma2;
    return noncentral_chi_square_cdf(radius * radius / sigma2, double(dim), lambda);
}

Cplx DisplacementLaw::char_factor(const CVec& z) const {
    if (kind == Kind::categorical) {
        Cplx s(0.0, 0.0);
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (truncated() && norm2(steps[k]) > radius) continue;
            Cplx e(0.0, 0.0);
            for (int j = 0; j < dim; ++j) e += z[j] * steps[k][j];
            s += probs[k] * std::exp(e);
        }
        return s;
    }
    // gaussian: exp(<z,mu> + sigma2/2 * sum z_j^2); truncation needs real z
    Cplx e(0.0, 0.0);
    for (int j = 0; j < dim; ++j) e += z[j] * mean[j] + 0.5 * sigma2 * z[j] * z[j];
    if (!truncated()) return std::exp(e);
    for (int j = 0; j < dim; ++j)
        if (std::fabs(z[j].imag()) > 0.0)
            throw std::invalid_argument(
                "truncated gaussian transform is only available for real arguments");
    // E[e^{<t,L>} 1{||L||<=a}] = e^{<t,mu>+s2|t|^2/2} P(||Y|| <= a), Y ~ N(mu+s2 t, s2 I)
    Vec shifted(dim);
    for (int j = 0; j < dim; ++j) shifted[j] = mean[j] + sigma2 * z[j].real();
    double lambda = dot(shifted, shifted) / sigma2;
    double ball = noncentral_chi_square_cdf(radius * radius / sigma2, double(dim), lambda);
    return std::exp(e) * ball;
}

double DisplacementLaw::char_factor_real(const Vec& t) const {
    CVec z(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) z[j] = Cplx(t[j], 0.0);
    return char_factor(z).real();
}

Vec DisplacementLaw::grad_log_char(const Vec& t) const {
    if (kind == Kind::gaussian && !truncated()) {
        Vec g(dim);
        for (int j = 0; j < dim; ++j) g[j] = mean[j] + sigma2 * t[j];
        return g;
    }
    if (kind == Kind::categorical) {
        Vec num(dim, 0.0);
        double den = 0.0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (truncated() && norm2(steps[k]) > radius) continue;
            double w = probs[k] * std::exp(dot(t, steps[k]));
            den += w;
            for (int j = 0; j < dim; ++j) num[j] += w * steps[k][j];
        }
        if (den <= 0.0) throw std::runtime_error("truncation eliminates the process");
        for (int j = 0; j < dim; ++j) num[j] /= den;
        return num;
    }
    // truncated gaussian: central differences of the closed-form factor
    Vec g(dim);
    const double h = 1e-6;
    for (int j = 0; j < dim; ++j) {
        Vec tp = t, tm = t;
        tp[j] += h;
        tm[j] -= h;
        g[j] = (std::log(char_factor_real(tp)) - std::log(char_factor_real(tm))) / (2.0 * h);
    }
    return g;
}

Vec DisplacementLaw::sample(RngStream& rng) const {
    if (kind == Kind::categorical) return steps[rng.next_categorical(probs)];
    Vec x(dim);
    for (int j = 0; j < dim; ++j) x[j] = mean[j] + std::sqrt(sigma2) * rng.next_normal();
    return x;
}

Vec DisplacementLaw::sample_tilted(const Vec& t, RngStream& rng) const {
    if (kind == Kind::categorical) {
        Vec w(steps.size(), 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (truncated() && norm2(steps[k]) > radius) continue;
            w[k] = probs[k] * std::exp(dot(t, steps[k]));
            s += w[k];
        }
        if (s <= 0.0) throw std::runtime_error("truncation eliminates the process");
        for (double& x : w) x /= s;
        return steps[rng.next_categorical(w)];
    }
    if (truncated())
        throw std::invalid_argument("tilted sampling of truncated gaussians is not supported");
    // gaussian tilts to gaussian(mu + sigma2 t, sigma2)
    Vec x(dim);
    for (int j = 0; j < dim; ++j)
        x[j] = mean[j] + sigma2 * t[j] + std::sqrt(sigma2) * rng.next_normal();
    return x;
}

Vec DisplacementLaw::mean_vector() const {
    if (kind == Kind::categorical) {
        Vec m(dim, 0.0);
        double den = 0.0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (truncated() && norm2(steps[k]) > radius) continue;
            den += probs[k];
            for (int j = 0; j < dim; ++j) m[j] += probs[k] * steps[k][j];
        }
        if (den <= 0.0) throw std::runtime_error("truncation eliminates the process");
        for (int j = 0; j < dim; ++j) m[j] /= den;
        return m;
    }
    if (truncated()) return grad_log_char(Vec(dim, 0.0));  // conditional-in-ball mean, numeric
    return mean;
}

Mat DisplacementLaw::second_moment_centered() const {
    Mat s(dim, Vec(dim, 0.0));
    if (kind == Kind::categorical) {
        Vec m = mean_vector();
        double den = 0.0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (truncated() && norm2(steps[k]) > radius) continue;
            den += probs[k];
        }
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (truncated() && norm2(steps[k]) > radius) continue;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    s[i][j] += (probs[k] / den) * (steps[k][i] - m[i]) * (steps[k][j] - m[j]);
        }
        return s;
    }
    if (truncated())
        throw std::invalid_argument("second moments of truncated gaussians are not supported");
    for (int i = 0; i < dim; ++i) s[i][i] = sigma2;
    return s;
}

// ------------------------------------------------------------- reproduction

void ReproductionLaw::validate(const Vec& pi_stat) const {
    if (dim < 1) throw std::invalid_argument("model: dimension must be >= 1");
    if (states.empty()) throw std::invalid_argument("model: no per-state laws");
    if (pi_stat.size() != states.size())
        throw std::invalid_argument("model: state count does not match environment");
    double p_single = 0.0;
    double supercrit = 0.0;
    for (std::size_t e = 0; e < states.size(); ++e) {
        const StateLaw& s = states[e];
        if (s.displacement.dim != dim)
            throw std::invalid_argument("model: displacement dimension mismatch");
        if (s.deterministic_children) {
            if (s.displacement.kind != DisplacementLaw::Kind::categorical ||
                s.offspring.max_count() != int(s.displacement.steps.size()) ||
                s.offspring.probs.back() != 1.0)
                throw std::invalid_argument(
                    "model: deterministic children require fixed offspring matching the step count");
        }
        p_single += pi_stat[e] * s.offspring.prob_single();
        supercrit += pi_stat[e] * std::log(s.capped_mean_offspring());
    }
    if (p_single >= 1.0 - 1e-15)
        throw std::invalid_argument("model: P(N=1) = 1, process never branches");
    if (supercrit <= 0.0)
        throw std::invalid_argument("model: E log m_0(0) <= 0, process not supercritical");
}

PointSample ReproductionLaw::sample_point_process(int state, RngStream& rng) const {
    const StateLaw& s = states[state];
    PointSample out;
    int n = s.offspring.sample(rng);
    if (s.offspring_cap < n) n = int(s.offspring_cap);
    out.displacements.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec x = s.deterministic_children ? s.displacement.steps[i] : s.displacement.sample(rng);
        if (s.displacement.truncated() && norm2(x) > s.displacement.radius) continue;
        out.displacements.push_back(std::move(x));
    }
    out.n_children = int(out.displacements.size());
    return out;
}

Cplx ReproductionLaw::mgf(int state, const CVec& z) const {
    const StateLaw& s = states[state];
    return s.capped_mean_offspring() * s.displacement.char_factor(z);
}

Cplx ReproductionLaw::log_mgf(int state, const CVec& z) const { return std::log(mgf(state, z)); }

double ReproductionLaw::log_mgf_real(int state, const Vec& t) const {
    const StateLaw& s = states[state];
    return std::log(s.capped_mean_offspring()) + std::log(s.displacement.char_factor_real(t));
}

Vec ReproductionLaw::grad_log_mgf(int state, const Vec& t) const {
    return states[state].displacement.grad_log_char(t);
}

Vec ReproductionLaw::tilted_step(int state, const Vec& t, RngStream& rng) const {
    return states[state].displacement.sample_tilted(t, rng);
}

FirstMoments ReproductionLaw::first_moments(int state) const {
    const StateLaw& s = states[state];
    FirstMoments fm;
    fm.pi = s.capped_mean_offspring() * s.displacement.retain_probability();
    fm.ell = s.displacement.mean_vector();
    fm.sigma = s.displacement.second_moment_centered();
    return fm;
}

ReproductionLaw ReproductionLaw::truncate(double a) const {
    if (a <= 0.0) throw std::invalid_argument("truncate: a must be positive");
    ReproductionLaw out = *this;
    const std::int64_t cap = std::int64_t(std::floor(a));
    if (cap < 1) throw std::runtime_error("truncation eliminates the process");
    for (StateLaw& s : out.states) {
        s.offspring_cap = std::min(s.offspring_cap, cap);
        s.displacement.radius = std::min(s.displacement.radius, a);
        if (s.displacement.kind == DisplacementLaw::Kind::categorical &&
            s.displacement.retain_probability() <= 0.0)
            throw std::runtime_error("truncation eliminates the process");
    }
    return out;
}

// ----------------------------------------------------------------- builders

ReproductionLaw binary_model() {
    ReproductionLaw m;
    m.dim = 1;
    StateLaw s;
    s.offspring = OffspringLaw::fixed(2);
    s.displacement = DisplacementLaw::categorical({{1.0}, {-1.0}}, {0.5, 0.5});
    s.deterministic_children = true;
    m.states = {s};
    return m;
}

ReproductionLaw gaussian_model(int b, Vec mean, double sigma2) {
    ReproductionLaw m;
    m.dim = int(mean.size());
    StateLaw s;
    s.offspring = OffspringLaw::fixed(b);
    s.displacement = DisplacementLaw::gaussian(std::move(mean), sigma2);
    m.states = {s};
    return m;
}

ReproductionLaw gaussian_two_state(int b, double s2a, double s2b) {
    ReproductionLaw m;
    m.dim = 1;
    StateLaw sa, sb;
    sa.offspring = OffspringLaw::fixed(b);
    sa.displacement = DisplacementLaw::gaussian({0.0}, s2a);
    sb.offspring = OffspringLaw::fixed(b);
    sb.displacement = DisplacementLaw::gaussian({0.0}, s2b);
    m.states = {sa, sb};
    return m;
}

}  // namespace brw::model
