#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "brw/env.hpp"
#include "brw/model.hpp"
#include "brw/sim.hpp"

namespace brw::ratefn {

using model::Cplx;
using model::CVec;
using model::ReproductionLaw;

// Lambda(t) = sum_e pi_stat(e) log m_e(t) and friends; exact for the
// finite-state environments this project supports.
class RateFunction {
public:
    RateFunction(ReproductionLaw model, env::EnvironmentSpec espec);

    double lambda(const Vec& t) const;
    Vec grad_lambda(const Vec& t) const;
    Mat hess_lambda(const Vec& t) const;  // central differences of the gradient

    int dim() const { return model_.dim; }
    const ReproductionLaw& model() const { return model_; }
    const env::EnvironmentSpec& environment() const { return espec_; }
    const Vec& stationary() const { return pi_stat_; }

private:
    ReproductionLaw model_;
    env::EnvironmentSpec espec_;
    Vec pi_stat_;
};

struct LegendreResult {
    Vec alpha;
    Vec t_star;
    double value = 0.0;       // Lambda*(alpha), or the certified lower bound
    bool converged = false;   // false when the supremum is not attained
    double residual = 0.0;    // ||grad Lambda(t*) - alpha||
};

LegendreResult legendre(const RateFunction& rf, const Vec& alpha);

// inf |m_e(zeta)| over the polydisc D(z0, eps) by grid search with one
// refinement pass; an upper bound on the true infimum.
struct Alpha0Result {
    double value = 0.0;
    double grid_spacing = 0.0;
    CVec argmin;
};
Alpha0Result alpha0_inf(const ReproductionLaw& model, int state, const CVec& z0, double eps,
                        int resolution = 64);

struct RegionReport {
    Vec t;
    bool in_I = false;
    double i_value = 0.0;  // <t, grad Lambda(t)> - Lambda(t)
    struct Omega1Probe {
        double p;
        double value;      // E log+ E_xi Z_1(t)^p
        double std_error;  // 0 for exact (categorical) evaluation
        bool exact;
    };
    std::vector<Omega1Probe> omega1;
    double delta = 0.0;
    double omega2_value = 0.0;  // E log- alpha0(t, delta), grid diagnostic
    Vec alpha;                  // grad Lambda(t)
    bool in_J_image = false;    // Lambda*(alpha) < 0
};

RegionReport region(const RateFunction& rf, const Vec& t, double delta,
                    const std::vector<double>& p_probes = {1.1, 1.5, 2.0},
                    std::uint64_t mc_seed = 2024, int mc_samples = 100000);

struct SpectrumPoint {
    Vec alpha;
    double dimension;  // -Lambda*(alpha)
    bool in_J_tilde;   // Lambda*(alpha) < 0
    bool converged;
};
std::vector<SpectrumPoint> spectrum_curve(const RateFunction& rf, const std::vector<Vec>& alphas);

struct PressurePoint {
    Vec t;
    double empirical;  // (1/n) log Z_n(t) at the run's deepest frame
    double lambda;     // exact Lambda(t)
    int n;
};
std::vector<PressurePoint> empirical_pressure(const sim::TreeRun& run, const std::vector<Vec>& ts,
                                              const RateFunction& rf);

struct TruncatedRateTable {
    std::vector<double> a_values;
    std::vector<Vec> t_grid;
    std::vector<std::vector<double>> lambda_a;   // [a][t]
    std::vector<double> lambda_full;             // [t]
    std::vector<Vec> alpha_grid;
    std::vector<std::vector<double>> lambda_a_star;  // [a][alpha]
    std::vector<double> lambda_star_full;            // [alpha]
};
TruncatedRateTable truncated_rate(const RateFunction& rf, const std::vector<double>& a_list,
                                  const std::vector<Vec>& t_grid,
                                  const std::vector<Vec>& alpha_grid);

}  // namespace brw::ratefn
