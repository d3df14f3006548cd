#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "brw/env.hpp"
#include "brw/model.hpp"
#include "brw/ratefn.hpp"

namespace brw::dev {

using model::ReproductionLaw;

// a_n = c * n^kappa with kappa strictly between 1/2 and 1
struct ANSequence {
    double c = 1.0;
    double kappa = 0.7;

    static ANSequence make(double c, double kappa);
    double at(std::int64_t n) const;
};

// closed intervals, endpoints may be +-inf
struct Interval {
    double lo, hi;
};
struct IntervalSet {
    std::vector<Interval> intervals;
    bool contains(double x) const;
    bool empty_set() const { return intervals.empty(); }
};

// closed axis-aligned box
struct ClosedBox {
    Vec lo, hi;
    bool contains(const double* x, int dim) const;
    Vec project(const Vec& x) const;  // Euclidean projection onto the box
    int dim() const { return int(lo.size()); }
};

struct CovarianceC {
    Mat C;
    Mat pinv;
    int rank = 0;
    Vec centering;          // sum_e pi(e) * ell_e; must vanish for the MDP
    double centering_norm = 0.0;
    double delta = 1.0;     // certified exponential-moment margin
    bool centered = false;
};

struct DeviationReport {
    std::string experiment;
    struct Row {
        std::int64_t n = 0;
        double median = 0.0;
        int censored = 0;
        int cap_hits = 0;
        std::vector<double> estimates;  // non-censored, replicate order
    };
    std::vector<Row> rows;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
};

// (-inf over int A of Lambda*, -inf over closure of A of Lambda*); for boxes
// the two coincide. Disjoint from the finite region => both -inf.
std::pair<double, double> ldp_theory(const ratefn::RateFunction& rf, const ClosedBox& A);

// exact (1/n) log Z_n(nA) for the deterministic binary model; -inf when no
// admissible particle count exists
double ldp_oracle_binary(std::int64_t n, const IntervalSet& A);

DeviationReport ldp_estimate(const ReproductionLaw& model, const env::EnvironmentSpec& espec,
                             const ClosedBox& A, const std::vector<int>& ns, int replicates,
                             std::uint64_t seed, std::uint64_t cap = 10'000'000,
                             double tolerance = 0.1, int threads = 1);

CovarianceC covariance_C(const ReproductionLaw& model, const env::EnvironmentSpec& espec);

double gamma(const CovarianceC& cov, const Vec& t);
double gamma_star(const CovarianceC& cov, const Vec& x);  // +inf off the column space

// (n/a_n^2) * lambda_n(a_n^2 t / n), evaluated exactly from the per-state
// closed forms along the realized environment path
double lambda_n_functional(const ReproductionLaw& model, const env::EnvironmentPath& path,
                           const ANSequence& an, std::int64_t n, const Vec& t);

// binary model: exact binomial tail sums; replicates > 0 switches to Monte
// Carlo tree runs (any model)
DeviationReport mdp_estimate(const ReproductionLaw& model, const env::EnvironmentSpec& espec,
                             const ANSequence& an, const IntervalSet& A, std::int64_t n,
                             int replicates, std::uint64_t seed, std::uint64_t cap = 10'000'000,
                             double tolerance = 0.01);

}  // namespace brw::dev
