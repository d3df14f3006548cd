#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "brw/env.hpp"
#include "brw/model.hpp"

namespace brw::sim {

using model::Cplx;
using model::CVec;
using model::ReproductionLaw;

// Positions of every generation-n particle, flat (count x dim). Parent
// indices are kept only in genealogy mode.
struct GenerationFrame {
    int n = 0;
    int dim = 1;
    std::vector<double> positions;
    std::vector<std::int64_t> parent;

    std::size_t count() const { return positions.size() / std::size_t(dim); }
    const double* at(std::size_t i) const { return positions.data() + i * std::size_t(dim); }
};

struct TreeRun {
    ReproductionLaw model;
    env::EnvironmentPath path;
    std::uint64_t seed = 0;
    std::uint64_t cap = 10'000'000;
    bool cap_hit = false;
    bool genealogy = false;
    std::vector<GenerationFrame> frames;

    const GenerationFrame& frame(int n) const;
};

// Z_n(z) in a numerically safe split: value = scaled * exp(log_scale).
struct ScaledComplex {
    double log_scale = 0.0;
    Cplx scaled{0.0, 0.0};

    Cplx value() const { return scaled * std::exp(log_scale); }
    double log_abs() const { return log_scale + std::log(std::abs(scaled)); }
};

struct LaplaceResult {
    ScaledComplex z_tilde;  // Laplace transform of Z_n
    Cplx log_pn;            // log P_n(z) = sum of complex logs of m_i(z)
    Cplx w;                 // W_n(z) = Z_n(z) / P_n(z)
};

TreeRun run_generations(const ReproductionLaw& model, const env::EnvironmentPath& path,
                        int horizon, std::uint64_t cap, std::uint64_t seed,
                        bool genealogy = false, int threads = 1);

// Axis-aligned half-open box [lo, hi) per coordinate; empty lo/hi = R^d.
struct Box {
    Vec lo, hi;
    bool contains(const double* x, int dim) const;
};
std::int64_t counting_measure(const TreeRun& run, int n, const Box& box);

LaplaceResult laplace(const TreeRun& run, int n, const CVec& z);
double laplace_log_real(const TreeRun& run, int n, const Vec& t);  // log Z_n(t)
double log_pn_real(const ReproductionLaw& model, const env::EnvironmentPath& path, int n,
                   const Vec& t);
double w_real(const TreeRun& run, int n, const Vec& t);  // W_n(t) > 0

// ----------------------------------------------------------- martingale panel

struct MartingalePanelRow {
    CVec z;
    int n = 0;
    double mean_re = 0.0;
    double var_re = 0.0;
};

struct MartingalePanel {
    std::vector<MartingalePanelRow> rows;
    // per replicate and per n-index: sup over the grid of |W_{n+1} - W_n|
    std::vector<std::vector<double>> sup_increment;
    int excluded_cap_hits = 0;
};

MartingalePanel martingale_panel(const ReproductionLaw& model, const env::EnvironmentSpec& espec,
                                 const std::vector<CVec>& grid, const std::vector<int>& ns,
                                 int replicates, std::uint64_t cap, std::uint64_t seed,
                                 int threads = 1);

// ------------------------------------------------------------ envelope check

struct EnvelopeReport {
    int replicates = 0;
    int violations = 0;
    bool vacuous = false;  // alpha0 grid infimum hit zero
    double alpha0 = 0.0;
    double worst_margin = 0.0;  // min over replicates of bound - grid_sup
};

// Verifies sup_{D(z0,eps)} |W_1(z)| <= alpha0^{-1} sum_corners Z_1(s)
// replicate by replicate; the sup side is a grid supremum inside the disc.
EnvelopeReport envelope_check(const ReproductionLaw& model, int state, const CVec& z0, double eps,
                              int replicates, std::uint64_t seed, int grid_res = 17);

// -------------------------------------------------------------------- spine

struct SpineTrajectory {
    Vec t;
    std::vector<Vec> steps;
    std::vector<Vec> partial_sums;  // S_{u|k}, k = 1..n
    Vec terminal_mean() const;      // S_n / n
};

SpineTrajectory spine_sample(const ReproductionLaw& model, const env::EnvironmentPath& path,
                             const Vec& t, int horizon, std::uint64_t seed);

// -------------------------------------------------------- Mandelbrot weights

struct RayWeight {
    double weight = 0.0;       // X_u(t) * W_m(u,t)
    double log_weight_rate = 0.0;  // (1/n) log weight
    double w_subtree = 0.0;    // finite-horizon W_m(u,t)
};

// Requires a genealogy-mode run with frames up to n + lookahead.
RayWeight mandelbrot_ray_weight(const TreeRun& run, int n, std::int64_t ray_index, const Vec& t,
                                int lookahead);

// ancestor index at frame n for every particle of frame n+m
std::vector<std::int64_t> ancestors_at(const TreeRun& run, int n, int m);

}  // namespace brw::sim
