// diagnostics.hpp — measurable surrogates for the kernel-decay, current-
// localization, propagation-speed, and energy-boundedness estimates
#pragma once

#include "hallab/adiabatic.hpp"
#include "hallab/common.hpp"
#include "hallab/model.hpp"

#include <vector>

namespace hallab {

struct DecayProfile {
    Axis axis{Axis::x1};
    std::vector<double> distances;
    std::vector<double> norms;  // row-block operator norms
    double fit_exponent{0.0};   // slope of log norm vs distance
};

enum class DecaySide { both, negative, positive };

// Operator norms of the rows belonging to sites at coordinate distance d
// beyond the reference region |x_axis - 0| <= region_halfwidth, per integer
// distance shell.
DecayProfile kernel_decay(const Mat& op, const MagneticModel& model, Axis axis,
                          double region_halfwidth,
                          DecaySide side = DecaySide::both);

struct LightconeReport {
    std::vector<double> times;    // physical time t = tau * s
    std::vector<double> spreads;  // sqrt(<x2^2> - <x2>^2)
    double growth_exponent{0.0};  // log-log slope before reflection
    bool boundary_reflection{false};  // spread exceeded L/3
};

// Evolves a normalized state under the driven dynamics and tracks its
// transverse spread. The initial state should be energy-filtered; the fit
// window stops at the first boundary reflection.
LightconeReport lightcone_check(const DriveContext& ctx, const MagneticModel& model,
                                double tau, const Vec& initial, int n_steps,
                                int n_samples = 33);

// Gaussian packet centered near the origin, filtered below energy_cut,
// normalized. Convenience initial state for lightcone_check.
Vec filtered_packet(const DriveContext& ctx, const MagneticModel& model,
                    double width, double energy_cut);

// max over the sampled (s,t) pairs of || H(s)^{-m/2} U_tau(s,t) H(t)^{m/2} ||
// with the spectrum shifted so min E >= 1. Equals 1 exactly for m = 0 or a
// flat drive.
double energy_bound_check(const DriveContext& ctx, double tau, int m_power,
                          int n_steps, const std::vector<double>& s_samples);

}  // namespace hallab
