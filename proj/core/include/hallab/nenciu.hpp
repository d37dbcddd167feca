// nenciu.hpp — recursive construction of the slow-drive expansion terms
// B_0(s), B_1(s), ..., their hierarchy residuals, and the truncation
// remainder against the exact propagation
#pragma once

#include "hallab/adiabatic.hpp"
#include "hallab/common.hpp"
#include "hallab/fit.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace hallab {

struct KappaCalibration {
    cxd kappa{0.0, -1.0};
    double residual{0.0};
    std::vector<std::pair<cxd, double>> candidates;  // (kappa, residual)
};

// Selects the recursion constant by minimizing || i dB_0/ds - [H, B_1] ||
// over a fixed candidate set; the winner is reported, never assumed.
KappaCalibration calibrate_kappa(const DriveContext& ctx, double s);

struct ExpansionTerms {
    double s{0.0};
    int order{0};
    double fd_step{0.0};
    cxd kappa{0.0, -1.0};
    std::vector<Mat> terms;    // B_0 ... B_k at s
    std::vector<Mat> s_terms;  // S_1 ... S_k at s (S_1 = 0)
    // ||i dB_j/ds - [H(s), B_{j+1}]|| for j < k, plain central differences.
    std::vector<double> residual_ode;
    // ||B_j - sum_m B_m B_{j-m}|| for j <= k.
    std::vector<double> residual_alg;

    // Internal stencil retained so residual evaluation can reuse it.
    struct Grid;
    std::shared_ptr<const Grid> grid;
};

// Builds B_0..B_k at s. B_0 = P(s); for j >= 1,
//   B_j = kappa * riesz_sandwich([P, dB_{j-1}/ds]) + S_j - 2 P S_j P,
//   S_j = sum_{m=1}^{j-1} B_m B_{j-m},
// with dB_0/ds in closed form and higher derivatives by Richardson-
// extrapolated central differences of step h (the closed form anchors the
// stencil; disagreement beyond the stencil's own error estimate throws
// FdUnstableError). Requires s +/- 2k h inside [0,1] and a certified gap.
ExpansionTerms expansion_terms(const DriveContext& ctx, double s, int k,
                               double h = 1e-3,
                               std::optional<cxd> kappa = std::nullopt);

// Fills residual_ode / residual_alg on an existing term set. The reported
// ODE residual uses the un-extrapolated central difference so that its
// leading error is O(h^2) — halving h must shrink it by about 4x.
void hierarchy_residuals(const DriveContext& ctx, ExpansionTerms& terms);

// Tr_W B_1(s) [H(s), L2]; equals g(s) * K_raw.
cxd kubo_from_b1(const DriveContext& ctx, const ExpansionTerms& terms);

// ---------------------------- truncation remainder -------------------------

struct RemainderRow {
    double tau{0.0};
    int n_steps{0};
    double remainder{0.0};  // ||P_tau(s) - sum_{j<=k} tau^-j B_j(s)||
    double remainder_halved{0.0};
    double change{0.0};
};

struct RemainderReport {
    int order{0};
    double s_probe{0.0};
    std::vector<RemainderRow> rows;
    FitResult fit;
};

RemainderReport truncation_remainder(const DriveContext& ctx,
                                     const std::vector<double>& taus, double s,
                                     int k, const StepRule& steps,
                                     int threads = 1, bool certify = true,
                                     double fd_step = 1e-3,
                                     FitWindow fit_window = FitWindow::all);

}  // namespace hallab
