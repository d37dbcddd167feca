#include "hallab/nenciu.hpp"

#include "hallab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hallab {

// Stencil of expansion terms around s0: level[j][off + radius] holds
// B_j(s0 + off * h). Level 0 and 1 cover the full radius (the derivative of
// B_0 is closed-form); each further level loses two points per side to the
// finite-difference stencil.
struct ExpansionTerms::Grid {
    double s0{0.0}, h{0.0};
    int order{0}, radius{0};
    std::vector<std::vector<Mat>> level;
    std::vector<Mat> gauged_vectors;  // W(s_i) = G(phi(s_i)) V

    int range(int j) const {
        return j <= 1 ? radius : radius - 2 * (j - 1);
    }
    const Mat& at(int j, int off) const { return level[j][off + radius]; }
    Mat& at(int j, int off) { return level[j][off + radius]; }
    const Mat& vectors(int off) const { return gauged_vectors[off + radius]; }
};

namespace {

using Grid = ExpansionTerms::Grid;

// Riesz sandwich in a pre-gauged eigenframe.
Mat riesz_in_frame(const Mat& w, const RVec& energies, int occupied, const Mat& c) {
    const int d = static_cast<int>(energies.size());
    Mat tilde = w.adjoint() * c * w;
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const bool mo = m < occupied;
            const bool no = n < occupied;
            if (mo == no) {
                tilde(m, n) = cxd(0.0, 0.0);
            } else if (mo) {
                tilde(m, n) /= (energies(n) - energies(m));
            } else {
                tilde(m, n) /= (energies(m) - energies(n));
            }
        }
    }
    return w * tilde * w.adjoint();
}

Mat closed_form_b0_dot(const DriveContext& ctx, const Mat& p_s, double s) {
    const double g = ctx.profile.g(s);
    if (ctx.lambda1.is_diagonal) {
        return (-kI * g) * commutator_with_diagonal(p_s, ctx.lambda1.diag);
    }
    return (kI * g) * commutator(ctx.lambda1.dense, p_s);
}

// 4th-order (Richardson-extrapolated) central difference.
Mat fd_r4(const Mat& m2, const Mat& m1, const Mat& p1, const Mat& p2, double h) {
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
}

Mat fd_c2(const Mat& m1, const Mat& p1, double h) { return (p1 - m1) / (2.0 * h); }

std::shared_ptr<Grid> build_grid(const DriveContext& ctx, double s, int k,
                                 double h, cxd kappa) {
    ctx.projector->require_certified();
    if (k < 0) throw std::invalid_argument("expansion: order must be >= 0");
    const int radius = std::max(2, 2 * k);
    if (h <= 0.0 || s - radius * h < 0.0 || s + radius * h > 1.0) {
        throw std::invalid_argument(
            "expansion: stencil s +/- 2k h must stay inside [0, 1]");
    }

    auto grid = std::make_shared<Grid>();
    grid->s0 = s;
    grid->h = h;
    grid->order = k;
    grid->radius = radius;
    grid->level.assign(k + 1, std::vector<Mat>(2 * radius + 1));
    grid->gauged_vectors.assign(2 * radius + 1, Mat());

    const int occ = ctx.projector->occupied_count;
    const RVec& energies = ctx.eig->energies;

    // Level 0 everywhere, with the gauged eigenframes cached.
    for (int off = -radius; off <= radius; ++off) {
        const double sigma = s + off * h;
        Mat w = ctx.eig->vectors;
        ctx.conj1->apply_left(w, ctx.profile.phi(sigma));
        const Mat w_occ = w.leftCols(occ);
        grid->at(0, off) = w_occ * w_occ.adjoint();
        grid->gauged_vectors[off + radius] = std::move(w);
    }

    // Sanity anchor: the closed-form derivative of B_0 must agree with its
    // own central difference within the stencil's self-estimate.
    {
        const Mat exact = closed_form_b0_dot(ctx, grid->at(0, 0), s);
        const Mat c2_h = fd_c2(grid->at(0, -1), grid->at(0, 1), h);
        const Mat c2_2h = fd_c2(grid->at(0, -2), grid->at(0, 2), 2.0 * h);
        const double expected = (c2_2h - c2_h).norm() / 3.0;
        const double defect = (c2_h - exact).norm();
        const double floor = 1e-10 * std::max(1.0, exact.norm());
        if (defect > 10.0 * std::max(expected, floor) && defect > 1e-12) {
            throw FdUnstableError(
                "expansion: central difference of B_0 contradicts the closed form");
        }
    }

    if (k >= 1) {
        for (int off = -radius; off <= radius; ++off) {
            const double sigma = s + off * h;
            const Mat& p_s = grid->at(0, off);
            const Mat b0_dot = closed_form_b0_dot(ctx, p_s, sigma);
            const Mat bracket = p_s * b0_dot - b0_dot * p_s;
            grid->at(1, off) =
                kappa * riesz_in_frame(grid->vectors(off), energies, occ, bracket);
        }
    }

    for (int j = 2; j <= k; ++j) {
        const int half = grid->range(j);
        // h-consistency of the incoming derivatives, checked at the center.
        {
            const Mat c2_h = fd_c2(grid->at(j - 1, -1), grid->at(j - 1, 1), h);
            const Mat c2_2h = fd_c2(grid->at(j - 1, -2), grid->at(j - 1, 2), 2.0 * h);
            const double scale =
                std::max({c2_h.norm(), c2_2h.norm(), 1e-12});
            if ((c2_h - c2_2h).norm() > 0.5 * scale) {
                throw FdUnstableError(
                    "expansion: derivative stencil not in its quadratic regime");
            }
        }
        for (int off = -half; off <= half; ++off) {
            const Mat db = fd_r4(grid->at(j - 1, off - 2), grid->at(j - 1, off - 1),
                                 grid->at(j - 1, off + 1), grid->at(j - 1, off + 2), h);
            const Mat& p_s = grid->at(0, off);
            Mat s_j = Mat::Zero(p_s.rows(), p_s.cols());
            for (int m = 1; m <= j - 1; ++m) {
                s_j.noalias() += grid->at(m, off) * grid->at(j - m, off);
            }
            const Mat bracket = p_s * db - db * p_s;
            grid->at(j, off) =
                kappa * riesz_in_frame(grid->vectors(off), energies, occ, bracket) +
                s_j - 2.0 * (p_s * s_j * p_s);
        }
    }
    return grid;
}

}  // namespace

KappaCalibration calibrate_kappa(const DriveContext& ctx, double s) {
    ctx.projector->require_certified();
    const int occ = ctx.projector->occupied_count;
    Mat w = ctx.eig->vectors;
    ctx.conj1->apply_left(w, ctx.profile.phi(s));
    const Mat w_occ = w.leftCols(occ);
    const Mat p_s = w_occ * w_occ.adjoint();
    const Mat h_s = w * ctx.eig->energies.asDiagonal().toDenseMatrix().cast<cxd>() *
                    w.adjoint();
    const Mat b0_dot = closed_form_b0_dot(ctx, p_s, s);
    const Mat bracket = p_s * b0_dot - b0_dot * p_s;
    const Mat base = riesz_in_frame(w, ctx.eig->energies, occ, bracket);

    const double two_pi = 2.0 * kPi;
    const std::vector<cxd> candidates = {
        {1.0, 0.0},          {-1.0, 0.0},          {0.0, 1.0},
        {0.0, -1.0},         {1.0 / two_pi, 0.0},  {-1.0 / two_pi, 0.0},
        {0.0, 1.0 / two_pi}, {0.0, -1.0 / two_pi}, {two_pi, 0.0},
        {-two_pi, 0.0},      {0.0, two_pi},        {0.0, -two_pi}};

    KappaCalibration cal;
    double best = -1.0;
    for (const cxd kappa : candidates) {
        const Mat b1 = kappa * base;
        const double res = operator_norm(kI * b0_dot - commutator(h_s, b1));
        cal.candidates.emplace_back(kappa, res);
        if (best < 0.0 || res < best) {
            best = res;
            cal.kappa = kappa;
        }
    }
    cal.residual = best;
    return cal;
}

ExpansionTerms expansion_terms(const DriveContext& ctx, double s, int k, double h,
                               std::optional<cxd> kappa) {
    ExpansionTerms terms;
    terms.s = s;
    terms.order = k;
    terms.fd_step = h;
    terms.kappa = kappa ? *kappa : calibrate_kappa(ctx, s).kappa;
    terms.grid = build_grid(ctx, s, k, h, terms.kappa);

    const auto& grid = *terms.grid;
    terms.terms.reserve(k + 1);
    for (int j = 0; j <= k; ++j) terms.terms.push_back(grid.at(j, 0));
    terms.s_terms.reserve(k);
    for (int j = 1; j <= k; ++j) {
        Mat s_j = Mat::Zero(ctx.dim(), ctx.dim());
        for (int m = 1; m <= j - 1; ++m) {
            s_j.noalias() += grid.at(m, 0) * grid.at(j - m, 0);
        }
        terms.s_terms.push_back(std::move(s_j));
    }
    hierarchy_residuals(ctx, terms);
    return terms;
}

void hierarchy_residuals(const DriveContext& ctx, ExpansionTerms& terms) {
    if (!terms.grid) {
        terms = expansion_terms(ctx, terms.s, terms.order, terms.fd_step, terms.kappa);
        return;
    }
    const auto& grid = *terms.grid;
    const int k = terms.order;
    const double h = terms.fd_step;
    const Mat h_s = grid.vectors(0) *
                    ctx.eig->energies.asDiagonal().toDenseMatrix().cast<cxd>() *
                    grid.vectors(0).adjoint();

    terms.residual_ode.assign(std::max(0, k), 0.0);
    for (int j = 0; j < k; ++j) {
        const Mat db = fd_c2(grid.at(j, -1), grid.at(j, 1), h);
        terms.residual_ode[j] =
            operator_norm(kI * db - commutator(h_s, grid.at(j + 1, 0)));
    }

    terms.residual_alg.assign(k + 1, 0.0);
    for (int j = 0; j <= k; ++j) {
        Mat sum = Mat::Zero(ctx.dim(), ctx.dim());
        for (int m = 0; m <= j; ++m) {
            sum.noalias() += grid.at(m, 0) * grid.at(j - m, 0);
        }
        terms.residual_alg[j] = operator_norm(grid.at(j, 0) - sum);
    }
}

cxd kubo_from_b1(const DriveContext& ctx, const ExpansionTerms& terms) {
    if (terms.order < 1) {
        throw std::invalid_argument("kubo_from_b1: expansion must include B_1");
    }
    const Mat h_s = ctx.gauged_hamiltonian(terms.s);
    const Mat j_op = ctx.lambda2.is_diagonal
                         ? commutator_with_diagonal(h_s, ctx.lambda2.diag)
                         : commutator(h_s, ctx.lambda2.dense);
    return ctx.window.product_trace(terms.terms[1], j_op);
}

RemainderReport truncation_remainder(const DriveContext& ctx,
                                     const std::vector<double>& taus, double s,
                                     int k, const StepRule& steps, int threads,
                                     bool certify, double fd_step,
                                     FitWindow fit_window) {
    if (taus.size() < 3) {
        throw std::invalid_argument("remainder: need at least 3 tau points");
    }
    const ExpansionTerms terms = expansion_terms(ctx, s, k, fd_step);

    struct Item {
        double tau;
        int n_steps;
        double remainder;
    };
    const int per_tau = certify ? 2 : 1;
    std::vector<Item> items(taus.size() * per_tau);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const int base = steps(taus[i]);
        items[per_tau * i] = Item{taus[i], base, 0.0};
        if (certify) items[per_tau * i + 1] = Item{taus[i], 2 * base, 0.0};
    }
    parallel_for(static_cast<int>(items.size()), threads, [&](int idx) {
        Item& item = items[idx];
        const Trajectory traj = evolve(ctx, item.tau, item.n_steps, {s});
        Mat diff = traj.samples.back().projector();
        double weight = 1.0;
        for (int j = 0; j <= k; ++j) {
            diff -= weight * terms.terms[j];
            weight /= item.tau;
        }
        item.remainder = operator_norm(diff);
    });

    RemainderReport report;
    report.order = k;
    report.s_probe = s;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        RemainderRow row;
        row.tau = taus[i];
        row.n_steps = items[per_tau * i].n_steps;
        if (certify) {
            row.remainder = items[per_tau * i + 1].remainder;
            row.remainder_halved = items[per_tau * i].remainder;
            row.change = std::abs(row.remainder - row.remainder_halved) /
                         std::max(row.remainder, 1e-300);
            if (row.change > 0.20) {
                std::ostringstream msg;
                msg << "remainder: value at tau = " << row.tau << " moved by "
                    << row.change * 100.0 << "% under step doubling";
                throw IntegratorDominatedError(msg.str());
            }
        } else {
            row.remainder = items[per_tau * i].remainder;
            row.remainder_halved = row.remainder;
        }
        report.rows.push_back(row);
        xs.push_back(row.tau);
        ys.push_back(std::max(row.remainder, 1e-300));
    }
    report.fit = loglog_fit(xs, ys, fit_window);
    return report;
}

}  // namespace hallab
