#include "hallab/diagnostics.hpp"

#include "hallab/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace hallab {

DecayProfile kernel_decay(const Mat& op, const MagneticModel& model, Axis axis,
                          double region_halfwidth, DecaySide side) {
    if (!model.diagonal_positions) {
        throw std::invalid_argument("decay: spatial shells need site coordinates");
    }
    if (op.rows() != model.dim()) {
        throw std::invalid_argument("decay: operator/model dimension mismatch");
    }
    const RVec& coords = model.coordinate(axis);

    auto shell_distance = [&](double x) {
        switch (side) {
            case DecaySide::positive:
                return x - region_halfwidth;
            case DecaySide::negative:
                return -x - region_halfwidth;
            case DecaySide::both:
            default:
                return std::abs(x) - region_halfwidth;
        }
    };

    double max_dist = 0.0;
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
        max_dist = std::max(max_dist, shell_distance(coords(i)));
    }
    DecayProfile profile;
    profile.axis = axis;
    const int shells = static_cast<int>(std::floor(max_dist));
    for (int d = 1; d <= shells; ++d) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < coords.size(); ++i) {
            const double dist = shell_distance(coords(i));
            if (dist > d - 1 && dist <= d) rows.push_back(i);
        }
        if (rows.empty()) continue;
        Mat block(rows.size(), op.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) block.row(r) = op.row(rows[r]);
        profile.distances.push_back(static_cast<double>(d));
        profile.norms.push_back(operator_norm(block));
    }

    // Exponential-decay rate: slope of log(norm) vs distance over nonzero
    // shells.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < profile.norms.size(); ++i) {
        if (profile.norms[i] <= 1e-14) continue;
        const double x = profile.distances[i];
        const double y = std::log(profile.norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    profile.fit_exponent =
        n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return profile;
}

LightconeReport lightcone_check(const DriveContext& ctx, const MagneticModel& model,
                                double tau, const Vec& initial, int n_steps,
                                int n_samples) {
    if (!model.diagonal_positions) {
        throw std::invalid_argument("lightcone: spreads need site coordinates");
    }
    if (std::abs(initial.norm() - 1.0) > 1e-8) {
        throw std::invalid_argument("lightcone: initial state must be normalized");
    }
    std::vector<double> samples(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        samples[i] = static_cast<double>(i) / (n_samples - 1);
    }
    const Trajectory traj = evolve_frame(ctx, tau, n_steps, samples, initial);

    const RVec& x2 = model.coordinate(Axis::x2);
    const double reflect_at = model.lattice.width / 3.0;

    LightconeReport report;
    for (const auto& st : traj.samples) {
        double mean = 0.0, mean2 = 0.0;
        for (Eigen::Index i = 0; i < x2.size(); ++i) {
            const double w = std::norm(st.frame(i, 0));
            mean += w * x2(i);
            mean2 += w * x2(i) * x2(i);
        }
        report.times.push_back(tau * st.s);
        report.spreads.push_back(std::sqrt(std::max(0.0, mean2 - mean * mean)));
    }
    for (double s : report.spreads) {
        if (s > reflect_at) report.boundary_reflection = true;
    }

    // log-log slope over the pre-reflection window (t > 0).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 1; i < report.times.size(); ++i) {
        if (report.spreads[i] > reflect_at) break;
        if (report.spreads[i] <= 0.0) continue;
        const double x = std::log(report.times[i]);
        const double y = std::log(report.spreads[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    report.growth_exponent =
        n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return report;
}

Vec filtered_packet(const DriveContext& ctx, const MagneticModel& model,
                    double width, double energy_cut) {
    const RVec& x1 = model.coordinate(Axis::x1);
    const RVec& x2 = model.coordinate(Axis::x2);
    Vec psi(model.dim());
    for (int i = 0; i < model.dim(); ++i) {
        const double r2 = x1(i) * x1(i) + x2(i) * x2(i);
        psi(i) = std::exp(-r2 / (2.0 * width * width));
    }
    const Mat filter = spectral_function(
        *ctx.eig, [energy_cut](double e) { return e < energy_cut ? 1.0 : 0.0; });
    psi = filter * psi;
    const double norm = psi.norm();
    if (norm < 1e-10) {
        throw std::invalid_argument("packet: filter removed the entire state");
    }
    return psi / norm;
}

double energy_bound_check(const DriveContext& ctx, double tau, int m_power,
                          int n_steps, const std::vector<double>& s_samples) {
    if (m_power < 0) throw std::invalid_argument("energy bound: m must be >= 0");
    const Trajectory traj =
        evolve(ctx, tau, n_steps, s_samples, /*full_propagator=*/true);

    // Shift so the spectrum starts at 1.
    const double e_min = ctx.eig->energies(0);
    const int d = ctx.dim();
    Vec up(d), down(d);
    for (int i = 0; i < d; ++i) {
        const double e = ctx.eig->energies(i) - e_min + 1.0;
        up(i) = std::pow(e, 0.5 * m_power);
        down(i) = std::pow(e, -0.5 * m_power);
    }

    double worst = 0.0;
    for (const auto& si : traj.samples) {
        Mat wi = ctx.eig->vectors;
        ctx.conj1->apply_left(wi, ctx.profile.phi(si.s));
        const Mat hi_down = wi * down.asDiagonal() * wi.adjoint();
        for (const auto& sj : traj.samples) {
            Mat wj = ctx.eig->vectors;
            ctx.conj1->apply_left(wj, ctx.profile.phi(sj.s));
            const Mat hj_up = wj * up.asDiagonal() * wj.adjoint();
            // U_tau(s_i, s_j) = U(s_i, 0) U(s_j, 0)†
            const Mat u_ij = si.frame * sj.frame.adjoint();
            worst = std::max(worst, operator_norm(hi_down * u_ij * hj_up));
        }
    }
    return worst;
}

}  // namespace hallab
