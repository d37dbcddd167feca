#include "hallab/adiabatic.hpp"

#include "hallab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hallab {

// ----------------------------- driving profile -----------------------------

namespace {

// Exact antiderivative of a smoothstep on [0,1], continued linearly past 1.
double smoothstep_primitive(const SmoothStep& s, double t) {
    if (t <= 0.0) return 0.0;
    const double tc = std::min(t, 1.0);
    double acc = 0.0;
    const int n = s.order;
    for (int k = n; k >= 0; --k) {
        acc = acc * tc + s.coeff[k] / (n + 2 + k);
    }
    for (int i = 0; i <= n + 1; ++i) acc *= tc;  // t^(N+2)
    if (t > 1.0) acc += t - 1.0;
    return acc;
}

}  // namespace

DrivingProfile driving_profile(ProfileKind kind, int k) {
    if (k < 1) throw std::invalid_argument("profile: smoothness k must be >= 1");
    DrivingProfile p;
    p.kind = kind;
    p.smoothness_k = k;
    // g built from a smoothstep one order above the requested smoothness of
    // g_dot.
    const SmoothStep step = SmoothStep::of_order(k + 1);
    if (kind == ProfileKind::ramp) {
        p.g = [step](double s) { return step.value(s); };
        p.g_dot = [step](double s) { return step.derivative(s); };
        p.phi = [step](double s) { return smoothstep_primitive(step, s); };
        p.integral_g = smoothstep_primitive(step, 1.0);
    } else {
        p.g = [step](double s) {
            if (s <= 0.5) return step.value(2.0 * s);
            return step.value(2.0 - 2.0 * s);
        };
        p.g_dot = [step](double s) {
            if (s <= 0.5) return 2.0 * step.derivative(2.0 * s);
            return -2.0 * step.derivative(2.0 - 2.0 * s);
        };
        p.phi = [step](double s) {
            const double half = 0.5 * smoothstep_primitive(step, 1.0);
            if (s <= 0.5) return 0.5 * smoothstep_primitive(step, 2.0 * s);
            return half +
                   0.5 * (smoothstep_primitive(step, 1.0) -
                          smoothstep_primitive(step, 2.0 - 2.0 * s));
        };
        p.integral_g = smoothstep_primitive(step, 1.0);
    }
    return p;
}

// ------------------------------- gauge frame -------------------------------

Conjugator::Conjugator(const SwitchFunction& lambda1) {
    if (lambda1.is_diagonal) {
        diagonal_ = true;
        values_ = lambda1.diag;
    } else {
        diagonal_ = false;
        Eigen::SelfAdjointEigenSolver<Mat> solver(lambda1.dense);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("conjugator: switch eigendecomposition failed");
        }
        values_ = solver.eigenvalues();
        frame_ = solver.eigenvectors();
    }
}

Mat Conjugator::gauged(const Mat& a, double phi) const {
    const auto d = a.rows();
    if (diagonal_) {
        Mat out(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                out(i, j) = a(i, j) * std::exp(kI * phi * (values_(i) - values_(j)));
            }
        }
        return out;
    }
    Vec phases(d);
    for (Eigen::Index i = 0; i < d; ++i) phases(i) = std::exp(kI * phi * values_(i));
    const Mat g = frame_ * phases.asDiagonal() * frame_.adjoint();
    return g * a * g.adjoint();
}

void Conjugator::apply_left(Mat& y, double phi) const {
    if (diagonal_) {
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            y.row(i) *= std::exp(kI * phi * values_(i));
        }
        return;
    }
    Vec phases(values_.size());
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        phases(i) = std::exp(kI * phi * values_(i));
    }
    y = frame_ * (phases.asDiagonal() * (frame_.adjoint() * y));
}

void Conjugator::apply_left_dagger(Mat& y, double phi) const {
    apply_left(y, -phi);
}

Mat gauge_hamiltonian(const Mat& hamiltonian, const Conjugator& conj, double phi) {
    return conj.gauged(hamiltonian, phi);
}

// ------------------------------ drive context ------------------------------

Mat DriveContext::gauged_projector(double s) const {
    return conj1->gauged(projector->matrix, profile.phi(s));
}

Mat DriveContext::gauged_hamiltonian(double s) const {
    return conj1->gauged(hamiltonian, profile.phi(s));
}

Mat DriveContext::projector_derivative(double s) const {
    const Mat ps = gauged_projector(s);
    const double g = profile.g(s);
    if (lambda1.is_diagonal) {
        // i g [L1, P] = -i g [P, L1]
        return (-kI * g) * commutator_with_diagonal(ps, lambda1.diag);
    }
    return (kI * g) * commutator(lambda1.dense, ps);
}

DriveContext make_drive_context(const MagneticModel& model, double fermi_energy,
                                const DrivingProfile& profile,
                                const SwitchFunction& lambda1,
                                const SwitchFunction& lambda2,
                                const TraceWindow& window, double delta_min) {
    DriveContext ctx;
    ctx.hamiltonian = model.hamiltonian;
    ctx.eig = std::make_shared<EigenSystem>(diagonalize(model));
    ctx.projector = std::make_shared<FermiProjector>(
        fermi_projector(*ctx.eig, fermi_energy, delta_min));
    ctx.profile = profile;
    ctx.lambda1 = lambda1;
    ctx.lambda2 = lambda2;
    ctx.conj1 = std::make_shared<Conjugator>(lambda1);
    ctx.window = window;
    return ctx;
}

// ------------------------------- propagation -------------------------------

int default_steps(double tau, double spectral_radius, int floor_steps) {
    const double wanted = 8.0 * spectral_radius * tau;
    int n = std::max(floor_steps, static_cast<int>(std::ceil(wanted)));
    n = ((n + 31) / 32) * 32;  // land the uniform samples on step boundaries
    return n;
}

const EvolutionState& Trajectory::at_s(double s, double tol) const {
    for (const auto& st : samples) {
        if (std::abs(st.s - s) <= tol) return st;
    }
    throw std::out_of_range("trajectory: no sample at requested s");
}

Trajectory evolve(const DriveContext& ctx, double tau, int n_steps,
                  const std::vector<double>& s_samples, bool full_propagator) {
    if (full_propagator) {
        return evolve_frame(ctx, tau, n_steps, s_samples,
                            Mat::Identity(ctx.dim(), ctx.dim()));
    }
    return evolve_frame(ctx, tau, n_steps, s_samples, ctx.projector->occupied_frame);
}

Trajectory evolve_frame(const DriveContext& ctx, double tau, int n_steps,
                        const std::vector<double>& s_samples, const Mat& initial) {
    if (tau <= 0.0) throw std::invalid_argument("evolve: tau must be > 0");
    if (n_steps < 1) throw std::invalid_argument("evolve: need at least one step");
    const int d = ctx.dim();
    if (initial.rows() != d || initial.cols() < 1) {
        throw std::invalid_argument("evolve: initial frame dimension mismatch");
    }
    const Mat& v = ctx.eig->vectors;
    const RVec& energies = ctx.eig->energies;
    const bool sw_diag = ctx.conj1->diagonal();
    const RVec& sw_vals = ctx.conj1->switch_values();

    // Work in the switch eigenframe: one pair of multiplications with
    // M = V† S per step plus diagonal phase scalings. M is applied a few
    // hundred thousand times, so its residual non-unitarity (composed from
    // two solver outputs) is polished away first; otherwise it accumulates
    // linearly into the frame defect.
    Mat m_frame = sw_diag ? Mat(v.adjoint()) : Mat(v.adjoint() * ctx.conj1->frame());
    for (int polish = 0; polish < 2; ++polish) {
        m_frame = 1.5 * m_frame - 0.5 * (m_frame * (m_frame.adjoint() * m_frame));
    }

    Mat z = initial;
    if (!sw_diag) z = ctx.conj1->frame().adjoint() * z;

    const double ds = 1.0 / n_steps;
    Vec step_phase(d);
    for (int i = 0; i < d; ++i) {
        step_phase(i) = std::exp(-kI * tau * ds * energies(i));
    }

    // Snap the requested samples onto step boundaries.
    std::vector<std::pair<int, double>> marks;  // (step index, s)
    for (double s : s_samples) {
        const int idx = static_cast<int>(std::llround(s * n_steps));
        marks.emplace_back(std::clamp(idx, 0, n_steps), static_cast<double>(idx) * ds);
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    Trajectory traj;
    traj.tau = tau;
    traj.n_steps = n_steps;

    Mat work(d, z.cols());
    auto emit = [&](int step_idx, double s) {
        EvolutionState st;
        st.tau = tau;
        st.s = s;
        st.n_steps_used = step_idx;
        Mat y = z;
        if (!sw_diag) y = ctx.conj1->frame() * y;
        st.unitarity_defect = operator_norm(
            Mat(y.adjoint() * y) - Mat::Identity(y.cols(), y.cols()));
        st.frame = std::move(y);
        if (st.unitarity_defect > 1e-9) {
            throw StepBudgetError("evolve: unitarity defect exceeded 1e-9");
        }
        traj.samples.push_back(std::move(st));
    };

    std::size_t next_mark = 0;
    while (next_mark < marks.size() && marks[next_mark].first == 0) {
        emit(0, marks[next_mark].second);
        ++next_mark;
    }
    for (int step = 0; step < n_steps; ++step) {
        const double s_mid = (step + 0.5) * ds;
        const double phi = ctx.profile.phi(s_mid);
        // z <- e^{i phi v} M† (e^{-i tau ds E} (M e^{-i phi v} z))
        for (int i = 0; i < d; ++i) {
            z.row(i) *= std::exp(-kI * phi * sw_vals(i));
        }
        work.noalias() = m_frame * z;
        for (int i = 0; i < d; ++i) {
            work.row(i) *= step_phase(i);
        }
        z.noalias() = m_frame.adjoint() * work;
        for (int i = 0; i < d; ++i) {
            z.row(i) *= std::exp(kI * phi * sw_vals(i));
        }
        while (next_mark < marks.size() && marks[next_mark].first == step + 1) {
            emit(step + 1, marks[next_mark].second);
            ++next_mark;
        }
    }
    return traj;
}

// ------------------------------ current samples ----------------------------

CurrentSample instantaneous_current(const DriveContext& ctx,
                                    const EvolutionState& state, cxd k_raw) {
    const double s = state.s;
    const Mat p_tau = state.projector();
    const Mat p_s = ctx.gauged_projector(s);
    const Mat h_s = ctx.gauged_hamiltonian(s);
    const Mat j_op = ctx.lambda2.is_diagonal
                         ? commutator_with_diagonal(h_s, ctx.lambda2.diag)
                         : commutator(h_s, ctx.lambda2.dense);

    CurrentSample out;
    out.s = s;
    out.unitarity_defect = state.unitarity_defect;
    out.current = -kI * ctx.window.product_trace(Mat(p_tau - p_s), j_op);
    out.kubo_prediction = -(kI / state.tau) * ctx.profile.g(s) * k_raw;
    out.residual = std::abs(out.current - out.kubo_prediction);
    return out;
}

ChargeResult accumulated_charge(const DriveContext& ctx, double tau, int n_steps,
                                cxd k_raw, int n_samples) {
    if (n_samples < 5 || n_samples % 2 == 0) {
        throw std::invalid_argument("charge: need an odd sample count >= 5");
    }
    std::vector<double> samples(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        samples[i] = static_cast<double>(i) / (n_samples - 1);
    }
    const Trajectory traj = evolve(ctx, tau, n_steps, samples);
    std::vector<cxd> current(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        current[i] = instantaneous_current(ctx, traj.samples[i], k_raw).current;
    }
    auto simpson = [&](int stride) {
        const double h = static_cast<double>(stride) / (n_samples - 1);
        cxd acc(0.0, 0.0);
        for (int i = 0; i + 2 * stride < n_samples; i += 2 * stride) {
            acc += (h / 3.0) *
                   (current[i] + 4.0 * current[i + stride] + current[i + 2 * stride]);
        }
        return acc;
    };
    ChargeResult out;
    const cxd fine = simpson(1);
    const cxd coarse = simpson(2);
    out.charge = tau * fine;
    out.refinement_defect = std::abs(tau * (fine - coarse));
    if (out.refinement_defect > 0.1 * std::max(std::abs(out.charge), 1e-12)) {
        throw QuadratureError("charge: Simpson refinement failed to settle");
    }
    return out;
}

// -------------------------------- tau sweep --------------------------------

TauSweepReport tau_sweep(const DriveContext& ctx, const std::vector<double>& taus,
                         double s_probe, cxd k_raw, const StepRule& steps,
                         int threads, bool certify, FitWindow fit_window) {
    if (taus.size() < 4) {
        throw std::invalid_argument("tau sweep: need at least 4 grid points");
    }
    struct Item {
        double tau;
        int n_steps;
        double residual;
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
        const Trajectory traj = evolve(ctx, item.tau, item.n_steps, {s_probe});
        const CurrentSample cur =
            instantaneous_current(ctx, traj.samples.back(), k_raw);
        item.residual = cur.residual;
    });

    TauSweepReport report;
    report.s_probe = s_probe;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        TauSweepRow row;
        row.tau = taus[i];
        row.n_steps = items[per_tau * i].n_steps;
        if (certify) {
            row.residual = items[per_tau * i + 1].residual;  // finer run
            row.residual_halved = items[per_tau * i].residual;
            row.change = std::abs(row.residual - row.residual_halved) /
                         std::max(row.residual, 1e-300);
        } else {
            row.residual = items[per_tau * i].residual;
            row.residual_halved = row.residual;
            row.change = 0.0;
        }
        report.rows.push_back(row);
        xs.push_back(row.tau);
        ys.push_back(std::max(row.residual, 1e-300));
    }
    if (certify) {
        for (const auto& row : report.rows) {
            if (row.change > 0.20) {
                std::ostringstream msg;
                msg << "tau sweep: residual at tau = " << row.tau << " moved by "
                    << row.change * 100.0 << "% under step doubling";
                throw IntegratorDominatedError(msg.str());
            }
        }
    }
    report.fit = loglog_fit(xs, ys, fit_window);
    return report;
}

}  // namespace hallab
