#include "hallab/kubo.hpp"

#include "hallab/parallel.hpp"
#include "hallab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hallab {

TraceWindow TraceWindow::all() { return TraceWindow{}; }

TraceWindow TraceWindow::bulk_margin(const MagneticModel& model, double margin) {
    if (model.backend != ModelBackend::hofstadter) {
        return all();  // non-spatial basis: the full trace is the object
    }
    const double keep = 0.5 * model.lattice.width - margin;
    if (keep <= 0.5) {
        throw std::invalid_argument("window: margin leaves no bulk sites");
    }
    TraceWindow w;
    w.weights = RVec::Zero(model.dim());
    const RVec& x1 = model.coordinate(Axis::x1);
    const RVec& x2 = model.coordinate(Axis::x2);
    for (Eigen::Index i = 0; i < w.weights.size(); ++i) {
        if (std::abs(x1(i)) <= keep && std::abs(x2(i)) <= keep) w.weights(i) = 1.0;
    }
    if (w.weights.sum() < 1.0) {
        throw std::invalid_argument("window: empty bulk window");
    }
    return w;
}

cxd TraceWindow::trace(const Mat& a) const {
    if (is_identity()) return a.trace();
    cxd t(0.0, 0.0);
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights(i) != 0.0) t += weights(i) * a(i, i);
    }
    return t;
}

cxd TraceWindow::product_trace(const Mat& a, const Mat& b) const {
    const auto d = a.rows();
    cxd acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!is_identity() && weights(i) == 0.0) continue;
        cxd diag(0.0, 0.0);
        for (Eigen::Index k = 0; k < d; ++k) diag += a(i, k) * b(k, i);
        acc += (is_identity() ? 1.0 : weights(i)) * diag;
    }
    return acc;
}

ConductanceResult kubo_streda_trace(const FermiProjector& p,
                                    const SwitchFunction& lambda1,
                                    const SwitchFunction& lambda2,
                                    const TraceWindow& window) {
    p.require_certified();
    const Mat& proj = p.matrix;
    const int d = static_cast<int>(proj.rows());
    if (lambda1.dim() != d || lambda2.dim() != d) {
        throw std::invalid_argument("kubo: switch/projector dimension mismatch");
    }

    auto com = [&](const SwitchFunction& sw) {
        return sw.is_diagonal ? commutator_with_diagonal(proj, sw.diag)
                              : commutator(proj, sw.dense);
    };
    const Mat a = com(lambda1);
    const Mat b = com(lambda2);
    const Mat inner = a * b - b * a;
    const Mat sandwich = proj * inner * proj;

    ConductanceResult out;
    out.raw_trace = window.trace(sandwich);
    out.full_trace = sandwich.trace();

    const Mat p1p = proj * lambda1.as_matrix() * proj;
    const Mat p2p = proj * lambda2.as_matrix() * proj;
    out.cyclic_trace = (p1p * p2p - p2p * p1p).trace();

    if (lambda1.is_diagonal && lambda2.is_diagonal) {
        out.switches_commute = true;
    } else {
        const Mat l1 = lambda1.as_matrix();
        const Mat l2 = lambda2.as_matrix();
        out.switches_commute = commutator(l1, l2).norm() <= 1e-12 * l1.norm() * l2.norm();
    }
    const double mag = std::abs(out.raw_trace);
    out.imag_purity = mag > 0.0 ? std::abs(out.raw_trace.real()) / mag : 0.0;
    return out;
}

cxd calibrate_convention(const ConductanceResult& reference, int oracle) {
    if (oracle == 0) throw std::invalid_argument("calibrate: oracle must be nonzero");
    if (std::abs(reference.raw_trace) == 0.0) {
        throw std::invalid_argument("calibrate: vanishing reference trace");
    }
    return reference.raw_trace / static_cast<double>(oracle);
}

double normalized_value(cxd raw_trace, cxd convention_constant) {
    if (std::abs(convention_constant) == 0.0) {
        throw std::invalid_argument("normalize: convention constant not calibrated");
    }
    return (raw_trace / convention_constant).real();
}

// ------------------------------ Chern oracle -------------------------------

int diophantine_chern(int p, int q, int lowest_bands) {
    // r = q s + p t with |t| <= q/2; the Chern number of the r lowest bands
    // is t.
    if (p == 0) return 0;
    for (int t = -q / 2; t <= q / 2; ++t) {
        const int rem = lowest_bands - p * t;
        if (rem % q == 0) return t;
    }
    throw std::logic_error("diophantine: no admissible solution");
}

namespace {

// Bloch Hamiltonian of the flux-p/q hopping model: q x q at each k. The
// k2 direction is sampled over all q magnetic zones so the family is
// strictly periodic on the sampled torus; the resulting integer is q times
// the per-zone Chern number.
Mat harper_bloch(int p, int q, double k1, double k2) {
    Mat h = Mat::Zero(q, q);
    const double phi = static_cast<double>(p) / q;
    for (int j = 0; j < q; ++j) {
        h(j, j) = -2.0 * std::cos(k1 - 2.0 * kPi * phi * j);
        const int jn = (j + 1) % q;
        h(jn, j) += -std::exp(kI * k2);
        h(j, jn) += -std::exp(-kI * k2);
    }
    return h;
}

struct FhsOutcome {
    double sum{0.0};     // total curvature / 2 pi over the sampled torus
    double residue{0.0};
    bool admissible{true};
};

FhsOutcome fhs_pass(int p, int q, int bands, int n1, int n2) {
    // Occupied frames on the grid.
    std::vector<Mat> frames(static_cast<std::size_t>(n1) * n2);
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const double k1 = 2.0 * kPi * i / n1;
            const double k2 = 2.0 * kPi * j / n2;
            Eigen::SelfAdjointEigenSolver<Mat> solver(harper_bloch(p, q, k1, k2));
            frames[i * n2 + j] = solver.eigenvectors().leftCols(bands);
        }
    }
    auto link = [&](int i, int j, int di, int dj) -> cxd {
        const Mat& a = frames[i * n2 + j];
        const Mat& b = frames[((i + di) % n1) * n2 + (j + dj) % n2];
        const cxd det = Mat(a.adjoint() * b).determinant();
        return det;
    };

    FhsOutcome out;
    double acc = 0.0;
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const cxd u1 = link(i, j, 1, 0);
            const cxd u2 = link((i + 1) % n1, j, 0, 1);
            const cxd u3 = link(i, (j + 1) % n2, 1, 0);
            const cxd u4 = link(i, j, 0, 1);
            if (std::abs(u1) < 1e-12 || std::abs(u2) < 1e-12 ||
                std::abs(u3) < 1e-12 || std::abs(u4) < 1e-12) {
                out.admissible = false;
                return out;
            }
            const double f = std::arg(u1 * u2 / (u3 * u4));
            if (std::abs(f) > 0.98 * kPi) out.admissible = false;
            acc += f;
        }
    }
    out.sum = acc / (2.0 * kPi);
    out.residue = std::abs(out.sum - std::round(out.sum));
    return out;
}

}  // namespace

ChernResult chern_fhs(const LatticeSpec& spec, int lowest_bands, int grid_per_mbz) {
    spec.validate();
    if (spec.boundary != Boundary::torus) {
        throw std::invalid_argument("chern: torus boundary required");
    }
    const int q = spec.flux_q;
    const int p = spec.flux_p;
    if (lowest_bands < 1 || lowest_bands > q) {
        throw std::invalid_argument("chern: band count must lie in [1, q]");
    }
    if (p == 0) {
        return ChernResult{0, 0.0, grid_per_mbz};
    }

    int grid = grid_per_mbz;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const FhsOutcome pass = fhs_pass(p, q, lowest_bands, grid, grid * q);
        if (pass.admissible && pass.residue <= 0.1) {
            const double per_zone = pass.sum / q;
            const int chern = static_cast<int>(std::llround(per_zone));
            const double zone_residue = std::abs(per_zone - chern);
            if (zone_residue <= 0.1) {
                return ChernResult{chern, zone_residue, grid};
            }
        }
        grid *= 2;
    }
    throw QuadratureError(
        "chern: curvature residue stayed above 0.1 after doubling the grid");
}

// ---------------------------- coupling stability ----------------------------

StabilityReport lambda_stability_sweep(
    const std::function<MagneticModel(double)>& family,
    const std::vector<double>& lambda_grid, int occupied_target,
    const SwitchGeometry& switches, cxd convention_constant,
    double window_margin, int threads, double delta_min) {
    struct Slot {
        bool kept{false};
        StabilityPoint point;
        std::string reason;
    };
    std::vector<Slot> slots(lambda_grid.size());

    parallel_for(static_cast<int>(lambda_grid.size()), threads, [&](int i) {
        const double lambda = lambda_grid[i];
        try {
            const MagneticModel model = family(lambda);
            const EigenSystem eig = diagonalize(model);
            const double fermi = midgap_energy(eig, occupied_target);
            const FermiProjector p = fermi_projector(eig, fermi, delta_min);
            p.require_certified();
            const SwitchFunction l1 = make_switch(Axis::x1, switches.half_width,
                                                  switches.order, model, switches.center1);
            const SwitchFunction l2 = make_switch(Axis::x2, switches.half_width,
                                                  switches.order, model, switches.center2);
            const TraceWindow window = TraceWindow::bulk_margin(model, window_margin);
            const ConductanceResult k = kubo_streda_trace(p, l1, l2, window);
            slots[i].kept = true;
            slots[i].point = StabilityPoint{lambda, p.fermi_margin, k.raw_trace,
                                            normalized_value(k.raw_trace,
                                                             convention_constant)};
        } catch (const NoGapError& e) {
            slots[i].reason = e.what();
        }
    });

    StabilityReport report;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].kept) {
            report.points.push_back(slots[i].point);
        } else {
            report.dropped.emplace_back(lambda_grid[i], slots[i].reason);
        }
    }
    if (report.points.empty()) {
        throw EmptyGridError("stability: no coupling retained a certified gap");
    }
    double lo = report.points.front().normalized;
    double hi = lo;
    for (const auto& pt : report.points) {
        lo = std::min(lo, pt.normalized);
        hi = std::max(hi, pt.normalized);
    }
    report.max_deviation = hi - lo;
    return report;
}

}  // namespace hallab
