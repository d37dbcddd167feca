#include "hallab/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace hallab {

double EigenSystem::spectral_radius() const {
    if (energies.size() == 0) return 0.0;
    return std::max(std::abs(energies(0)), std::abs(energies(energies.size() - 1)));
}

EigenSystem diagonalize(const Mat& hamiltonian) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0) {
        throw std::invalid_argument("diagonalize: square nonempty matrix required");
    }
    if (hermitian_defect(hamiltonian) > 1e-12) {
        throw std::invalid_argument("diagonalize: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Mat> solver(hamiltonian);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("diagonalize: eigensolver failed");
    }
    EigenSystem eig;
    eig.energies = solver.eigenvalues();
    eig.vectors = solver.eigenvectors();

    // Deterministic phase: rotate each column so its first entry of
    // near-maximal modulus is real positive.
    const int d = eig.dim();
    for (int k = 0; k < d; ++k) {
        double peak = 0.0;
        for (int i = 0; i < d; ++i) peak = std::max(peak, std::abs(eig.vectors(i, k)));
        int anchor = 0;
        for (int i = 0; i < d; ++i) {
            if (std::abs(eig.vectors(i, k)) >= 0.5 * peak) {
                anchor = i;
                break;
            }
        }
        const cxd v = eig.vectors(anchor, k);
        if (std::abs(v) > 0.0) eig.vectors.col(k) *= std::conj(v) / std::abs(v);
    }

    const Mat defect = hamiltonian * eig.vectors -
                       eig.vectors * eig.energies.asDiagonal().toDenseMatrix().cast<cxd>();
    eig.residual = defect.colwise().norm().maxCoeff();
    const double scale = std::max(1.0, eig.spectral_radius());
    if (eig.residual > 1e-10 * scale) {
        throw std::runtime_error("diagonalize: residual above tolerance");
    }
    return eig;
}

EigenSystem diagonalize(const MagneticModel& model) {
    return diagonalize(model.hamiltonian);
}

GapInfo FermiProjector::gap() const {
    GapInfo info;
    info.band_index = occupied_count;
    info.gap_lower = gap_lower;
    info.gap_upper = gap_upper;
    info.fermi_margin = fermi_margin;
    return info;
}

void FermiProjector::require_certified(double threshold) const {
    const double t = threshold >= 0.0 ? threshold : delta_min;
    if (!(fermi_margin >= t) || occupied_count <= 0 ||
        occupied_count >= static_cast<int>(matrix.rows())) {
        throw NoGapError("fermi: gap not certified at the requested threshold");
    }
}

FermiProjector fermi_projector(const EigenSystem& eig, double fermi_energy,
                               double delta_min) {
    const int d = eig.dim();
    const double radius = std::max(1.0, eig.spectral_radius());
    const double threshold = delta_min >= 0.0 ? delta_min : 1e-3 * radius;

    int occupied = 0;
    while (occupied < d && eig.energies(occupied) < fermi_energy) ++occupied;
    for (int i = 0; i < d; ++i) {
        if (std::abs(eig.energies(i) - fermi_energy) < 1e-8 * radius) {
            throw std::invalid_argument("fermi: level within 1e-8 of the Fermi energy");
        }
    }

    FermiProjector p;
    p.fermi_energy = fermi_energy;
    p.occupied_count = occupied;
    p.delta_min = threshold;
    p.gap_lower = occupied > 0 ? eig.energies(occupied - 1) : -1e300;
    p.gap_upper = occupied < d ? eig.energies(occupied) : 1e300;
    p.gap_width = p.gap_upper - p.gap_lower;
    p.fermi_margin = std::min(fermi_energy - p.gap_lower, p.gap_upper - fermi_energy);

    if (occupied > 0 && occupied < d && p.fermi_margin < threshold) {
        throw NoGapError("fermi: margin below the certification threshold");
    }

    p.occupied_frame = eig.vectors.leftCols(occupied);
    p.matrix = p.occupied_frame * p.occupied_frame.adjoint();
    return p;
}

double midgap_energy(const EigenSystem& eig, int occupied) {
    if (occupied <= 0 || occupied >= eig.dim()) {
        throw std::invalid_argument("midgap: occupied count must split the spectrum");
    }
    return 0.5 * (eig.energies(occupied - 1) + eig.energies(occupied));
}

Mat riesz_sandwich(const EigenSystem& eig, double fermi_energy, const Mat& c) {
    const int d = eig.dim();
    if (c.rows() != d || c.cols() != d) {
        throw std::invalid_argument("riesz: dimension mismatch");
    }
    int occupied = 0;
    while (occupied < d && eig.energies(occupied) < fermi_energy) ++occupied;
    if (occupied == 0 || occupied == d) {
        // Contour encloses nothing (or everything): both blocks are empty.
        return Mat::Zero(d, d);
    }
    const double margin = std::min(fermi_energy - eig.energies(occupied - 1),
                                   eig.energies(occupied) - fermi_energy);
    if (!(margin > 0.0)) throw NoGapError("riesz: Fermi energy not inside a gap");

    Mat tilde = eig.vectors.adjoint() * c * eig.vectors;
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const bool m_occ = m < occupied;
            const bool n_occ = n < occupied;
            if (m_occ == n_occ) {
                tilde(m, n) = cxd(0.0, 0.0);
            } else if (m_occ) {
                tilde(m, n) /= (eig.energies(n) - eig.energies(m));
            } else {
                tilde(m, n) /= (eig.energies(m) - eig.energies(n));
            }
        }
    }
    return eig.vectors * tilde * eig.vectors.adjoint();
}

Mat spectral_function(const EigenSystem& eig, const std::function<cxd(double)>& f) {
    const int d = eig.dim();
    Vec fe(d);
    for (int i = 0; i < d; ++i) fe(i) = f(eig.energies(i));
    return eig.vectors * fe.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace hallab
