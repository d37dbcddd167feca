#include "hallab/model.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace hallab {

double MagneticModel::magnetic_length() const {
    if (field_B <= 0.0) throw std::logic_error("model: no field label");
    return 1.0 / std::sqrt(field_B);
}

double MagneticModel::coordinate_extent(Axis) const {
    if (backend == ModelBackend::hofstadter) {
        return static_cast<double>(lattice.width);
    }
    // Diameter of the truncation disc.
    return 2.0 * std::sqrt(2.0 * (basis->m_max() + 1) / field_B);
}

const RVec& MagneticModel::coordinate(Axis axis) const {
    if (!diagonal_positions) {
        throw std::logic_error("model: positions are dense on this backend");
    }
    return axis == Axis::x1 ? x1_diag : x2_diag;
}

std::vector<std::uint8_t> MagneticModel::packed_bytes() const {
    const int d = dim();
    std::vector<std::uint8_t> bytes;
    bytes.reserve(sizeof(std::int64_t) + 2 * d * sizeof(double) +
                  2 * d * d * sizeof(double));
    auto push = [&bytes](const void* p, std::size_t n) {
        const auto* c = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), c, c + n);
    };
    const std::int64_t dim64 = d;
    push(&dim64, sizeof(dim64));
    if (diagonal_positions) {
        push(x1_diag.data(), d * sizeof(double));
        push(x2_diag.data(), d * sizeof(double));
    }
    for (int i = 0; i < d; ++i) {  // row-major [re, im] pairs
        for (int j = 0; j < d; ++j) {
            const cxd v = hamiltonian(i, j);
            const double re = v.real(), im = v.imag();
            push(&re, sizeof(double));
            push(&im, sizeof(double));
        }
    }
    return bytes;
}

std::uint64_t MagneticModel::content_hash() const {
    const auto bytes = packed_bytes();
    return fnv1a(bytes.data(), bytes.size());
}

MagneticModel build_hofstadter(const LatticeSpec& spec, const PotentialSpec& pot,
                               double lambda, double B_label, PeierlsGauge gauge) {
    spec.validate();
    const int L = spec.width;
    const int d = L * L;
    const double phi = spec.flux();
    const double b_eff = B_label > 0.0 ? B_label : 2.0 * kPi * std::max(phi, 1.0 / (L * L));
    if (lambda < 0.0) throw std::invalid_argument("model: lambda must be >= 0");
    if (phi > 0.0 && lambda * pot.sup_norm >= b_eff && lambda * pot.sup_norm > 0.0) {
        throw std::invalid_argument(
            "model: coupling too strong, lambda * sup|V| must stay below the field");
    }
    if (gauge == PeierlsGauge::symmetric && spec.boundary == Boundary::torus) {
        throw std::invalid_argument("model: symmetric gauge supports open boundaries only");
    }

    MagneticModel model;
    model.backend = ModelBackend::hofstadter;
    model.lattice = spec;
    model.potential = pot;
    model.lambda = lambda;
    model.field_B = b_eff;
    model.diagonal_positions = true;

    const double mid = 0.5 * (L - 1);
    model.x1_diag.resize(d);
    model.x2_diag.resize(d);
    auto site = [L](int x, int y) { return x + L * y; };
    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            model.x1_diag(site(x, y)) = x - mid;
            model.x2_diag(site(x, y)) = y - mid;
        }
    }

    Mat h = Mat::Zero(d, d);
    const bool torus = spec.boundary == Boundary::torus;
    // Peierls phase on the (x -> x+1) hop; counterclockwise plaquette
    // product is exp(+2 pi i p/q) in both gauges.
    auto phase_x = [&](int /*x*/, int y) {
        if (gauge == PeierlsGauge::landau) return -2.0 * kPi * phi * (y - mid);
        return -kPi * phi * (y - mid);  // symmetric: split between both axes
    };
    auto phase_y = [&](int x, int /*y*/) {
        if (gauge == PeierlsGauge::landau) return 0.0;
        return kPi * phi * (x - mid);
    };
    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            const int i = site(x, y);
            if (x + 1 < L || torus) {
                const int j = site((x + 1) % L, y);
                const cxd t = -std::exp(kI * phase_x(x, y));
                h(j, i) += t;
                h(i, j) += std::conj(t);
            }
            if (y + 1 < L || torus) {
                const int j = site(x, (y + 1) % L);
                const cxd t = -std::exp(kI * phase_y(x, y));
                h(j, i) += t;
                h(i, j) += std::conj(t);
            }
        }
    }
    for (int i = 0; i < d; ++i) {
        const double x1 = model.x1_diag(i);
        const double x2 = model.x2_diag(i);
        const double v = torus ? pot.value_periodic(x1, x2, L) : pot.value(x1, x2);
        h(i, i) += lambda * v;
    }
    if (hermitian_defect(h) > 1e-12) {
        throw std::logic_error("model: Hofstadter Hamiltonian failed Hermiticity");
    }
    model.hamiltonian = std::move(h);
    return model;
}

MagneticModel build_landau_truncated(double field_B, int n_levels, int m_max,
                                     const PotentialSpec& pot, double lambda,
                                     double quad_tol) {
    if (lambda < 0.0) throw std::invalid_argument("model: lambda must be >= 0");
    if (lambda * pot.sup_norm >= field_B && lambda * pot.sup_norm > 0.0) {
        throw std::invalid_argument(
            "model: coupling too strong, lambda * sup|V| must stay below the field");
    }
    auto basis = std::make_shared<const LandauBasis>(field_B, n_levels, m_max);

    MagneticModel model;
    model.backend = ModelBackend::landau_basis;
    model.basis = basis;
    model.field_B = field_B;
    model.lambda = lambda;
    model.potential = pot;
    model.diagonal_positions = false;

    Mat h = basis->level_energies().asDiagonal().toDenseMatrix().cast<cxd>();
    if (lambda != 0.0 && pot.kind != PotentialKind::zero) {
        const Mat v = basis->project_scalar(
            [&pot](double x1, double x2) { return pot.value(x1, x2); }, quad_tol);
        h += lambda * v;
    }
    if (hermitian_defect(h) > 1e-12) {
        throw std::logic_error("model: Landau Hamiltonian failed Hermiticity");
    }
    model.hamiltonian = std::move(h);
    model.x1_dense = basis->position_operator(Axis::x1);
    model.x2_dense = basis->position_operator(Axis::x2);
    return model;
}

}  // namespace hallab
