#include "hallab/lattice.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hallab {

void LatticeSpec::validate() const {
    if (width < 2) throw std::invalid_argument("lattice: width must be >= 2");
    if (flux_q < 1) throw std::invalid_argument("lattice: q must be >= 1");
    if (flux_p < 0 || flux_p >= flux_q) {
        // p = 0 (zero flux) is allowed; otherwise 0 < p < q.
        if (!(flux_p == 0 && flux_q == 1)) {
            throw std::invalid_argument("lattice: flux requires 0 <= p < q");
        }
    }
    if (flux_p > 0 && std::gcd(flux_p, flux_q) != 1) {
        throw std::invalid_argument("lattice: (p, q) must be coprime");
    }
    if (width < 2 * flux_q) {
        throw std::invalid_argument(
            "lattice: need at least two magnetic unit cells per side (L >= 2q)");
    }
    if (boundary == Boundary::torus && width % flux_q != 0) {
        throw std::invalid_argument("lattice: torus flux must be commensurate (q | L)");
    }
}

double PotentialSpec::value(double x1, double x2) const {
    switch (kind) {
        case PotentialKind::zero:
            return 0.0;
        case PotentialKind::gaussian_bumps: {
            double v = 0.0;
            for (const auto& b : bumps) {
                const double dx = x1 - b.x1;
                const double dy = x2 - b.x2;
                v += b.amplitude *
                     std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
            }
            return v;
        }
        case PotentialKind::cosine:
            return cosine_amplitude * std::cos(cosine_k1 * x1) * std::cos(cosine_k2 * x2);
    }
    return 0.0;
}

double PotentialSpec::value_periodic(double x1, double x2, double period) const {
    if (kind != PotentialKind::gaussian_bumps) return value(x1, x2);
    auto wrap = [period](double d) {
        d = std::fmod(d, period);
        if (d > 0.5 * period) d -= period;
        if (d < -0.5 * period) d += period;
        return d;
    };
    double v = 0.0;
    for (const auto& b : bumps) {
        const double dx = wrap(x1 - b.x1);
        const double dy = wrap(x2 - b.x2);
        v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
    }
    return v;
}

PotentialSpec PotentialSpec::normalized_bumps(std::vector<GaussianBump> bumps,
                                              double sup) {
    PotentialSpec spec;
    spec.kind = PotentialKind::gaussian_bumps;
    spec.bumps = std::move(bumps);
    if (spec.bumps.empty()) {
        spec.kind = PotentialKind::zero;
        spec.sup_norm = 0.0;
        return spec;
    }
    // Bumps may overlap: scan a fine grid over their union for the sup.
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300, wmax = 0.0;
    for (const auto& b : spec.bumps) {
        lo1 = std::min(lo1, b.x1);
        hi1 = std::max(hi1, b.x1);
        lo2 = std::min(lo2, b.x2);
        hi2 = std::max(hi2, b.x2);
        wmax = std::max(wmax, b.width);
    }
    const double pad = 3.0 * wmax;
    double peak = 0.0;
    double best_x = lo1, best_y = lo2;
    const int n = 241;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = lo1 - pad + (hi1 - lo1 + 2 * pad) * i / (n - 1);
            const double y = lo2 - pad + (hi2 - lo2 + 2 * pad) * j / (n - 1);
            const double v = std::abs(spec.value(x, y));
            if (v > peak) {
                peak = v;
                best_x = x;
                best_y = y;
            }
        }
    }
    if (peak <= 0.0) throw std::invalid_argument("potential: vanishing bump set");
    // Local hill climb from the best grid point pins the true sup.
    double step = (hi1 - lo1 + 2 * pad) / (n - 1);
    for (int round = 0; round < 60; ++round) {
        bool moved = false;
        for (const auto& [dx, dy] : {std::pair{step, 0.0}, {-step, 0.0},
                                     {0.0, step}, {0.0, -step}}) {
            const double v = std::abs(spec.value(best_x + dx, best_y + dy));
            if (v > peak) {
                peak = v;
                best_x += dx;
                best_y += dy;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
        if (step < 1e-12) break;
    }
    const double scale = sup / peak;
    for (auto& b : spec.bumps) b.amplitude *= scale;
    spec.sup_norm = sup;
    return spec;
}

PotentialSpec PotentialSpec::zero_potential() {
    PotentialSpec spec;
    spec.kind = PotentialKind::zero;
    spec.sup_norm = 0.0;
    return spec;
}

}  // namespace hallab
