#include "hallab/landau_basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace hallab {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Golub-Welsch.
void gauss_legendre(int n, RVec& nodes, RVec& weights) {
    RMat jacobi = RMat::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<RMat> solver(jacobi);
    nodes = solver.eigenvalues();
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const double v0 = solver.eigenvectors()(0, k);
        weights(k) = 2.0 * v0 * v0;
    }
}

struct Panel1d {
    RVec nodes, weights;
};

// Panels between successive break points, GL `order` points each.
Panel1d paneled_rule(const std::vector<double>& breaks, int order) {
    RVec base_nodes, base_weights;
    gauss_legendre(order, base_nodes, base_weights);
    Panel1d out;
    const int panels = static_cast<int>(breaks.size()) - 1;
    out.nodes.resize(panels * order);
    out.weights.resize(panels * order);
    int at = 0;
    for (int p = 0; p < panels; ++p) {
        const double a = breaks[p];
        const double b = breaks[p + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        for (int k = 0; k < order; ++k, ++at) {
            out.nodes(at) = mid + half * base_nodes(k);
            out.weights(at) = half * base_weights(k);
        }
    }
    return out;
}

}  // namespace

LandauBasis::LandauBasis(double field_B, int n_levels, int m_max)
    : field_b_(field_B), n_levels_(n_levels), m_max_(m_max) {
    if (field_B <= 0.0) throw std::invalid_argument("landau: field must be > 0");
    if (n_levels < 2) throw std::invalid_argument("landau: need n_levels >= 2");
    if (m_max < 0) throw std::invalid_argument("landau: m_max must be >= 0");
    if (n_levels > 6 || m_max > 64) {
        throw std::invalid_argument(
            "landau: truncation beyond n_levels = 6 or m_max = 64 exceeds the "
            "double-precision budget of the polynomial tables");
    }

    const double b = field_b_;
    const cxd ia_scale = kI / std::sqrt(2.0 * b);   // a† = ia_scale (B w - 2 d/dwbar)
    const double bb_scale = std::sqrt(b / 2.0);     // b† = bb_scale (wbar - (2/B) d/dw)

    auto make = [&](int dw, int dwb) {
        Poly p;
        p.deg_w = dw;
        p.deg_wbar = dwb;
        p.c.assign((dw + 1) * (dwb + 1), cxd(0.0, 0.0));
        return p;
    };
    auto at = [](Poly& p, int i, int j) -> cxd& {
        return p.c[i * (p.deg_wbar + 1) + j];
    };

    // Raising in the level index: p -> ia_scale * (B w p - 2 dp/dwbar).
    auto raise_n = [&](const Poly& p) {
        Poly out = make(p.deg_w + 1, p.deg_wbar);
        for (int i = 0; i <= p.deg_w; ++i) {
            for (int j = 0; j <= p.deg_wbar; ++j) {
                const cxd v = p.at(i, j);
                if (v == cxd(0.0, 0.0)) continue;
                at(out, i + 1, j) += ia_scale * b * v;
                if (j >= 1) at(out, i, j - 1) -= ia_scale * 2.0 * static_cast<double>(j) * v;
            }
        }
        return out;
    };
    // Raising in the guiding index: p -> bb_scale * (wbar p - (2/B) dp/dw).
    auto raise_m = [&](const Poly& p) {
        Poly out = make(p.deg_w, p.deg_wbar + 1);
        for (int i = 0; i <= p.deg_w; ++i) {
            for (int j = 0; j <= p.deg_wbar; ++j) {
                const cxd v = p.at(i, j);
                if (v == cxd(0.0, 0.0)) continue;
                at(out, i, j + 1) += bb_scale * v;
                if (i >= 1) at(out, i - 1, j) -= bb_scale * (2.0 / b) * static_cast<double>(i) * v;
            }
        }
        return out;
    };
    auto scaled = [](Poly p, double factor) {
        for (auto& c : p.c) c *= factor;
        return p;
    };

    polys_.resize(dim());
    Poly ground = make(0, 0);
    ground.c[0] = cxd(std::sqrt(field_b_ / (2.0 * kPi)), 0.0);

    Poly row = ground;  // n = 0 ladder in m
    for (int m = 0; m <= m_max_; ++m) {
        if (m > 0) row = scaled(raise_m(row), 1.0 / std::sqrt(static_cast<double>(m)));
        Poly col = row;
        for (int n = 0; n < n_levels_; ++n) {
            if (n > 0) col = scaled(raise_n(col), 1.0 / std::sqrt(static_cast<double>(n)));
            polys_[index(n, m)] = col;
        }
    }
}

cxd LandauBasis::evaluate_poly(const Poly& p, cxd w) const {
    // Horner in w, inner Horner in conj(w).
    const cxd wb = std::conj(w);
    cxd acc(0.0, 0.0);
    for (int i = p.deg_w; i >= 0; --i) {
        cxd inner(0.0, 0.0);
        for (int j = p.deg_wbar; j >= 0; --j) {
            inner = inner * wb + p.at(i, j);
        }
        acc = acc * w + inner;
    }
    return acc;
}

cxd LandauBasis::evaluate(int n, int m, double x1, double x2) const {
    const cxd w(x1, x2);
    const double r2 = x1 * x1 + x2 * x2;
    return evaluate_poly(polys_[index(n, m)], w) * std::exp(-field_b_ * r2 / 4.0);
}

RVec LandauBasis::level_energies() const {
    RVec e(dim());
    for (int n = 0; n < n_levels_; ++n) {
        for (int m = 0; m <= m_max_; ++m) {
            e(index(n, m)) = (2.0 * n + 1.0) * field_b_;
        }
    }
    return e;
}

Mat LandauBasis::number_operator() const {
    Mat num = Mat::Zero(dim(), dim());
    for (int n = 0; n < n_levels_; ++n) {
        for (int m = 0; m <= m_max_; ++m) {
            num(index(n, m), index(n, m)) = static_cast<double>(n);
        }
    }
    return num;
}

Mat LandauBasis::position_operator(Axis axis) const {
    // x1 = (b + b† + i a - i a†) / sqrt(2B)
    // x2 = (-i b + i b† - a - a†) / sqrt(2B)
    const double scale = 1.0 / std::sqrt(2.0 * field_b_);
    Mat x = Mat::Zero(dim(), dim());
    for (int n = 0; n < n_levels_; ++n) {
        for (int m = 0; m <= m_max_; ++m) {
            const int k = index(n, m);
            if (m + 1 <= m_max_) {
                const double amp = scale * std::sqrt(m + 1.0);
                const int up = index(n, m + 1);  // b†: |n, m+1><n, m|
                if (axis == Axis::x1) {
                    x(up, k) += amp;
                    x(k, up) += amp;
                } else {
                    x(up, k) += cxd(0.0, amp);
                    x(k, up) += cxd(0.0, -amp);
                }
            }
            if (n + 1 < n_levels_) {
                const double amp = scale * std::sqrt(n + 1.0);
                const int up = index(n + 1, m);  // a†: |n+1, m><n, m|
                if (axis == Axis::x1) {
                    x(up, k) += cxd(0.0, -amp);
                    x(k, up) += cxd(0.0, amp);
                } else {
                    x(up, k) += cxd(-amp, 0.0);
                    x(k, up) += cxd(-amp, 0.0);
                }
            }
        }
    }
    return x;
}

Mat LandauBasis::quadrature_matrix(const std::function<double(double, double)>& f,
                                   int order, const std::vector<double>& x1_breaks,
                                   const std::vector<double>& x2_breaks) const {
    // Integration box: the normalized states at this truncation are
    // negligible beyond r ~ sqrt(2(m_max + n_levels)/B) + tails.
    const double reach = std::sqrt(2.0 * (m_max_ + n_levels_ + 1) / field_b_);
    const double box = reach + 18.0 / std::sqrt(field_b_);

    auto make_breaks = [&](const std::vector<double>& interior) {
        std::vector<double> breaks{-box};
        for (double b : interior) {
            if (b > -box && b < box) breaks.push_back(b);
        }
        breaks.push_back(box);
        std::sort(breaks.begin(), breaks.end());
        // Cap panel width so the Gaussian envelope is resolved everywhere.
        std::vector<double> out{breaks.front()};
        const double cap = 0.5 * box;
        for (std::size_t i = 1; i < breaks.size(); ++i) {
            double left = out.back();
            const int extra = static_cast<int>((breaks[i] - left) / cap);
            for (int k = 1; k <= extra; ++k) {
                out.push_back(left + (breaks[i] - left) * k / (extra + 1));
            }
            out.push_back(breaks[i]);
        }
        return out;
    };

    const Panel1d rule_x1 = paneled_rule(make_breaks(x1_breaks), order);
    const Panel1d rule_x2 = paneled_rule(make_breaks(x2_breaks), order);

    const int d = dim();
    const int n1 = static_cast<int>(rule_x1.nodes.size());
    const int n2 = static_cast<int>(rule_x2.nodes.size());
    Mat acc = Mat::Zero(d, d);

    Mat phi(d, n2);  // basis values along one x1 slice
    Vec wf(n2);
    for (int ix = 0; ix < n1; ++ix) {
        const double x1 = rule_x1.nodes(ix);
        for (int iy = 0; iy < n2; ++iy) {
            const double x2 = rule_x2.nodes(iy);
            const cxd w(x1, x2);
            const double gauss = std::exp(-field_b_ * (x1 * x1 + x2 * x2) / 4.0);
            for (int k = 0; k < d; ++k) {
                phi(k, iy) = evaluate_poly(polys_[k], w) * gauss;
            }
            wf(iy) = rule_x1.weights(ix) * rule_x2.weights(iy) * f(x1, x2);
        }
        acc.noalias() += phi.conjugate() * wf.asDiagonal() * phi.transpose();
    }
    // Symmetrize: the integrand is Hermitian, quadrature roundoff is not.
    return 0.5 * (acc + Mat(acc.adjoint()));
}

Mat LandauBasis::project_scalar(const std::function<double(double, double)>& f,
                                double tol, int* order_used,
                                const std::vector<double>& x1_breaks,
                                const std::vector<double>& x2_breaks) const {
    int order = 48;
    Mat coarse = quadrature_matrix(f, order, x1_breaks, x2_breaks);
    for (int round = 0; round < 3; ++round) {
        Mat fine = quadrature_matrix(f, 2 * order, x1_breaks, x2_breaks);
        const double change = (fine - coarse).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
        if (change <= tol * scale) {
            if (order_used) *order_used = 2 * order;
            return fine;
        }
        coarse = std::move(fine);
        order *= 2;
    }
    throw QuadratureError("landau: matrix elements did not settle under order doubling");
}

double LandauBasis::gram_defect(int order) const {
    const Mat gram =
        quadrature_matrix([](double, double) { return 1.0; }, order, {}, {});
    return (gram - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

}  // namespace hallab
