#include "hallab/common.hpp"

#include <cmath>
#include <cstdio>

namespace hallab {

double operator_norm(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    // sqrt of the top eigenvalue of A†A.
    const Mat gram = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<Mat> solver(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double hermitian_defect(const Mat& a) {
    const double scale = std::max(1.0, a.norm());
    return (a - a.adjoint()).norm() / scale;
}

double antihermitian_defect(const Mat& a) {
    const double scale = std::max(1.0, a.norm());
    return (a + a.adjoint()).norm() / scale;
}

Mat commutator_with_diagonal(const Mat& h, const RVec& v) {
    const auto n = h.rows();
    Mat out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = h(i, j) * (v(j) - v(i));
        }
    }
    return out;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace hallab
