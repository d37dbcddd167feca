#include "hallab/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace hallab {

FitResult loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                     FitWindow policy) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("loglog_fit: size mismatch");
    }
    std::size_t begin = (policy == FitWindow::drop_first && xs.size() > 3) ? 1 : 0;
    std::size_t end = xs.size();
    if (end - begin < 3) {
        throw std::invalid_argument("loglog_fit: window needs at least 3 points");
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw std::invalid_argument("loglog_fit: nonpositive input");
        }
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw std::invalid_argument("loglog_fit: degenerate abscissae");
    }

    FitResult fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.window_begin = begin;
    fit.window_end = end;

    const double sst = syy - sy * sy / n;
    if (sst <= 0.0) {
        fit.r_squared = 1.0;  // ys constant in log space
    } else {
        double ssr = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double pred = fit.intercept + fit.slope * std::log(xs[i]);
            const double r = std::log(ys[i]) - pred;
            ssr += r * r;
        }
        fit.r_squared = 1.0 - ssr / sst;
    }
    return fit;
}

}  // namespace hallab
