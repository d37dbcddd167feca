// fit.hpp — log-log least squares used by every rate check
#pragma once

#include <cstddef>
#include <vector>

namespace hallab {

struct FitResult {
    double slope{0.0};
    double intercept{0.0};
    double r_squared{0.0};
    std::size_t window_begin{0};  // [begin, end) into the input arrays
    std::size_t window_end{0};
};

enum class FitWindow {
    all,         // every point
    drop_first,  // skip the smallest abscissa (least asymptotic point)
};

// Least squares on (log x, log y). All values must be positive and the
// selected window must keep at least 3 points.
FitResult loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                     FitWindow policy = FitWindow::drop_first);

}  // namespace hallab
