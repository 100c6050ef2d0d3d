#pragma once

#include "smallgain/linalg.hpp"

#include <functional>
#include <optional>

namespace smallgain {

struct NelderMeadOptions {
    int max_evaluations = 2000;
    /// Stop when the spread of simplex values falls below this.
    double ftol = 1e-14;
    /// Stop when the simplex diameter falls below this.
    double xtol = 1e-12;
    double initial_step = 0.1;
    /// Stop as soon as a value at or below the target is seen.
    std::optional<double> target;
};

struct NelderMeadResult {
    Vec x;
    double value = 0.0;
    int evaluations = 0;
};

/// Downhill simplex minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) from an axis-aligned initial simplex around x0.
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace smallgain
