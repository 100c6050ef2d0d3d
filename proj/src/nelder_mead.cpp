#include "smallgain/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace smallgain {

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, const NelderMeadOptions& opts)
{
    const Index n = x0.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty parameter vector");

    int evals = 0;
    auto eval = [&](const Vec& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<Vec> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (Index i = 0; i < n; ++i) pts[i + 1](i) += opts.initial_step;
    for (Index i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<Index> order(n + 1);
    auto hit_target = [&](double v) { return opts.target && v <= *opts.target; };

    while (evals < opts.max_evaluations) {
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&](Index a, Index b) { return vals[a] < vals[b]; });
        const Index best = order.front();
        const Index worst = order.back();
        const Index second = order[n - 1];
        if (hit_target(vals[best])) break;

        double diameter = 0.0;
        for (Index i = 0; i <= n; ++i) diameter = std::max(diameter, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
        if (std::abs(vals[worst] - vals[best]) <= opts.ftol && diameter <= opts.xtol) break;
        if (diameter <= opts.xtol * 1e-3) break;

        Vec centroid = Vec::Zero(n);
        for (Index i = 0; i <= n; ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Vec xr = centroid + (centroid - pts[worst]);
        const double fr = eval(xr);
        if (fr < vals[best]) {
            const Vec xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid)) : Vec(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(xc);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (Index i = 0; i <= n; ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = eval(pts[i]);
        }
    }

    const auto it = std::min_element(vals.begin(), vals.end());
    return {pts[std::distance(vals.begin(), it)], *it, evals};
}

}  // namespace smallgain
