#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace snninit {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm))
        throw std::runtime_error("integrate: integrand is not finite");
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) return left + right + delta / 15.0;
    if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with a relative tolerance. The integrand must be
// finite on [a, b]; endpoint singularities need a change of variable first.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-8, int max_depth = 52) {
    if (a == b) return 0.0;
    // Seed with a coarse non-adaptive pass to get a magnitude estimate; a
    // relative tolerance needs a scale to be relative to.
    const int n0 = 64;
    double scale = 0.0;
    const double h = (b - a) / n0;
    for (int i = 0; i <= n0; ++i) scale += std::abs(f(a + i * h)) * (i == 0 || i == n0 ? 0.5 : 1.0);
    scale *= std::abs(h);
    if (!(scale > 0.0)) scale = 1.0;

    double total = 0.0;
    // Split into a few panels so features narrower than (b-a)/4 are not missed
    // by the first Simpson estimate.
    const int panels = 8;
    const double w = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double pa = a + i * w, pb = pa + w, pm = 0.5 * (pa + pb);
        const double fa = f(pa), fm = f(pm), fb = f(pb);
        const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        total += detail::adaptive_simpson_rec(f, pa, pb, fa, fm, fb, whole,
                                              rel_tol * scale / panels, max_depth);
    }
    if (!std::isfinite(total)) throw std::runtime_error("integrate: result is not finite");
    return total;
}

}  // namespace snninit
