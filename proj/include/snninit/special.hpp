#pragma once

#include <cmath>

namespace snninit {

// Scaled complementary error function exp(x^2) erfc(x), stable for large x
// where exp(x^2) overflows and erfc(x) underflows separately.
inline double erfcx(double x) {
    if (x < 0.0) {
        // erfcx(x) = 2 exp(x^2) - erfcx(-x); only meaningful while exp(x^2)
        // is representable, which it is for every caller here (|x| < 26).
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x < 12.5) return std::exp(x * x) * std::erfc(x);
    // Asymptotic series erfcx(x) ~ 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!!/(2x^2)^k.
    const double ix2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -(2.0 * k - 1.0) * ix2;
        sum += term;
    }
    return sum / (x * 1.7724538509055160273);
}

// Integrand of the first-passage (Siegert) integral, exp(x^2)(1 + erf x),
// evaluated without catastrophic cancellation for x << 0.
inline double siegert_integrand(double x) {
    if (x < 0.0) return erfcx(-x);
    return std::exp(x * x) * (1.0 + std::erf(x));
}

}  // namespace snninit
