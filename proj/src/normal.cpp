#include "seqdetect/normal.hpp"

#include "seqdetect/errors.hpp"

#include <cmath>
#include <numbers>

namespace seqdetect {

double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double Phi_upper(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double Phi_inv(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("Phi_inv: probability must lie in (0,1)");

    // Acklam's rational approximation, then Halley refinement against erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;

    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (int it = 0; it < 2; ++it) {
        // work on the smaller tail to keep relative accuracy
        const double e = (p < 0.5) ? Phi(x) - p : (1.0 - p) - Phi_upper(x);
        const double dens = inv_sqrt_2pi * std::exp(-0.5 * x * x);
        if (dens == 0.0)
            break;
        const double u = e / dens;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

} // namespace seqdetect
