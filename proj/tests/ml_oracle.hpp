#pragma once

// Independent reference for E_{α,β}(z): the defining power series summed in
// MPFR arithmetic with enough digits to absorb the cancellation for z < 0.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>

namespace oracle {

inline double mittag_leffler(double alpha, double beta, double z) {
    using boost::multiprecision::mpfr_float;
    const double r = std::pow(std::abs(z), 1.0 / alpha);
    // Terms peak near e^r while the sum can be as small as e^-r.
    const unsigned digits = static_cast<unsigned>(2.0 * r / 2.302585 + 40.0);
    const unsigned saved = mpfr_float::default_precision();
    mpfr_float::default_precision(digits);
    mpfr_float a(alpha), b(beta), zz(z), sum(0), zk(1);
    for (long k = 0;; ++k) {
        mpfr_float arg = a * k + b;
        mpfr_float term = 0;
        const bool pole = arg <= 0 && arg == floor(arg);
        if (!pole) term = zk / boost::multiprecision::tgamma(arg);
        sum += term;
        zk *= zz;
        if (k > r / alpha + 10 && abs(term) < abs(sum) * mpfr_float(1e-40) && arg > 2) break;
        if (k > 200000) break;
    }
    const double out = static_cast<double>(sum);
    mpfr_float::default_precision(saved);
    return out;
}

} // namespace oracle
