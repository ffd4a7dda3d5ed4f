#pragma once

#include "seqdetect/spectra.hpp"

#include <functional>
#include <string>
#include <vector>

namespace seqdetect {

// a-family x sigma-family: Sobolev/analytic refers to a_k (polynomial/exponential),
// mild/severe to sigma_k.
enum class RegimePair { mild_sobolev, mild_analytic, severe_sobolev, severe_analytic, extreme };

const char* to_string(RegimePair p);
RegimePair regime_pair_from_string(const std::string& s);

// r_star(eps) = constant * eps^eps_exponent * ln(1/eps)^log_power for the plain forms.
// The severe-Sobolev forms are (ln(1/eps)/beta)^{-alpha} with corrections; log_power is -alpha there.
struct RateResult {
    RegimePair pair = RegimePair::mild_sobolev;
    double alpha = 1.0, beta = 1.0, q = 2.0;
    double eps_exponent = 0.0;
    double log_power = 0.0;
    double constant = 1.0;
    double lambda = 0.0; // (alpha+beta)/2 - beta/q, sparse case only
    bool sparse = false;
    bool sharp = false;
    std::string formula;
    std::string payment_class; // adaptive results only
    std::function<double(double)> r_star;
};

RateResult separation_rate(double alpha, double beta, double q, RegimePair pair);
RateResult adaptive_rate(double alpha, double beta, double q, RegimePair pair);

// Second-order severe-Sobolev radius, O(1) term set to zero.
double sharp_severe_sobolev(double alpha, double beta, double eps);

// "O(1)", "sqrt_loglog" or "loglog"
std::string payment_class(RegimePair pair, double alpha, double beta, double q);

double u_inf_over_sigma(const std::vector<double>& u);

// Radius where u_lin = 1 for the spec's sequences at the spec's eps (spec.r is ignored).
double extreme_separation_radius(const ProblemSpec& spec);

} // namespace seqdetect
