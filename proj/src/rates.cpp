#include "seqdetect/rates.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/extreme.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace seqdetect {

namespace {

void check_params(double alpha, double beta, double q)
{
    if (!(alpha > 0) || !(beta > 0))
        throw DomainError("rates: alpha and beta must be positive");
    if (!(q > 0 && q <= 2))
        throw DomainError("rates: q must lie in (0, 2]");
}

double lnlne(double eps)
{
    if (!(eps > 0 && eps < std::exp(-1.0)))
        throw DomainError("rates: eps must lie in (0, 1/e)");
    return std::log(std::log(1.0 / eps));
}

RateResult power_form(RateResult r, double exponent, double log_power, double constant)
{
    r.eps_exponent = exponent;
    r.log_power = log_power;
    r.constant = constant;
    r.r_star = [exponent, log_power, constant](double eps) {
        if (!(eps > 0 && eps < 1))
            throw DomainError("rates: eps must lie in (0, 1)");
        return constant * std::pow(eps, exponent) * std::pow(std::log(1.0 / eps), log_power);
    };
    return r;
}

} // namespace

const char* to_string(RegimePair p)
{
    switch (p) {
    case RegimePair::mild_sobolev: return "mild-sobolev";
    case RegimePair::mild_analytic: return "mild-analytic";
    case RegimePair::severe_sobolev: return "severe-sobolev";
    case RegimePair::severe_analytic: return "severe-analytic";
    case RegimePair::extreme: return "extreme";
    }
    return "?";
}

RegimePair regime_pair_from_string(const std::string& s)
{
    for (auto p : {RegimePair::mild_sobolev, RegimePair::mild_analytic, RegimePair::severe_sobolev,
                   RegimePair::severe_analytic, RegimePair::extreme})
        if (s == to_string(p))
            return p;
    throw ConfigError("unknown regime pair '" + s + "'");
}

RateResult separation_rate(double alpha, double beta, double q, RegimePair pair)
{
    check_params(alpha, beta, q);
    RateResult r;
    r.pair = pair;
    r.alpha = alpha;
    r.beta = beta;
    r.q = q;
    if (q < 2 && pair != RegimePair::mild_sobolev && pair != RegimePair::extreme)
        throw DomainError(std::string("rates: q < 2 is only covered for mild-sobolev, not ") + to_string(pair));

    switch (pair) {
    case RegimePair::mild_sobolev:
        if (q == 2) {
            r.formula = "eps^(4a/(4a+4b+1))";
            return power_form(r, 4 * alpha / (4 * alpha + 4 * beta + 1), 0.0, 1.0);
        }
        r.sparse = true;
        r.lambda = sparse_lambda(alpha, beta, q);
        if (r.lambda > 0) {
            r.formula = "eps^((2a+1/q-1/2)/(2(a+b)+1/q))";
            return power_form(r, (2 * alpha + 1 / q - 0.5) / (2 * (alpha + beta) + 1 / q), 0.0, 1.0);
        }
        r.formula = "Lambda eps^(a/(a+b)) ln(1/eps)^(a/(2(a+b)))";
        return power_form(r, alpha / (alpha + beta), alpha / (2 * (alpha + beta)),
                          std::pow(2 / (alpha + beta), alpha / (2 * (alpha + beta))));
    case RegimePair::severe_analytic:
        r.formula = "eps^(a/(a+b))";
        return power_form(r, alpha / (alpha + beta), 0.0, 1.0);
    case RegimePair::mild_analytic:
        r.formula = "eps ln(1/eps)^(b+1/4)";
        return power_form(r, 1.0, beta + 0.25, 1.0);
    case RegimePair::severe_sobolev:
        r.formula = "(ln(1/eps)/b)^(-a)";
        r.sharp = true;
        return power_form(r, 0.0, -alpha, std::pow(beta, alpha));
    case RegimePair::extreme:
        break;
    }
    throw DomainError("rates: no closed form in the extreme regime; use extreme_separation_radius (u_lin = 1)");
}

RateResult adaptive_rate(double alpha, double beta, double q, RegimePair pair)
{
    RateResult r = separation_rate(alpha, beta, q, pair);
    r.payment_class = payment_class(pair, alpha, beta, q);
    const double p = r.eps_exponent;
    switch (pair) {
    case RegimePair::mild_sobolev:
        if (r.sparse && r.lambda <= 0)
            return r;
        r.formula = (r.sparse ? "epst^((2a+1/q-1/2)/(2(a+b)+1/q))" : "epst^(4a/(4a+4b+1))");
        r.formula += ", epst = eps lnln(1/eps)^(1/4)";
        r.r_star = [p](double eps) { return std::pow(eps * std::pow(lnlne(eps), 0.25), p); };
        return r;
    case RegimePair::severe_analytic:
        r.formula = "(eps sqrt(lnln(1/eps)))^(a/(a+b))";
        r.r_star = [p](double eps) { return std::pow(eps * std::sqrt(lnlne(eps)), p); };
        return r;
    case RegimePair::severe_sobolev:
        r.formula = "((2 ln(1/eps) - 2a lnln(1/eps) - lnlnln(1/eps))/(2b))^(-a)";
        r.sharp = false;
        r.r_star = [alpha, beta](double eps) {
            const double ll = lnlne(eps);
            if (!(ll > 0))
                throw DomainError("rates: eps must be below exp(-e)");
            const double d = (2 * std::log(1 / eps) - 2 * alpha * ll - std::log(ll)) / (2 * beta);
            if (!(d > 0))
                throw DomainError("rates: eps too large for the severe-sobolev adaptive rate");
            return std::pow(d, -alpha);
        };
        return r;
    case RegimePair::mild_analytic:
    case RegimePair::extreme:
        return r;
    }
    return r;
}

double sharp_severe_sobolev(double alpha, double beta, double eps)
{
    if (!(alpha > 0) || !(beta > 0))
        throw DomainError("rates: alpha and beta must be positive");
    if (!(eps > 0 && eps < std::exp(-std::exp(1.0))))
        throw DomainError("sharp_severe_sobolev: eps must be below exp(-e)");
    const double l = std::log(1 / eps);
    const double d = (l - alpha * std::log(l)) / beta;
    if (!(d > 0))
        throw DomainError("sharp_severe_sobolev: eps too large");
    return std::pow(d, -alpha);
}

std::string payment_class(RegimePair pair, double alpha, double beta, double q)
{
    switch (pair) {
    case RegimePair::mild_analytic: return "O(1)";
    case RegimePair::mild_sobolev:
        if (q < 2 && sparse_lambda(alpha, beta, q) <= 0)
            return "O(1)";
        return "sqrt_loglog";
    default: return "loglog";
    }
}

double u_inf_over_sigma(const std::vector<double>& u)
{
    if (u.empty())
        throw DomainError("u_inf_over_sigma: empty list");
    return *std::min_element(u.begin(), u.end());
}

double extreme_separation_radius(const ProblemSpec& spec)
{
    spec.validate();
    ProblemSpec s = spec;
    const double lo = -static_cast<double>(spec.a.log_eval(spec.K)) + 1e-12;
    const double hi = -static_cast<double>(spec.a.log_eval(1)) - 1e-12;
    auto f = [&](double lr) {
        s.r = std::exp(lr);
        return u_piecewise(s).u_lin - 1.0;
    };
    if (f(lo) > 0)
        throw DomainError("extreme_separation_radius: root below 1/a_K (increase K)");
    if (f(hi) < 0)
        throw DomainError("extreme_separation_radius: u_lin < 1 on the whole range");
    auto tol = [](double a, double b) { return std::abs(b - a) < 1e-14; };
    const auto br = boost::math::tools::bisect(f, lo, hi, tol);
    return std::exp((br.first + br.second) / 2);
}

} // namespace seqdetect
