#include "seqdetect/spectra.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/ksum.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

namespace seqdetect {

const char* to_string(SeqKind k)
{
    switch (k) {
    case SeqKind::polynomial: return "polynomial";
    case SeqKind::exponential: return "exponential";
    case SeqKind::power_exponential: return "power-exponential";
    case SeqKind::table: return "table";
    }
    return "?";
}

const char* to_string(Regime r)
{
    switch (r) {
    case Regime::mild: return "mild";
    case Regime::severe: return "severe";
    case Regime::extreme: return "extreme";
    }
    return "?";
}

const char* to_string(Membership m)
{
    switch (m) {
    case Membership::in_alternative: return "in_alternative";
    case Membership::in_body_only: return "in_body_only";
    case Membership::outside: return "outside";
    }
    return "?";
}

SeqKind seq_kind_from_string(const std::string& s)
{
    if (s == "polynomial") return SeqKind::polynomial;
    if (s == "exponential") return SeqKind::exponential;
    if (s == "power-exponential" || s == "power_exponential") return SeqKind::power_exponential;
    if (s == "table" || s == "explicit-table") return SeqKind::table;
    throw ConfigError("unknown sequence kind '" + s + "'");
}

SequenceFamily SequenceFamily::polynomial(double exponent, double scale)
{
    SequenceFamily f;
    f.kind = SeqKind::polynomial;
    f.exponent = exponent;
    f.scale = scale;
    f.validate();
    return f;
}

SequenceFamily SequenceFamily::exponential(double exponent, double scale)
{
    SequenceFamily f;
    f.kind = SeqKind::exponential;
    f.exponent = exponent;
    f.scale = scale;
    f.validate();
    return f;
}

SequenceFamily SequenceFamily::power_exponential(double exponent, double power, double scale)
{
    SequenceFamily f;
    f.kind = SeqKind::power_exponential;
    f.exponent = exponent;
    f.power = power;
    f.scale = scale;
    f.validate();
    return f;
}

SequenceFamily SequenceFamily::table(std::vector<double> values)
{
    SequenceFamily f;
    f.kind = SeqKind::table;
    f.values = std::move(values);
    f.validate();
    return f;
}

void SequenceFamily::validate() const
{
    auto finite_pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (kind == SeqKind::table) {
        if (values.empty())
            throw ConfigError("table sequence must be non-empty");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!finite_pos(values[i]))
                throw ConfigError("table sequence entries must be positive and finite");
            if (i > 0 && !(values[i] > values[i - 1]))
                throw ConfigError("table sequence must be strictly increasing");
        }
        return;
    }
    if (!finite_pos(scale))
        throw ConfigError("sequence scale must be positive");
    // exponent 0 is allowed for polynomials (the constant sequence)
    if (!std::isfinite(exponent) || exponent < 0.0 ||
        (exponent == 0.0 && kind != SeqKind::polynomial))
        throw ConfigError("sequence exponent must be positive");
    if (kind == SeqKind::power_exponential && !(std::isfinite(power) && power >= 1.0))
        throw ConfigError("power-exponential power must be >= 1");
}

long double SequenceFamily::log_eval(std::size_t k) const
{
    if (k < 1)
        throw DomainError("sequence index must be >= 1");
    const long double kk = static_cast<long double>(k);
    switch (kind) {
    case SeqKind::polynomial:
        return std::log(static_cast<long double>(scale)) + exponent * std::log(kk);
    case SeqKind::exponential:
        return std::log(static_cast<long double>(scale)) + exponent * kk;
    case SeqKind::power_exponential:
        return std::log(static_cast<long double>(scale)) + exponent * std::pow(kk, static_cast<long double>(power));
    case SeqKind::table:
        if (k > values.size())
            throw DomainError("index " + std::to_string(k) + " beyond table length " +
                              std::to_string(values.size()));
        return std::log(static_cast<long double>(values[k - 1]));
    }
    return 0.0L;
}

std::size_t SequenceFamily::max_index() const
{
    return kind == SeqKind::table ? values.size() : std::numeric_limits<std::size_t>::max();
}

bool SequenceFamily::strictly_increasing() const
{
    return kind == SeqKind::table || exponent > 0.0;
}

double eval_sequence(const SequenceFamily& fam, std::size_t k)
{
    const long double lv = fam.log_eval(k);
    if (lv > std::log(static_cast<long double>(DBL_MAX)))
        throw NumericError("sequence overflow at index " + std::to_string(k));
    return static_cast<double>(std::exp(lv));
}

Regime classify_regime(const SequenceFamily& sigma)
{
    switch (sigma.kind) {
    case SeqKind::polynomial: return Regime::mild;
    case SeqKind::exponential: return Regime::severe;
    case SeqKind::power_exponential: return sigma.power > 1.0 ? Regime::extreme : Regime::severe;
    case SeqKind::table: break;
    }
    const auto& v = sigma.values;
    if (v.size() < 3)
        return Regime::severe;
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        d.push_back(std::log(v[i + 1] / v[i]));
    const std::size_t mid = d.size() / 2;
    for (std::size_t i = mid; i + 1 < d.size(); ++i)
        if (d[i + 1] < d[i])
            return Regime::severe;
    return d.back() >= 1.5 * d[mid] && d[mid] > 0 ? Regime::extreme : Regime::severe;
}

void ProblemSpec::validate() const
{
    a.validate();
    sigma.validate();
    if (!a.strictly_increasing())
        throw ConfigError("a_k must be strictly increasing");
    if (!(q > 0.0 && q <= 2.0))
        throw ConfigError("q must lie in (0, 2]");
    if (!(std::isfinite(r) && r > 0.0))
        throw ConfigError("r must be positive");
    if (!(std::isfinite(eps) && eps > 0.0))
        throw ConfigError("eps must be positive");
    if (K < 1)
        throw ConfigError("K must be >= 1");
    if (K > a.max_index() || K > sigma.max_index())
        throw ConfigError("K exceeds the length of a table sequence");
}

void BesovSpec::validate() const
{
    if (!(alpha > 0 && beta > 0 && t > 0 && r > 0 && eps > 0))
        throw ConfigError("Besov alpha, beta, t, r, eps must be positive");
    if (!(q > 0.0 && q < 2.0))
        throw ConfigError("Besov q must lie in (0, 2)");
    if (J < 1 || J > 40)
        throw ConfigError("Besov J must lie in [1, 40]");
}

namespace {
ProblemSpec template_spec(SequenceFamily sigma, std::size_t K)
{
    ProblemSpec s;
    s.a = SequenceFamily::polynomial(1.0);
    s.sigma = std::move(sigma);
    s.K = K;
    return s;
}
} // namespace

ProblemSpec preset_differentiation(double order)
{
    return template_spec(SequenceFamily::polynomial(order), 1000);
}

ProblemSpec preset_dirichlet(double beta)
{
    return template_spec(SequenceFamily::exponential(beta), 1000);
}

ProblemSpec preset_heat(double beta)
{
    return template_spec(SequenceFamily::power_exponential(beta, 2.0), 50);
}

ProblemSpec preset_deconvolution(const std::vector<double>& nu)
{
    std::vector<double> sig;
    sig.reserve(nu.size());
    for (double v : nu) {
        if (v == 0.0)
            throw ConfigError("non-injective kernel: a Fourier coefficient is zero");
        sig.push_back(1.0 / std::fabs(v));
    }
    return template_spec(SequenceFamily::table(std::move(sig)), nu.size());
}

double body_norm(const std::vector<double>& eta, const ProblemSpec& spec)
{
    KahanSum s;
    for (std::size_t k = 1; k <= eta.size(); ++k) {
        if (eta[k - 1] == 0.0)
            continue;
        const long double l = spec.a.log_eval(k) + spec.sigma.log_eval(k) + std::log(std::fabs(static_cast<long double>(eta[k - 1])));
        s += std::exp(spec.q * l);
    }
    return static_cast<double>(s.value());
}

double energy(const std::vector<double>& eta, const ProblemSpec& spec)
{
    KahanSum s;
    for (std::size_t k = 1; k <= eta.size(); ++k) {
        if (eta[k - 1] == 0.0)
            continue;
        const long double l = spec.sigma.log_eval(k) + std::log(std::fabs(static_cast<long double>(eta[k - 1])));
        s += std::exp(2.0L * l);
    }
    return static_cast<double>(s.value());
}

Membership ellipsoid_membership(const std::vector<double>& eta, const ProblemSpec& spec)
{
    if (eta.size() > spec.K)
        throw DomainError("eta longer than the working length K");
    if (!(body_norm(eta, spec) <= 1.0))
        return Membership::outside;
    return energy(eta, spec) >= spec.r * spec.r ? Membership::in_alternative : Membership::in_body_only;
}

} // namespace seqdetect
