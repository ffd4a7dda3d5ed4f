#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace seqdetect {

enum class SeqKind { polynomial, exponential, power_exponential, table };
enum class Regime { mild, severe, extreme };

const char* to_string(SeqKind k);
const char* to_string(Regime r);
SeqKind seq_kind_from_string(const std::string& s);

struct SequenceFamily {
    SeqKind kind = SeqKind::polynomial;
    double scale = 1.0;
    double exponent = 1.0;
    double power = 1.0;
    std::vector<double> values; // table kind only, values[k-1] is the k-th term

    static SequenceFamily polynomial(double exponent, double scale = 1.0);
    static SequenceFamily exponential(double exponent, double scale = 1.0);
    static SequenceFamily power_exponential(double exponent, double power, double scale = 1.0);
    static SequenceFamily table(std::vector<double> values);

    // Throws ConfigError if the parameters do not describe a valid family.
    void validate() const;

    // ln(term k), k >= 1. Never overflows for the closed-form kinds.
    long double log_eval(std::size_t k) const;

    // Largest admissible index (table length, or unbounded).
    std::size_t max_index() const;

    bool strictly_increasing() const;
};

// Throws NumericError("sequence overflow at index k") when the term is not a finite double.
double eval_sequence(const SequenceFamily& fam, std::size_t k);

Regime classify_regime(const SequenceFamily& sigma);

struct ProblemSpec {
    SequenceFamily a;
    SequenceFamily sigma;
    double q = 2.0;
    double r = 0.1;
    double eps = 1e-3;
    std::size_t K = 1000;

    void validate() const;
};

struct BesovSpec {
    double alpha = 1.0;
    double beta = 1.0;
    double q = 1.0;
    double t = 1.0;
    double r = 0.1;
    double eps = 1e-3;
    int J = 20;

    void validate() const;
    // level j (1-based) holds 2^j coordinates; flat offset of its first one
    static std::size_t level_offset(int j) { return (std::size_t{1} << j) - 2; }
    std::size_t flat_size() const { return level_offset(J + 1); }
};

ProblemSpec preset_differentiation(double order);
ProblemSpec preset_dirichlet(double beta = 1.0);
ProblemSpec preset_heat(double beta = 1.0);
ProblemSpec preset_deconvolution(const std::vector<double>& nu);

enum class Membership { in_alternative, in_body_only, outside };
const char* to_string(Membership m);

// q-body sum_k |a_k sigma_k eta_k|^q and energy sum_k sigma_k^2 eta_k^2.
double body_norm(const std::vector<double>& eta, const ProblemSpec& spec);
double energy(const std::vector<double>& eta, const ProblemSpec& spec);

Membership ellipsoid_membership(const std::vector<double>& eta, const ProblemSpec& spec);

} // namespace seqdetect
