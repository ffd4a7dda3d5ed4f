#pragma once

#include "seqdetect/testing.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace seqdetect {

// Counter-based stream: the n-th output is a pure function of (key, n).
class RngStream {
public:
    using result_type = std::uint64_t;
    RngStream(std::uint64_t seed, std::uint64_t experiment, std::uint64_t replicate);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()()
    {
        std::uint64_t x = key_ + 0x9e3779b97f4a7c15ULL * ++counter_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; } // [0,1)

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct Observation {
    std::vector<double> y;
    double eps = 0.0;
};

// y_k = eta_k + eps * noise_scale_k * xi_k, k < K; empty eta means the null.
Observation sample(const std::vector<double>& eta, double eps, std::size_t K, RngStream& stream,
                   const std::vector<double>& noise_scale = {});

// Per-coordinate noise multipliers 2^{beta j} for a dyadic layout with J levels.
std::vector<double> besov_noise_scale(int J, double beta);

struct McOptions {
    unsigned threads = 1;
    std::size_t K = 0;                      // observation length; 0 means the rule's working length
    std::vector<double> noise_scale;        // optional per-coordinate noise multipliers
    std::optional<ErrorPrediction> theory;
    std::uint64_t experiment = 0;
    bool keep_rows = false;
};

struct McRow {
    std::uint64_t rep = 0;
    double null_stat = 0.0;
    bool null_reject = false;
    double alt_stat = 0.0;
    bool alt_reject = false;
};

struct Interval {
    double lo = 0.0, hi = 0.0, halfwidth = 0.0;
};

struct MonteCarloReport {
    std::uint64_t reps = 0;
    std::uint64_t null_rejections = 0;
    std::uint64_t alt_acceptances = 0;
    double alpha_hat = 0.0, beta_hat = 0.0, gamma_hat = 0.0;
    Interval ci_alpha, ci_beta;
    double ci_gamma = 0.0; // sum of the two half-widths
    std::optional<ErrorPrediction> theory;
    std::uint64_t seed = 0;
    std::string rule;
    std::vector<McRow> rows;
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054);

MonteCarloReport estimate_errors(const TestRule& rule, const std::vector<double>& eta_alt, double eps,
                                 std::uint64_t reps, std::uint64_t seed, const McOptions& opts = {});

struct LikelihoodDiagnostic {
    double lhs = 0.0;
    double rhs = 0.0;
    double ci = 0.0; // 95% normal half-width of lhs
};

LikelihoodDiagnostic likelihood_diagnostic(const std::vector<double>& eta, double eps, std::uint64_t reps,
                                           std::uint64_t seed, unsigned threads = 1);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares slope of ln u against ln r.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

} // namespace seqdetect
