#pragma once

#include "seqdetect/extreme.hpp"

#include <string>
#include <variant>
#include <vector>

namespace seqdetect {

enum class SparseMode { G, D, D_randomized };

struct WeightedChiSq {
    std::vector<double> w;
    double H = 0.0;
};

struct TruncatedChiSq {
    std::size_t m = 1;
    double H = 0.0;
};

struct MaxThreshold {
    std::vector<double> T; // T_{m,k}, k = 1..m
};

struct SparseCombined {
    std::vector<double> h, z;
    double u = 1.0;         // normaliser of l_eps
    double H = 0.0;
    std::vector<double> Q;  // Q_{eps,i}
    SparseMode mode = SparseMode::G;
    double alpha = 0.0;     // D_randomized only
};

struct AdaptiveChiGrid {
    int L = 2;
    double C = 2.5;
};

struct AdaptiveMaxGrid {
    int L = 2;
    double C = 2.5;
};

struct ExtremeAdaptiveMax {
    double T_eps = 3.0;
};

struct BesovSparse {
    std::vector<double> h, z; // per level j = 1..J
    double u = 1.0;
    double H = 0.0;
    std::vector<double> Q;    // Q_{eps,j}
    double beta = 0.0;        // observations are divided by 2^{beta j}
    SparseMode mode = SparseMode::G;
    double alpha = 0.0;
};

struct BesovAdaptive {
    int J0 = 2;
    int J1 = 10;
    double c = 0.1;
    double beta = 0.0;
};

using TestRule = std::variant<WeightedChiSq, TruncatedChiSq, MaxThreshold, SparseCombined, AdaptiveChiGrid,
                              AdaptiveMaxGrid, ExtremeAdaptiveMax, BesovSparse, BesovAdaptive>;

struct TestOutcome {
    std::vector<double> statistic;
    bool reject = false;
    double reject_probability = 0.0;
};

std::string rule_kind(const TestRule& rule);

// Number of coordinates of y the rule reads.
std::size_t working_length(const TestRule& rule);

TestOutcome apply(const TestRule& rule, const std::vector<double>& y, double eps);

double xi_kernel(double t, double z);

WeightedChiSq build_weighted(const ExtremeSolution& sol, double alpha);
WeightedChiSq build_weighted_H(const ExtremeSolution& sol, double H);
// H = u/2, the total-error choice
WeightedChiSq build_weighted_total(const ExtremeSolution& sol);

TruncatedChiSq build_truncated(std::size_t m, double alpha);

MaxThreshold build_max_threshold(std::size_t m, double alpha);

enum class AdaptiveKind { chi_grid, max_grid, extreme_max };
TestRule build_adaptive(AdaptiveKind kind, int L, double C, double T_eps);
int default_L(double eps);

double sparse_threshold(std::size_t i, double eps);      // Q_{eps,i}
double besov_sparse_threshold(int j, double eps);       // Q_{eps,j}
SparseCombined build_sparse(const SparseSolution& sol, double eps, std::size_t K, SparseMode mode, double H,
                            double alpha = 0.0);
BesovSparse build_besov_sparse(const SparseSolution& sol, const BesovSpec& spec, SparseMode mode, double H,
                               double alpha = 0.0);

BesovAdaptive build_besov_adaptive(const BesovSpec& spec, double c = 0.1);

// Pieces of the Besov adaptive family, exposed for inspection.
double besov_T_eps(int j, int J0);
double besov_K(int j);
double besov_z(int j, int k);
int besov_k_max(int j, double c);

// Adaptive threshold grids.
double adaptive_max_H(int k, int L, double C);
double extreme_adaptive_T(std::size_t k, double T_eps);

struct ErrorPrediction {
    double beta = 0.0;
    double gamma = 0.0;
};
ErrorPrediction theoretical_errors_gaussian(double u, double alpha);
ErrorPrediction theoretical_errors_degenerate(double D, double alpha);

} // namespace seqdetect
