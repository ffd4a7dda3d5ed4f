#pragma once

#include "seqdetect/spectra.hpp"

#include <cstddef>
#include <vector>

namespace seqdetect {

struct ExtremeSolution {
    double A = 0.0;
    std::size_t m = 0;
    double z0_sq = 0.0;
    std::vector<double> eta_sq; // length m
    double u = 0.0;
    std::vector<double> w;      // length m
    double w0 = 0.0;
    std::size_t K_used = 0;     // working length after any bracket expansion
};

struct LinApprox {
    std::size_t m = 0;
    double u_star = 0.0;
    double u_lin = 0.0;
    double r_lo = 0.0; // 1/a_m
    double r_hi = 0.0; // 1/a_{m-1}
};

struct AsymptoticU {
    double u = 0.0;
    double m = 0.0;
};

struct SparseSolution {
    std::vector<double> h;
    std::vector<double> z;
    double u = 0.0;
    double n_eff = 0.0;
    double h0 = 0.0;
    double energy = 0.0;      // attained value of the energy constraint
    double energy_target = 0.0;
    double norm = 0.0;        // attained value of the body constraint
    double norm_bound = 0.0;
    bool feasible = false;
    double c0 = 0.0;          // fitted u^2 / (n_eff h0^2)
    double j0 = 0.0;          // Besov: log2(n_eff)
};

struct SupCoordSolution {
    std::size_t m = 0;
    double w = 0.0;
    double w0 = 0.0;
    std::vector<double> x_star;
    std::vector<double> B; // B_k, k = 1..K
    std::vector<double> C; // C_k = 1 / sum_{i<=k} b_i c_i
};

double r_of_A(double A, const ProblemSpec& spec);

ExtremeSolution solve_extreme(const ProblemSpec& spec);

AsymptoticU u_asymptotic(const ProblemSpec& spec);

LinApprox u_piecewise(const ProblemSpec& spec);

// Value and constraint evaluation of the sparse extreme problem at (h, z).
SparseSolution sparse_evaluate(const ProblemSpec& spec, const std::vector<double>& h, const std::vector<double>& z);

SparseSolution solve_sparse_extreme(const ProblemSpec& spec);

double D_eps(const ProblemSpec& spec);
double n_eps(const ProblemSpec& spec);

SupCoordSolution solve_sup_coordinate(const std::vector<double>& b, const std::vector<double>& c, double r);

SparseSolution besov_evaluate(const BesovSpec& spec, const std::vector<double>& h, const std::vector<double>& z);

SparseSolution solve_besov_extreme(const BesovSpec& spec);

// delta_eps used to shrink r in the sparse and Besov problems
double sparse_delta(double eps);

double sparse_lambda(double alpha, double beta, double q);

} // namespace seqdetect
