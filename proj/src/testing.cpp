#include "seqdetect/testing.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/ksum.hpp"
#include "seqdetect/normal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seqdetect {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double lnln_floor(double x) { return std::log(std::max(std::log(x), 1.0)); }

void require_length(const std::vector<double>& y, std::size_t n)
{
    if (y.size() < n)
        throw DomainError("observation length " + std::to_string(y.size()) + " shorter than the rule's working length " +
                          std::to_string(n));
}

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie in (0,1)");
}

// Hot path of every chi-square Monte Carlo run: four plain double lanes. The terms are O(1)
// and m is at most a few 1e5, so rounding stays far below Monte Carlo noise.
template <class F>
double lane_sum(std::size_t n, F term)
{
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        a0 += term(k);
        a1 += term(k + 1);
        a2 += term(k + 2);
        a3 += term(k + 3);
    }
    for (; k < n; ++k)
        a0 += term(k);
    return (a0 + a1) + (a2 + a3);
}

int besov_levels(std::size_t n)
{
    int J = 0;
    while (BesovSpec::level_offset(J + 2) <= n)
        ++J;
    return J;
}

TestOutcome sparse_decision(double l, double ymax, double H, SparseMode mode, double alpha)
{
    TestOutcome o;
    o.statistic = {l, ymax};
    const bool Y = ymax > 1.0;
    switch (mode) {
    case SparseMode::G:
        o.reject = l > H && Y;
        o.reject_probability = o.reject ? 1.0 : 0.0;
        break;
    case SparseMode::D:
        o.reject = Y;
        o.reject_probability = Y ? 1.0 : 0.0;
        break;
    case SparseMode::D_randomized:
        o.reject = Y;
        o.reject_probability = alpha + (1.0 - alpha) * (Y ? 1.0 : 0.0);
        break;
    }
    return o;
}

} // namespace

double xi_kernel(double t, double z)
{
    if (z < 0)
        throw DomainError("xi_kernel: z must be non-negative");
    // e^{-z^2/2} cosh(tz) - 1, the likelihood ratio of the symmetric two-point prior
    const double a = 0.5 * z * z, b = std::fabs(t) * z;
    if (b - a > 700.0)
        throw NumericError("xi_kernel: overflow");
    if (b > 350.0)
        return 0.5 * std::exp(b - a) * (1.0 + std::exp(-2.0 * b)) - 1.0;
    const double sb = std::sinh(0.5 * b);
    return std::expm1(-a) * std::cosh(b) + 2.0 * sb * sb;
}

std::string rule_kind(const TestRule& rule)
{
    return std::visit(overloaded{
                          [](const WeightedChiSq&) { return std::string("weighted"); },
                          [](const TruncatedChiSq&) { return std::string("truncated"); },
                          [](const MaxThreshold&) { return std::string("max_threshold"); },
                          [](const SparseCombined&) { return std::string("sparse"); },
                          [](const AdaptiveChiGrid&) { return std::string("adaptive_chi_grid"); },
                          [](const AdaptiveMaxGrid&) { return std::string("adaptive_max_grid"); },
                          [](const ExtremeAdaptiveMax&) { return std::string("extreme_adaptive_max"); },
                          [](const BesovSparse&) { return std::string("besov_sparse"); },
                          [](const BesovAdaptive&) { return std::string("besov_adaptive"); },
                      },
                      rule);
}

std::size_t working_length(const TestRule& rule)
{
    return std::visit(overloaded{
                          [](const WeightedChiSq& r) { return r.w.size(); },
                          [](const TruncatedChiSq& r) { return r.m; },
                          [](const MaxThreshold& r) { return r.T.size(); },
                          [](const SparseCombined& r) { return std::max(r.h.size(), r.Q.size()); },
                          [](const AdaptiveChiGrid& r) { return std::size_t{1} << r.L; },
                          [](const AdaptiveMaxGrid&) { return std::size_t{1}; },
                          [](const ExtremeAdaptiveMax&) { return std::size_t{1}; },
                          [](const BesovSparse& r) { return BesovSpec::level_offset(static_cast<int>(r.h.size()) + 1); },
                          [](const BesovAdaptive& r) { return BesovSpec::level_offset(r.J1 + 1); },
                      },
                      rule);
}

TestOutcome apply(const TestRule& rule, const std::vector<double>& y, double eps)
{
    if (!(eps > 0))
        throw DomainError("apply: eps must be positive");
    require_length(y, working_length(rule));

    return std::visit(
        overloaded{
            [&](const WeightedChiSq& r) {
                const double ie = 1.0 / eps;
                const double t = lane_sum(r.w.size(), [&](std::size_t k) {
                    const double x = y[k] * ie;
                    return r.w[k] * (x * x - 1.0);
                });
                TestOutcome o;
                o.statistic = {t};
                o.reject = o.statistic[0] > r.H;
                o.reject_probability = o.reject ? 1.0 : 0.0;
                return o;
            },
            [&](const TruncatedChiSq& r) {
                const double ie = 1.0 / eps;
                const double t = lane_sum(r.m, [&](std::size_t k) {
                    const double x = y[k] * ie;
                    return x * x - 1.0;
                });
                TestOutcome o;
                o.statistic = {t / std::sqrt(2.0 * static_cast<double>(r.m))};
                o.reject = o.statistic[0] > r.H;
                o.reject_probability = o.reject ? 1.0 : 0.0;
                return o;
            },
            [&](const MaxThreshold& r) {
                double mx = 0;
                bool rej = false;
                for (std::size_t k = 0; k < r.T.size(); ++k) {
                    const double a = std::fabs(y[k]);
                    mx = std::max(mx, a / (eps * r.T[k]));
                    rej = rej || a >= r.T[k] * eps;
                }
                TestOutcome o;
                o.statistic = {mx};
                o.reject = rej;
                o.reject_probability = rej ? 1.0 : 0.0;
                return o;
            },
            [&](const SparseCombined& r) {
                KahanSum l;
                for (std::size_t i = 0; i < r.h.size(); ++i)
                    if (r.h[i] > 0)
                        l += r.h[i] * xi_kernel(y[i] / eps, r.z[i]);
                double ymax = 0;
                for (std::size_t i = 0; i < r.Q.size(); ++i)
                    ymax = std::max(ymax, std::fabs(y[i]) / (eps * r.Q[i]));
                return sparse_decision(static_cast<double>(l.value()) / r.u, ymax, r.H, r.mode, r.alpha);
            },
            [&](const AdaptiveChiGrid& r) {
                TestOutcome o;
                KahanSum cum;
                std::size_t next = std::size_t{1} << r.L, done = 0;
                int k = r.L;
                while (next <= y.size()) {
                    for (; done < next; ++done) {
                        const double x = y[done] / eps;
                        cum += x * x - 1.0;
                    }
                    const double t = static_cast<double>(cum.value() / std::sqrt(2.0L * next));
                    const double ratio = t / std::sqrt(r.C * std::log(static_cast<double>(k)));
                    o.statistic.push_back(t);
                    o.reject = o.reject || ratio > 1.0;
                    ++k;
                    next <<= 1;
                }
                o.reject_probability = o.reject ? 1.0 : 0.0;
                return o;
            },
            [&](const AdaptiveMaxGrid& r) {
                TestOutcome o;
                double mx = 0;
                for (std::size_t k = 1; k <= y.size(); ++k)
                    mx = std::max(mx, std::fabs(y[k - 1]) / (eps * adaptive_max_H(static_cast<int>(k), r.L, r.C)));
                o.statistic = {mx};
                o.reject = mx > 1.0;
                o.reject_probability = o.reject ? 1.0 : 0.0;
                return o;
            },
            [&](const ExtremeAdaptiveMax& r) {
                TestOutcome o;
                double mx = 0;
                for (std::size_t k = 1; k <= y.size(); ++k)
                    mx = std::max(mx, std::fabs(y[k - 1]) / (eps * extreme_adaptive_T(k, r.T_eps)));
                o.statistic = {mx};
                o.reject = mx > 1.0;
                o.reject_probability = o.reject ? 1.0 : 0.0;
                return o;
            },
            [&](const BesovSparse& r) {
                KahanSum l;
                double ymax = 0;
                const int J = static_cast<int>(r.h.size());
                for (int j = 1; j <= J; ++j) {
                    const double sj = std::exp2(r.beta * j);
                    const std::size_t off = BesovSpec::level_offset(j);
                    for (std::size_t i = 0; i < (std::size_t{1} << j); ++i) {
                        const double x = y[off + i] / (eps * sj);
                        if (r.h[j - 1] > 0)
                            l += r.h[j - 1] * xi_kernel(x, r.z[j - 1]);
                        ymax = std::max(ymax, std::fabs(x) / r.Q[j - 1]);
                    }
                }
                return sparse_decision(static_cast<double>(l.value()) / r.u, ymax, r.H, r.mode, r.alpha);
            },
            [&](const BesovAdaptive& r) {
                const int J = besov_levels(y.size());
                double s0 = 0, s1 = -HUGE_VAL, s2 = -HUGE_VAL;
                for (int j = 1; j <= J; ++j) {
                    const double sj = std::exp2(r.beta * j);
                    const std::size_t off = BesovSpec::level_offset(j), n = std::size_t{1} << j;
                    const double Tj = besov_T_eps(j, r.J0);
                    KahanSum chi;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double x = y[off + i] / (eps * sj);
                        s0 = std::max(s0, std::fabs(x) / Tj);
                        chi += x * x - 1.0;
                    }
                    if (j >= r.J0 && j >= 2) {
                        const double lj = static_cast<double>(chi.value()) * std::exp2(-(j + 1) / 2.0);
                        s1 = std::max(s1, lj / (2.0 * std::sqrt(std::log(static_cast<double>(j)))));
                    }
                    if (j >= r.J0 && j <= r.J1 && j >= 2) {
                        const double tj = std::sqrt(5.0 * std::log(static_cast<double>(j)));
                        const int kmax = besov_k_max(j, r.c);
                        for (int k = 1; k <= kmax; ++k) {
                            const double z = besov_z(j, k);
                            const double S = std::sinh(0.5 * z * z);
                            KahanSum acc;
                            for (std::size_t i = 0; i < n; ++i)
                                acc += xi_kernel(y[off + i] / (eps * sj), z);
                            const double ljk = static_cast<double>(acc.value()) / std::sqrt(std::exp2(j + 1.0) * S * S);
                            s2 = std::max(s2, ljk / tj);
                        }
                    }
                }
                TestOutcome o;
                o.statistic = {s0, s1, s2};
                o.reject = s0 > 1.0 || s1 > 1.0 || s2 > 1.0;
                o.reject_probability = o.reject ? 1.0 : 0.0;
                return o;
            },
        },
        rule);
}

WeightedChiSq build_weighted_H(const ExtremeSolution& sol, double H)
{
    if (sol.w.empty())
        throw DomainError("build_weighted: empty solution");
    return WeightedChiSq{sol.w, H};
}

WeightedChiSq build_weighted(const ExtremeSolution& sol, double alpha)
{
    check_alpha(alpha);
    return build_weighted_H(sol, Phi_inv(1.0 - alpha));
}

WeightedChiSq build_weighted_total(const ExtremeSolution& sol) { return build_weighted_H(sol, sol.u / 2.0); }

TruncatedChiSq build_truncated(std::size_t m, double alpha)
{
    check_alpha(alpha);
    if (m < 1)
        throw DomainError("build_truncated: m must be >= 1");
    return TruncatedChiSq{m, Phi_inv(1.0 - alpha)};
}

MaxThreshold build_max_threshold(std::size_t m, double alpha)
{
    check_alpha(alpha);
    if (m < 2)
        throw DomainError("build_max_threshold: m must be >= 2");
    MaxThreshold r;
    r.T.resize(m);
    r.T[m - 1] = r.T[m - 2] = Phi_inv(1.0 - alpha / 6.0);
    if (m >= 3) {
        KahanSum s;
        for (std::size_t j = 1; j <= m - 2; ++j)
            s += 1.0L / (static_cast<long double>(j) * j);
        const double c = static_cast<double>(1.0L / (6.0L * s.value()));
        for (std::size_t k = 1; k <= m - 2; ++k) {
            const double d = static_cast<double>(m - k - 1);
            // upper-tail quantile computed directly to keep precision for tiny tail mass
            r.T[k - 1] = -Phi_inv(c * alpha / (d * d));
        }
    }
    return r;
}

double adaptive_max_H(int k, int L, double C)
{
    if (k < L)
        return std::sqrt(2.0 * std::log(static_cast<double>(L)));
    return std::sqrt(C * std::log(static_cast<double>(k)));
}

double extreme_adaptive_T(std::size_t k, double T_eps)
{
    const double lk = std::log(static_cast<double>(k));
    return std::max(T_eps, std::sqrt(2.0 * (lk + lnln_floor(static_cast<double>(k)))));
}

TestRule build_adaptive(AdaptiveKind kind, int L, double C, double T_eps)
{
    switch (kind) {
    case AdaptiveKind::chi_grid:
    case AdaptiveKind::max_grid:
        if (!(C > 2.0))
            throw DomainError("adaptive grid tests need C > 2");
        if (L < 2)
            throw DomainError("adaptive grid tests need L >= 2");
        if (kind == AdaptiveKind::chi_grid) {
            if (L > 40)
                throw DomainError("adaptive chi grid: L too large");
            return AdaptiveChiGrid{L, C};
        }
        return AdaptiveMaxGrid{L, C};
    case AdaptiveKind::extreme_max:
        if (!(T_eps > 0))
            throw DomainError("extreme adaptive max test needs T_eps > 0");
        return ExtremeAdaptiveMax{T_eps};
    }
    throw DomainError("unknown adaptive kind");
}

int default_L(double eps)
{
    if (!(eps > 0 && eps < 1))
        throw DomainError("default_L: eps must lie in (0,1)");
    return std::max(2, static_cast<int>(std::ceil(std::sqrt(std::log(1.0 / eps)))));
}

double sparse_threshold(std::size_t i, double eps)
{
    if (!(eps > 0 && eps < std::exp(-1.0)))
        throw DomainError("sparse thresholds need eps < 1/e");
    const double li = std::log(static_cast<double>(i));
    return std::sqrt(2.0 * (li + lnln_floor(static_cast<double>(i)) + 2.0 * std::log(std::log(1.0 / eps))));
}

double besov_sparse_threshold(int j, double eps)
{
    if (!(eps > 0 && eps < std::exp(-1.0)))
        throw DomainError("sparse thresholds need eps < 1/e");
    return std::sqrt(2.0 * (j * std::log(2.0) + std::log(static_cast<double>(j)) + 2.0 * std::log(std::log(1.0 / eps))));
}

SparseCombined build_sparse(const SparseSolution& sol, double eps, std::size_t K, SparseMode mode, double H,
                            double alpha)
{
    if (mode == SparseMode::D_randomized)
        check_alpha(alpha);
    SparseCombined r;
    r.h = sol.h;
    r.z = sol.z;
    r.u = sol.u > 0 ? sol.u : 1.0;
    r.H = H;
    r.mode = mode;
    r.alpha = alpha;
    r.Q.resize(std::max(K, sol.h.size()));
    for (std::size_t i = 1; i <= r.Q.size(); ++i)
        r.Q[i - 1] = sparse_threshold(i, eps);
    return r;
}

BesovSparse build_besov_sparse(const SparseSolution& sol, const BesovSpec& spec, SparseMode mode, double H,
                               double alpha)
{
    spec.validate();
    if (mode == SparseMode::D_randomized)
        check_alpha(alpha);
    if (sol.h.size() != static_cast<std::size_t>(spec.J))
        throw DomainError("build_besov_sparse: solution must have one entry per level");
    BesovSparse r;
    r.h = sol.h;
    r.z = sol.z;
    r.u = sol.u > 0 ? sol.u : 1.0;
    r.H = H;
    r.beta = spec.beta;
    r.mode = mode;
    r.alpha = alpha;
    for (int j = 1; j <= spec.J; ++j)
        r.Q.push_back(besov_sparse_threshold(j, spec.eps));
    return r;
}

double besov_T_eps(int j, int J0)
{
    const double C = std::log(2.0);
    if (j <= J0)
        return std::sqrt(2.0 * C * J0);
    return std::sqrt(2.0 * (C * j + std::log(static_cast<double>(j))));
}

double besov_K(int j) { return std::log(static_cast<double>(j)) / 2.0; }

double besov_z(int j, int k)
{
    const double K = besov_K(j);
    if (k <= K)
        return std::exp(k - 1.0) / std::sqrt(static_cast<double>(j));
    return std::sqrt(k - K);
}

int besov_k_max(int j, double c) { return static_cast<int>(std::floor(besov_K(j) + c * j)); }

BesovAdaptive build_besov_adaptive(const BesovSpec& spec, double c)
{
    spec.validate();
    if (!(c > 0.0 && c < std::log(2.0) / 4.0))
        throw DomainError("Besov adaptive test needs c in (0, ln(2)/4)");
    if (!(spec.eps < std::exp(-1.0)))
        throw DomainError("Besov adaptive test needs eps < 1/e");
    const double l1 = std::log(1.0 / spec.eps), l2 = std::log(l1);
    BesovAdaptive r;
    r.c = c;
    r.beta = spec.beta;
    r.J0 = std::max(2, static_cast<int>(std::lround(l2)));
    r.J1 = std::max(r.J0, std::min(spec.J, static_cast<int>(std::ceil(l1 * std::max(l2, 1.0)))));
    return r;
}

ErrorPrediction theoretical_errors_gaussian(double u, double alpha)
{
    check_alpha(alpha);
    if (!(u >= 0))
        throw DomainError("theoretical_errors: u must be non-negative");
    const double H = Phi_inv(1.0 - alpha);
    return {Phi(H - u), 2.0 * Phi(-u / 2.0)};
}

ErrorPrediction theoretical_errors_degenerate(double D, double alpha)
{
    check_alpha(alpha);
    return {(1.0 - alpha) * Phi(-D), Phi(-D)};
}

} // namespace seqdetect
