#include "oracles.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/extreme.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace seqdetect;

namespace {

ProblemSpec spec_of(SequenceFamily a, SequenceFamily s, double r, double eps, std::size_t K)
{
    ProblemSpec p;
    p.a = std::move(a);
    p.sigma = std::move(s);
    p.q = 2;
    p.r = r;
    p.eps = eps;
    p.K = K;
    return p;
}

ProblemSpec hand_spec()
{
    return spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(0), std::sqrt(0.625), 1.0, 10);
}

// Direct sums over the returned sequence, no solver quantities reused.
struct Check {
    double body, energy, u_direct;
};

Check direct(const ExtremeSolution& s, const ProblemSpec& p)
{
    long double body = 0, en = 0, q4 = 0;
    for (std::size_t k = 1; k <= s.m; ++k) {
        const long double a = eval_sequence(p.a, k), sg = eval_sequence(p.sigma, k), x = s.eta_sq[k - 1];
        body += a * a * sg * sg * x;
        en += sg * sg * x;
        q4 += x * x;
    }
    const double u = static_cast<double>(std::sqrt(q4 / 2) / (p.eps * p.eps));
    return {static_cast<double>(body), static_cast<double>(en), u};
}

double rel(double x, double y) { return std::fabs(x - y) / std::max(std::fabs(y), 1e-300); }

} // namespace

TEST(RofA, HandValues)
{
    const auto s = hand_spec();
    EXPECT_NEAR(r_of_A(0.25, s), 1.0, 1e-14);
    EXPECT_NEAR(r_of_A(0.1, s), std::sqrt(1.6 / 4.2), 1e-14);
    EXPECT_NEAR(r_of_A(0.2, s), std::sqrt(0.625), 1e-14);
    EXPECT_LT(r_of_A(0.1, s), r_of_A(0.2, s));
}

TEST(RofA, OutsideDomain)
{
    const auto s = hand_spec();
    EXPECT_THROW(r_of_A(0.3, s), DomainError);
    EXPECT_THROW(r_of_A(0.0, s), DomainError);
    EXPECT_THROW(r_of_A(-1.0, s), DomainError);
}

TEST(RofA, StrictlyIncreasing)
{
    const auto s = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0.1, 1e-3, 1000);
    const double lo = std::log(1.0 / (1000.0 * 1000.0)), hi = std::log(0.25);
    double prev = 0;
    for (int i = 0; i <= 1000; ++i) {
        const double A = std::exp(lo + (hi - lo) * i / 1000.0);
        const double r = r_of_A(A, s);
        EXPECT_GT(r, prev) << "A=" << A;
        prev = r;
    }
}

TEST(SolveExtreme, HandExample)
{
    const auto p = hand_spec();
    const auto s = solve_extreme(p);
    EXPECT_NEAR(s.A, 0.2, 1e-12);
    EXPECT_EQ(s.m, 2u);
    EXPECT_NEAR(s.z0_sq, 0.625, 1e-12);
    ASSERT_EQ(s.eta_sq.size(), 2u);
    EXPECT_NEAR(s.eta_sq[0], 0.5, 1e-12);
    EXPECT_NEAR(s.eta_sq[1], 0.125, 1e-12);
    // u^2 = (0.5^2 + 0.125^2) / 2
    EXPECT_NEAR(s.u, std::sqrt((0.25 + 0.015625) / 2), 1e-12);
    EXPECT_NEAR(s.u, 0.364436, 1e-5);
    EXPECT_NEAR(s.w[0], 0.685994, 1e-6);
    EXPECT_NEAR(s.w[1], 0.171499, 1e-6);
    EXPECT_DOUBLE_EQ(s.w0, s.w[0]);
    EXPECT_NEAR(s.w[0] * s.w[0] + s.w[1] * s.w[1], 0.5, 1e-12);
}

TEST(SolveExtreme, InvariantsOnRandomSpecs)
{
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> U(0.3, 3.0), L(-8, -1);
    for (int t = 0; t < 60; ++t) {
        const bool severe = t % 2;
        const double al = U(g), be = U(g);
        auto a = severe && t % 4 == 1 ? SequenceFamily::exponential(al) : SequenceFamily::polynomial(al);
        auto sg = severe ? SequenceFamily::exponential(be) : SequenceFamily::polynomial(be);
        const double r = std::exp(L(g) * (severe ? 0.4 : 1.0));
        const auto p = spec_of(a, sg, r, 1e-4, 4000);
        ExtremeSolution s;
        try {
            s = solve_extreme(p);
        } catch (const DomainError&) {
            continue; // radius above 1/a_1 for this draw
        }
        const auto c = direct(s, p);
        EXPECT_LT(rel(c.body, 1.0), 1e-8);
        EXPECT_LT(rel(c.energy, r * r), 1e-8);
        EXPECT_LT(rel(c.u_direct, s.u), 1e-8);
        long double w2 = 0, hw = 0;
        for (std::size_t k = 0; k < s.m; ++k) {
            w2 += static_cast<long double>(s.w[k]) * s.w[k];
            hw += static_cast<long double>(s.w[k]) * s.eta_sq[k];
        }
        EXPECT_NEAR(static_cast<double>(w2), 0.5, 1e-12);
        // h(eta) = eps^-2 sum w eta^2 equals u
        EXPECT_LT(rel(static_cast<double>(hw) / (p.eps * p.eps), s.u), 1e-10);
        // bracketing of the efficient dimension
        const double am = eval_sequence(p.a, s.m), am1 = eval_sequence(p.a, s.m + 1);
        EXPECT_LE(s.A * am * am, 1.0 + 1e-12);
        EXPECT_GT(s.A * am1 * am1, 1.0);
        const double top = *std::max_element(s.eta_sq.begin(), s.eta_sq.end());
        for (std::size_t k = 0; k < s.m; ++k) {
            const double a2 = eval_sequence(p.a, k + 1), s2 = eval_sequence(p.sigma, k + 1);
            const double expect = s.z0_sq * s2 * s2 * std::max(0.0, 1 - s.A * a2 * a2);
            EXPECT_LT(std::fabs(s.eta_sq[k] - expect), 1e-9 * top);
        }
    }
}

TEST(SolveExtreme, RoundTrip)
{
    std::mt19937_64 g(5);
    const auto base = spec_of(SequenceFamily::polynomial(1.3), SequenceFamily::polynomial(0.7), 0.1, 1e-3, 2000);
    const double lo = std::log(1.0 / std::pow(2000.0, 2.6)), hi = std::log(std::pow(2.0, -2.6));
    std::uniform_real_distribution<double> U(lo, hi);
    for (int t = 0; t < 200; ++t) {
        const double A0 = std::exp(U(g));
        auto p = base;
        p.r = r_of_A(A0, p);
        const auto s = solve_extreme(p);
        EXPECT_LT(rel(s.A, A0), 1e-10) << "A0=" << A0;
    }
}

TEST(SolveExtreme, GridOracleSmallK)
{
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> U(0.2, 1.5);
    int checked = 0;
    for (int t = 0; t < 12; ++t) {
        const std::size_t K = 3 + t % 2;
        std::vector<double> a(K), sg(K);
        a[0] = 1.0 + U(g);
        sg[0] = 0.5 + U(g);
        for (std::size_t k = 1; k < K; ++k) {
            a[k] = a[k - 1] * (1.2 + U(g));
            sg[k] = sg[k - 1] * (1.0 + U(g));
        }
        auto p = spec_of(SequenceFamily::table(a), SequenceFamily::table(sg), 0.1, 0.5, K);
        // a radius inside the solvable range, random between the ends
        const double Amin = 1 / (a[K - 1] * a[K - 1]), Amax = 1 / (a[1] * a[1]);
        p.r = r_of_A(Amin + (Amax - Amin) * (0.1 + 0.8 * (t % 5) / 4.0), p);
        const auto s = solve_extreme(p);
        const double u = oracle::l2_grid_u(a, sg, p.r, p.eps);
        EXPECT_LT(rel(s.u, u), 0.01) << "K=" << K << " t=" << t;
        EXPECT_LE(s.u, u * (1 + 1e-9)); // the grid can only be worse
        ++checked;
    }
    EXPECT_EQ(checked, 12);
}

TEST(SolveExtreme, RescalingIdentity)
{
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    const auto base = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0.02, 1e-3, 5000);
    for (int t = 0; t < 20; ++t) {
        const double C = std::exp(U(g)), D = std::exp(U(g));
        auto scaled = base;
        scaled.a = SequenceFamily::polynomial(1, C);
        scaled.sigma = SequenceFamily::polynomial(1, D);
        auto moved = base;
        moved.r = C * base.r;
        const double lhs = solve_extreme(scaled).u;
        const double rhs = solve_extreme(moved).u / (C * D * C * D);
        EXPECT_LT(rel(lhs, rhs), 1e-8) << "C=" << C << " D=" << D;
    }
}

TEST(SolveExtreme, Errors)
{
    auto p = hand_spec();
    p.r = 1.0; // r >= 1/a_1
    EXPECT_THROW(solve_extreme(p), DomainError);
    p.r = 0.5;
    p.q = 1;
    EXPECT_THROW(solve_extreme(p), DomainError);

    auto t = spec_of(SequenceFamily::table({1, 2, 3}), SequenceFamily::table({1, 2, 3}), 0.01, 1, 3);
    try {
        solve_extreme(t);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("radius outside solvable range"), std::string::npos);
    }
}

TEST(SolveExtreme, ExpandsTruncation)
{
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 1e-3, 1e-3, 50);
    const auto s = solve_extreme(p);
    EXPECT_GT(s.K_used, 50u);
    EXPECT_GT(s.m, 50u);
    p.K = s.K_used;
    EXPECT_NEAR(solve_extreme(p).u, s.u, 1e-12 * s.u);
}

TEST(SolveExtreme, HugeSigmaNoOverflow)
{
    // sigma_k = exp(k^2) overflows a double near k = 27; the solver works in logs
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::power_exponential(1, 2), 0.03, 1e-3, 40);
    const auto s = solve_extreme(p);
    EXPECT_TRUE(std::isfinite(s.u));
    EXPECT_GE(s.u, 0);
    EXPECT_GT(s.m, 20u);
    p.r = 0.21;
    EXPECT_GT(solve_extreme(p).u, 0);
}

TEST(Weights, TrendsWithDimension)
{
    // mild: w0 shrinks like m^{-1/2}; severe: stays bounded below
    auto mild = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0.1, 1e-3, 100000);
    double prev = 1;
    for (double r : {0.1, 0.01, 0.001, 1e-4}) {
        mild.r = r;
        const auto s = solve_extreme(mild);
        EXPECT_LT(s.w0, prev);
        EXPECT_LE(s.w0, 2.0 / std::sqrt(static_cast<double>(s.m)));
        prev = s.w0;
    }
    auto sev = spec_of(SequenceFamily::polynomial(1), SequenceFamily::exponential(1), 0.1, 1e-3, 100000);
    for (double r : {0.1, 0.01, 0.001, 1e-4}) {
        sev.r = r;
        EXPECT_GT(solve_extreme(sev).w0, 0.3);
    }
}

TEST(Asymptotic, MildSobolevConstants)
{
    // d-constants for alpha = beta = 1, computed here from their definitions
    const double d1 = 2.0 / 35, d2 = 2.0 / 63, d0 = 8.0 / 315;
    const double c2 = std::pow(d2 / d1, 2.5) * d0 / (2 * d1 * d1);
    EXPECT_NEAR(c2, 0.8946317, 1e-7);
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0.01, 1e-3, 1000);
    const auto a = u_asymptotic(p);
    EXPECT_NEAR(a.u, std::sqrt(c2) * std::pow(p.r, 4.5) / (p.eps * p.eps), 1e-12 * a.u);
    EXPECT_NEAR(a.m, std::sqrt(d1 / d2) / p.r, 1e-9 * a.m);
}

TEST(Asymptotic, AgreesWithExactSolver)
{
    struct Case {
        SequenceFamily a, s;
        double r, tol;
    };
    const std::vector<Case> cases = {
        {SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 1e-3, 0.01},
        {SequenceFamily::polynomial(2), SequenceFamily::polynomial(0.5), 1e-4, 0.01},
        {SequenceFamily::exponential(1), SequenceFamily::exponential(1), 1e-8, 0.25},
        {SequenceFamily::polynomial(1), SequenceFamily::exponential(1), 1e-4, 0.25},
        {SequenceFamily::exponential(1), SequenceFamily::polynomial(1), 1e-8, 0.25},
    };
    for (const auto& c : cases) {
        auto p = spec_of(c.a, c.s, c.r, 1e-3, 200000);
        const double exact = solve_extreme(p).u, asym = u_asymptotic(p).u;
        EXPECT_LT(rel(asym, exact), c.tol) << to_string(c.a.kind) << "/" << to_string(c.s.kind);
    }
}

TEST(Asymptotic, Slopes)
{
    auto slope = [](ProblemSpec p, double r0, double r1) {
        p.r = r0;
        const double u0 = solve_extreme(p).u;
        p.r = r1;
        const double u1 = solve_extreme(p).u;
        return std::log(u1 / u0) / std::log(r1 / r0);
    };
    auto mild = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0, 1e-3, 100000);
    EXPECT_NEAR(slope(mild, 1e-4, 1e-3), 4.5, 0.05);
    auto sev = spec_of(SequenceFamily::exponential(1), SequenceFamily::exponential(1), 0, 1e-3, 100000);
    EXPECT_NEAR(slope(sev, 1e-8, 1e-6), 4.0, 0.25);
}

TEST(Asymptotic, UnsupportedPair)
{
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::power_exponential(1, 2), 0.1, 1e-3, 20);
    try {
        u_asymptotic(p);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("use u_lin for extreme regime"), std::string::npos);
    }
}

TEST(Piecewise, BreakPointValue)
{
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::table({1, 3, 30, 3000}), 0.5, 0.1, 4);
    const auto l = u_piecewise(p);
    EXPECT_EQ(l.m, 2u);
    EXPECT_NEAR(l.u_lin, 1.0 / (0.01 * 4 * 9), 1e-12);
    EXPECT_NEAR(l.u_lin, 2.77778, 1e-5);
}

TEST(Piecewise, SandwichAndLinearity)
{
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::power_exponential(1, 2), 0.1, 1e-3, 25);
    std::mt19937_64 g(23);
    std::uniform_real_distribution<double> U(std::log(1.0 / 25), std::log(0.999));
    for (int t = 0; t < 1000; ++t) {
        p.r = std::exp(U(g));
        const auto l = u_piecewise(p);
        // equality cases (x or y zero) are only resolved up to rounding
        EXPECT_LE(l.u_lin / 2, l.u_star * (1 + 1e-15));
        EXPECT_LE(l.u_star, l.u_lin / std::sqrt(2.0) * (1 + 1e-15));
        EXPECT_LE(l.r_lo, p.r);
        EXPECT_LT(p.r, l.r_hi);
    }
    // linear in r^2 between break points
    for (std::size_t m : {3u, 6u}) {
        const double am = m, am1 = m - 1.0;
        auto at = [&](double r2) {
            p.r = std::sqrt(r2);
            return u_piecewise(p).u_lin;
        };
        const double lo = 1 / (am * am), hi = 1 / (am1 * am1);
        const double f0 = at(lo * (1 + 1e-13)), f1 = at(hi * (1 - 1e-13)), fm = at((lo + hi) / 2);
        EXPECT_NEAR(fm, (f0 + f1) / 2, 1e-6 * fm);
    }
    p.r = 1.0;
    EXPECT_THROW(u_piecewise(p), DomainError);
}

TEST(Piecewise, ExactSolverNearUStar)
{
    // sigma_k = exp(k^2): sigma_m / sigma_{m-1} = e^{2m-1} >= 1e3 from m = 4 on
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::power_exponential(1, 2), 0.1, 1e-3, 25);
    for (std::size_t m = 4; m <= 9; ++m) {
        for (double f : {0.2, 0.5, 0.8}) {
            const double lo = 1.0 / m, hi = 1.0 / (m - 1.0);
            p.r = std::sqrt(lo * lo + f * (hi * hi - lo * lo));
            const auto l = u_piecewise(p);
            ASSERT_EQ(l.m, m);
            EXPECT_LT(rel(solve_extreme(p).u, l.u_star), 0.05) << "m=" << m << " f=" << f;
        }
    }
}

TEST(SupCoordinate, WorkedExample)
{
    const auto s = solve_sup_coordinate({1, 4, 9}, {1, 1, 1}, 0.3);
    EXPECT_EQ(s.m, 3u);
    EXPECT_NEAR(s.B[0], 1.0, 1e-15);
    EXPECT_NEAR(s.B[1], 0.4, 1e-15);
    EXPECT_NEAR(s.B[2], 3.0 / 14, 1e-15);
    EXPECT_NEAR(s.w, 1.7 / 13, 1e-12);
    EXPECT_NEAR(s.w0, 0.5 / 13, 1e-12);
    double bc = 0, c = 0;
    const std::vector<double> b{1, 4, 9};
    for (std::size_t i = 0; i < 3; ++i) {
        bc += b[i] * s.x_star[i];
        c += s.x_star[i];
    }
    EXPECT_NEAR(bc, 1.0, 1e-10);
    EXPECT_NEAR(c, 0.3, 1e-10);
}

TEST(SupCoordinate, UniformAtBreak)
{
    const std::vector<double> b{1, 4, 9, 16}, c{1, 1, 1, 1};
    const double B3 = 3.0 / 14;
    const auto s = solve_sup_coordinate(b, c, B3);
    EXPECT_NEAR(s.w0, s.w, 1e-12);
}

TEST(SupCoordinate, RandomFeasibleNeverBeatsClosedForm)
{
    const std::vector<double> b{1, 3, 7, 15, 40}, c{1, 0.8, 1.3, 0.6, 1.1};
    std::mt19937_64 g(29);
    std::uniform_real_distribution<double> U(0, 1);
    for (double r : {0.2, 0.35, 0.6}) {
        const auto s = solve_sup_coordinate(b, c, r);
        // bracket B_m <= r <= B_{m-1}, C_m <= w <= C_{m-1}
        EXPECT_LE(s.B[s.m - 1], r + 1e-12);
        EXPECT_LE(r, s.B[s.m - 2] + 1e-12);
        EXPECT_LE(s.C[s.m - 1], s.w + 1e-12);
        EXPECT_LE(s.w, s.C[s.m - 2] + 1e-12);
        EXPECT_LE(s.w0, s.w + 1e-12);
        int feasible = 0;
        for (int t = 0; t < 200000; ++t) {
            // random direction, then solve the two equality constraints along two coordinates
            std::vector<double> x(5);
            for (auto& v : x)
                v = U(g) * U(g) * s.w * 3;
            const std::size_t i = t % 5, j = (t / 5) % 5;
            if (i == j)
                continue;
            double Sbc = 0, Sc = 0;
            for (std::size_t k = 0; k < 5; ++k)
                if (k != i && k != j) {
                    Sbc += b[k] * c[k] * x[k];
                    Sc += c[k] * x[k];
                }
            // c_i x_i + c_j x_j = r - Sc, b_i c_i x_i + b_j c_j x_j = 1 - Sbc
            const double det = c[i] * b[j] * c[j] - c[j] * b[i] * c[i];
            x[i] = ((r - Sc) * b[j] * c[j] - c[j] * (1 - Sbc)) / det;
            x[j] = (c[i] * (1 - Sbc) - b[i] * c[i] * (r - Sc)) / det;
            if (x[i] < 0 || x[j] < 0)
                continue;
            ++feasible;
            EXPECT_GE(*std::max_element(x.begin(), x.end()), s.w * (1 - 1e-12));
        }
        EXPECT_GT(feasible, 100);
    }
}

TEST(SupCoordinate, OutsideRange)
{
    EXPECT_THROW(solve_sup_coordinate({1, 4, 9}, {1, 1, 1}, 1.5), DomainError);
    EXPECT_THROW(solve_sup_coordinate({1, 4, 9}, {1, 1, 1}, 0.1), DomainError);
}

TEST(DEps, WorkedExample)
{
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0.01, 1e-5, 1000);
    p.q = 0.5;
    EXPECT_NEAR(n_eps(p), 100.0, 1e-9);
    EXPECT_NEAR(D_eps(p), 10 - std::sqrt(2 * std::log(100.0)), 1e-9);
    EXPECT_NEAR(D_eps(p), 6.96515, 1e-5);
}

TEST(DEps, BalancePoint)
{
    auto p = spec_of(SequenceFamily::polynomial(1), SequenceFamily::polynomial(1), 0.01, 1e-5, 1000);
    p.q = 0.5;
    // n = 100 fixed by r; choose eps so r / (n eps) = sqrt(2 ln n)
    p.eps = p.r / (100 * std::sqrt(2 * std::log(100.0)));
    EXPECT_NEAR(D_eps(p), 0.0, 1e-12);
}

TEST(DEps, NeedsDegenerateCase)
{
    auto p = spec_of(SequenceFamily::polynomial(2), SequenceFamily::polynomial(1), 0.01, 1e-5, 1000);
    p.q = 1; // lambda = 0.5 > 0
    EXPECT_THROW(D_eps(p), DomainError);
}
