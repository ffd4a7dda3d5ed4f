#include "seqdetect/extreme.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/ksum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace seqdetect {

namespace {

constexpr std::size_t kMaxExpandedK = std::size_t{1} << 20;

struct LogTables {
    std::vector<long double> la, ls; // index k-1
};

LogTables tabulate(const ProblemSpec& spec, std::size_t K)
{
    LogTables t;
    t.la.resize(K);
    t.ls.resize(K);
    for (std::size_t k = 1; k <= K; ++k) {
        t.la[k - 1] = spec.a.log_eval(k);
        t.ls[k - 1] = spec.sigma.log_eval(k);
    }
    return t;
}

// Sums over k <= m of s4 (1 - B a2)(1 - rho a2) style terms, with
// s4 = (sigma_k/sigma_m)^4 and a2 = (a_k/a_m)^2.
struct Terms {
    std::vector<long double> s4, a2, om; // om = 1 - a2 without cancellation
};

Terms normalised_terms(const LogTables& t, std::size_t m)
{
    Terms r;
    r.s4.resize(m);
    r.a2.resize(m);
    r.om.resize(m);
    const long double lam = t.la[m - 1], lsm = t.ls[m - 1];
    for (std::size_t k = 0; k < m; ++k) {
        r.s4[k] = std::exp(4.0L * (t.ls[k] - lsm));
        r.a2[k] = std::exp(2.0L * (t.la[k] - lam));
        r.om[k] = -std::expm1(2.0L * (t.la[k] - lam));
    }
    return r;
}

// r(A = a_m^-2)^2 * a_m^2; the m-th term vanishes there.
long double break_rho(const LogTables& t, std::size_t m)
{
    const Terms T = normalised_terms(t, m);
    KahanSum num, den;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const long double g = T.om[k];
        num += T.s4[k] * g;
        den += T.s4[k] * T.a2[k] * g;
    }
    return num.value() / den.value();
}

std::size_t efficient_dim(const LogTables& t, long double lnA)
{
    // largest k with A a_k^2 <= 1 (tolerance absorbs rounding at exact break points)
    const long double tol = 64 * std::numeric_limits<long double>::epsilon();
    std::size_t lo = 1, hi = t.la.size();
    if (lnA + 2.0L * t.la[hi - 1] <= tol)
        return hi;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (lnA + 2.0L * t.la[mid - 1] <= tol)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// c = 1 - A a_m^2. In the extreme regime c is far below long double epsilon, so
// 1 - A a_k^2 is formed as (1 - a2) + a2 c rather than from A.
ExtremeSolution assemble(const ProblemSpec& spec, const LogTables& t, std::size_t m, long double c)
{
    const Terms T = normalised_terms(t, m);
    KahanSum j1, j0;
    std::vector<long double> g(m);
    for (std::size_t k = 0; k < m; ++k) {
        g[k] = std::max(0.0L, T.om[k] + T.a2[k] * c);
        j1 += T.s4[k] * g[k];
        j0 += T.s4[k] * g[k] * g[k];
    }
    const long double J1 = j1.value(), J0 = j0.value();
    const long double lr = std::log(static_cast<long double>(spec.r));
    const long double le = std::log(static_cast<long double>(spec.eps));
    const long double lsm = t.ls[m - 1];

    ExtremeSolution s;
    s.m = m;
    s.K_used = t.la.size();
    s.A = static_cast<double>(std::exp(std::log1p(-c) - 2.0L * t.la[m - 1]));
    s.z0_sq = static_cast<double>(std::exp(2.0L * lr - 4.0L * lsm) / J1);
    s.u = static_cast<double>(std::exp(2.0L * (lr - le) - 2.0L * lsm) * std::sqrt(J0 / 2.0L) / J1);
    s.eta_sq.resize(m);
    s.w.resize(m);
    const long double scale = std::exp(2.0L * lr - 2.0L * lsm) / J1;
    const long double wnorm = std::sqrt(2.0L * J0);
    // eta_sq can underflow for very steep sigma (sigma_m^2 beyond ~1e308 r^2); u, A and m stay exact
    for (std::size_t k = 0; k < m; ++k) {
        const long double s2 = std::sqrt(T.s4[k]);
        s.eta_sq[k] = static_cast<double>(scale * s2 * g[k]);
        s.w[k] = static_cast<double>(s2 * g[k] / wnorm);
    }
    s.w0 = *std::max_element(s.w.begin(), s.w.end());
    return s;
}

} // namespace

double r_of_A(double A, const ProblemSpec& spec)
{
    spec.validate();
    if (!(A > 0.0) || !std::isfinite(A))
        throw DomainError("r_of_A: A must be positive");
    if (spec.K < 2)
        throw DomainError("r_of_A: K must be >= 2");
    const LogTables t = tabulate(spec, spec.K);
    const long double lnA = std::log(static_cast<long double>(A));
    const long double tol = 64 * std::numeric_limits<long double>::epsilon();
    if (lnA + 2.0L * t.la[1] > tol)
        throw DomainError("r_of_A: A above a_2^-2");
    if (lnA + 2.0L * t.la.back() < -tol)
        throw DomainError("r_of_A: A below a_K^-2 (increase K)");
    const std::size_t m = efficient_dim(t, lnA);
    const long double c = std::max(0.0L, -std::expm1(lnA + 2.0L * t.la[m - 1]));
    const Terms T = normalised_terms(t, m);
    KahanSum num, den;
    for (std::size_t k = 0; k < m; ++k) {
        const long double g = std::max(0.0L, T.om[k] + T.a2[k] * c);
        num += T.s4[k] * g;
        den += T.s4[k] * T.a2[k] * g;
    }
    const long double r2 = num.value() / den.value() * std::exp(-2.0L * t.la[m - 1]);
    return static_cast<double>(std::sqrt(r2));
}

ExtremeSolution solve_extreme(const ProblemSpec& spec)
{
    spec.validate();
    if (spec.q != 2.0)
        throw DomainError("solve_extreme handles q = 2; use solve_sparse_extreme for q < 2");
    const long double lr = std::log(static_cast<long double>(spec.r));
    if (lr + spec.a.log_eval(1) >= 0.0L)
        throw DomainError("radius outside solvable range: r >= 1/a_1");

    std::size_t K = std::max<std::size_t>(spec.K, 2);
    LogTables t = tabulate(spec, K);
    // rho_m = r^2 a_m^2 compared against the break value at m
    auto above = [&](std::size_t m) { return break_rho(t, m) > std::exp(2.0L * (lr + t.la[m - 1])); };

    while (above(K)) {
        const bool can_grow = spec.a.kind != SeqKind::table && spec.sigma.kind != SeqKind::table;
        if (!can_grow || K >= kMaxExpandedK)
            throw DomainError("radius outside solvable range: r below r(a_K^-2)");
        K = std::min(kMaxExpandedK, 2 * K);
        t = tabulate(spec, K);
    }

    std::size_t lo = 2, hi = K; // break value at lo is above r, at hi it is not
    int guard = 0;
    while (hi - lo > 1) {
        if (++guard > 200)
            throw NumericError("solve_extreme: bisection did not converge");
        const std::size_t mid = lo + (hi - lo) / 2;
        if (above(mid))
            lo = mid;
        else
            hi = mid;
    }
    const std::size_t m = lo;

    // within the segment the energy equation is linear in B = A a_m^2; solve for c = 1 - B
    const Terms T = normalised_terms(t, m);
    KahanSum diff, den;
    for (std::size_t k = 0; k < m; ++k) {
        const long double p = -std::expm1(2.0L * (lr + t.la[k])); // 1 - r^2 a_k^2
        diff += -(T.s4[k] * T.om[k] * p);
        den += T.s4[k] * T.a2[k] * p;
    }
    long double c = diff.value() / den.value();
    if (!(c < 1.0L) || !std::isfinite(static_cast<double>(c)))
        throw NumericError("solve_extreme: degenerate segment equation");
    c = std::max(c, 0.0L);
    return assemble(spec, t, m, c);
}

AsymptoticU u_asymptotic(const ProblemSpec& spec)
{
    spec.validate();
    const SeqKind ka = spec.a.kind, ks = spec.sigma.kind;
    const double al = spec.a.exponent, be = spec.sigma.exponent;
    // rescaling: a = C a1, sigma = D s1  =>  u(r) = (CD)^-2 u1(C r)
    const double C = spec.a.scale, D = spec.sigma.scale;
    const double r = C * spec.r, eps = spec.eps;
    AsymptoticU out;

    if (ka == SeqKind::polynomial && ks == SeqKind::polynomial) {
        const double d1 = 2 * al / ((4 * be + 1) * (4 * be + 2 * al + 1));
        const double d2 = 2 * al / ((4 * al + 4 * be + 1) * (4 * be + 2 * al + 1));
        const double d0 = 8 * al * al / ((4 * be + 1) * (4 * al + 4 * be + 1) * (4 * be + 2 * al + 1));
        const double c1 = std::pow(d1 / d2, 1.0 / (2 * al));
        const double c2 = std::pow(d2 / d1, (4 * be + 1) / (2 * al)) * d0 / (2 * d1 * d1);
        out.m = c1 * std::pow(r, -1.0 / al);
        out.u = std::sqrt(c2) / (eps * eps) * std::pow(r, (4 * al + 4 * be + 1) / (2 * al));
    } else if (ka == SeqKind::exponential && ks == SeqKind::exponential) {
        if (!(r < 1.0))
            throw DomainError("u_asymptotic: need r < 1/scale(a)");
        out.m = std::log(1.0 / r) / al;
        out.u = std::pow(r, 2 * (al + be) / al) / (eps * eps);
    } else if (ka == SeqKind::polynomial && ks == SeqKind::exponential) {
        const double tt = std::exp(-4 * be);
        const double A1 = tt / ((1 - tt) * (1 - tt));
        const double A2 = tt * (1 + tt) / ((1 - tt) * (1 - tt) * (1 - tt));
        out.m = std::pow(r, -1.0 / al);
        out.u = r * r / (eps * eps) * std::exp(-2 * be * out.m) * std::sqrt(A2 / (2 * A1 * A1));
    } else if (ka == SeqKind::exponential && ks == SeqKind::polynomial) {
        if (!(r < 1.0))
            throw DomainError("u_asymptotic: need r < 1/scale(a)");
        const double d1 = (4 * be + 1) / 2;
        out.m = std::log(1.0 / r) / al;
        out.u = std::sqrt(d1) * r * r / (eps * eps) * std::pow(out.m, -(4 * be + 1) / 2);
    } else {
        throw DomainError("use u_lin for extreme regime");
    }
    out.u /= (C * D) * (C * D);
    return out;
}

LinApprox u_piecewise(const ProblemSpec& spec)
{
    spec.validate();
    const long double lr = std::log(static_cast<long double>(spec.r));
    if (lr + spec.a.log_eval(1) >= 0.0L)
        throw DomainError("u_piecewise: r >= 1/a_1");
    std::size_t lo = 1, hi = spec.K; // a_lo r < 1 <= a_hi r
    if (lr + spec.a.log_eval(hi) < 0.0L)
        throw DomainError("u_piecewise: r below 1/a_K (increase K)");
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (lr + spec.a.log_eval(mid) < 0.0L)
            lo = mid;
        else
            hi = mid;
    }
    const std::size_t m = hi;
    const long double la1 = spec.a.log_eval(m - 1), la2 = spec.a.log_eval(m);
    const long double ls1 = spec.sigma.log_eval(m - 1), ls2 = spec.sigma.log_eval(m);
    const long double le = std::log(static_cast<long double>(spec.eps));

    // x = (a_m^2 r^2 - 1)/sigma_{m-1}^2, y = (1 - a_{m-1}^2 r^2)/sigma_m^2, both over eps^2 (a_m^2 - a_{m-1}^2)
    const long double lden = 2.0L * le + 2.0L * la2 + std::log(-std::expm1(2.0L * (la1 - la2)));
    const long double xnum = std::expm1(2.0L * (la2 + lr));
    const long double ynum = -std::expm1(2.0L * (la1 + lr));
    const long double x = xnum > 0 ? std::exp(std::log(xnum) - 2.0L * ls1 - lden) : 0.0L;
    const long double y = ynum > 0 ? std::exp(std::log(ynum) - 2.0L * ls2 - lden) : 0.0L;

    LinApprox out;
    out.m = m;
    out.u_lin = static_cast<double>(x + y);
    out.u_star = static_cast<double>(std::sqrt((x * x + y * y) / 2.0L));
    out.r_lo = static_cast<double>(std::exp(-la2));
    out.r_hi = static_cast<double>(std::exp(-la1));
    return out;
}

double sparse_lambda(double alpha, double beta, double q) { return (alpha + beta) / 2 - beta / q; }

double sparse_delta(double eps)
{
    if (!(eps > 0.0 && eps < std::exp(-1.0)))
        throw DomainError("delta_eps = 1/ln(1/eps) needs eps < 1/e");
    return 1.0 / std::log(1.0 / eps);
}

double n_eps(const ProblemSpec& spec)
{
    if (spec.a.kind != SeqKind::polynomial || spec.sigma.kind != SeqKind::polynomial)
        throw DomainError("D_eps: needs polynomial a_k and sigma_k");
    if (spec.a.scale != 1.0 || spec.sigma.scale != 1.0)
        throw ConfigError("D_eps: closed form assumes unit scales");
    if (!(spec.r > 0 && spec.r <= 1.0))
        throw DomainError("D_eps: needs r in (0, 1]");
    return std::pow(spec.r, -1.0 / spec.a.exponent);
}

double D_eps(const ProblemSpec& spec)
{
    spec.validate();
    const double n = n_eps(spec);
    const double al = spec.a.exponent, be = spec.sigma.exponent;
    if (spec.q >= 2.0 || sparse_lambda(al, be, spec.q) > 0.0)
        throw DomainError("D_eps: needs q < 2 and lambda <= 0");
    return std::pow(n, -be) * spec.r / spec.eps - std::sqrt(2.0 * std::log(n));
}

SupCoordSolution solve_sup_coordinate(const std::vector<double>& b, const std::vector<double>& c, double r)
{
    const std::size_t K = b.size();
    if (K == 0 || c.size() != K)
        throw DomainError("solve_sup_coordinate: b and c must be non-empty and of equal length");
    for (std::size_t i = 0; i < K; ++i) {
        if (!(b[i] > 0) || !(c[i] > 0))
            throw DomainError("solve_sup_coordinate: b and c must be positive");
        if (i > 0 && !(b[i] > b[i - 1]))
            throw DomainError("solve_sup_coordinate: b must be increasing");
    }
    SupCoordSolution s;
    s.B.resize(K);
    s.C.resize(K);
    KahanSum P, Q;
    for (std::size_t i = 0; i < K; ++i) {
        P += c[i];
        Q += b[i] * c[i];
        s.B[i] = static_cast<double>(P.value() / Q.value());
        s.C[i] = static_cast<double>(1.0L / Q.value());
    }
    if (!(r >= s.B[K - 1] && r <= s.B[0]))
        throw DomainError("solve_sup_coordinate: r outside [B_K, B_1]");

    s.x_star.assign(K, 0.0);
    if (K == 1) {
        s.m = 1;
        s.w = s.w0 = r / c[0];
        s.x_star[0] = s.w;
        return s;
    }
    std::size_t m = 2;
    while (m < K && s.B[m - 1] > r)
        ++m;
    KahanSum Pm, Qm;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        Pm += c[i];
        Qm += b[i] * c[i];
    }
    const long double bm = b[m - 1], cm = c[m - 1];
    const long double w = (1.0L - bm * r) / (Qm.value() - bm * Pm.value());
    const long double w0 = (r - w * Pm.value()) / cm;
    s.m = m;
    s.w = static_cast<double>(w);
    s.w0 = static_cast<double>(std::max(0.0L, w0));
    for (std::size_t i = 0; i + 1 < m; ++i)
        s.x_star[i] = s.w;
    s.x_star[m - 1] = s.w0;
    return s;
}

} // namespace seqdetect
