#include "seqdetect/extreme.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/ksum.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace seqdetect {

namespace {

constexpr double kHuge = 1e300;
constexpr std::size_t kLagrangeMaxDim = 4096;
constexpr std::size_t kPolishMaxDim = 200;
// below this the caller is solving a desk instance, not approximating the infinite problem
constexpr std::size_t kTruncationCheckMinDim = 8;

// minimise sum w_j h_j^2 sinh^2(z_j^2/2)
// s.t. sum s_j h_j z_j^2 >= R^2, sum p_j h_j^gamma z_j^tau <= E, 0 <= h_j <= 1, z_j >= 0
struct Problem {
    std::vector<double> w, s, p, mult;
    long double lnR2 = 0, lnE = 0;
    double gamma = 1, tau = 1;
    std::size_t size() const { return w.size(); }
};

double sinh2(double z)
{
    const double v = std::sinh(0.5 * z * z);
    return v * v;
}

struct Point {
    std::vector<double> h, z;
    double F = kHuge;
};

struct Sums {
    long double F = 0, C1 = 0, C2 = 0, hmax = 0;
};

Sums sums(const Problem& P, const std::vector<double>& h, const std::vector<double>& z)
{
    KahanSum F, C1, C2;
    long double hmax = 0;
    bool overflow = false;
    for (std::size_t j = 0; j < P.size(); ++j) {
        if (h[j] <= 0 || z[j] <= 0)
            continue;
        const double sh = sinh2(z[j]);
        if (!std::isfinite(sh))
            overflow = true;
        else
            F += static_cast<long double>(P.w[j]) * h[j] * h[j] * sh;
        C1 += static_cast<long double>(P.s[j]) * h[j] * z[j] * z[j];
        C2 += static_cast<long double>(P.p[j]) * std::pow(static_cast<long double>(h[j]), P.gamma) *
              std::pow(static_cast<long double>(z[j]), P.tau);
        hmax = std::max<long double>(hmax, h[j]);
    }
    Sums s;
    s.F = overflow ? kHuge : F.value();
    s.C1 = C1.value();
    s.C2 = C2.value();
    s.hmax = hmax;
    return s;
}

// Rescale h by t and z by sqrt(v) so the energy constraint is active and the body
// constraint holds; the objective decreases in t along this curve, so t is maximal.
bool restore(const Problem& P, Point& x)
{
    const Sums s = sums(P, x.h, x.z);
    if (!(s.C1 > 0) || !(s.hmax > 0) || !(s.C2 > 0))
        return false;
    const long double half_tau = P.tau / 2.0L;
    const long double lt_body = (P.lnE + half_tau * (std::log(s.C1) - P.lnR2) - std::log(s.C2)) / (P.gamma - half_tau);
    const long double lt = std::min(-std::log(s.hmax), lt_body);
    const long double lv = P.lnR2 - lt - std::log(s.C1);
    const double t = static_cast<double>(std::exp(lt));
    const double sz = static_cast<double>(std::exp(lv / 2.0L));
    for (std::size_t j = 0; j < P.size(); ++j) {
        x.h[j] = std::min(1.0, x.h[j] * t);
        x.z[j] *= sz;
    }
    x.F = static_cast<double>(std::min<long double>(sums(P, x.h, x.z).F, kHuge));
    return std::isfinite(x.F);
}

// Two-parameter block ansatz: h = h0 on a block, z = z0 there.
Point best_block(const Problem& P, bool singles)
{
    const std::size_t N = P.size();
    Point best;
    KahanSum W, S, Pp;
    const long double half_tau = P.tau / 2.0L;
    auto consider = [&](std::size_t from, std::size_t to, long double w, long double s, long double p) {
        const long double lt_body = (P.lnE + half_tau * (std::log(s) - P.lnR2) - std::log(p)) / (P.gamma - half_tau);
        const long double lt = std::min(0.0L, lt_body);
        const long double v = std::exp(P.lnR2 - lt - std::log(s));
        const double sh = sinh2(static_cast<double>(std::sqrt(v)));
        if (!std::isfinite(sh))
            return;
        const long double F = w * std::exp(2.0L * lt) * sh;
        if (F < best.F) {
            best.F = static_cast<double>(F);
            best.h.assign(N, 0.0);
            best.z.assign(N, 0.0);
            for (std::size_t j = from; j < to; ++j) {
                best.h[j] = static_cast<double>(std::exp(lt));
                best.z[j] = static_cast<double>(std::sqrt(v));
            }
        }
    };
    for (std::size_t n = 0; n < N; ++n) {
        W += P.w[n];
        S += P.s[n];
        Pp += P.p[n];
        consider(0, n + 1, W.value(), S.value(), Pp.value());
        if (singles)
            consider(n, n + 1, P.w[n], P.s[n], P.p[n]);
    }
    return best;
}

// min over h in [0,1] of  w S h^2 - a h + b h^gamma  (a = mu s z^2, b = nu p z^tau)
double h_star(double wS, double a, double b, double gamma)
{
    if (gamma == 1.0) {
        const double g = a - b;
        if (g <= 0)
            return 0.0;
        return std::min(1.0, g / (2.0 * wS));
    }
    auto deriv = [&](double h) { return 2.0 * wS * h - a + b * gamma * std::pow(h, gamma - 1.0); };
    if (deriv(1.0) <= 0)
        return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (deriv(mid) > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

struct CoordOpt {
    double h = 0, z = 0;
};

CoordOpt coord_min(double w, double mus, double nup, double gamma, double tau)
{
    auto phi = [&](double z, double* hout) {
        const double S = sinh2(z);
        if (!std::isfinite(S))
            return 0.0;
        const double a = mus * z * z, b = nup * std::pow(z, tau);
        const double h = h_star(w * S, a, b, gamma);
        if (hout)
            *hout = h;
        return w * S * h * h - a * h + b * std::pow(h, gamma);
    };
    double z = gamma == 1.0 ? std::pow(nup / mus, 1.0 / (2.0 - tau)) * 1.0001 : 1e-4;
    if (!(z > 0) || !std::isfinite(z))
        return {};
    double best_v = 0, best_z = 0;
    int since_best = 0;
    for (int k = 0; k < 600 && since_best < 12; ++k, z *= 1.2) {
        const double v = phi(z, nullptr);
        if (v < best_v) {
            best_v = v;
            best_z = z;
            since_best = 0;
        } else if (best_z > 0) {
            ++since_best;
        }
        if (sinh2(z) > 1e300)
            break;
    }
    if (best_z == 0)
        return {};
    const auto res = boost::math::tools::brent_find_minima(
        [&](double lz) { return phi(std::exp(lz), nullptr); }, std::log(best_z / 1.2), std::log(best_z * 1.2), 40);
    CoordOpt c;
    c.z = std::exp(res.first);
    phi(c.z, &c.h);
    if (phi(c.z, nullptr) > best_v) {
        c.z = best_z;
        phi(c.z, &c.h);
    }
    return c;
}

Point lagrange_point(const Problem& P, double lmu, double lnu)
{
    Point x;
    x.h.assign(P.size(), 0.0);
    x.z.assign(P.size(), 0.0);
    const double mu = std::exp(lmu), nu = std::exp(lnu);
    for (std::size_t j = 0; j < P.size(); ++j) {
        const CoordOpt c = coord_min(P.w[j], mu * P.s[j], nu * P.p[j], P.gamma, P.tau);
        x.h[j] = c.h;
        x.z[j] = c.z;
    }
    if (!restore(P, x))
        x.F = kHuge;
    return x;
}

// Multipliers making the block ansatz stationary in (h0, z0).
bool ansatz_multipliers(const Problem& P, const Point& a, double& lmu, double& lnu)
{
    double h = 0, z = 0;
    KahanSum W, S, Pp;
    for (std::size_t j = 0; j < P.size(); ++j)
        if (a.h[j] > 0) {
            h = a.h[j];
            z = a.z[j];
            W += P.w[j];
            S += P.s[j];
            Pp += P.p[j];
        }
    if (h <= 0 || z <= 0)
        return false;
    const double Sw = static_cast<double>(W.value()), Ss = static_cast<double>(S.value()), Sp = static_cast<double>(Pp.value());
    const double Sv = sinh2(z), dS = z * std::sinh(z * z);
    const double g = P.gamma, t = P.tau;
    // [Ss z^2, -g h^{g-1} z^t Sp; 2 h z Ss, -t h^g z^{t-1} Sp] (mu, nu) = (2 h Sv Sw, h^2 dS Sw)
    const double a11 = Ss * z * z, a12 = -g * std::pow(h, g - 1) * std::pow(z, t) * Sp;
    const double a21 = 2 * h * z * Ss, a22 = -t * std::pow(h, g) * std::pow(z, t - 1) * Sp;
    const double b1 = 2 * h * Sv * Sw, b2 = h * h * dS * Sw;
    const double det = a11 * a22 - a12 * a21;
    double mu = 0, nu = 0;
    if (det != 0) {
        mu = (b1 * a22 - a12 * b2) / det;
        nu = (a11 * b2 - a21 * b1) / det;
    }
    if (!(mu > 0) || !(nu > 0)) {
        mu = b2 / a21;
        nu = mu * a11 / (-a12) * 0.5;
    }
    if (!(mu > 0) || !(nu > 0) || !std::isfinite(mu) || !std::isfinite(nu))
        return false;
    lmu = std::log(mu);
    lnu = std::log(nu);
    return true;
}

Point lagrange_search(const Problem& P, const Point& start)
{
    double lmu, lnu;
    if (!ansatz_multipliers(P, start, lmu, lnu))
        return {};
    Point best = lagrange_point(P, lmu, lnu);
    double bm = lmu, bn = lnu;
    const double span = 4.0, step = 1.0;
    for (double dm = -span; dm <= span; dm += step)
        for (double dn = -span; dn <= span; dn += step) {
            Point x = lagrange_point(P, lmu + dm, lnu + dn);
            if (x.F < best.F) {
                best = std::move(x);
                bm = lmu + dm;
                bn = lnu + dn;
            }
        }
    for (int cycle = 0; cycle < 6; ++cycle) {
        const double before = best.F;
        std::uintmax_t iters = 60;
        auto r1 = boost::math::tools::brent_find_minima(
            [&](double v) { return lagrange_point(P, v, bn).F; }, bm - step, bm + step, 30, iters);
        bm = r1.first;
        iters = 60;
        auto r2 = boost::math::tools::brent_find_minima(
            [&](double v) { return lagrange_point(P, bm, v).F; }, bn - step, bn + step, 30, iters);
        bn = r2.first;
        Point x = lagrange_point(P, bm, bn);
        if (x.F < best.F)
            best = std::move(x);
        if (!(best.F < before * (1 - 1e-10)))
            break;
    }
    return best;
}

// Cyclic coordinate descent in (ln h_j, ln z_j) on the restored objective.
Point polish(const Problem& P, Point x)
{
    auto objective = [&](const std::vector<double>& h, const std::vector<double>& z) {
        Point y{h, z, kHuge};
        return restore(P, y) ? y.F : kHuge;
    };
    for (int sweep = 0; sweep < 200; ++sweep) {
        const double before = x.F;
        for (std::size_t j = 0; j < P.size(); ++j) {
            if (x.h[j] <= 0 || x.z[j] <= 0) {
                // try to switch the coordinate on
                Point y = x;
                double hm = 0, zm = 0;
                for (std::size_t i = 0; i < P.size(); ++i)
                    if (x.h[i] > hm) {
                        hm = x.h[i];
                        zm = x.z[i];
                    }
                y.h[j] = 1e-3 * hm;
                y.z[j] = zm;
                if (restore(P, y) && y.F < x.F)
                    x = std::move(y);
                continue;
            }
            for (int which = 0; which < 2; ++which) {
                const double l0 = std::log(which == 0 ? x.h[j] : x.z[j]);
                const auto res = boost::math::tools::brent_find_minima(
                    [&](double lv) {
                        std::vector<double> hh = x.h, zz = x.z;
                        (which == 0 ? hh : zz)[j] = std::exp(lv);
                        return objective(hh, zz);
                    },
                    l0 - 1.0, l0 + 1.0, 40);
                if (res.second < x.F) {
                    Point y = x;
                    (which == 0 ? y.h : y.z)[j] = std::exp(res.first);
                    if (restore(P, y) && y.F < x.F)
                        x = std::move(y);
                }
            }
        }
        if (!(x.F < before * (1 - 1e-8)))
            break;
    }
    return x;
}

SparseSolution report(const Problem& P, const Point& x)
{
    SparseSolution s;
    s.h = x.h;
    s.z = x.z;
    const Sums sm = sums(P, x.h, x.z);
    s.u = std::sqrt(static_cast<double>(sm.F));
    s.energy = static_cast<double>(sm.C1);
    s.energy_target = static_cast<double>(std::exp(P.lnR2));
    s.norm = static_cast<double>(sm.C2);
    s.norm_bound = static_cast<double>(std::exp(P.lnE));
    s.feasible = sm.C1 >= std::exp(P.lnR2) * (1 - 1e-9L) && sm.C2 <= std::exp(P.lnE) * (1 + 1e-9L) &&
                 sm.hmax <= 1 + 1e-12L;
    KahanSum a, b;
    for (std::size_t j = 0; j < P.size(); ++j) {
        a += P.mult[j] * x.h[j];
        b += P.mult[j] * x.h[j] * x.h[j];
    }
    s.h0 = x.h.empty() ? 0.0 : *std::max_element(x.h.begin(), x.h.end());
    s.n_eff = b.value() > 0 ? static_cast<double>(a.value() * a.value() / b.value()) : 0.0;
    s.j0 = s.n_eff > 0 ? std::log2(s.n_eff) : 0.0;
    s.c0 = s.n_eff > 0 && s.h0 > 0 ? s.u * s.u / (s.n_eff * s.h0 * s.h0) : 0.0;
    return s;
}

SparseSolution optimise(const Problem& P, bool singles, bool boundary_is_error)
{
    Point best = best_block(P, singles);
    if (!(best.F < kHuge))
        throw NumericError("sparse extreme: no feasible block found (objective overflow)");
    if (boundary_is_error && best.h.back() > 0 && P.size() >= kTruncationCheckMinDim) {
        std::ostringstream os;
        os << "sparse extreme: optimal block reaches the truncation (K = " << P.size() << "); increase K";
        throw NumericError(os.str());
    }
    if (P.size() <= kLagrangeMaxDim) {
        Point lag = lagrange_search(P, best);
        if (lag.F < best.F)
            best = std::move(lag);
    }
    if (P.size() <= kPolishMaxDim)
        best = polish(P, best);

    SparseSolution s = report(P, best);
    if (!s.feasible) {
        std::ostringstream os;
        os << "sparse extreme: infeasible final point, energy " << s.energy << " vs " << s.energy_target
           << ", body " << s.norm << " vs " << s.norm_bound;
        throw NumericError(os.str());
    }
    return s;
}

Problem sparse_problem(const ProblemSpec& spec, std::size_t N)
{
    Problem P;
    P.w.assign(N, 2.0);
    P.mult.assign(N, 1.0);
    P.s.resize(N);
    P.p.resize(N);
    for (std::size_t i = 1; i <= N; ++i) {
        const long double la = spec.a.log_eval(i), ls = spec.sigma.log_eval(i);
        P.s[i - 1] = static_cast<double>(std::exp(2.0L * ls));
        P.p[i - 1] = static_cast<double>(std::exp(spec.q * (la + ls)));
        if (!std::isfinite(P.s[i - 1]) || !std::isfinite(P.p[i - 1]))
            throw NumericError("sequence overflow at index " + std::to_string(i));
    }
    const long double rt = spec.r * (1.0L - sparse_delta(spec.eps));
    P.lnR2 = 2.0L * (std::log(rt) - std::log(static_cast<long double>(spec.eps)));
    P.lnE = -spec.q * std::log(static_cast<long double>(spec.eps));
    P.gamma = 1.0;
    P.tau = spec.q;
    return P;
}

Problem besov_problem(const BesovSpec& spec)
{
    Problem P;
    const double ln2 = std::log(2.0);
    for (int j = 1; j <= spec.J; ++j) {
        P.w.push_back(std::exp((j + 1) * ln2));
        P.mult.push_back(std::exp(j * ln2));
        P.s.push_back(std::exp(j * (2 * spec.beta + 1) * ln2));
        P.p.push_back(std::exp((spec.t * (spec.alpha + spec.beta) + spec.t / spec.q) * j * ln2));
        if (!std::isfinite(P.p.back()) || !std::isfinite(P.s.back()))
            throw ConfigError("Besov J too large for these exponents");
    }
    const long double rt = spec.r * (1.0L - sparse_delta(spec.eps));
    P.lnR2 = 2.0L * (std::log(rt) - std::log(static_cast<long double>(spec.eps)));
    P.lnE = -spec.t * std::log(static_cast<long double>(spec.eps));
    P.gamma = spec.t / spec.q;
    P.tau = spec.t;
    return P;
}

void check_sparse_spec(const ProblemSpec& spec)
{
    spec.validate();
    if (spec.a.kind != SeqKind::polynomial || spec.sigma.kind != SeqKind::polynomial)
        throw DomainError("sparse extreme problem needs polynomial a_k and sigma_k (mild regime)");
    if (!(spec.q < 2.0))
        throw DomainError("sparse extreme problem needs q < 2");
    if (sparse_lambda(spec.a.exponent, spec.sigma.exponent, spec.q) <= 0.0)
        throw DomainError("degenerate case: use D_eps");
}

void check_besov_spec(const BesovSpec& spec)
{
    spec.validate();
    if (sparse_lambda(spec.alpha, spec.beta, spec.q) <= 0.0)
        throw DomainError("degenerate case: use D_eps");
    if (spec.q > spec.t)
        throw DomainError("Besov extreme problem needs q <= t");
}

} // namespace

SparseSolution sparse_evaluate(const ProblemSpec& spec, const std::vector<double>& h, const std::vector<double>& z)
{
    if (h.size() != z.size())
        throw DomainError("sparse_evaluate: h and z lengths differ");
    spec.validate();
    return report(sparse_problem(spec, h.size()), Point{h, z, 0.0});
}

SparseSolution solve_sparse_extreme(const ProblemSpec& spec)
{
    check_sparse_spec(spec);
    const Problem P = sparse_problem(spec, spec.K);
    return optimise(P, P.size() <= kPolishMaxDim, true);
}

SparseSolution besov_evaluate(const BesovSpec& spec, const std::vector<double>& h, const std::vector<double>& z)
{
    spec.validate();
    const Problem P = besov_problem(spec);
    if (h.size() != P.size() || z.size() != P.size())
        throw DomainError("besov_evaluate: need one (h, z) pair per level");
    return report(P, Point{h, z, 0.0});
}

SparseSolution solve_besov_extreme(const BesovSpec& spec)
{
    check_besov_spec(spec);
    return optimise(besov_problem(spec), true, false);
}

} // namespace seqdetect
