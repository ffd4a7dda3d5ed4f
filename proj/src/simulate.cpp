#include "seqdetect/simulate.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/ksum.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

namespace seqdetect {

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Run body(begin, end, slot) over [0, n) split into contiguous chunks.
template <class F>
void parallel_chunks(std::uint64_t n, unsigned threads, F body)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(1, n))));
    if (threads == 1) {
        body(0, n, 0u);
        return;
    }
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t b = std::min(n, t * chunk), e = std::min(n, b + chunk);
        pool.emplace_back([=, &body] { body(b, e, t); });
    }
    for (auto& th : pool)
        th.join();
}

double first_stat(const TestOutcome& o) { return o.statistic.empty() ? 0.0 : o.statistic.front(); }

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t experiment, std::uint64_t replicate)
    : key_(splitmix(splitmix(splitmix(seed) ^ experiment) ^ replicate))
{
}

Observation sample(const std::vector<double>& eta, double eps, std::size_t K, RngStream& stream,
                   const std::vector<double>& noise_scale)
{
    if (eta.size() > K)
        throw DomainError("sample: eta longer than K");
    if (!noise_scale.empty() && noise_scale.size() < K)
        throw DomainError("sample: noise scale shorter than K");
    Observation o;
    o.eps = eps;
    o.y.resize(K);
    boost::random::normal_distribution<double> nd; // ziggurat
    for (std::size_t k = 0; k < K; ++k)
        o.y[k] = nd(stream);
    if (eps == 0.0) {
        std::fill(o.y.begin(), o.y.end(), 0.0);
    } else {
        for (std::size_t k = 0; k < K; ++k)
            o.y[k] *= noise_scale.empty() ? eps : eps * noise_scale[k];
    }
    for (std::size_t k = 0; k < eta.size(); ++k)
        o.y[k] += eta[k];
    return o;
}

std::vector<double> besov_noise_scale(int J, double beta)
{
    std::vector<double> s(BesovSpec::level_offset(J + 1));
    for (int j = 1; j <= J; ++j) {
        const double v = std::exp2(beta * j);
        std::fill_n(s.begin() + static_cast<std::ptrdiff_t>(BesovSpec::level_offset(j)), std::size_t{1} << j, v);
    }
    return s;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z)
{
    if (n == 0)
        throw DomainError("wilson_interval: n must be positive");
    const double N = static_cast<double>(n), p = static_cast<double>(successes) / N, z2 = z * z;
    const double denom = 1.0 + z2 / N;
    const double centre = (p + z2 / (2 * N)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / N + z2 / (4 * N * N));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half), half};
}

MonteCarloReport estimate_errors(const TestRule& rule, const std::vector<double>& eta_alt, double eps,
                                 std::uint64_t reps, std::uint64_t seed, const McOptions& opts)
{
    if (reps < 1)
        throw DomainError("estimate_errors: reps must be >= 1");
    const std::size_t K = std::max({opts.K, working_length(rule), eta_alt.size()});
    const bool randomized = [&] {
        if (auto* s = std::get_if<SparseCombined>(&rule))
            return s->mode == SparseMode::D_randomized;
        if (auto* s = std::get_if<BesovSparse>(&rule))
            return s->mode == SparseMode::D_randomized;
        return false;
    }();

    const unsigned T = std::max(1u, opts.threads);
    std::vector<std::uint64_t> rej0(T, 0), acc1(T, 0);
    std::vector<McRow> rows(opts.keep_rows ? reps : 0);

    auto decide = [&](const TestOutcome& o, RngStream& st) {
        if (!randomized)
            return o.reject;
        return st.uniform() < o.reject_probability;
    };

    parallel_chunks(reps, T, [&](std::uint64_t b, std::uint64_t e, unsigned slot) {
        std::uint64_t r0 = 0, a1 = 0;
        for (std::uint64_t i = b; i < e; ++i) {
            RngStream s0(seed, 2 * opts.experiment, i);
            const Observation y0 = seqdetect::sample(std::vector<double>{}, eps, K, s0, opts.noise_scale);
            const TestOutcome o0 = apply(rule, y0.y, eps);
            const bool rj0 = decide(o0, s0);

            RngStream s1(seed, 2 * opts.experiment + 1, i);
            const Observation y1 = seqdetect::sample(eta_alt, eps, K, s1, opts.noise_scale);
            const TestOutcome o1 = apply(rule, y1.y, eps);
            const bool rj1 = decide(o1, s1);

            r0 += rj0;
            a1 += !rj1;
            if (opts.keep_rows)
                rows[i] = McRow{i, first_stat(o0), rj0, first_stat(o1), rj1};
        }
        rej0[slot] = r0;
        acc1[slot] = a1;
    });

    MonteCarloReport rep;
    rep.reps = reps;
    rep.seed = seed;
    rep.rule = rule_kind(rule);
    for (unsigned t = 0; t < T; ++t) {
        rep.null_rejections += rej0[t];
        rep.alt_acceptances += acc1[t];
    }
    const double n = static_cast<double>(reps);
    rep.alpha_hat = static_cast<double>(rep.null_rejections) / n;
    rep.beta_hat = static_cast<double>(rep.alt_acceptances) / n;
    rep.gamma_hat = rep.alpha_hat + rep.beta_hat;
    rep.ci_alpha = wilson_interval(rep.null_rejections, reps);
    rep.ci_beta = wilson_interval(rep.alt_acceptances, reps);
    rep.ci_gamma = rep.ci_alpha.halfwidth + rep.ci_beta.halfwidth;
    rep.theory = opts.theory;
    rep.rows = std::move(rows);
    return rep;
}

LikelihoodDiagnostic likelihood_diagnostic(const std::vector<double>& eta, double eps, std::uint64_t reps,
                                           std::uint64_t seed, unsigned threads)
{
    if (reps < 2)
        throw DomainError("likelihood_diagnostic: reps must be >= 2");
    if (!(eps > 0))
        throw DomainError("likelihood_diagnostic: eps must be positive");
    for (double v : eta)
        if (v * v / (eps * eps) > 0.5)
            throw DomainError("likelihood_diagnostic refused: max eta^2/eps^2 exceeds 0.5 (heavy-tailed estimator)");

    KahanSum logrhs;
    for (double v : eta)
        logrhs += std::log(std::cosh(v * v / (eps * eps)));

    // fixed-size blocks summed in block order keep the result independent of the thread count
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t nblocks = (reps + kBlock - 1) / kBlock;
    std::vector<long double> s1(nblocks), s2(nblocks);
    const std::size_t K = eta.size();
    parallel_chunks(nblocks, threads, [&](std::uint64_t b, std::uint64_t e, unsigned) {
        for (std::uint64_t blk = b; blk < e; ++blk) {
            KahanSum a, q;
            for (std::uint64_t i = blk * kBlock; i < std::min(reps, (blk + 1) * kBlock); ++i) {
                RngStream st(seed, 0, i);
                const Observation y = seqdetect::sample(std::vector<double>{}, eps, K, st);
                long double logL = 0;
                for (std::size_t k = 0; k < K; ++k) {
                    const long double e2 = eps * eps;
                    logL += -eta[k] * eta[k] / (2 * e2) + std::log(std::cosh(y.y[k] * eta[k] / e2));
                }
                const long double L2 = std::exp(2 * logL);
                a += L2;
                q += L2 * L2;
            }
            s1[blk] = a.value();
            s2[blk] = q.value();
        }
    });
    KahanSum S1, S2;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        S1 += s1[b];
        S2 += s2[b];
    }
    const long double n = static_cast<long double>(reps);
    const long double mean = S1.value() / n;
    const long double var = std::max(0.0L, (S2.value() / n - mean * mean) * n / (n - 1));
    LikelihoodDiagnostic d;
    d.lhs = static_cast<double>(mean);
    d.rhs = static_cast<double>(std::exp(logrhs.value()));
    d.ci = static_cast<double>(1.959963984540054L * std::sqrt(var / n));
    return d;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 5)
        throw DomainError("rate_fit: need at least 5 points");
    double rmin = HUGE_VAL, rmax = 0;
    for (auto [r, u] : points) {
        if (!(r > 0) || !(u > 0))
            throw DomainError("rate_fit: r and u must be positive");
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    if (rmax / rmin < 100.0 * (1 - 1e-12))
        throw DomainError("rate_fit: degenerate spread, points must span two decades in r");
    KahanSum sx, sy;
    for (auto [r, u] : points) {
        sx += std::log(r);
        sy += std::log(u);
    }
    const long double n = static_cast<long double>(points.size());
    const long double mx = sx.value() / n, my = sy.value() / n;
    KahanSum sxx, sxy, syy;
    for (auto [r, u] : points) {
        const long double dx = std::log(r) - mx, dy = std::log(u) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RateFit f;
    f.slope = static_cast<double>(sxy.value() / sxx.value());
    f.intercept = static_cast<double>(my - sxy.value() / sxx.value() * mx);
    f.r2 = syy.value() > 0 ? static_cast<double>(sxy.value() * sxy.value() / (sxx.value() * syy.value())) : 1.0;
    return f;
}

} // namespace seqdetect
