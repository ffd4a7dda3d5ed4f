#include "seqdetect/cli.hpp"

#include "seqdetect/errors.hpp"
#include "seqdetect/normal.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace seqdetect {

namespace {

template <class T>
T opt(const json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

std::string csv_header(const ExperimentConfig& cfg)
{
    return "# config: " + resolved_config(cfg).dump() + "\n# seed: " + std::to_string(cfg.seed) + "\n";
}

std::string json_doc(const ExperimentConfig& cfg, json result)
{
    json doc;
    doc["config"] = resolved_config(cfg);
    doc["seed"] = cfg.seed;
    doc["result"] = std::move(result);
    return doc.dump(2) + "\n";
}

const ProblemSpec& need_spec(const ExperimentConfig& cfg)
{
    if (!cfg.spec)
        throw ConfigError(cfg.action + " needs a 'spec'");
    return *cfg.spec;
}

// Regime pair of a spec, if its families are closed-form.
std::optional<RegimePair> pair_of(const ProblemSpec& s)
{
    const Regime reg = classify_regime(s.sigma);
    if (reg == Regime::extreme)
        return RegimePair::extreme;
    const bool sob = s.a.kind == SeqKind::polynomial, ana = s.a.kind == SeqKind::exponential;
    if (!sob && !ana)
        return std::nullopt;
    if (s.sigma.kind == SeqKind::polynomial)
        return sob ? RegimePair::mild_sobolev : RegimePair::mild_analytic;
    if (s.sigma.kind == SeqKind::exponential)
        return sob ? RegimePair::severe_sobolev : RegimePair::severe_analytic;
    return std::nullopt;
}

double r_star_of(const ProblemSpec& s)
{
    const auto p = pair_of(s);
    if (!p)
        return NAN;
    try {
        if (*p == RegimePair::extreme)
            return extreme_separation_radius(s);
        return separation_rate(s.a.exponent, s.sigma.exponent, s.q, *p).r_star(s.eps);
    } catch (const DomainError&) {
        return NAN;
    }
}

std::vector<double> least_favorable(const ExtremeSolution& sol)
{
    std::vector<double> eta(sol.eta_sq.size());
    for (std::size_t k = 0; k < eta.size(); ++k)
        eta[k] = std::sqrt(sol.eta_sq[k]);
    return eta;
}

// Single spike at n_eps carrying the whole energy: the degenerate-case alternative.
std::vector<double> spike_alternative(const ProblemSpec& s)
{
    const auto n = static_cast<std::size_t>(std::llround(n_eps(s)));
    if (n < 1 || n > s.K)
        throw DomainError("spike alternative outside the working length");
    std::vector<double> eta(n, 0.0);
    eta[n - 1] = s.r / eval_sequence(s.sigma, n);
    return eta;
}

struct Prepared {
    TestRule rule;
    std::vector<double> eta;
    std::optional<ErrorPrediction> theory;
    McOptions opts;
};

Prepared prepare_mc(const ExperimentConfig& cfg, std::uint64_t experiment = 0)
{
    Prepared p;
    const json& rs = cfg.rule;
    const std::string kind = opt<std::string>(rs, "kind", "weighted");
    const double alpha = opt<double>(rs, "alpha", 0.05);
    p.opts.threads = cfg.threads;
    p.opts.experiment = experiment;
    p.opts.keep_rows = cfg.rows;

    if (cfg.besov) {
        const BesovSpec& b = *cfg.besov;
        p.opts.K = b.flat_size();
        p.opts.noise_scale = besov_noise_scale(b.J, b.beta);
        if (kind == "besov_sparse") {
            const auto sol = solve_besov_extreme(b);
            const auto mode = opt<std::string>(rs, "mode", "G");
            const SparseMode m = mode == "D" ? SparseMode::D : mode == "D_randomized" ? SparseMode::D_randomized : SparseMode::G;
            if (mode != "G" && mode != "D" && mode != "D_randomized")
                throw ConfigError("unknown sparse mode '" + mode + "'");
            p.rule = build_besov_sparse(sol, b, m, opt<double>(rs, "H", Phi_inv(1 - alpha)), alpha);
        } else if (kind == "besov_adaptive") {
            p.rule = build_besov_adaptive(b, opt<double>(rs, "c", 0.1));
        } else {
            throw ConfigError("rule '" + kind + "' does not apply to a besov spec");
        }
        if (!cfg.alternative.contains("eta"))
            throw ConfigError("mc on a besov spec needs an explicit alternative 'eta'");
        p.eta = cfg.alternative.at("eta").get<std::vector<double>>();
        return p;
    }

    const ProblemSpec& s = need_spec(cfg);
    const bool l2 = s.q == 2.0;
    std::optional<ExtremeSolution> sol;
    if (l2)
        sol = solve_extreme(s);

    if (kind == "weighted") {
        if (!sol)
            throw ConfigError("weighted rule needs q = 2");
        if (opt<bool>(rs, "total", false)) {
            p.rule = build_weighted_total(*sol);
            p.theory = ErrorPrediction{Phi(-sol->u / 2), 2 * Phi(-sol->u / 2)};
        } else if (rs.contains("H")) {
            p.rule = build_weighted_H(*sol, rs.at("H").get<double>());
        } else {
            p.rule = build_weighted(*sol, alpha);
            p.theory = theoretical_errors_gaussian(sol->u, alpha);
        }
    } else if (kind == "truncated") {
        p.rule = build_truncated(opt<std::size_t>(rs, "m", sol ? sol->m : 1), alpha);
    } else if (kind == "max_threshold") {
        p.rule = build_max_threshold(opt<std::size_t>(rs, "m", sol ? sol->m : 2), alpha);
    } else if (kind == "sparse") {
        if (l2)
            throw ConfigError("sparse rule needs q < 2");
        const auto mode = opt<std::string>(rs, "mode", "G");
        if (mode != "G" && mode != "D" && mode != "D_randomized")
            throw ConfigError("unknown sparse mode '" + mode + "'");
        const SparseMode m = mode == "D" ? SparseMode::D : mode == "D_randomized" ? SparseMode::D_randomized : SparseMode::G;
        const bool degenerate = sparse_lambda(s.a.exponent, s.sigma.exponent, s.q) <= 0;
        SparseSolution ss;
        if (m == SparseMode::G)
            ss = solve_sparse_extreme(s);
        p.rule = build_sparse(ss, s.eps, s.K, m, opt<double>(rs, "H", Phi_inv(1 - alpha)), alpha);
        if (m != SparseMode::G && degenerate)
            p.theory = theoretical_errors_degenerate(D_eps(s), m == SparseMode::D_randomized ? alpha : 0.0);
    } else if (kind == "adaptive_chi_grid" || kind == "adaptive_max_grid") {
        p.rule = build_adaptive(kind == "adaptive_chi_grid" ? AdaptiveKind::chi_grid : AdaptiveKind::max_grid,
                                opt<int>(rs, "L", default_L(s.eps)), opt<double>(rs, "C", 2.5), 0.0);
        p.opts.K = s.K;
    } else if (kind == "extreme_adaptive_max") {
        p.rule = build_adaptive(AdaptiveKind::extreme_max, 2, 2.5, opt<double>(rs, "T_eps", 4.0));
        p.opts.K = s.K;
    } else {
        throw ConfigError("rule '" + kind + "' does not apply to this spec");
    }

    if (cfg.alternative.contains("eta")) {
        p.eta = cfg.alternative.at("eta").get<std::vector<double>>();
    } else if (sol) {
        p.eta = least_favorable(*sol);
    } else if (sparse_lambda(s.a.exponent, s.sigma.exponent, s.q) <= 0) {
        p.eta = spike_alternative(s);
    } else {
        throw ConfigError("mc with q < 2 and lambda > 0 needs an explicit alternative 'eta'");
    }
    const double scale = opt<double>(cfg.alternative, "scale", 1.0);
    for (double& v : p.eta)
        v *= scale;
    p.opts.theory = p.theory;
    return p;
}

std::vector<Artifact> run_solve(const ExperimentConfig& cfg)
{
    json res;
    if (cfg.besov) {
        const auto sol = solve_besov_extreme(*cfg.besov);
        res["kind"] = "besov";
        res["solution"] = to_json(sol);
        if (cfg.format == "csv") {
            std::ostringstream os;
            os << csv_header(cfg) << "j,h,z\n";
            for (std::size_t j = 0; j < sol.h.size(); ++j)
                os << j + 1 << ',' << fmt_double(sol.h[j]) << ',' << fmt_double(sol.z[j]) << '\n';
            return {{"", os.str()}};
        }
        return {{"", json_doc(cfg, res)}};
    }
    const ProblemSpec& s = need_spec(cfg);
    res["regime"] = to_string(classify_regime(s.sigma));
    if (s.q < 2) {
        const auto sol = solve_sparse_extreme(s);
        res["kind"] = "sparse";
        res["lambda"] = sparse_lambda(s.a.exponent, s.sigma.exponent, s.q);
        res["solution"] = to_json(sol);
        if (cfg.format == "csv") {
            std::ostringstream os;
            os << csv_header(cfg) << "k,h,z\n";
            for (std::size_t k = 0; k < sol.h.size(); ++k)
                if (sol.h[k] > 0)
                    os << k + 1 << ',' << fmt_double(sol.h[k]) << ',' << fmt_double(sol.z[k]) << '\n';
            return {{"", os.str()}};
        }
        return {{"", json_doc(cfg, res)}};
    }
    const auto sol = solve_extreme(s);
    res["kind"] = "l2";
    res["solution"] = to_json(sol);
    if (classify_regime(s.sigma) == Regime::extreme) {
        const auto lin = u_piecewise(s);
        res["piecewise"] = {{"m", lin.m}, {"u_lin", lin.u_lin}, {"u_star", lin.u_star}};
    }
    const std::string seq = csv_header(cfg) + solution_csv(sol, s);
    if (cfg.format == "csv")
        return {{"", seq}};
    return {{"", json_doc(cfg, res)}, {".sequence.csv", seq}};
}

std::vector<Artifact> run_rates(const ExperimentConfig& cfg)
{
    const json& rc = cfg.rates;
    std::vector<std::string> pairs = opt<std::vector<std::string>>(
        rc, "pairs", {"mild-sobolev", "severe-analytic", "severe-sobolev", "mild-analytic"});
    const double a = opt<double>(rc, "alpha", 1.0), b = opt<double>(rc, "beta", 1.0), q = opt<double>(rc, "q", 2.0);
    const std::vector<double> eps = opt<std::vector<double>>(rc, "eps", {1e-2, 1e-3, 1e-4, 1e-6, 1e-8});

    std::ostringstream os;
    os << csv_header(cfg) << "pair,alpha,beta,q,eps,r_star,r_ad,payment_class\n";
    json rows = json::array(), meta = json::array();
    for (const auto& name : pairs) {
        const RegimePair p = regime_pair_from_string(name);
        std::optional<RateResult> base, ad;
        if (p != RegimePair::extreme) {
            base = separation_rate(a, b, q, p);
            ad = adaptive_rate(a, b, q, p);
            meta.push_back({{"rate", to_json(*base)}, {"adaptive", to_json(*ad)}});
        } else if (!cfg.spec) {
            throw ConfigError("the extreme pair needs a 'spec' to locate u_lin = 1");
        }
        for (double e : eps) {
            double rs = NAN, rad = NAN;
            if (base) {
                rs = base->r_star(e);
                try {
                    rad = ad->r_star(e);
                } catch (const DomainError&) {
                }
            } else {
                ProblemSpec s = *cfg.spec;
                s.eps = e;
                rs = extreme_separation_radius(s);
            }
            const std::string pc = payment_class(p, a, b, q);
            os << name << ',' << fmt_double(a) << ',' << fmt_double(b) << ',' << fmt_double(q) << ',' << fmt_double(e)
               << ',' << fmt_double(rs) << ',' << fmt_double(rad) << ',' << pc << '\n';
            json row;
            row["pair"] = name;
            row["alpha"] = a;
            row["beta"] = b;
            row["q"] = q;
            row["eps"] = e;
            row["r_star"] = std::isfinite(rs) ? json(rs) : json(nullptr);
            row["r_ad"] = std::isfinite(rad) ? json(rad) : json(nullptr);
            row["payment_class"] = pc;
            rows.push_back(row);
        }
    }
    if (cfg.format == "csv")
        return {{"", os.str()}};
    return {{"", json_doc(cfg, {{"rates", meta}, {"rows", rows}})}};
}

std::vector<Artifact> run_mc(const ExperimentConfig& cfg)
{
    const Prepared p = prepare_mc(cfg);
    const double eps = cfg.besov ? cfg.besov->eps : cfg.spec->eps;
    const auto rep = estimate_errors(p.rule, p.eta, eps, cfg.reps, cfg.seed, p.opts);
    if (cfg.format == "csv") {
        std::ostringstream os;
        os << csv_header(cfg);
        if (cfg.rows) {
            os << "rule_id,rep,hypothesis,statistic,reject\n";
            for (const auto& r : rep.rows) {
                os << rep.rule << ',' << r.rep << ",null," << fmt_double(r.null_stat) << ',' << r.null_reject << '\n';
                os << rep.rule << ',' << r.rep << ",alt," << fmt_double(r.alt_stat) << ',' << r.alt_reject << '\n';
            }
        } else {
            os << "rule,reps,alpha_hat,beta_hat,gamma_hat,alpha_lo,alpha_hi,beta_lo,beta_hi,beta_theory,gamma_theory\n";
            os << rep.rule << ',' << rep.reps << ',' << fmt_double(rep.alpha_hat) << ',' << fmt_double(rep.beta_hat)
               << ',' << fmt_double(rep.gamma_hat) << ',' << fmt_double(rep.ci_alpha.lo) << ','
               << fmt_double(rep.ci_alpha.hi) << ',' << fmt_double(rep.ci_beta.lo) << ','
               << fmt_double(rep.ci_beta.hi) << ',' << (rep.theory ? fmt_double(rep.theory->beta) : "") << ','
               << (rep.theory ? fmt_double(rep.theory->gamma) : "") << '\n';
        }
        return {{"", os.str()}};
    }
    json res = to_json(rep);
    res["test_rule"] = to_json(p.rule);
    return {{"", json_doc(cfg, res)}};
}

std::vector<Artifact> run_sweep(const ExperimentConfig& cfg)
{
    const ProblemSpec& base = need_spec(cfg);
    const json& sw = cfg.sweep;
    const auto param = opt<std::string>(sw, "parameter", "r");
    if (param != "r" && param != "eps")
        throw ConfigError("sweep parameter must be 'r' or 'eps'");
    if (!sw.contains("values"))
        throw ConfigError("sweep needs 'values'");
    const auto values = sw.at("values").get<std::vector<double>>();
    const double alpha = opt<double>(sw, "alpha", 0.05);
    const bool mc = opt<bool>(sw, "mc", false);

    std::ostringstream os;
    os << csv_header(cfg) << "parameter,value,u,r_star,beta_theory,gamma_theory" << (mc ? ",alpha_hat,beta_hat,gamma_hat" : "")
       << '\n';
    json rows = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        ExperimentConfig c = cfg;
        ProblemSpec& s = *c.spec;
        s = base;
        (param == "r" ? s.r : s.eps) = values[i];
        s.validate();
        double u;
        std::optional<ErrorPrediction> th;
        if (s.q == 2) {
            u = solve_extreme(s).u;
            th = theoretical_errors_gaussian(u, alpha);
        } else {
            u = solve_sparse_extreme(s).u;
            if (sparse_lambda(s.a.exponent, s.sigma.exponent, s.q) <= 0)
                th = theoretical_errors_degenerate(D_eps(s), 0.0);
        }
        const double rs = r_star_of(s);
        json row{{"value", values[i]}, {"u", u}, {"r_star", std::isfinite(rs) ? json(rs) : json(nullptr)}};
        row["beta_theory"] = th ? json(th->beta) : json(nullptr);
        row["gamma_theory"] = th ? json(th->gamma) : json(nullptr);
        os << param << ',' << fmt_double(values[i]) << ',' << fmt_double(u) << ',' << fmt_double(rs) << ','
           << (th ? fmt_double(th->beta) : "") << ',' << (th ? fmt_double(th->gamma) : "");
        if (mc) {
            if (!c.rule.contains("kind") && s.q < 2)
                c.rule = {{"kind", "sparse"}, {"mode", "D"}};
            const Prepared p = prepare_mc(c, i);
            const auto rep = estimate_errors(p.rule, p.eta, s.eps, cfg.reps, cfg.seed, p.opts);
            row["alpha_hat"] = rep.alpha_hat;
            row["beta_hat"] = rep.beta_hat;
            row["gamma_hat"] = rep.gamma_hat;
            os << ',' << fmt_double(rep.alpha_hat) << ',' << fmt_double(rep.beta_hat) << ','
               << fmt_double(rep.gamma_hat);
        }
        os << '\n';
        rows.push_back(row);
    }
    if (cfg.format == "csv")
        return {{"", os.str()}};
    return {{"", json_doc(cfg, {{"parameter", param}, {"rows", rows}})}};
}

std::vector<Artifact> run_adaptive(const ExperimentConfig& cfg)
{
    const json& ad = cfg.adaptive;
    const RegimePair fam = regime_pair_from_string(opt<std::string>(ad, "family", "mild-sobolev"));
    if (fam == RegimePair::extreme)
        throw ConfigError("adaptive grids are defined for closed-form families only");
    if (!ad.contains("grid"))
        throw ConfigError("adaptive needs a 'grid' of {alpha, beta}");
    const double r = opt<double>(ad, "r", 0.1), eps = opt<double>(ad, "eps", 1e-3);
    const auto K = opt<std::size_t>(ad, "K", 1024);
    if (!(eps > 0 && eps < std::exp(-1.0)))
        throw ConfigError("adaptive: eps must lie in (0, 1/e)");

    std::ostringstream os;
    os << csv_header(cfg) << "alpha,beta,u,alpha_hat,beta_hat,gamma_hat\n";
    json rows = json::array();
    std::vector<double> us;
    std::uint64_t idx = 0;
    for (const auto& g : ad.at("grid")) {
        require_keys(g, {"alpha", "beta"}, "adaptive grid point");
        const double a = opt<double>(g, "alpha", 1.0), b = opt<double>(g, "beta", 1.0);
        ProblemSpec s;
        const bool sob = fam == RegimePair::mild_sobolev || fam == RegimePair::severe_sobolev;
        const bool mild = fam == RegimePair::mild_sobolev || fam == RegimePair::mild_analytic;
        s.a = sob ? SequenceFamily::polynomial(a) : SequenceFamily::exponential(a);
        s.sigma = mild ? SequenceFamily::polynomial(b) : SequenceFamily::exponential(b);
        s.q = 2;
        s.r = r;
        s.eps = eps;
        s.K = K;
        s.validate();
        ExperimentConfig c = cfg;
        c.spec = s;
        if (!c.rule.contains("kind"))
            c.rule = {{"kind", "adaptive_chi_grid"}};
        const Prepared p = prepare_mc(c, idx++);
        const double u = solve_extreme(s).u;
        us.push_back(u);
        const auto rep = estimate_errors(p.rule, p.eta, eps, cfg.reps, cfg.seed, p.opts);
        os << fmt_double(a) << ',' << fmt_double(b) << ',' << fmt_double(u) << ',' << fmt_double(rep.alpha_hat) << ','
           << fmt_double(rep.beta_hat) << ',' << fmt_double(rep.gamma_hat) << '\n';
        rows.push_back({{"alpha", a}, {"beta", b}, {"u", u}, {"alpha_hat", rep.alpha_hat}, {"beta_hat", rep.beta_hat},
                        {"gamma_hat", rep.gamma_hat}});
    }
    const double uS = u_inf_over_sigma(us);
    const double margin = uS / std::log(std::log(1 / eps));
    os << "# u_sigma: " << fmt_double(uS) << "\n# margin: " << fmt_double(margin) << '\n';
    if (cfg.format == "csv")
        return {{"", os.str()}};
    return {{"", json_doc(cfg, {{"rows", rows}, {"u_sigma", uS}, {"margin", margin}})}};
}

void write_atomically(const std::string& out, const std::vector<Artifact>& arts)
{
    std::vector<std::pair<std::string, std::string>> staged;
    for (const auto& a : arts) {
        const std::string path = out + a.suffix;
        const std::string tmp = path + ".tmp." + std::to_string(::getpid());
        std::ofstream f(tmp, std::ios::binary);
        f << a.content;
        f.close();
        if (!f) {
            std::remove(tmp.c_str());
            for (auto& s : staged)
                std::remove(s.first.c_str());
            throw NumericError("cannot write " + path);
        }
        staged.emplace_back(tmp, path);
    }
    for (auto& [tmp, path] : staged)
        if (std::rename(tmp.c_str(), path.c_str()) != 0)
            throw NumericError("cannot rename " + tmp + " to " + path);
}

} // namespace

ExperimentConfig parse_config(const json& j, const std::string& action)
{
    require_keys(j, {"action", "spec", "besov", "rule", "alternative", "rates", "sweep", "adaptive", "reps", "seed",
                     "threads", "format", "rows"},
                 "config");
    ExperimentConfig c;
    c.action = action;
    if (j.contains("action") && j.at("action") != action)
        throw ConfigError("config action '" + j.at("action").get<std::string>() + "' does not match subcommand '" +
                          action + "'");
    if (j.contains("spec") && j.contains("besov"))
        throw ConfigError("give either 'spec' or 'besov', not both");
    if (j.contains("spec"))
        c.spec = problem_spec_from_json(j.at("spec"));
    if (j.contains("besov"))
        c.besov = besov_spec_from_json(j.at("besov"));
    c.rule = opt<json>(j, "rule", json::object());
    c.alternative = opt<json>(j, "alternative", json::object());
    c.rates = opt<json>(j, "rates", json::object());
    c.sweep = opt<json>(j, "sweep", json::object());
    c.adaptive = opt<json>(j, "adaptive", json::object());
    require_keys(c.rule, {"kind", "alpha", "H", "total", "m", "mode", "L", "C", "T_eps", "c"}, "rule");
    require_keys(c.alternative, {"eta", "scale"}, "alternative");
    require_keys(c.rates, {"pairs", "alpha", "beta", "q", "eps"}, "rates");
    require_keys(c.sweep, {"parameter", "values", "alpha", "mc"}, "sweep");
    require_keys(c.adaptive, {"family", "grid", "r", "eps", "K"}, "adaptive");
    c.reps = opt<std::uint64_t>(j, "reps", c.reps);
    c.seed = opt<std::uint64_t>(j, "seed", c.seed);
    c.threads = opt<unsigned>(j, "threads", std::max(1u, std::thread::hardware_concurrency()));
    c.format = opt<std::string>(j, "format", c.format);
    c.rows = opt<bool>(j, "rows", false);
    if (c.format != "json" && c.format != "csv")
        throw ConfigError("format must be json or csv");
    if (c.reps < 1)
        throw ConfigError("reps must be >= 1");
    if (action == "solve" && !c.spec && !c.besov)
        throw ConfigError("solve needs 'spec' or 'besov'");
    if (action == "mc" && !c.spec && !c.besov)
        throw ConfigError("mc needs 'spec' or 'besov'");
    if (action == "sweep" && !c.spec)
        throw ConfigError("sweep needs 'spec'");
    return c;
}

json resolved_config(const ExperimentConfig& cfg)
{
    json j;
    j["action"] = cfg.action;
    if (cfg.spec)
        j["spec"] = to_json(*cfg.spec);
    if (cfg.besov)
        j["besov"] = to_json(*cfg.besov);
    auto section = [&](const char* key, const json& v) {
        if (!v.empty())
            j[key] = v;
    };
    section("rule", cfg.rule);
    section("alternative", cfg.alternative);
    section("rates", cfg.rates);
    section("sweep", cfg.sweep);
    section("adaptive", cfg.adaptive);
    j["reps"] = cfg.reps;
    j["seed"] = cfg.seed;
    j["format"] = cfg.format;
    j["rows"] = cfg.rows;
    return j;
}

std::vector<Artifact> run(const ExperimentConfig& cfg)
{
    if (cfg.action == "solve")
        return run_solve(cfg);
    if (cfg.action == "rates")
        return run_rates(cfg);
    if (cfg.action == "mc")
        return run_mc(cfg);
    if (cfg.action == "sweep")
        return run_sweep(cfg);
    if (cfg.action == "adaptive")
        return run_adaptive(cfg);
    throw ConfigError("unknown action '" + cfg.action + "'");
}

int cli_main(int argc, char** argv)
{
    CLI::App app{"seqdetect: minimax detection in Gaussian sequence models"};
    app.require_subcommand(1);
    std::string config, out, format;
    std::uint64_t reps = 0, seed = 0;
    unsigned threads = 0;
    bool rows = false;
    for (const char* name : {"solve", "rates", "mc", "sweep", "adaptive"}) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", config, "JSON configuration file")->required();
        sc->add_option("--out", out, "output path (stdout if omitted)");
        sc->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sc->add_option("--reps", reps, "Monte Carlo replicates");
        sc->add_option("--seed", seed, "RNG seed (overrides SEQDETECT_SEED and the config)");
        sc->add_option("--threads", threads, "worker threads");
        sc->add_flag("--rows", rows, "per-replicate CSV rows (mc)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "seqdetect: error[config]: " << e.what() << '\n';
        return 2;
    }
    const std::string action = app.get_subcommands().front()->get_name();
    auto* sc = app.get_subcommands().front();

    try {
        std::ifstream in(config);
        if (!in)
            throw ConfigError("cannot open config '" + config + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("malformed JSON: ") + e.what());
        }
        ExperimentConfig cfg = parse_config(j, action);
        if (const char* env = std::getenv("SEQDETECT_SEED")) {
            try {
                std::size_t pos = 0;
                cfg.seed = std::stoull(env, &pos);
                if (env[pos] != '\0')
                    throw std::invalid_argument(env);
            } catch (const std::logic_error&) {
                throw ConfigError(std::string("SEQDETECT_SEED is not an unsigned integer: ") + env);
            }
        }
        if (sc->count("--seed"))
            cfg.seed = seed;
        if (sc->count("--reps")) {
            if (reps < 1)
                throw ConfigError("--reps must be >= 1");
            cfg.reps = reps;
        }
        if (sc->count("--threads"))
            cfg.threads = std::max(1u, threads);
        if (sc->count("--format"))
            cfg.format = format;
        if (rows)
            cfg.rows = true;

        const auto arts = run(cfg);
        if (out.empty()) {
            std::cout << arts.front().content;
            return 0;
        }
        write_atomically(out, arts);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "seqdetect: error[config]: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "seqdetect: error[config]: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "seqdetect: error[domain]: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "seqdetect: error[numeric]: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "seqdetect: error[numeric]: " << e.what() << '\n';
        return 3;
    }
}

} // namespace seqdetect
