#include "seqdetect/io.hpp"

#include "seqdetect/errors.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace seqdetect {

namespace {

template <class T>
T get(const json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T need(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw ConfigError("missing field '" + std::string(key) + "' in " + where);
    return get<T>(j, key, T{});
}

json num(double v)
{
    // json has no infinities; keep them readable instead of null
    if (std::isfinite(v))
        return v;
    return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

json nums(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v)
        a.push_back(num(x));
    return a;
}

const char* mode_name(SparseMode m)
{
    switch (m) {
    case SparseMode::G: return "G";
    case SparseMode::D: return "D";
    case SparseMode::D_randomized: return "D_randomized";
    }
    return "?";
}

SparseMode mode_from(const std::string& s)
{
    if (s == "G") return SparseMode::G;
    if (s == "D") return SparseMode::D;
    if (s == "D_randomized") return SparseMode::D_randomized;
    throw ConfigError("unknown sparse mode '" + s + "'");
}

} // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object())
        throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
}

SequenceFamily sequence_from_json(const json& j)
{
    require_keys(j, {"kind", "scale", "exponent", "power", "values"}, "sequence");
    SequenceFamily f;
    f.kind = seq_kind_from_string(need<std::string>(j, "kind", "sequence"));
    f.scale = get<double>(j, "scale", 1.0);
    f.exponent = get<double>(j, "exponent", 1.0);
    f.power = get<double>(j, "power", f.kind == SeqKind::power_exponential ? 2.0 : 1.0);
    if (f.kind == SeqKind::table)
        f.values = need<std::vector<double>>(j, "values", "table sequence");
    else if (j.contains("values"))
        throw ConfigError("'values' is only valid for table sequences");
    f.validate();
    return f;
}

ProblemSpec problem_spec_from_json(const json& j)
{
    require_keys(j, {"preset", "order", "beta", "nu", "a", "sigma", "q", "r", "eps", "K"}, "spec");
    ProblemSpec s;
    if (j.contains("preset")) {
        const auto name = need<std::string>(j, "preset", "spec");
        if (name == "differentiation")
            s = preset_differentiation(get<double>(j, "order", 1.0));
        else if (name == "dirichlet")
            s = preset_dirichlet(get<double>(j, "beta", 1.0));
        else if (name == "heat")
            s = preset_heat(get<double>(j, "beta", 1.0));
        else if (name == "deconvolution")
            s = preset_deconvolution(need<std::vector<double>>(j, "nu", "deconvolution preset"));
        else
            throw ConfigError("unknown preset '" + name + "'");
        if (j.contains("sigma"))
            throw ConfigError("a preset fixes sigma; drop 'sigma' or the preset");
    } else {
        for (const char* k : {"order", "beta", "nu"})
            if (j.contains(k))
                throw ConfigError(std::string("field '") + k + "' needs a preset");
        s.a = sequence_from_json(need<json>(j, "a", "spec"));
        s.sigma = sequence_from_json(need<json>(j, "sigma", "spec"));
    }
    if (j.contains("a"))
        s.a = sequence_from_json(j.at("a"));
    s.q = get<double>(j, "q", s.q);
    s.r = get<double>(j, "r", s.r);
    s.eps = get<double>(j, "eps", s.eps);
    s.K = get<std::size_t>(j, "K", s.K);
    s.validate();
    return s;
}

BesovSpec besov_spec_from_json(const json& j)
{
    require_keys(j, {"alpha", "beta", "q", "t", "r", "eps", "J"}, "besov spec");
    BesovSpec s;
    s.alpha = get<double>(j, "alpha", s.alpha);
    s.beta = get<double>(j, "beta", s.beta);
    s.q = get<double>(j, "q", s.q);
    s.t = get<double>(j, "t", s.t);
    s.r = get<double>(j, "r", s.r);
    s.eps = get<double>(j, "eps", s.eps);
    s.J = get<int>(j, "J", s.J);
    s.validate();
    return s;
}

json to_json(const SequenceFamily& f)
{
    json j;
    j["kind"] = to_string(f.kind);
    if (f.kind == SeqKind::table) {
        j["values"] = nums(f.values);
        return j;
    }
    j["scale"] = f.scale;
    j["exponent"] = f.exponent;
    j["power"] = f.power;
    return j;
}

json to_json(const ProblemSpec& s)
{
    json j;
    j["a"] = to_json(s.a);
    j["sigma"] = to_json(s.sigma);
    j["q"] = s.q;
    j["r"] = s.r;
    j["eps"] = s.eps;
    j["K"] = s.K;
    return j;
}

json to_json(const BesovSpec& s)
{
    json j;
    j["alpha"] = s.alpha;
    j["beta"] = s.beta;
    j["q"] = s.q;
    j["t"] = s.t;
    j["r"] = s.r;
    j["eps"] = s.eps;
    j["J"] = s.J;
    return j;
}

json to_json(const ExtremeSolution& s)
{
    json j;
    j["A"] = num(s.A);
    j["m"] = s.m;
    j["u"] = num(s.u);
    j["z0_sq"] = num(s.z0_sq);
    j["w0"] = num(s.w0);
    j["K_used"] = s.K_used;
    j["eta_sq"] = nums(s.eta_sq);
    j["w"] = nums(s.w);
    return j;
}

json to_json(const SparseSolution& s)
{
    json j;
    j["u"] = num(s.u);
    j["n_eff"] = num(s.n_eff);
    j["h0"] = num(s.h0);
    j["c0"] = num(s.c0);
    j["j0"] = num(s.j0);
    j["energy"] = num(s.energy);
    j["energy_target"] = num(s.energy_target);
    j["norm"] = num(s.norm);
    j["norm_bound"] = num(s.norm_bound);
    j["feasible"] = s.feasible;
    j["h"] = nums(s.h);
    j["z"] = nums(s.z);
    return j;
}

json to_json(const SupCoordSolution& s)
{
    json j;
    j["m"] = s.m;
    j["w"] = num(s.w);
    j["w0"] = num(s.w0);
    j["x_star"] = nums(s.x_star);
    j["B"] = nums(s.B);
    j["C"] = nums(s.C);
    return j;
}

json to_json(const TestRule& rule)
{
    json j;
    j["kind"] = rule_kind(rule);
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, WeightedChiSq>) {
                j["H"] = r.H;
                j["w"] = r.w;
            } else if constexpr (std::is_same_v<R, TruncatedChiSq>) {
                j["m"] = r.m;
                j["H"] = r.H;
            } else if constexpr (std::is_same_v<R, MaxThreshold>) {
                j["T"] = r.T;
            } else if constexpr (std::is_same_v<R, SparseCombined> || std::is_same_v<R, BesovSparse>) {
                j["mode"] = mode_name(r.mode);
                j["u"] = r.u;
                j["H"] = r.H;
                j["alpha"] = r.alpha;
                if constexpr (std::is_same_v<R, BesovSparse>)
                    j["beta"] = r.beta;
                j["h"] = r.h;
                j["z"] = r.z;
                j["Q"] = r.Q;
            } else if constexpr (std::is_same_v<R, AdaptiveChiGrid> || std::is_same_v<R, AdaptiveMaxGrid>) {
                j["L"] = r.L;
                j["C"] = r.C;
            } else if constexpr (std::is_same_v<R, ExtremeAdaptiveMax>) {
                j["T_eps"] = r.T_eps;
            } else {
                j["J0"] = r.J0;
                j["J1"] = r.J1;
                j["c"] = r.c;
                j["beta"] = r.beta;
            }
        },
        rule);
    return j;
}

TestRule rule_from_json(const json& j)
{
    const auto kind = need<std::string>(j, "kind", "rule");
    const std::string where = "rule '" + kind + "'";
    if (kind == "weighted") {
        require_keys(j, {"kind", "H", "w"}, where);
        return WeightedChiSq{need<std::vector<double>>(j, "w", where), need<double>(j, "H", where)};
    }
    if (kind == "truncated") {
        require_keys(j, {"kind", "m", "H"}, where);
        return TruncatedChiSq{need<std::size_t>(j, "m", where), need<double>(j, "H", where)};
    }
    if (kind == "max_threshold") {
        require_keys(j, {"kind", "T"}, where);
        return MaxThreshold{need<std::vector<double>>(j, "T", where)};
    }
    if (kind == "sparse" || kind == "besov_sparse") {
        auto fill = [&](auto& r) {
            r.mode = mode_from(need<std::string>(j, "mode", where));
            r.u = need<double>(j, "u", where);
            r.H = need<double>(j, "H", where);
            r.alpha = get<double>(j, "alpha", 0.0);
            r.h = need<std::vector<double>>(j, "h", where);
            r.z = need<std::vector<double>>(j, "z", where);
            r.Q = need<std::vector<double>>(j, "Q", where);
        };
        if (kind == "sparse") {
            require_keys(j, {"kind", "mode", "u", "H", "alpha", "h", "z", "Q"}, where);
            SparseCombined r;
            fill(r);
            return r;
        }
        require_keys(j, {"kind", "mode", "u", "H", "alpha", "beta", "h", "z", "Q"}, where);
        BesovSparse r;
        fill(r);
        r.beta = need<double>(j, "beta", where);
        return r;
    }
    if (kind == "adaptive_chi_grid") {
        require_keys(j, {"kind", "L", "C"}, where);
        return AdaptiveChiGrid{need<int>(j, "L", where), need<double>(j, "C", where)};
    }
    if (kind == "adaptive_max_grid") {
        require_keys(j, {"kind", "L", "C"}, where);
        return AdaptiveMaxGrid{need<int>(j, "L", where), need<double>(j, "C", where)};
    }
    if (kind == "extreme_adaptive_max") {
        require_keys(j, {"kind", "T_eps"}, where);
        return ExtremeAdaptiveMax{need<double>(j, "T_eps", where)};
    }
    if (kind == "besov_adaptive") {
        require_keys(j, {"kind", "J0", "J1", "c", "beta"}, where);
        return BesovAdaptive{need<int>(j, "J0", where), need<int>(j, "J1", where), need<double>(j, "c", where),
                             need<double>(j, "beta", where)};
    }
    throw ConfigError("unknown rule kind '" + kind + "'");
}

json to_json(const MonteCarloReport& r)
{
    json j;
    j["rule"] = r.rule;
    j["seed"] = r.seed;
    j["reps"] = r.reps;
    j["null_rejections"] = r.null_rejections;
    j["alt_acceptances"] = r.alt_acceptances;
    j["alpha_hat"] = r.alpha_hat;
    j["beta_hat"] = r.beta_hat;
    j["gamma_hat"] = r.gamma_hat;
    j["ci"] = {{"alpha", {r.ci_alpha.lo, r.ci_alpha.hi}},
               {"beta", {r.ci_beta.lo, r.ci_beta.hi}},
               {"gamma_halfwidth", r.ci_gamma}};
    if (r.theory)
        j["theory"] = {{"beta", r.theory->beta}, {"gamma", r.theory->gamma}};
    else
        j["theory"] = nullptr;
    return j;
}

json to_json(const RateResult& r)
{
    json j;
    j["pair"] = to_string(r.pair);
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["q"] = r.q;
    j["eps_exponent"] = r.eps_exponent;
    j["log_power"] = r.log_power;
    j["constant"] = r.constant;
    if (r.sparse)
        j["lambda"] = r.lambda;
    j["sharp"] = r.sharp;
    j["formula"] = r.formula;
    if (!r.payment_class.empty())
        j["payment_class"] = r.payment_class;
    return j;
}

std::string fmt_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string solution_csv(const ExtremeSolution& sol, const ProblemSpec& spec)
{
    std::ostringstream os;
    os << "k,a_k,sigma_k,eta_sq,w\n";
    for (std::size_t k = 1; k <= sol.m; ++k)
        os << k << ',' << fmt_double(eval_sequence(spec.a, k)) << ',' << fmt_double(eval_sequence(spec.sigma, k))
           << ',' << fmt_double(sol.eta_sq[k - 1]) << ',' << fmt_double(sol.w[k - 1]) << '\n';
    return os.str();
}

} // namespace seqdetect
