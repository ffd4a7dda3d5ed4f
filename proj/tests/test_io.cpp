#include "seqdetect/errors.hpp"
#include "seqdetect/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <clocale>
#include <cmath>
#include <random>

using namespace seqdetect;

TEST(Io, FmtDoubleRoundTrips)
{
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> U(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::pow(10.0, U(g) / 10) * (i % 2 ? -1 : 1);
        EXPECT_EQ(std::stod(fmt_double(v)), v);
    }
    EXPECT_EQ(fmt_double(0.1), "0.10000000000000001");
    EXPECT_EQ(fmt_double(2.0), "2");
    EXPECT_EQ(fmt_double(1.0 / 3), "0.33333333333333331");
    EXPECT_EQ(fmt_double(INFINITY), "inf");
    EXPECT_EQ(fmt_double(NAN), "nan");
}

TEST(Io, FmtDoubleIgnoresLocale)
{
    if (!std::setlocale(LC_NUMERIC, "de_DE.UTF-8"))
        GTEST_SKIP() << "no de_DE locale";
    EXPECT_EQ(fmt_double(0.5), "0.5");
    std::setlocale(LC_NUMERIC, "C");
}

TEST(Io, SpecRoundTrip)
{
    ProblemSpec s;
    s.a = SequenceFamily::power_exponential(0.5, 1.5, 2.0);
    s.sigma = SequenceFamily::table({1, 2.5, 7});
    s.q = 1.25;
    s.r = 0.1;
    s.eps = 3e-4;
    s.K = 3;
    const json j = to_json(s);
    const auto back = problem_spec_from_json(json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.sigma.values, s.sigma.values);
    EXPECT_EQ(back.a.power, 1.5);

    BesovSpec b;
    b.alpha = 2;
    b.q = 1;
    b.J = 7;
    EXPECT_EQ(to_json(besov_spec_from_json(to_json(b))), to_json(b));
}

TEST(Io, Presets)
{
    const auto d = problem_spec_from_json(json::parse(R"({"preset":"differentiation","order":2,"a":{"kind":"polynomial","exponent":1},"r":0.1,"eps":0.001})"));
    EXPECT_EQ(d.sigma.exponent, 2.0);
    const auto c = problem_spec_from_json(json::parse(R"({"preset":"deconvolution","nu":[1,0.5],"a":{"kind":"polynomial"}})"));
    EXPECT_EQ(c.K, 2u);
    EXPECT_THROW(problem_spec_from_json(json::parse(R"({"preset":"deconvolution","nu":[1,0]})")), ConfigError);
    EXPECT_THROW(problem_spec_from_json(json::parse(R"({"preset":"wave"})")), ConfigError);
    EXPECT_THROW(problem_spec_from_json(json::parse(R"({"preset":"heat","sigma":{"kind":"polynomial"}})")), ConfigError);
}

TEST(Io, UnknownFieldsRejected)
{
    const auto bad = [](const char* text) {
        try {
            problem_spec_from_json(json::parse(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(bad(R"({"a":{"kind":"polynomial"},"sigma":{"kind":"polynomial"},"epsilon":0.1})").find("unknown field 'epsilon'"),
              std::string::npos);
    EXPECT_NE(bad(R"({"a":{"kind":"polynomial","exp":2},"sigma":{"kind":"polynomial"}})").find("unknown field 'exp'"),
              std::string::npos);
    EXPECT_NE(bad(R"({"a":{"kind":"polynomial"}})").find("missing field 'sigma'"), std::string::npos);
    EXPECT_NE(bad(R"({"a":{"kind":"polynomial"},"sigma":{"kind":"polynomial"},"q":"two"})").find("field 'q'"),
              std::string::npos);
    EXPECT_THROW(besov_spec_from_json(json::parse(R"({"alpha":2,"j":3})")), ConfigError);
    EXPECT_THROW(rule_from_json(json::parse(R"({"kind":"max_threshold","T":[1],"x":1})")), ConfigError);
    EXPECT_THROW(rule_from_json(json::parse(R"({"kind":"nope"})")), ConfigError);
}

TEST(Io, RuleRoundTrip)
{
    SparseCombined s;
    s.mode = SparseMode::D_randomized;
    s.u = 1.5;
    s.H = 1.6;
    s.alpha = 0.05;
    s.h = {0.5, 0.25};
    s.z = {1, 2};
    s.Q = {3, 4};
    BesovSparse bs;
    bs.beta = 1;
    bs.h = {1};
    bs.z = {2};
    bs.Q = {3};
    const std::vector<TestRule> rules{WeightedChiSq{{0.5, 0.25}, 1.6},
                                      TruncatedChiSq{4, 1.6},
                                      MaxThreshold{{2.5, 3}},
                                      s,
                                      bs,
                                      AdaptiveChiGrid{3, 1.5},
                                      AdaptiveMaxGrid{2, 0.5},
                                      ExtremeAdaptiveMax{4},
                                      BesovAdaptive{1, 5, 0.5, 1}};
    for (const auto& r : rules) {
        const json j = to_json(r);
        const auto back = rule_from_json(json::parse(j.dump()));
        EXPECT_EQ(rule_kind(back), rule_kind(r));
        EXPECT_EQ(to_json(back), j) << j.dump();
    }
}

TEST(Io, SolutionCsv)
{
    ProblemSpec s;
    s.a = SequenceFamily::polynomial(1);
    s.sigma = SequenceFamily::polynomial(0);
    s.r = std::sqrt(0.625);
    s.eps = 1;
    s.K = 10;
    const auto sol = solve_extreme(s);
    const auto csv = solution_csv(sol, s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,a_k,sigma_k,eta_sq,w");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(sol.m));
    EXPECT_NE(csv.find("\n1,1,1,0.5"), std::string::npos);
}

TEST(Io, NonFiniteValuesStayReadable)
{
    ExtremeSolution e;
    e.u = INFINITY;
    EXPECT_EQ(to_json(e)["u"], "inf");
}
