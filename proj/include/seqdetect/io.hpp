#pragma once

#include "seqdetect/extreme.hpp"
#include "seqdetect/rates.hpp"
#include "seqdetect/simulate.hpp"
#include "seqdetect/testing.hpp"

#include <json.hpp>

#include <string>

namespace seqdetect {

using json = nlohmann::ordered_json;

// Parsers reject unknown fields with ConfigError.
SequenceFamily sequence_from_json(const json& j);
ProblemSpec problem_spec_from_json(const json& j);
BesovSpec besov_spec_from_json(const json& j);
TestRule rule_from_json(const json& j);

json to_json(const SequenceFamily& f);
json to_json(const ProblemSpec& s);
json to_json(const BesovSpec& s);
json to_json(const ExtremeSolution& s);
json to_json(const SparseSolution& s);
json to_json(const SupCoordSolution& s);
json to_json(const TestRule& r);
json to_json(const MonteCarloReport& r);
json to_json(const RateResult& r);

// 17 significant digits (round-trips), '.' separator, locale independent.
std::string fmt_double(double v);

// k, a_k, sigma_k, eta_k^2, w_k for k = 1..m
std::string solution_csv(const ExtremeSolution& sol, const ProblemSpec& spec);

// Throws ConfigError listing the first key of j not in allowed.
void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

} // namespace seqdetect
