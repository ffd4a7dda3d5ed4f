#pragma once

namespace seqdetect {

// Standard normal CDF and its upper tail.
double Phi(double x);
double Phi_upper(double x);

// Inverse CDF on (0,1); throws DomainError outside.
double Phi_inv(double p);

} // namespace seqdetect
