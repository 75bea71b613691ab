#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "agentgit/errors.hpp"

namespace agentgit {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// L = x1 * ... * xn, the number of leaves of the option tree.
BigInt predicted_leaf_count(const std::vector<int>& x);

// Steps to produce every leaf by re-running full paths: n * prod(x).
BigInt predicted_steps_standard(const std::vector<int>& x);

// Steps with checkpoint reuse, one per tree edge:
// sum over i of prod_{j<=i} x_j.
BigInt predicted_steps_rollback(const std::vector<int>& x);

// eta = standard / rollback, exact.
BigRational efficiency(const std::vector<int>& x);

// Limit of eta/n for uniform branching alpha: (alpha - 1) / alpha.
BigRational efficiency_per_step_limit(int alpha);

// eta for n steps of uniform branching alpha.
BigRational efficiency_uniform(int alpha, int n);

// Decimal rendering with the given number of significant digits.
std::string to_decimal(const BigRational& value, int significant_digits);

}  // namespace agentgit
