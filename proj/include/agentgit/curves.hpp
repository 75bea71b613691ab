#pragma once

#include <string>
#include <vector>

#include "agentgit/formulas.hpp"

namespace agentgit {

struct CurvePoint {
  int alpha = 0;
  int n = 0;
  BigInt s_std;
  BigInt s_rollback;
  BigRational eta;
  BigRational eta_over_n;
};

std::vector<CurvePoint> curve_points(const std::vector<int>& alphas, int n_max);

// CSV with header alpha,n,s_std,s_rollback,eta,eta_over_n; step counts
// exact, eta columns rendered with 12 significant digits.
std::string emit_curves(const std::vector<int>& alphas, int n_max);

}  // namespace agentgit
