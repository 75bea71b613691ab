#include "agentgit/curves.hpp"

#include <sstream>

namespace agentgit {

std::vector<CurvePoint> curve_points(const std::vector<int>& alphas, int n_max) {
  if (alphas.empty()) throw ValidationError("alpha list is empty");
  for (int alpha : alphas) {
    if (alpha < 2 || alpha > 9) throw ValidationError("alpha must be in 2..9");
  }
  if (n_max < 1 || n_max > 40) throw ValidationError("n_max must be in 1..40");

  std::vector<CurvePoint> points;
  points.reserve(alphas.size() * static_cast<std::size_t>(n_max));
  for (int alpha : alphas) {
    BigInt alpha_n = 1;
    BigInt s_rollback = 0;
    for (int n = 1; n <= n_max; ++n) {
      alpha_n *= alpha;
      s_rollback += alpha_n;
      CurvePoint p;
      p.alpha = alpha;
      p.n = n;
      p.s_std = BigInt(n) * alpha_n;
      p.s_rollback = s_rollback;
      p.eta = BigRational(p.s_std, p.s_rollback);
      p.eta_over_n = BigRational(alpha_n, s_rollback);
      points.push_back(std::move(p));
    }
  }
  return points;
}

std::string emit_curves(const std::vector<int>& alphas, int n_max) {
  std::ostringstream out;
  out << "alpha,n,s_std,s_rollback,eta,eta_over_n\n";
  for (const CurvePoint& p : curve_points(alphas, n_max)) {
    out << p.alpha << ',' << p.n << ',' << p.s_std.str() << ',' << p.s_rollback.str()
        << ',' << to_decimal(p.eta, 12) << ',' << to_decimal(p.eta_over_n, 12) << '\n';
  }
  return out.str();
}

}  // namespace agentgit
