#include "agentgit/formulas.hpp"

#include <sstream>

namespace agentgit {

namespace {

void check_x(const std::vector<int>& x) {
  if (x.empty()) throw ValidationError("option vector is empty");
  for (int xi : x) {
    if (xi < 1) throw ValidationError("option counts must be >= 1");
  }
}

}  // namespace

BigInt predicted_leaf_count(const std::vector<int>& x) {
  check_x(x);
  BigInt product = 1;
  for (int xi : x) product *= xi;
  return product;
}

BigInt predicted_steps_standard(const std::vector<int>& x) {
  check_x(x);
  return BigInt(static_cast<int>(x.size())) * predicted_leaf_count(x);
}

BigInt predicted_steps_rollback(const std::vector<int>& x) {
  check_x(x);
  BigInt total = 0;
  BigInt prefix = 1;
  for (int xi : x) {
    prefix *= xi;
    total += prefix;
  }
  return total;
}

BigRational efficiency(const std::vector<int>& x) {
  return BigRational(predicted_steps_standard(x), predicted_steps_rollback(x));
}

BigRational efficiency_per_step_limit(int alpha) {
  if (alpha < 2) throw ValidationError("alpha must be >= 2");
  return BigRational(alpha - 1, alpha);
}

BigRational efficiency_uniform(int alpha, int n) {
  if (alpha < 1) throw ValidationError("alpha must be >= 1");
  if (n < 1) throw ValidationError("n must be >= 1");
  BigInt alpha_n = boost::multiprecision::pow(BigInt(alpha), static_cast<unsigned>(n));
  BigInt s_std = BigInt(n) * alpha_n;
  BigInt s_rollback = 0;
  BigInt power = 1;
  for (int i = 1; i <= n; ++i) {
    power *= alpha;
    s_rollback += power;
  }
  return BigRational(s_std, s_rollback);
}

std::string to_decimal(const BigRational& value, int significant_digits) {
  if (value == 0) return "0";
  BigInt num = boost::multiprecision::numerator(value);
  BigInt den = boost::multiprecision::denominator(value);
  bool negative = num < 0;
  if (negative) num = -num;

  // decimal exponent: number of digits left of the point, minus one
  BigInt integral = num / den;
  int exponent;
  if (integral > 0) {
    exponent = static_cast<int>(integral.str().size()) - 1;
  } else {
    exponent = -1;
    BigInt scaled = num * 10;
    while (scaled / den == 0) {
      scaled *= 10;
      --exponent;
    }
  }

  // round-half-up at the last significant digit
  int shift = significant_digits - 1 - exponent;
  BigInt scaled_num = num;
  BigInt scaled_den = den;
  if (shift >= 0) {
    scaled_num *= boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(shift));
  } else {
    scaled_den *= boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-shift));
  }
  BigInt digits = (scaled_num * 2 + scaled_den) / (scaled_den * 2);
  std::string ds = digits.str();
  if (static_cast<int>(ds.size()) > significant_digits) {
    // rounding carried into a new digit (e.g. 999.. -> 1000..)
    ++exponent;
    ds.pop_back();
  }

  std::string out;
  if (exponent >= 0) {
    if (exponent + 1 >= static_cast<int>(ds.size())) {
      out = ds + std::string(exponent + 1 - ds.size(), '0');
    } else {
      out = ds.substr(0, exponent + 1) + "." + ds.substr(exponent + 1);
    }
  } else {
    out = "0." + std::string(-exponent - 1, '0') + ds;
  }
  // trim trailing zeros after the point
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return negative ? "-" + out : out;
}

}  // namespace agentgit
