#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace beltlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Exact ratio used for velocity augmentation. Always kept normalized with
/// a positive denominator.
struct Rational {
  std::int64_t num{1};
  std::int64_t den{1};

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  Rational operator*(const Rational& o) const { return Rational(num * o.num, den * o.den); }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  /// Parses "2", "3/2" or a plain decimal like "1.25" into an exact ratio.
  static Rational parse(std::string_view s);
};

inline Rational Rational::parse(std::string_view s) {
  const std::string text(s);
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text), 1);
  const std::string whole = text.substr(0, dot);
  const std::string frac = text.substr(dot + 1);
  if (frac.size() > 15) throw std::invalid_argument("rational: too many decimals: " + text);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t sign = (!whole.empty() && whole[0] == '-') ? -1 : 1;
  const std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
  const std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
  return Rational(w * den + sign * f, den);
}

/// Deterministic RNG. mt19937_64 has a standard-pinned output sequence and
/// the double mapping below avoids the implementation-defined behaviour of
/// std::uniform_real_distribution, so streams replay bit-exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(gen_() % span);
  }

  /// Standard normal via Box-Muller; implementation-pinned for replay.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

/// Stable per-purpose seed derivation: one root seed, independent streams.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t h = fnv1a64(label);
  h ^= root + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace beltlab
