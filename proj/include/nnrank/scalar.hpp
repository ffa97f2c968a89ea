#pragma once

// Scalar field support. Two modes exist: exact rationals (GMP) and binary
// doubles. Every container is templated on its scalar, so mixing modes is a
// compile-time error rather than a runtime check.

#include <gmpxx.h>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nnrank {

using Rational = mpq_class;

enum class Mode { exact, floating };

inline std::string_view to_string(Mode m) { return m == Mode::exact ? "exact" : "float"; }

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static constexpr Mode mode = Mode::floating;
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr Mode mode = Mode::exact;
};

template <class T>
inline constexpr bool is_exact_v = scalar_traits<T>::exact;

template <class T>
concept Scalar = requires { scalar_traits<T>::exact; };

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

template <Scalar T>
T from_double(double x);

template <>
inline double from_double<double>(double x) { return x; }

/// Exact conversion: every finite double is a dyadic rational.
template <>
inline Rational from_double<Rational>(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value cannot become a rational");
  Rational q(x);
  q.canonicalize();
  return q;
}

template <Scalar T>
T from_int(long v) {
  return T(v);
}

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return abs(x); }

inline int sign_of(double x) { return (x > 0) - (x < 0); }
inline int sign_of(const Rational& x) { return sgn(x); }

/// Parses "p/q" or "p" into a canonical rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  if (s.front() == '+') s.erase(0, 1);
  auto slash = s.find('/');
  auto digits_ok = [](std::string_view part, bool allow_sign) {
    if (allow_sign && !part.empty() && part.front() == '-') part.remove_prefix(1);
    if (part.empty()) return false;
    for (char c : part)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (slash == std::string::npos) {
    if (!digits_ok(s, true)) throw std::invalid_argument("malformed rational: " + s);
  } else {
    if (!digits_ok(std::string_view(s).substr(0, slash), true) ||
        !digits_ok(std::string_view(s).substr(slash + 1), false))
      throw std::invalid_argument("malformed rational: " + s);
  }
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("malformed rational: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

inline std::string format_rational(const Rational& q) { return q.get_str(10); }

/// Exact square root of a nonnegative rational, if it is a perfect square.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  Rational r(rn, rd);
  r.canonicalize();
  return r;
}

inline std::optional<double> exact_sqrt(double x) {
  if (x < 0) return std::nullopt;
  return std::sqrt(x);
}

/// Zero test: exact for rationals, |x| <= tol * scale for doubles.
inline bool near_zero(const Rational& x, double /*tol*/, double /*scale*/ = 1.0) { return sgn(x) == 0; }
inline bool near_zero(double x, double tol, double scale = 1.0) { return std::fabs(x) <= tol * scale; }

}  // namespace nnrank
