// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact symbolic arithmetic over named dimension symbols. Expressions are
// multivariate polynomials with rational coefficients, kept in a unique
// canonical form so that structural equality is semantic equality.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace graphcap {

class UnboundSymbolError : public std::runtime_error {
 public:
  explicit UnboundSymbolError(const std::string& name)
      : std::runtime_error("unbound symbol: " + name), symbol(name) {}
  std::string symbol;
};

class ExprParseError : public std::runtime_error {
 public:
  explicit ExprParseError(const std::string& what) : std::runtime_error(what) {}
};

// Exact rational, always gcd-reduced with a positive denominator.
// Arithmetic goes through 128-bit intermediates and throws on 64-bit
// overflow of the reduced result.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(std::int64_t n, std::int64_t d);

  // Exact conversion; doubles are binary rationals. Throws if the exact
  // value does not fit in 64/64 bits (e.g. extreme exponents).
  static Rational from_double(double v);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  std::string str() const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// A dimension symbol. Two symbols with the same name are the same symbol.
struct Symbol {
  explicit Symbol(std::string n);
  std::string name;
  bool operator==(const Symbol& o) const { return name == o.name; }
  bool operator<(const Symbol& o) const { return name < o.name; }
};

// Product of symbols with positive integer exponents, sorted by name.
using Monomial = std::vector<std::pair<std::string, int>>;

// Canonical term order: compare factor-by-factor by symbol name, a higher
// exponent on a shared leading symbol comes first, longer/higher-degree terms
// before their prefixes, and the constant (empty) monomial last. This makes
// "8*h^2*l + 2*h*v" the canonical rendering.
struct MonomialOrder {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

// Map from symbols to exact values. Values must be nonnegative.
class Binding {
 public:
  Binding() = default;
  Binding& set(const std::string& name, std::int64_t value);
  Binding& set(const std::string& name, double value);
  Binding& set(const std::string& name, const Rational& value);

  bool has(const std::string& name) const { return values_.count(name) != 0; }
  const Rational& at(const std::string& name) const;
  const std::map<std::string, Rational>& values() const { return values_; }

  // Union of two bindings; throws if the same symbol is bound to
  // different values.
  Binding merged(const Binding& other) const;

 private:
  std::map<std::string, Rational> values_;
};

class DimExpr {
 public:
  DimExpr() = default;  // zero
  DimExpr(std::int64_t c);  // NOLINT: constants convert implicitly
  DimExpr(const Rational& c);  // NOLINT
  static DimExpr sym(const std::string& name);
  static DimExpr sym(const Symbol& s) { return sym(s.name); }

  DimExpr operator+(const DimExpr& o) const;
  DimExpr operator-(const DimExpr& o) const;
  DimExpr operator*(const DimExpr& o) const;
  DimExpr& operator+=(const DimExpr& o) { return *this = *this + o; }
  DimExpr& operator-=(const DimExpr& o) { return *this = *this - o; }
  DimExpr& operator*=(const DimExpr& o) { return *this = *this * o; }
  DimExpr pow(int e) const;

  bool operator==(const DimExpr& o) const { return terms_ == o.terms_; }
  bool operator!=(const DimExpr& o) const { return !(*this == o); }

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()

  // Replaces bound symbols with their values; unbound symbols remain.
  DimExpr substitute(const Binding& b) const;

  // Full numeric evaluation; every mentioned symbol must be bound.
  double evaluate(const Binding& b) const;

  // Highest exponent of the symbol anywhere in the expression.
  int degree_in(const std::string& name) const;
  int degree_in(const Symbol& s) const { return degree_in(s.name); }

  std::set<std::string> symbols() const;

  // Textual form using the canonical term order, e.g. "8*h^2*l + 2*h*v".
  std::string str() const;
  // Parses the same grammar str() emits: rationals, symbols, +, -, *, ^
  // and parentheses. parse(e.str()) == e.
  static DimExpr parse(const std::string& text);

  const std::map<Monomial, Rational, MonomialOrder>& terms() const { return terms_; }

 private:
  void add_term(const Monomial& m, const Rational& c);
  std::map<Monomial, Rational, MonomialOrder> terms_;
};

std::ostream& operator<<(std::ostream& os, const DimExpr& e);

}  // namespace graphcap
