// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphcap/symexpr.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace graphcap {

namespace {

std::int64_t checked_narrow(__int128 v, const char* what) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw std::overflow_error(std::string("rational overflow in ") + what);
  }
  return static_cast<std::int64_t>(v);
}

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a == 0 ? 1 : a;
}

Rational make_reduced(__int128 n, __int128 d, const char* what) {
  if (d == 0) throw std::domain_error("rational division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd128(n, d);
  return Rational(checked_narrow(n / g, what), checked_narrow(d / g, what));
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  Rational r = make_reduced(n, d, "construction");
  num_ = r.num_;
  den_ = r.den_;
}

Rational Rational::from_double(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite binding value");
  if (v == std::floor(v) && std::abs(v) < 9.0e18) {
    return Rational(static_cast<std::int64_t>(v));
  }
  int exp = 0;
  double mant = std::frexp(v, &exp);  // v = mant * 2^exp, |mant| in [0.5, 1)
  auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  int shift = exp - 53;
  __int128 num = scaled;
  __int128 den = 1;
  if (shift >= 0) {
    if (shift > 62) throw std::overflow_error("double too large for exact rational");
    num <<= shift;
  } else {
    if (-shift > 62) throw std::overflow_error("double too small for exact rational");
    den <<= -shift;
  }
  return make_reduced(num, den, "from_double");
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
  return make_reduced(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                      static_cast<__int128>(den_) * o.den_, "add");
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return make_reduced(static_cast<__int128>(num_) * o.num_,
                      static_cast<__int128>(den_) * o.den_, "mul");
}

Rational Rational::operator/(const Rational& o) const {
  if (o.is_zero()) throw std::domain_error("rational division by zero");
  return make_reduced(static_cast<__int128>(num_) * o.den_,
                      static_cast<__int128>(den_) * o.num_, "div");
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Symbol::Symbol(std::string n) : name(std::move(n)) {
  if (name.empty()) throw std::invalid_argument("symbol name must be non-empty");
}

bool MonomialOrder::operator()(const Monomial& a, const Monomial& b) const {
  size_t i = 0;
  for (; i < a.size() && i < b.size(); ++i) {
    if (a[i].first != b[i].first) return a[i].first < b[i].first;
    if (a[i].second != b[i].second) return a[i].second > b[i].second;
  }
  // Shared prefix: the longer (higher-degree) term comes first, so the
  // constant term sorts last.
  return a.size() > b.size();
}

Binding& Binding::set(const std::string& name, std::int64_t value) {
  return set(name, Rational(value));
}

Binding& Binding::set(const std::string& name, double value) {
  return set(name, Rational::from_double(value));
}

Binding& Binding::set(const std::string& name, const Rational& value) {
  if (value.to_double() < 0) throw std::domain_error("binding values must be nonnegative");
  values_[name] = value;
  return *this;
}

const Rational& Binding::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw UnboundSymbolError(name);
  return it->second;
}

Binding Binding::merged(const Binding& other) const {
  Binding out = *this;
  for (const auto& [name, value] : other.values_) {
    auto it = out.values_.find(name);
    if (it != out.values_.end() && it->second != value) {
      throw std::invalid_argument("conflicting binding for symbol " + name);
    }
    out.values_[name] = value;
  }
  return out;
}

DimExpr::DimExpr(std::int64_t c) { add_term({}, Rational(c)); }

DimExpr::DimExpr(const Rational& c) { add_term({}, c); }

DimExpr DimExpr::sym(const std::string& name) {
  Symbol s(name);  // validates
  DimExpr e;
  e.add_term({{s.name, 1}}, Rational(1));
  return e;
}

void DimExpr::add_term(const Monomial& m, const Rational& c) {
  if (c.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) terms_.erase(it);
}

DimExpr DimExpr::operator+(const DimExpr& o) const {
  DimExpr out = *this;
  for (const auto& [m, c] : o.terms_) out.add_term(m, c);
  return out;
}

DimExpr DimExpr::operator-(const DimExpr& o) const {
  DimExpr out = *this;
  for (const auto& [m, c] : o.terms_) out.add_term(m, -c);
  return out;
}

DimExpr DimExpr::operator*(const DimExpr& o) const {
  DimExpr out;
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      // Merge the two sorted factor lists, adding exponents.
      Monomial m;
      m.reserve(ma.size() + mb.size());
      size_t i = 0, j = 0;
      while (i < ma.size() && j < mb.size()) {
        if (ma[i].first == mb[j].first) {
          m.emplace_back(ma[i].first, ma[i].second + mb[j].second);
          ++i;
          ++j;
        } else if (ma[i].first < mb[j].first) {
          m.push_back(ma[i++]);
        } else {
          m.push_back(mb[j++]);
        }
      }
      for (; i < ma.size(); ++i) m.push_back(ma[i]);
      for (; j < mb.size(); ++j) m.push_back(mb[j]);
      out.add_term(m, ca * cb);
    }
  }
  return out;
}

DimExpr DimExpr::pow(int e) const {
  if (e < 0) throw std::domain_error("negative exponent");
  DimExpr out(1);
  for (int i = 0; i < e; ++i) out *= *this;
  return out;
}

bool DimExpr::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational DimExpr::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (!is_constant()) throw std::logic_error("expression is not constant");
  return terms_.begin()->second;
}

DimExpr DimExpr::substitute(const Binding& b) const {
  DimExpr out;
  for (const auto& [m, c] : terms_) {
    Rational coef = c;
    Monomial rest;
    for (const auto& [name, exp] : m) {
      if (b.has(name)) {
        const Rational& v = b.at(name);
        for (int k = 0; k < exp; ++k) coef = coef * v;
      } else {
        rest.emplace_back(name, exp);
      }
    }
    out.add_term(rest, coef);
  }
  return out;
}

double DimExpr::evaluate(const Binding& b) const {
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c.to_double();
    for (const auto& [name, exp] : m) {
      double v = b.at(name).to_double();
      for (int k = 0; k < exp; ++k) term *= v;
    }
    total += term;
  }
  return total;
}

int DimExpr::degree_in(const std::string& name) const {
  int deg = 0;
  for (const auto& [m, c] : terms_) {
    for (const auto& [n, e] : m) {
      if (n == name) deg = std::max(deg, e);
    }
  }
  return deg;
}

std::set<std::string> DimExpr::symbols() const {
  std::set<std::string> out;
  for (const auto& [m, c] : terms_) {
    for (const auto& [n, e] : m) out.insert(n);
  }
  return out;
}

std::string DimExpr::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rational coef = c;
    if (first) {
      if (coef.to_double() < 0) {
        os << "-";
        coef = -coef;
      }
      first = false;
    } else {
      if (coef.to_double() < 0) {
        os << " - ";
        coef = -coef;
      } else {
        os << " + ";
      }
    }
    bool unit = coef == Rational(1);
    if (m.empty() || !unit) os << coef.str();
    bool need_star = !m.empty() && !unit;
    for (const auto& [name, exp] : m) {
      if (need_star) os << "*";
      os << name;
      if (exp != 1) os << "^" << exp;
      need_star = true;
    }
  }
  return os.str();
}

namespace {

// Recursive-descent parser for the printed grammar.
class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  DimExpr parse() {
    DimExpr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return e;
  }

 private:
  DimExpr expr() {
    skip_ws();
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    } else if (peek() == '+') {
      ++pos_;
    }
    DimExpr acc = term();
    if (neg) acc = DimExpr(0) - acc;
    while (true) {
      skip_ws();
      char c = peek();
      if (c == '+') {
        ++pos_;
        acc += term();
      } else if (c == '-') {
        ++pos_;
        acc -= term();
      } else {
        break;
      }
    }
    return acc;
  }

  DimExpr term() {
    DimExpr acc = factor();
    while (true) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        acc *= factor();
      } else {
        break;
      }
    }
    return acc;
  }

  DimExpr factor() {
    DimExpr base = primary();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent");
      base = base.pow(static_cast<int>(integer()));
    }
    return base;
  }

  DimExpr primary() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      ++pos_;
      DimExpr e = expr();
      skip_ws();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t n = integer();
      skip_ws();
      if (peek() == '/') {
        ++pos_;
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected denominator");
        return DimExpr(Rational(n, integer()));
      }
      return DimExpr(n);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      return DimExpr::sym(s_.substr(start, pos_ - start));
    }
    fail("unexpected character");
    return DimExpr();  // unreachable
  }

  std::int64_t integer() {
    size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return std::stoll(s_.substr(start, pos_ - start));
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ExprParseError(why + " at offset " + std::to_string(pos_) + " in \"" + s_ + "\"");
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

DimExpr DimExpr::parse(const std::string& text) { return Parser(text).parse(); }

std::ostream& operator<<(std::ostream& os, const DimExpr& e) { return os << e.str(); }

}  // namespace graphcap
