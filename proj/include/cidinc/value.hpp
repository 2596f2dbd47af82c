/*
 * Copyright 2026 The cidincentives Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Exact rationals and the symbol-or-rational values held by model variables.

#ifndef CIDINC_VALUE_HPP_
#define CIDINC_VALUE_HPP_

#include <gmpxx.h>

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cidinc/graph.hpp"

namespace cidinc {

using Rational = mpq_class;

// Parses "n" or "p/q" with an optional leading minus sign. Returns nullopt
// for anything else, including a zero denominator.
inline std::optional<Rational> parse_rational(std::string_view text) {
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  const std::size_t num_begin = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == num_begin) return std::nullopt;
  std::string numerator(text.substr(0, i));
  std::string denominator = "1";
  if (i < text.size()) {
    if (text[i] != '/') return std::nullopt;
    const std::size_t den_begin = ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == den_begin || i != text.size()) return std::nullopt;
    denominator = std::string(text.substr(den_begin));
  }
  mpz_class den(denominator);
  if (den == 0) return std::nullopt;
  Rational out(mpz_class(numerator), den);
  out.canonicalize();
  return out;
}

// Canonical text of a rational: "n" for integers, otherwise "p/q".
inline std::string to_string(const Rational& q) { return q.get_str(); }

// A variable value: either a symbol or an exact rational.
class Value {
 public:
  Value() : data_(Rational(0)) {}
  Value(int v) : data_(Rational(v)) {}  // NOLINT(google-explicit-constructor)
  Value(Rational v) : data_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  // A symbolic value. Throws Error when the text reads as a rational.
  static Value symbol(std::string text) {
    if (text.empty() || parse_rational(text)) {
      throw Error("symbol '" + text + "' is empty or reads as a number");
    }
    Value v;
    v.data_ = std::move(text);
    return v;
  }

  // A rational when the text reads as one, otherwise a symbol.
  static Value parse(std::string_view text) {
    if (auto q = parse_rational(text)) return Value(*q);
    return symbol(std::string(text));
  }

  bool is_rational() const { return std::holds_alternative<Rational>(data_); }
  const Rational& rational() const { return std::get<Rational>(data_); }
  const std::string& symbol_text() const { return std::get<std::string>(data_); }

  std::string to_string() const {
    return is_rational() ? cidinc::to_string(rational()) : symbol_text();
  }

  friend bool operator==(const Value& a, const Value& b) {
    if (a.is_rational() != b.is_rational()) return false;
    return a.is_rational() ? a.rational() == b.rational() : a.symbol_text() == b.symbol_text();
  }

  // Rationals order before symbols; each kind orders naturally.
  friend bool operator<(const Value& a, const Value& b) {
    if (a.is_rational() != b.is_rational()) return a.is_rational();
    return a.is_rational() ? a.rational() < b.rational() : a.symbol_text() < b.symbol_text();
  }

 private:
  std::variant<Rational, std::string> data_;
};

// An ordered list of distinct values.
struct FiniteDomain {
  std::vector<Value> values;

  int size() const { return static_cast<int>(values.size()); }
  const Value& operator[](int i) const { return values[i]; }

  std::optional<int> index_of(const Value& v) const {
    for (int i = 0; i < size(); ++i) {
      if (values[i] == v) return i;
    }
    return std::nullopt;
  }

  static FiniteDomain integers(int lo, int hi) {
    FiniteDomain d;
    for (int v = lo; v <= hi; ++v) d.values.emplace_back(v);
    return d;
  }

  friend bool operator==(const FiniteDomain& a, const FiniteDomain& b) { return a.values == b.values; }
};

}  // namespace cidinc

#endif  // CIDINC_VALUE_HPP_
