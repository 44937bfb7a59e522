#include "scalar.hpp"

#include <cctype>
#include <ostream>

namespace fermicas {

namespace {

std::string rat_str(const Rational& r) { return r.get_str(); }

// Reads a rational "p" or "p/q" with optional sign from text[pos...].
Rational read_rational(const std::string& t, size_t& pos) {
  bool negative = false;
  if (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) {
    negative = (t[pos] == '-');
    ++pos;
  }
  size_t start = pos;
  size_t digits = 0;
  while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) {
    ++pos;
    ++digits;
  }
  if (digits == 0) throw ScalarError("expected number in scalar literal: " + t);
  if (pos < t.size() && t[pos] == '/') {
    ++pos;
    size_t den_digits = 0;
    while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) {
      ++pos;
      ++den_digits;
    }
    if (den_digits == 0) throw ScalarError("expected denominator in scalar literal: " + t);
  }
  Rational r(t.substr(start, pos - start));
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

}  // namespace

std::string Scalar::str() const {
  if (is_zero()) return "0";
  if (im_ == 0) return rat_str(re_);
  std::string imag = rat_str(im_) + "i";
  if (re_ == 0) return imag;
  if (im_ > 0) return rat_str(re_) + "+" + imag;
  return rat_str(re_) + imag;  // negative imag already carries '-'
}

Scalar Scalar::parse(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  if (t.empty()) throw ScalarError("empty scalar literal");
  if (t == "i") return Scalar::i();
  if (t == "-i") return -Scalar::i();
  if (t == "+i") return Scalar::i();

  size_t pos = 0;
  Rational first = read_rational(t, pos);
  if (pos == t.size()) return Scalar(first);
  if (t[pos] == 'i') {
    if (pos + 1 != t.size()) throw ScalarError("trailing characters in scalar literal: " + text);
    return Scalar(Rational(0), first);
  }
  if (t[pos] != '+' && t[pos] != '-')
    throw ScalarError("malformed scalar literal: " + text);
  if (t.compare(pos, std::string::npos, "+i") == 0) return Scalar(first, Rational(1));
  if (t.compare(pos, std::string::npos, "-i") == 0) return Scalar(first, Rational(-1));
  Rational second = read_rational(t, pos);
  if (pos >= t.size() || t[pos] != 'i' || pos + 1 != t.size())
    throw ScalarError("malformed scalar literal: " + text);
  return Scalar(first, second);
}

std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

}  // namespace fermicas
