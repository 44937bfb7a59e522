#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace fermicas {

using Rational = mpq_class;

/// Error thrown on invalid arithmetic (division by zero, parse failures).
struct ScalarError : std::runtime_error {
  explicit ScalarError(const std::string& what) : std::runtime_error(what) {}
};

/// Gaussian rational: re + im*i with arbitrary-precision rational parts.
/// All arithmetic is exact; there is no floating point anywhere.
class Scalar {
 public:
  Scalar() : re_(0), im_(0) {}
  Scalar(int v) : re_(v), im_(0) {}  // NOLINT(google-explicit-constructor)
  Scalar(const Rational& re) : re_(re), im_(0) {}  // NOLINT
  Scalar(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

  static Scalar i() { return Scalar(Rational(0), Rational(1)); }
  static Scalar of(long num, long den) { return Scalar(Rational(num, den)); }

  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }

  bool is_zero() const { return re_ == 0 && im_ == 0; }
  bool is_real() const { return im_ == 0; }
  bool is_one() const { return re_ == 1 && im_ == 0; }

  Scalar conj() const { return Scalar(re_, -im_); }
  /// |z|^2 = re^2 + im^2, a nonnegative rational.
  Rational norm2() const { return re_ * re_ + im_ * im_; }

  Scalar operator-() const { return Scalar(-re_, -im_); }

  Scalar& operator+=(const Scalar& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  Scalar& operator*=(const Scalar& o) {
    Rational r = re_ * o.re_ - im_ * o.im_;
    Rational i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  Scalar& operator/=(const Scalar& o) {
    if (o.is_zero()) throw ScalarError("division by zero");
    Rational n2 = o.norm2();
    Rational r = (re_ * o.re_ + im_ * o.im_) / n2;
    Rational i = (im_ * o.re_ - re_ * o.im_) / n2;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  /// Canonical textual form: "3/2+1/2i", "-1i", "5", "0".
  std::string str() const;
  /// Parses the textual form produced by str(); also accepts "i", "-i".
  static Scalar parse(const std::string& text);

 private:
  Rational re_, im_;
};

std::ostream& operator<<(std::ostream& os, const Scalar& s);

}  // namespace fermicas
