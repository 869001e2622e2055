#pragma once

#include <cstdint>
#include <string>

#include "valarena/errors.hpp"

namespace valarena {

// Exact rational arithmetic on 64-bit numerator/denominator, always kept in
// lowest terms with a positive denominator. Intermediate products run in
// 128-bit; results that do not fit back into 64 bits throw Error.
class Rat {
 public:
  Rat() : num_(0), den_(1) {}
  Rat(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rat(long long n, long long d);

  long long num() const { return num_; }
  long long den() const { return den_; }

  Rat operator-() const { return Rat(-num_, den_); }
  Rat operator+(const Rat& o) const;
  Rat operator-(const Rat& o) const;
  Rat operator*(const Rat& o) const;
  Rat operator/(const Rat& o) const;
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rat& o) const { return !(*this == o); }
  bool operator<(const Rat& o) const;
  bool operator>(const Rat& o) const { return o < *this; }
  bool operator<=(const Rat& o) const { return !(o < *this); }
  bool operator>=(const Rat& o) const { return !(*this < o); }

  bool is_zero() const { return num_ == 0; }
  Rat abs() const { return Rat(num_ < 0 ? -num_ : num_, den_); }

  // Exact conversion of a finite double (every finite double is rational).
  static Rat from_double(double x);
  // Accepts "3/4", "-2", "0.25". Whitespace is not allowed.
  static Rat parse(const std::string& text);

  double to_double() const;
  std::string str() const;  // "3/4", or "2" when the denominator is 1

 private:
  static Rat reduced(__int128 n, __int128 d);
  long long num_;
  long long den_;
};

}  // namespace valarena
