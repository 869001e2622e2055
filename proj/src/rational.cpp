#include "valarena/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace valarena {
namespace {

__int128 abs128(__int128 v) { return v < 0 ? -v : v; }

__int128 gcd128(__int128 a, __int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

long long narrow(__int128 v) {
  if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min()) {
    throw Error("rational overflow: value does not fit in 64 bits");
  }
  return static_cast<long long>(v);
}

long long parse_ll(const std::string& s) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("cannot parse integer '" + s + "'");
  }
  return value;
}

}  // namespace

Rat Rat::reduced(__int128 n, __int128 d) {
  if (d == 0) throw Error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  Rat r;
  r.num_ = narrow(n);
  r.den_ = narrow(d);
  return r;
}

Rat::Rat(long long n, long long d) { *this = reduced(n, d); }

Rat Rat::operator+(const Rat& o) const {
  return reduced(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                 static_cast<__int128>(den_) * o.den_);
}

Rat Rat::operator-(const Rat& o) const {
  return reduced(static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_,
                 static_cast<__int128>(den_) * o.den_);
}

Rat Rat::operator*(const Rat& o) const {
  return reduced(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}

Rat Rat::operator/(const Rat& o) const {
  if (o.num_ == 0) throw Error("rational division by zero");
  return reduced(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
}

bool Rat::operator<(const Rat& o) const {
  return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

Rat Rat::from_double(double x) {
  if (!std::isfinite(x)) throw Error("cannot convert non-finite double to rational");
  if (x == 0.0) return Rat(0);
  int exp = 0;
  double frac = std::frexp(x, &exp);  // x = frac * 2^exp, |frac| in [0.5, 1)
  long long mant = static_cast<long long>(std::ldexp(frac, 53));
  exp -= 53;
  while (mant != 0 && mant % 2 == 0) {
    mant /= 2;
    ++exp;
  }
  if (exp >= 0) {
    if (exp > 62) throw Error("double too large for exact rational");
    return reduced(static_cast<__int128>(mant) << exp, 1);
  }
  if (-exp > 62) throw Error("double too small for exact rational");
  return reduced(mant, static_cast<__int128>(1) << -exp);
}

Rat Rat::parse(const std::string& text) {
  if (text.empty()) throw Error("empty rational literal");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    long long n = parse_ll(text.substr(0, slash));
    long long d = parse_ll(text.substr(slash + 1));
    return Rat(n, d);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    bool neg = text[0] == '-';
    std::string digits = text.substr(neg ? 1 : 0);
    dot = digits.find('.');
    std::string ip = digits.substr(0, dot);
    std::string fp = digits.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw Error("cannot parse rational '" + text + "'");
    __int128 num = ip.empty() ? 0 : parse_ll(ip);
    __int128 den = 1;
    for (char c : fp) {
      if (c < '0' || c > '9') throw Error("cannot parse rational '" + text + "'");
      num = num * 10 + (c - '0');
      den *= 10;
      if (den > (static_cast<__int128>(1) << 100)) throw Error("rational literal too long");
    }
    return reduced(neg ? -num : num, den);
  }
  return Rat(parse_ll(text));
}

double Rat::to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

std::string Rat::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace valarena
