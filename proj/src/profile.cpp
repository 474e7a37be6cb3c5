#include "dynreg/profile.hpp"

#include "dynreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

namespace dynreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double parse_number(const std::string& s, const std::string& term, double empty_value) {
  if (s.empty() || s == "+") return empty_value;
  if (s == "-") return -empty_value;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("profile term '" + term + "': bad number '" + s + "'");
  }
}

// Block index j with t0 q^j <= t < t0 q^{j+1}; requires t >= t0.
long block_index(double t, double t0, double q) {
  long j = static_cast<long>(std::floor(std::log(t / t0) / std::log(q)));
  while (j > 0 && t0 * std::pow(q, static_cast<double>(j)) > t) --j;
  while (t0 * std::pow(q, static_cast<double>(j + 1)) <= t) ++j;
  return std::max(j, 0L);
}

struct ValueAt {
  double t;
  double operator()(const RadialProfile::Power& p) const { return p.a == 0.0 ? p.c : p.c * std::exp(-p.a * t); }
  double operator()(const RadialProfile::InvLog& p) const { return p.c * std::pow(p.b + t, -p.a); }
  double operator()(const RadialProfile::PiecewiseLog& p) const {
    const auto it = std::upper_bound(p.breaks.begin(), p.breaks.end(), t);
    return p.values[static_cast<std::size_t>(it - p.breaks.begin())];
  }
  double operator()(const RadialProfile::AlternatingLog& p) const {
    if (t < p.t0 || p.c == 0.0) return 0.0;
    const long j = block_index(t, p.t0, p.q);
    const double start = p.t0 * std::pow(p.q, static_cast<double>(j));
    return ((j % 2 == 0) ? 1.0 : -1.0) * p.c / (start * (p.q - 1.0));
  }
};

struct LimitAtOrigin {
  double operator()(const RadialProfile::Power& p) const { return p.a == 0.0 ? p.c : 0.0; }
  double operator()(const RadialProfile::InvLog&) const { return 0.0; }
  double operator()(const RadialProfile::PiecewiseLog& p) const { return p.values.back(); }
  double operator()(const RadialProfile::AlternatingLog&) const { return 0.0; }
};

// Antiderivative in t anchored so that F(0) is finite; F(+inf) may be +-inf or NaN.
struct Antiderivative {
  double t;
  double operator()(const RadialProfile::Power& p) const {
    if (p.c == 0.0) return 0.0;
    if (p.a == 0.0) return std::isinf(t) ? std::copysign(kInf, p.c) : p.c * t;
    return std::isinf(t) ? 0.0 : -p.c / p.a * std::exp(-p.a * t);
  }
  double operator()(const RadialProfile::InvLog& p) const {
    if (p.c == 0.0) return 0.0;
    if (std::isinf(t)) return p.a > 1.0 ? 0.0 : std::copysign(kInf, p.c);
    if (p.a == 1.0) return p.c * std::log(p.b + t);
    return p.c * std::pow(p.b + t, 1.0 - p.a) / (1.0 - p.a);
  }
  double operator()(const RadialProfile::PiecewiseLog& p) const {
    // Integral from the first break (or 0) with the leftmost value extending to -inf.
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < p.breaks.size(); ++i) {
      const double b = p.breaks[i];
      if (t <= b) return acc + p.values[i] * (t - prev);
      acc += p.values[i] * (b - prev);
      prev = b;
    }
    if (std::isinf(t)) return p.values.back() == 0.0 ? acc : std::copysign(kInf, p.values.back());
    return acc + p.values.back() * (t - prev);
  }
  double operator()(const RadialProfile::AlternatingLog& p) const {
    if (p.c == 0.0) return 0.0;
    if (std::isinf(t)) return std::numeric_limits<double>::quiet_NaN();
    if (t <= p.t0) return 0.0;
    const long j = block_index(t, p.t0, p.q);
    const double start = p.t0 * std::pow(p.q, static_cast<double>(j));
    const double completed = (j % 2 == 1) ? p.c : 0.0;
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    return completed + sign * p.c * (t - start) / (start * (p.q - 1.0));
  }
};

// Splits at top-level '+'/'-' that are binary operators, not exponent signs.
std::vector<std::string> split_terms(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    const bool sign = (ch == '+' || ch == '-');
    bool split = sign && depth == 0 && !cur.empty();
    if (split) {
      const char prev = cur.back();
      if (prev == '*' || prev == '/' || prev == '^' || prev == '(' || prev == ',' || prev == ';' || prev == ':') {
        split = false;
      } else if ((prev == 'e' || prev == 'E') && cur.size() >= 2 &&
                 (std::isdigit(static_cast<unsigned char>(cur[cur.size() - 2])) || cur[cur.size() - 2] == '.')) {
        split = false;
      }
    }
    if (split) {
      out.push_back(cur);
      cur.clear();
    }
    cur.push_back(ch);
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

RadialProfile parse_term(const std::string& term) {
  static const std::string num = R"(([+-]?(?:[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)?))";
  static const std::regex number_re("^" + num + "$");
  static const std::regex power_re("^" + num + R"(\*?r(?:\^\(?([+-]?[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\)?)?$)");
  static const std::regex signed_power_re(R"(^([+-])r(?:\^\(?([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\)?)?$)");
  static const std::regex invlog_re("^" + num +
                                    R"(/\(?log\(e(?:\^\(?([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\)?)?/r\)\)?)"
                                    R"((?:\^\(?([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\)?)?$)");
  static const std::regex pw_re(R"(^([+-]?)pwlog\((.*)\)$)");
  static const std::regex alt_re(R"(^([+-]?)altlog\(([^,]+),([^,]+),([^,]+)\)$)");

  std::smatch m;
  if (std::regex_match(term, m, signed_power_re)) {
    const double c = m[1].str() == "-" ? -1.0 : 1.0;
    const double a = m[2].matched ? parse_number(m[2].str(), term, 1.0) : 1.0;
    return RadialProfile::power(c, a);
  }
  if (std::regex_match(term, m, number_re) && !m[1].str().empty() && m[1].str() != "+" && m[1].str() != "-") {
    return RadialProfile::constant(parse_number(m[1].str(), term, 1.0));
  }
  if (std::regex_match(term, m, power_re)) {
    const double c = parse_number(m[1].str(), term, 1.0);
    const double a = m[2].matched ? parse_number(m[2].str(), term, 1.0) : 1.0;
    return RadialProfile::power(c, a);
  }
  if (std::regex_match(term, m, invlog_re)) {
    const double c = parse_number(m[1].str(), term, 1.0);
    const double b = m[2].matched ? parse_number(m[2].str(), term, 1.0) : 1.0;
    const double a = m[3].matched ? parse_number(m[3].str(), term, 1.0) : 1.0;
    return RadialProfile::inv_log(c, b, a);
  }
  if (std::regex_match(term, m, pw_re)) {
    const double sign = m[1].str() == "-" ? -1.0 : 1.0;
    const auto parts = split_on(m[2].str(), ';');
    std::vector<double> breaks;
    std::vector<double> values{parse_number(parts.front(), term, 0.0)};
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto kv = split_on(parts[i], ':');
      if (kv.size() != 2) throw DomainError("profile term '" + term + "': expected t:value, got '" + parts[i] + "'");
      breaks.push_back(parse_number(kv[0], term, 0.0));
      values.push_back(parse_number(kv[1], term, 0.0));
    }
    return RadialProfile::piecewise(std::move(breaks), std::move(values)) * sign;
  }
  if (std::regex_match(term, m, alt_re)) {
    const double sign = m[1].str() == "-" ? -1.0 : 1.0;
    return RadialProfile::alternating(sign * parse_number(m[2].str(), term, 1.0), parse_number(m[3].str(), term, 1.0),
                                      parse_number(m[4].str(), term, 2.0));
  }
  throw DomainError("profile term '" + term + "' is not in the whitelist {c*r^a, c/log(e^b/r)^a, pwlog(...), altlog(...)}");
}

}  // namespace

RadialProfile RadialProfile::power(double c, double a) {
  if (!(a >= 0.0)) throw DomainError("r^a requires a >= 0, got a = " + fmt(a));
  if (c == 0.0) return {};
  return RadialProfile(Power{c, a});
}

RadialProfile RadialProfile::inv_log(double c, double b, double a) {
  if (!(b > 0.0)) throw DomainError("c/log(e^b/r)^a requires b > 0, got b = " + fmt(b));
  if (!(a > 0.0)) throw DomainError("c/log(e^b/r)^a requires a > 0, got a = " + fmt(a));
  if (c == 0.0) return {};
  return RadialProfile(InvLog{c, b, a});
}

RadialProfile RadialProfile::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) throw DomainError("pwlog needs one more value than breakpoints");
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1])) throw DomainError("pwlog breakpoints must be strictly increasing");
  }
  if (!breaks.empty() && breaks.front() < 0.0) throw DomainError("pwlog breakpoints must be >= 0 (r <= 1)");
  return RadialProfile(PiecewiseLog{std::move(breaks), std::move(values)});
}

RadialProfile RadialProfile::alternating(double c, double t0, double q) {
  if (!(t0 > 0.0) || !(q > 1.0)) throw DomainError("altlog requires t0 > 0 and q > 1");
  if (c == 0.0) return {};
  return RadialProfile(AlternatingLog{c, t0, q});
}

RadialProfile RadialProfile::parse(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  if (s.empty()) throw DomainError("empty profile expression");
  RadialProfile out;
  for (const auto& term : split_terms(s)) out = out + parse_term(term);
  return out;
}

RadialProfile RadialProfile::operator+(const RadialProfile& other) const {
  RadialProfile out = *this;
  out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
  return out;
}

RadialProfile RadialProfile::operator*(double s) const {
  if (s == 0.0) return {};
  RadialProfile out = *this;
  for (auto& term : out.terms_) {
    std::visit(
        [s](auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, PiecewiseLog>) {
            for (auto& v : t.values) v *= s;
          } else {
            t.c *= s;
          }
        },
        term);
  }
  return out;
}

double RadialProfile::at_t(double t) const {
  double acc = 0.0;
  for (const auto& term : terms_) acc += std::visit(ValueAt{t}, term);
  return acc;
}

double RadialProfile::at_r(double r) const {
  if (r <= 0.0) return limit_at_origin();
  return at_t(-std::log(r));
}

double RadialProfile::limit_at_origin() const {
  double acc = 0.0;
  for (const auto& term : terms_) acc += std::visit(LimitAtOrigin{}, term);
  return acc;
}

double RadialProfile::integral_t(double t0, double t1) const {
  double acc = 0.0;
  for (const auto& term : terms_) {
    const double hi = std::visit(Antiderivative{t1}, term);
    const double lo = std::visit(Antiderivative{t0}, term);
    acc += hi - lo;
  }
  return acc;
}

std::vector<double> RadialProfile::breakpoints(double t_lo, double t_hi) const {
  std::vector<double> out;
  for (const auto& term : terms_) {
    if (const auto* pw = std::get_if<PiecewiseLog>(&term)) {
      for (double b : pw->breaks) {
        if (b > t_lo && b < t_hi) out.push_back(b);
      }
    } else if (const auto* alt = std::get_if<AlternatingLog>(&term)) {
      for (double b = alt->t0; b < t_hi; b *= alt->q) {
        if (b > t_lo) out.push_back(b);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string RadialProfile::describe() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& term : terms_) {
    std::string piece = std::visit(
        [](const auto& t) -> std::string {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Power>) {
            return t.a == 0.0 ? fmt(t.c) : fmt(t.c) + "*r^" + fmt(t.a);
          } else if constexpr (std::is_same_v<T, InvLog>) {
            return fmt(t.c) + "/log(e^" + fmt(t.b) + "/r)^" + fmt(t.a);
          } else if constexpr (std::is_same_v<T, PiecewiseLog>) {
            std::string s = "pwlog(" + fmt(t.values.front());
            for (std::size_t i = 0; i < t.breaks.size(); ++i) s += ";" + fmt(t.breaks[i]) + ":" + fmt(t.values[i + 1]);
            return s + ")";
          } else {
            return "altlog(" + fmt(t.c) + "," + fmt(t.t0) + "," + fmt(t.q) + ")";
          }
        },
        term);
    if (!out.empty() && piece.front() != '-') out += "+";
    out += piece;
  }
  return out;
}

}  // namespace dynreg
