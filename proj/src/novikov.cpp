#include "floerpot/novikov.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace floerpot {

std::string exponent_str(const Exponent& e) {
    if (denominator(e) == 1) return numerator(e).str();
    return "{" + rat_str(e) + "}";
}

NovikovSeries::NovikovSeries(Exponent trunc, unsigned cap) : trunc_(std::move(trunc)), cap_(cap) {
    if (trunc_ <= 0) throw InvariantError("truncation order must be positive");
}

NovikovSeries NovikovSeries::constant(const Rational& c, Exponent trunc, unsigned cap) {
    NovikovSeries s(trunc, cap);
    s.add_term(0, EquivariantScalar(c, cap));
    return s;
}

NovikovSeries NovikovSeries::scalar(const EquivariantScalar& c, Exponent trunc) {
    NovikovSeries s(trunc, c.cap());
    s.add_term(0, c);
    return s;
}

NovikovSeries NovikovSeries::t_power(const Exponent& e, Exponent trunc, unsigned cap) {
    NovikovSeries s(trunc, cap);
    s.add_term(e, EquivariantScalar(Rational(1), cap));
    return s;
}

NovikovSeries NovikovSeries::monomial(const Exponent& e, const EquivariantScalar& c,
                                      Exponent trunc) {
    NovikovSeries s(trunc, c.cap());
    s.add_term(e, c);
    return s;
}

bool NovikovSeries::is_one() const {
    return terms_.size() == 1 && terms_.begin()->first == 0 &&
           terms_.begin()->second == EquivariantScalar(Rational(1), cap_);
}

bool NovikovSeries::lambda_free() const {
    for (const auto& [e, c] : terms_)
        if (!c.lambda_free()) return false;
    return true;
}

size_t NovikovSeries::term_count() const {
    size_t n = 0;
    for (const auto& [e, c] : terms_) n += c.terms().size();
    return n;
}

Exponent NovikovSeries::valuation() const {
    if (terms_.empty()) return trunc_;
    return terms_.begin()->first;
}

EquivariantScalar NovikovSeries::coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? EquivariantScalar(cap_) : it->second;
}

void NovikovSeries::add_term(const Exponent& e, const EquivariantScalar& c) {
    if (e < 0) throw InvariantError("negative Novikov exponent");
    if (c.cap() != cap_)
        throw InvariantError("lambda cap mismatch between term and series");
    if (e >= trunc_ || c.is_zero()) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

void NovikovSeries::check_compatible(const NovikovSeries& o) const {
    if (trunc_ != o.trunc_)
        throw InvariantError(fmt::format("truncation mismatch: {} vs {}",
                                         rat_str(trunc_), rat_str(o.trunc_)));
    if (cap_ != o.cap_)
        throw InvariantError(fmt::format("lambda cap mismatch: {} vs {}", cap_, o.cap_));
}

NovikovSeries NovikovSeries::operator-() const {
    NovikovSeries out(trunc_, cap_);
    for (const auto& [e, c] : terms_) out.terms_.emplace(e, -c);
    return out;
}

NovikovSeries NovikovSeries::operator+(const NovikovSeries& o) const {
    NovikovSeries out = *this;
    out += o;
    return out;
}

NovikovSeries& NovikovSeries::operator+=(const NovikovSeries& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

NovikovSeries NovikovSeries::operator-(const NovikovSeries& o) const {
    return *this + (-o);
}

NovikovSeries& NovikovSeries::operator-=(const NovikovSeries& o) {
    return *this += -o;
}

NovikovSeries NovikovSeries::operator*(const NovikovSeries& o) const {
    check_compatible(o);
    NovikovSeries out(trunc_, cap_);
    for (const auto& [ea, ca] : terms_) {
        if (ea >= trunc_) continue;
        for (const auto& [eb, cb] : o.terms_) {
            Exponent e = ea + eb;
            if (e >= trunc_) break;
            out.add_term(e, ca * cb);
        }
    }
    return out;
}

NovikovSeries NovikovSeries::operator*(const Rational& c) const {
    NovikovSeries out(trunc_, cap_);
    if (c == 0) return out;
    for (const auto& [e, v] : terms_) out.terms_.emplace(e, v * c);
    return out;
}

NovikovSeries NovikovSeries::operator*(const EquivariantScalar& c) const {
    NovikovSeries out(trunc_, cap_);
    for (const auto& [e, v] : terms_) out.add_term(e, v * c);
    return out;
}

bool NovikovSeries::operator==(const NovikovSeries& o) const {
    return trunc_ == o.trunc_ && cap_ == o.cap_ && terms_ == o.terms_;
}

NovikovSeries NovikovSeries::exp() const {
    NovikovSeries acc = constant(1, trunc_, cap_);
    if (terms_.empty()) return acc;
    if (valuation() <= 0)
        throw InvariantError("exp requires strictly positive valuation");
    NovikovSeries power = acc;
    unsigned n = 0;
    while (true) {
        ++n;
        power = power * *this * (Rational(1) / n);
        if (power.is_zero()) break;
        acc += power;
    }
    return acc;
}

NovikovSeries NovikovSeries::log1p() const {
    NovikovSeries acc(trunc_, cap_);
    if (terms_.empty()) return acc;
    if (valuation() <= 0)
        throw InvariantError("log1p requires strictly positive valuation");
    NovikovSeries power = constant(1, trunc_, cap_);
    unsigned n = 0;
    while (true) {
        ++n;
        power = power * *this;
        if (power.is_zero()) break;
        acc += power * (Rational(n % 2 == 1 ? 1 : -1) / n);
    }
    return acc;
}

NovikovSeries NovikovSeries::inverse() const {
    if (is_zero() || valuation() != 0)
        throw InvariantError("inverse requires a unit (nonzero constant term)");
    EquivariantScalar c0 = coeff(0);
    if (!c0.lambda_free())
        throw InvariantError(
            "constant term has a lambda part and is not invertible in the "
            "polynomial lambda ring");
    Rational r0 = c0.rational_part();
    NovikovSeries u = *this * (Rational(1) / r0) - constant(1, trunc_, cap_);
    NovikovSeries acc = constant(1, trunc_, cap_);
    NovikovSeries power = acc;
    while (true) {
        power = power * u;
        if (power.is_zero()) break;
        acc += -power;
        power = -power;
    }
    return acc * (Rational(1) / r0);
}

NovikovSeries NovikovSeries::pow(long n) const {
    if (n < 0) return inverse().pow(-n);
    NovikovSeries acc = constant(1, trunc_, cap_);
    NovikovSeries base = *this;
    while (n > 0) {
        if (n & 1) acc = acc * base;
        base = base * base;
        n >>= 1;
    }
    return acc;
}

NovikovSeries NovikovSeries::truncate(const Exponent& new_trunc) const {
    if (new_trunc > trunc_)
        throw InvariantError("cannot extend a truncated series");
    NovikovSeries out(new_trunc, cap_);
    for (const auto& [e, c] : terms_) {
        if (e >= new_trunc) break;
        out.terms_.emplace(e, c);
    }
    return out;
}

NovikovSeries NovikovSeries::with_cap(unsigned new_cap) const {
    NovikovSeries out(trunc_, new_cap);
    for (const auto& [e, c] : terms_) {
        EquivariantScalar nc(new_cap);
        for (const auto& [le, r] : c.terms()) nc.set(le, r);
        out.add_term(e, nc);
    }
    return out;
}

NovikovSeries NovikovSeries::substitute_lambda(
    const std::vector<EquivariantScalar>& images, unsigned new_cap) const {
    NovikovSeries out(trunc_, new_cap);
    for (const auto& [e, c] : terms_) out.add_term(e, c.substitute(images, new_cap));
    return out;
}

NovikovSeries NovikovSeries::lambda_component(const LambdaExp& key) const {
    NovikovSeries out(trunc_, cap_);
    for (const auto& [e, c] : terms_) {
        Rational r = c.coeff(key);
        if (r != 0) out.add_term(e, EquivariantScalar(r, cap_));
    }
    return out;
}

NovikovSeries NovikovSeries::lambda_free_part() const {
    return lambda_component({});
}

std::string NovikovSeries::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [e, c] : terms_) {
        for (const auto& [le, r] : c.terms()) {
            bool neg = r < 0;
            Rational a = neg ? Rational(-r) : r;
            std::string body;
            if (a == 1 && e != 0 && le.empty()) {
                body = "T^" + exponent_str(e);
            } else {
                body = rat_str(a);
                if (e != 0) body += "*T^" + exponent_str(e);
                if (!le.empty()) body += "*" + lambda_str(le);
            }
            if (out.empty())
                out = (neg ? "-" : "") + body;
            else
                out += (neg ? " - " : " + ") + body;
        }
    }
    return out;
}

namespace {

// Splits an arithmetic expression at top-level '+'/'-' signs, returning the
// signed term bodies.  Braces protect fractional exponents.
std::vector<std::pair<int, std::string>> split_terms(const std::string& s) {
    std::vector<std::pair<int, std::string>> out;
    int depth = 0, sign = 1;
    std::string cur;
    for (size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (ch == '{' || ch == '(') ++depth;
        if (ch == '}' || ch == ')') --depth;
        bool breaker = depth == 0 && (ch == '+' || ch == '-') && i > 0 &&
                       std::string("*^/({+-").find(s[i - 1]) == std::string::npos;
        if (breaker) {
            if (cur.empty()) throw ParseError("empty term in series '" + s + "'");
            out.emplace_back(sign, cur);
            cur.clear();
            sign = ch == '-' ? -1 : 1;
        } else if (i == 0 && (ch == '+' || ch == '-')) {
            sign = ch == '-' ? -1 : 1;
        } else {
            cur += ch;
        }
    }
    if (depth != 0) throw ParseError("unbalanced braces in '" + s + "'");
    if (cur.empty()) throw ParseError("trailing operator in series '" + s + "'");
    out.emplace_back(sign, cur);
    return out;
}

std::vector<std::string> split_factors(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '{' || ch == '(') ++depth;
        if (ch == '}' || ch == ')') --depth;
        if (ch == '*' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

NovikovSeries NovikovSeries::parse(const std::string& text, Exponent trunc, unsigned cap) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw ParseError("empty series");
    NovikovSeries out(trunc, cap);
    if (s == "0") return out;
    const std::string lam = "λ_";
    for (const auto& [sign, term] : split_terms(s)) {
        Rational r = sign;
        Exponent e = 0;
        LambdaExp le;
        for (const std::string& f : split_factors(term)) {
            if (f.empty()) throw ParseError("empty factor in '" + term + "'");
            if (f.rfind("T^", 0) == 0) {
                std::string body = f.substr(2);
                if (!body.empty() && body.front() == '{') {
                    if (body.back() != '}')
                        throw ParseError("unterminated exponent in '" + f + "'");
                    body = body.substr(1, body.size() - 2);
                }
                Exponent exp = parse_rational(body);
                if (exp < 0) throw ParseError("negative Novikov exponent in '" + f + "'");
                e += exp;
            } else if (f.rfind(lam, 0) == 0 || f.rfind("lambda_", 0) == 0) {
                std::string body = f.substr(f.rfind(lam, 0) == 0 ? lam.size() : 7);
                unsigned power = 1;
                size_t caretpos = body.find('^');
                if (caretpos != std::string::npos) {
                    power = static_cast<unsigned>(std::stoul(body.substr(caretpos + 1)));
                    body = body.substr(0, caretpos);
                }
                unsigned idx = 0;
                try {
                    idx = static_cast<unsigned>(std::stoul(body));
                } catch (const std::exception&) {
                    throw ParseError("bad lambda index in '" + f + "'");
                }
                if (idx == 0) throw ParseError("lambda indices are 1-based");
                LambdaExp one(idx, 0);
                one[idx - 1] = power;
                le = lambda_mul(le, one);
            } else {
                r *= parse_rational(f);
            }
        }
        if (lambda_degree(le) > cap)
            throw ParseError("term '" + term + "' exceeds the lambda cap");
        out.add_term(e, EquivariantScalar::monomial(le, r, cap));
    }
    return out;
}

} // namespace floerpot
