#include "floerpot/equivariant.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace floerpot {

unsigned lambda_degree(const LambdaExp& e) {
    unsigned d = 0;
    for (unsigned k : e) d += k;
    return d;
}

LambdaExp lambda_trim(LambdaExp e) {
    while (!e.empty() && e.back() == 0) e.pop_back();
    return e;
}

LambdaExp lambda_mul(const LambdaExp& a, const LambdaExp& b) {
    LambdaExp out(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return lambda_trim(out);
}

std::string lambda_str(const LambdaExp& e) {
    std::string out;
    for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += fmt::format("λ_{}", i + 1);
        if (e[i] > 1) out += fmt::format("^{}", e[i]);
    }
    return out;
}

bool LambdaOrder::operator()(const LambdaExp& a, const LambdaExp& b) const {
    unsigned da = lambda_degree(a), db = lambda_degree(b);
    if (da != db) return da < db;
    return a > b;
}

EquivariantScalar::EquivariantScalar(const Rational& c, unsigned cap) : cap_(cap) {
    if (c != 0) terms_[{}] = c;
}

EquivariantScalar EquivariantScalar::lambda(unsigned index, unsigned cap) {
    if (index == 0) throw InvariantError("lambda indices are 1-based");
    LambdaExp e(index, 0);
    e[index - 1] = 1;
    return monomial(e, 1, cap);
}

EquivariantScalar EquivariantScalar::monomial(const LambdaExp& e, const Rational& c,
                                              unsigned cap) {
    EquivariantScalar s(cap);
    s.set(e, c);
    return s;
}

bool EquivariantScalar::lambda_free() const {
    for (const auto& [e, c] : terms_)
        if (!e.empty()) return false;
    return true;
}

Rational EquivariantScalar::rational_part() const {
    auto it = terms_.find({});
    return it == terms_.end() ? Rational(0) : it->second;
}

unsigned EquivariantScalar::degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, lambda_degree(e));
    return d;
}

void EquivariantScalar::set(const LambdaExp& e, const Rational& c) {
    LambdaExp key = lambda_trim(e);
    if (lambda_degree(key) > cap_)
        throw InvariantError(fmt::format("lambda-degree {} exceeds cap {}",
                                         lambda_degree(key), cap_));
    if (c == 0)
        terms_.erase(key);
    else
        terms_[key] = c;
}

Rational EquivariantScalar::coeff(const LambdaExp& e) const {
    auto it = terms_.find(lambda_trim(e));
    return it == terms_.end() ? Rational(0) : it->second;
}

void EquivariantScalar::check_cap(const EquivariantScalar& o) const {
    if (cap_ != o.cap_)
        throw InvariantError(fmt::format("lambda cap mismatch: {} vs {}", cap_, o.cap_));
}

EquivariantScalar EquivariantScalar::operator-() const {
    EquivariantScalar out(cap_);
    for (const auto& [e, c] : terms_) out.terms_[e] = -c;
    return out;
}

EquivariantScalar& EquivariantScalar::operator+=(const EquivariantScalar& o) {
    check_cap(o);
    for (const auto& [e, c] : o.terms_) {
        Rational v = coeff(e) + c;
        if (v == 0)
            terms_.erase(e);
        else
            terms_[e] = v;
    }
    return *this;
}

EquivariantScalar& EquivariantScalar::operator-=(const EquivariantScalar& o) {
    return *this += -o;
}

EquivariantScalar EquivariantScalar::operator+(const EquivariantScalar& o) const {
    EquivariantScalar out = *this;
    out += o;
    return out;
}

EquivariantScalar EquivariantScalar::operator-(const EquivariantScalar& o) const {
    EquivariantScalar out = *this;
    out -= o;
    return out;
}

EquivariantScalar EquivariantScalar::operator*(const EquivariantScalar& o) const {
    check_cap(o);
    EquivariantScalar out(cap_);
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : o.terms_) {
            LambdaExp e = lambda_mul(ea, eb);
            if (lambda_degree(e) > cap_)
                throw InvariantError(
                    fmt::format("product lambda-degree {} exceeds cap {}",
                                lambda_degree(e), cap_));
            Rational v = out.coeff(e) + ca * cb;
            if (v == 0)
                out.terms_.erase(e);
            else
                out.terms_[e] = v;
        }
    return out;
}

EquivariantScalar EquivariantScalar::operator*(const Rational& c) const {
    EquivariantScalar out(cap_);
    if (c == 0) return out;
    for (const auto& [e, v] : terms_) out.terms_[e] = v * c;
    return out;
}

bool EquivariantScalar::operator==(const EquivariantScalar& o) const {
    return cap_ == o.cap_ && terms_ == o.terms_;
}

EquivariantScalar EquivariantScalar::substitute(
    const std::vector<EquivariantScalar>& images, unsigned new_cap) const {
    EquivariantScalar out(new_cap);
    for (const auto& [e, c] : terms_) {
        EquivariantScalar term(c, new_cap);
        for (size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (i >= images.size())
                throw InvariantError("substitute: no image for lambda index");
            for (unsigned k = 0; k < e[i]; ++k) term = term * images[i];
        }
        out += term;
    }
    return out;
}

EquivariantScalar EquivariantScalar::lambda_free_part() const {
    EquivariantScalar out(cap_);
    Rational c = rational_part();
    if (c != 0) out.set({}, c);
    return out;
}

EquivariantScalar EquivariantScalar::lambda_positive_part() const {
    EquivariantScalar out(cap_);
    for (const auto& [e, c] : terms_)
        if (!e.empty()) out.set(e, c);
    return out;
}

std::string EquivariantScalar::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [e, c] : terms_) {
        if (!out.empty()) out += " + ";
        if (e.empty())
            out += rat_str(c);
        else
            out += rat_str(c) + "*" + lambda_str(e);
    }
    return out;
}

} // namespace floerpot
