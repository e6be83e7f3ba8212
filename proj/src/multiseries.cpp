#include "floerpot/multiseries.hpp"

#include <fmt/format.h>

namespace floerpot {

MultiSeries::MultiSeries(std::vector<std::string> vars, unsigned maxdeg, Exponent trunc,
                         unsigned cap)
    : vars_(std::move(vars)), maxdeg_(maxdeg), trunc_(std::move(trunc)), cap_(cap) {
    if (maxdeg_ == 0) throw InvariantError("total-degree bound must be positive");
}

MultiSeries MultiSeries::constant(const NovikovSeries& c, std::vector<std::string> vars,
                                  unsigned maxdeg) {
    MultiSeries s(std::move(vars), maxdeg, c.trunc(), c.cap());
    s.add_term(Key(s.vars_.size(), 0), c);
    return s;
}

MultiSeries MultiSeries::variable(size_t index, std::vector<std::string> vars,
                                  unsigned maxdeg, Exponent trunc, unsigned cap) {
    MultiSeries s(std::move(vars), maxdeg, trunc, cap);
    if (index >= s.vars_.size()) throw InvariantError("variable index out of range");
    Key k(s.vars_.size(), 0);
    k[index] = 1;
    s.add_term(k, NovikovSeries::constant(1, s.trunc_, s.cap_));
    return s;
}

NovikovSeries MultiSeries::coeff(const Key& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? NovikovSeries(trunc_, cap_) : it->second;
}

void MultiSeries::add_term(const Key& k, const NovikovSeries& c) {
    if (k.size() != vars_.size()) throw InvariantError("exponent vector length mismatch");
    if (c.trunc() != trunc_ || c.cap() != cap_)
        throw InvariantError("coefficient series shape mismatch");
    if (lambda_degree(k) >= maxdeg_ || c.is_zero()) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(k, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

void MultiSeries::check_compatible(const MultiSeries& o) const {
    if (vars_ != o.vars_ || maxdeg_ != o.maxdeg_ || trunc_ != o.trunc_ || cap_ != o.cap_)
        throw InvariantError("multiseries shape mismatch");
}

MultiSeries MultiSeries::operator-() const {
    MultiSeries out(vars_, maxdeg_, trunc_, cap_);
    for (const auto& [k, c] : terms_) out.terms_.emplace(k, -c);
    return out;
}

MultiSeries MultiSeries::operator+(const MultiSeries& o) const {
    MultiSeries out = *this;
    out += o;
    return out;
}

MultiSeries& MultiSeries::operator+=(const MultiSeries& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

MultiSeries MultiSeries::operator-(const MultiSeries& o) const { return *this + (-o); }

MultiSeries MultiSeries::operator*(const MultiSeries& o) const {
    check_compatible(o);
    MultiSeries out(vars_, maxdeg_, trunc_, cap_);
    for (const auto& [ka, ca] : terms_)
        for (const auto& [kb, cb] : o.terms_) {
            if (lambda_degree(ka) + lambda_degree(kb) >= maxdeg_) continue;
            Key k(ka.size());
            for (size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
            out.add_term(k, ca * cb);
        }
    return out;
}

MultiSeries MultiSeries::operator*(const NovikovSeries& c) const {
    MultiSeries out(vars_, maxdeg_, trunc_, cap_);
    for (const auto& [k, v] : terms_) out.add_term(k, v * c);
    return out;
}

MultiSeries MultiSeries::operator*(const Rational& c) const {
    MultiSeries out(vars_, maxdeg_, trunc_, cap_);
    for (const auto& [k, v] : terms_) out.add_term(k, v * c);
    return out;
}

bool MultiSeries::operator==(const MultiSeries& o) const {
    return vars_ == o.vars_ && maxdeg_ == o.maxdeg_ && trunc_ == o.trunc_ &&
           cap_ == o.cap_ && terms_ == o.terms_;
}

unsigned MultiSeries::order() const {
    unsigned best = maxdeg_;
    for (const auto& [k, c] : terms_) best = std::min(best, lambda_degree(k));
    return best;
}

MultiSeries MultiSeries::exp() const {
    MultiSeries acc =
        constant(NovikovSeries::constant(1, trunc_, cap_), vars_, maxdeg_);
    if (is_zero()) return acc;
    if (order() == 0)
        throw InvariantError("multiseries exp requires positive order");
    MultiSeries power = acc;
    unsigned n = 0;
    while (true) {
        ++n;
        power = power * *this * (Rational(1) / n);
        if (power.is_zero()) break;
        acc += power;
    }
    return acc;
}

MultiSeries MultiSeries::log1p() const {
    MultiSeries acc(vars_, maxdeg_, trunc_, cap_);
    if (is_zero()) return acc;
    if (order() == 0)
        throw InvariantError("multiseries log1p requires positive order");
    MultiSeries power =
        constant(NovikovSeries::constant(1, trunc_, cap_), vars_, maxdeg_);
    unsigned n = 0;
    while (true) {
        ++n;
        power = power * *this;
        if (power.is_zero()) break;
        acc += power * (Rational(n % 2 == 1 ? 1 : -1) / n);
    }
    return acc;
}

MultiSeries MultiSeries::inverse() const {
    NovikovSeries c0 = coeff(Key(vars_.size(), 0));
    NovikovSeries c0inv = c0.inverse();
    MultiSeries u = *this * c0inv -
                    constant(NovikovSeries::constant(1, trunc_, cap_), vars_, maxdeg_);
    MultiSeries acc =
        constant(NovikovSeries::constant(1, trunc_, cap_), vars_, maxdeg_);
    MultiSeries power = acc;
    while (true) {
        power = power * u;
        if (power.is_zero()) break;
        acc += -power;
        power = -power;
    }
    return acc * c0inv;
}

MultiSeries MultiSeries::pow(long n) const {
    if (n < 0) return inverse().pow(-n);
    MultiSeries acc =
        constant(NovikovSeries::constant(1, trunc_, cap_), vars_, maxdeg_);
    MultiSeries base = *this;
    while (n > 0) {
        if (n & 1) acc = acc * base;
        base = base * base;
        n >>= 1;
    }
    return acc;
}

MultiSeries MultiSeries::substitute(const std::vector<MultiSeries>& images) const {
    if (images.size() != vars_.size())
        throw InvariantError("substitute: wrong number of images");
    for (const auto& im : images) images[0].check_compatible(im);
    MultiSeries out(images[0].vars_, images[0].maxdeg_, trunc_, cap_);
    for (const auto& [k, c] : terms_) {
        MultiSeries term = constant(c, out.vars_, out.maxdeg_);
        for (size_t i = 0; i < k.size(); ++i)
            if (k[i] > 0) term = term * images[i].pow(k[i]);
        out += term;
    }
    return out;
}

NovikovSeries MultiSeries::evaluate(const std::vector<NovikovSeries>& values) const {
    if (values.size() != vars_.size())
        throw InvariantError("evaluate: wrong number of values");
    NovikovSeries out(trunc_, cap_);
    for (const auto& [k, c] : terms_) {
        NovikovSeries term = c;
        for (size_t i = 0; i < k.size(); ++i)
            if (k[i] > 0) term = term * values[i].pow(k[i]);
        out += term;
    }
    return out;
}

std::string MultiSeries::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [k, c] : terms_) {
        std::string mono;
        for (size_t i = 0; i < k.size(); ++i) {
            if (k[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += vars_[i];
            if (k[i] > 1) mono += fmt::format("^{}", k[i]);
        }
        std::string cs = c.str();
        std::string body;
        if (mono.empty())
            body = cs;
        else if (cs == "1")
            body = mono;
        else if (c.term_count() > 1)
            body = "(" + cs + ")*" + mono;
        else
            body = cs + "*" + mono;
        if (!out.empty()) out += " + ";
        out += body;
    }
    return out;
}

std::vector<MultiSeries> reversion_triangular(const std::vector<MultiSeries>& maps) {
    if (maps.empty()) return {};
    size_t m = maps[0].vars().size();
    if (maps.size() != m)
        throw InvariantError("reversion needs one map per variable");
    unsigned N = maps[0].maxdeg();
    // F_j with maps[j] = var_j * F_j, F_j = 1 + higher order.
    std::vector<MultiSeries> factors;
    for (size_t j = 0; j < m; ++j) {
        MultiSeries f(maps[j].vars(), N, maps[j].trunc(), maps[j].cap());
        for (const auto& [k, c] : maps[j].terms()) {
            if (k[j] == 0)
                throw InvariantError(
                    fmt::format("map {} is not divisible by its variable", j + 1));
            MultiSeries::Key q = k;
            --q[j];
            f.add_term(q, c);
        }
        if (!(f.coeff(MultiSeries::Key(m, 0)) ==
              NovikovSeries::constant(1, f.trunc(), f.cap())))
            throw InvariantError(
                fmt::format("map {} is not triangular (unit leading coefficient)", j + 1));
        factors.push_back(std::move(f));
    }
    std::vector<MultiSeries> inv;
    for (size_t j = 0; j < m; ++j)
        inv.push_back(MultiSeries::variable(j, maps[j].vars(), N, maps[j].trunc(),
                                            maps[j].cap()));
    for (unsigned it = 0; it + 1 < N; ++it) {
        std::vector<MultiSeries> next;
        for (size_t j = 0; j < m; ++j) {
            MultiSeries fj = factors[j].substitute(inv);
            next.push_back(
                MultiSeries::variable(j, maps[j].vars(), N, maps[j].trunc(),
                                      maps[j].cap()) *
                fj.inverse());
        }
        if (next == inv) break;
        inv = std::move(next);
    }
    return inv;
}

} // namespace floerpot
