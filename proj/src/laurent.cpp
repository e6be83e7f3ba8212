#include "floerpot/laurent.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "floerpot/error.hpp"
#include "floerpot/linalg.hpp"

namespace floerpot {

NovikovSeries shift_energy(const NovikovSeries& s, const Exponent& delta) {
    NovikovSeries out(s.trunc(), s.cap());
    for (const auto& [e, c] : s.terms()) {
        Exponent ne = e + delta;
        if (ne < 0)
            throw InvariantError(fmt::format(
                "energy shift by {} drops the exponent {} below zero",
                rat_str(delta), rat_str(e)));
        if (ne < s.trunc()) out.add_term(ne, c);
    }
    return out;
}

NovikovSeries log_unit(const NovikovSeries& s) {
    if (!(s.coeff(0) == EquivariantScalar(Rational(1), s.cap())))
        throw InvariantError("log of a series whose leading coefficient is not 1");
    NovikovSeries x = s - NovikovSeries::constant(1, s.trunc(), s.cap());
    if (x.is_zero()) return x;
    return x.log1p();
}

LaurentPotential::LaurentPotential(size_t nvars, Exponent trunc, unsigned cap)
    : nvars_(nvars), trunc_(std::move(trunc)), cap_(cap) {
    if (trunc_ <= 0) throw InvariantError("truncation order must be positive");
}

NovikovSeries LaurentPotential::coeff(const ZExp& e) const {
    auto it = terms_.find(e);
    if (it != terms_.end()) return it->second;
    return NovikovSeries(trunc_, cap_);
}

void LaurentPotential::add_term(const ZExp& e, const NovikovSeries& c) {
    if (e.size() != nvars_) throw InvariantError("exponent vector of the wrong length");
    if (c.trunc() != trunc_ || c.cap() != cap_)
        throw InvariantError("coefficient with mismatched truncation or cap");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        if (!c.is_zero()) terms_.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

void LaurentPotential::add_log(unsigned lambda_index, const ZExp& covector) {
    if (lambda_index == 0) throw InvariantError("lambda indices are 1-based");
    if (covector.size() != nvars_)
        throw InvariantError("log covector of the wrong length");
    auto it = log_part_.find(lambda_index);
    if (it == log_part_.end()) {
        if (covector != ZExp(nvars_, 0)) log_part_.emplace(lambda_index, covector);
        return;
    }
    for (size_t i = 0; i < nvars_; ++i) it->second[i] += covector[i];
    if (it->second == ZExp(nvars_, 0)) log_part_.erase(it);
}

LaurentPotential LaurentPotential::operator+(const LaurentPotential& o) const {
    if (nvars_ != o.nvars_ || trunc_ != o.trunc_ || cap_ != o.cap_)
        throw InvariantError("potentials with mismatched shapes");
    LaurentPotential out = *this;
    for (const auto& [e, c] : o.terms_) out.add_term(e, c);
    for (const auto& [r, m] : o.log_part_) out.add_log(r, m);
    return out;
}

LaurentPotential LaurentPotential::operator-(const LaurentPotential& o) const {
    return *this + o * Rational(-1);
}

LaurentPotential LaurentPotential::operator*(const Rational& c) const {
    LaurentPotential out(nvars_, trunc_, cap_);
    if (c == 0) {
        if (!log_part_.empty())
            throw InvariantError("cannot scale a logarithmic part to zero");
        return out;
    }
    for (const auto& [e, v] : terms_) out.add_term(e, v * c);
    if (!log_part_.empty()) {
        if (denominator(c) != 1)
            throw InvariantError("logarithmic part scaled by a non-integer");
        long n = static_cast<long>(numerator(c).convert_to<long long>());
        for (const auto& [r, m] : log_part_) {
            ZExp scaled = m;
            for (auto& x : scaled) x *= n;
            out.add_log(r, scaled);
        }
    }
    return out;
}

bool LaurentPotential::operator==(const LaurentPotential& o) const {
    return nvars_ == o.nvars_ && trunc_ == o.trunc_ && cap_ == o.cap_ &&
           terms_ == o.terms_ && log_part_ == o.log_part_;
}

LaurentPotential LaurentPotential::scale_variables(
    const std::vector<Exponent>& shifts) const {
    if (shifts.size() != nvars_) throw InvariantError("one shift per variable required");
    if (!log_part_.empty())
        throw InvariantError("cannot rescale variables under a logarithmic part");
    LaurentPotential out(nvars_, trunc_, cap_);
    for (const auto& [e, c] : terms_) {
        Exponent delta = 0;
        for (size_t i = 0; i < nvars_; ++i) delta += shifts[i] * e[i];
        out.add_term(e, shift_energy(c, delta));
    }
    return out;
}

LaurentPotential LaurentPotential::truncate(const Exponent& new_trunc) const {
    LaurentPotential out(nvars_, new_trunc, cap_);
    for (const auto& [e, c] : terms_) out.add_term(e, c.truncate(new_trunc));
    for (const auto& [r, m] : log_part_) out.add_log(r, m);
    return out;
}

namespace {

std::string monomial_str(const ZExp& e, const char* base) {
    std::string out;
    for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += fmt::format("{}{}", base, i + 1);
        if (e[i] != 1) out += fmt::format("^{}", e[i]);
    }
    return out;
}

} // namespace

std::string LaurentPotential::str() const {
    std::vector<std::pair<ZExp, const NovikovSeries*>> order;
    for (const auto& [e, c] : terms_) order.emplace_back(e, &c);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) {
                  Exponent va = a.second->valuation(), vb = b.second->valuation();
                  if (va != vb) return va < vb;
                  return a.first > b.first;
              });
    std::string out;
    auto append = [&out](const std::string& term) {
        if (out.empty()) {
            out = term;
        } else if (term.size() > 1 && term[0] == '-') {
            out += " - " + term.substr(1);
        } else {
            out += " + " + term;
        }
    };
    for (const auto& [e, c] : order) {
        std::string mono = monomial_str(e, "z");
        if (mono.empty()) {
            append(c->term_count() > 1 ? "(" + c->str() + ")" : c->str());
        } else if (c->is_one()) {
            append(mono);
        } else if (c->term_count() > 1) {
            append("(" + c->str() + ") * " + mono);
        } else {
            append(c->str() + " * " + mono);
        }
    }
    for (const auto& [r, m] : log_part_) {
        LambdaExp le(r, 0);
        le[r - 1] = 1;
        append(fmt::format("{} * log({})", lambda_str(le), monomial_str(m, "z")));
    }
    return out.empty() ? "0" : out;
}

LaurentPotential restrict_potential(const LaurentPotential& W,
                                    const std::vector<Constraint>& constraints,
                                    const std::vector<size_t>& eliminate) {
    const size_t n = W.nvars();
    const size_t k = constraints.size();
    if (eliminate.size() != k)
        throw InvariantError("one eliminated variable per constraint required");
    std::vector<bool> gone(n, false);
    for (size_t v : eliminate) {
        if (v < 1 || v > n || gone[v - 1])
            throw InvariantError("invalid eliminated variable set");
        gone[v - 1] = true;
    }
    for (const Constraint& c : constraints) {
        if (c.covector.size() != n)
            throw InvariantError("constraint covector of the wrong length");
        if (c.value.trunc() != W.trunc() || c.value.cap() != W.cap())
            throw InvariantError("constraint value with mismatched truncation or cap");
    }
    std::vector<size_t> kept;
    for (size_t i = 0; i < n; ++i)
        if (!gone[i]) kept.push_back(i);

    QMat M(k, QVec(k, Rational(0)));
    for (size_t r = 0; r < k; ++r)
        for (size_t j = 0; j < k; ++j) M[r][j] = constraints[r].covector[eliminate[j] - 1];
    if (k > 0) {
        Rational dm = det(M);
        if (dm != 1 && dm != -1)
            throw InvariantError("non-unimodular elimination");
    }
    QMat Minv = k > 0 ? inverse(M) : QMat{};

    // weights w = Minv^T u_E; the rewritten exponent on the kept variables is
    // u_F - sum_r w_r (covector_r)_F and the coefficient gains prod q_r^{w_r}.
    auto weights = [&](const ZExp& u) {
        std::vector<long> w(k, 0);
        for (size_t r = 0; r < k; ++r) {
            Rational acc = 0;
            for (size_t j = 0; j < k; ++j) acc += Minv[j][r] * Rational(u[eliminate[j] - 1]);
            if (denominator(acc) != 1)
                throw InvariantError("non-integral elimination weight");
            w[r] = static_cast<long>(numerator(acc).convert_to<long long>());
        }
        return w;
    };
    auto kept_exponent = [&](const ZExp& u, const std::vector<long>& w) {
        ZExp e(kept.size(), 0);
        for (size_t f = 0; f < kept.size(); ++f) {
            long v = u[kept[f]];
            for (size_t r = 0; r < k; ++r) v -= w[r] * constraints[r].covector[kept[f]];
            e[f] = v;
        }
        return e;
    };

    LaurentPotential out(kept.size(), W.trunc(), W.cap());
    for (const auto& [u, c] : W.terms()) {
        std::vector<long> w = weights(u);
        NovikovSeries coeff = c;
        for (size_t r = 0; r < k; ++r)
            if (w[r] != 0) coeff = coeff * constraints[r].value.pow(w[r]);
        out.add_term(kept_exponent(u, w), coeff);
    }
    for (const auto& [lam, m] : W.log_part()) {
        std::vector<long> w = weights(m);
        out.add_log(lam, kept_exponent(m, w));
        NovikovSeries scalar(W.trunc(), W.cap());
        for (size_t r = 0; r < k; ++r)
            if (w[r] != 0)
                scalar += log_unit(constraints[r].value) * Rational(w[r]);
        if (!scalar.is_zero())
            out.add_term(ZExp(kept.size(), 0),
                         scalar * EquivariantScalar::lambda(lam, W.cap()));
    }
    return out;
}

} // namespace floerpot
