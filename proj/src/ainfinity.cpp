#include "floerpot/ainfinity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

namespace floerpot {

size_t GradedBasis::index_of(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw ParseError("unknown basis element '" + name + "'");
}

void GradedBasis::validate() const {
    if (names.size() != degrees.size())
        throw InvariantError("basis names/degrees length mismatch");
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            throw InvariantError("duplicate basis name '" + n + "'");
    if (unit) {
        if (*unit >= names.size()) throw InvariantError("unit index out of range");
        if (degrees[*unit] != 0) throw InvariantError("unit must have degree 0");
    }
}

void elem_add(Element& a, const Element& b) {
    for (const auto& [i, c] : b) {
        auto it = a.find(i);
        if (it == a.end()) {
            if (!c.is_zero()) a.emplace(i, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) a.erase(it);
        }
    }
}

void elem_add_scaled(Element& a, const Element& b, const Rational& c) {
    if (c == 0) return;
    for (const auto& [i, v] : b) {
        auto it = a.find(i);
        if (it == a.end()) {
            a.emplace(i, v * c);
        } else {
            it->second += v * c;
            if (it->second.is_zero()) a.erase(it);
        }
    }
}

Element elem_scale(const Element& a, const NovikovSeries& c) {
    Element out;
    for (const auto& [i, v] : a) {
        NovikovSeries w = v * c;
        if (!w.is_zero()) out.emplace(i, w);
    }
    return out;
}

bool elem_is_zero(const Element& a) {
    for (const auto& [i, v] : a)
        if (!v.is_zero()) return false;
    return true;
}

Element scalar_to_element(const ScalarElement& a, const Exponent& energy,
                          Exponent trunc, unsigned cap) {
    Element out;
    for (const auto& [i, c] : a) {
        if (c.cap() != cap) throw InvariantError("scalar cap mismatch");
        NovikovSeries s = NovikovSeries::monomial(energy, c, trunc);
        if (!s.is_zero()) out.emplace(i, s);
    }
    return out;
}

void scalar_elem_add(ScalarElement& a, const ScalarElement& b) {
    for (const auto& [i, c] : b) {
        auto it = a.find(i);
        if (it == a.end()) {
            if (!c.is_zero()) a.emplace(i, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) a.erase(it);
        }
    }
}

ScalarElement scalar_elem_scale(const ScalarElement& a, const EquivariantScalar& c) {
    ScalarElement out;
    for (const auto& [i, v] : a) {
        EquivariantScalar w = v * c;
        if (!w.is_zero()) out.emplace(i, w);
    }
    return out;
}

bool scalar_elem_is_zero(const ScalarElement& a) {
    for (const auto& [i, v] : a)
        if (!v.is_zero()) return false;
    return true;
}

std::string elem_str(const Element& a, const GradedBasis& basis) {
    if (elem_is_zero(a)) return "0";
    std::string out;
    for (const auto& [i, v] : a) {
        if (v.is_zero()) continue;
        if (!out.empty()) out += " + ";
        if (v.is_one())
            out += basis.names[i];
        else if (v.term_count() > 1)
            out += "(" + v.str() + ")*" + basis.names[i];
        else
            out += v.str() + "*" + basis.names[i];
    }
    return out;
}

std::string scalar_elem_str(const ScalarElement& a, const GradedBasis& basis) {
    if (scalar_elem_is_zero(a)) return "0";
    std::string out;
    for (const auto& [i, v] : a) {
        if (!out.empty()) out += " + ";
        if (v == EquivariantScalar(Rational(1), v.cap()))
            out += basis.names[i];
        else if (v.terms().size() > 1)
            out += "(" + v.str() + ")*" + basis.names[i];
        else
            out += v.str() + "*" + basis.names[i];
    }
    return out;
}

namespace {

int shifted_prefix_sign(const std::vector<int>& degrees, size_t prefix_len) {
    long s = 0;
    for (size_t j = 0; j < prefix_len; ++j) s += degrees[j] - 1;
    return (s % 2 == 0) ? 1 : -1;
}

} // namespace

std::string AInfinityAlgebra::Violation::str(const GradedBasis& basis) const {
    std::string args;
    for (size_t j = 0; j < inputs.size(); ++j) {
        if (j) args += ",";
        args += basis.names[inputs[j]];
    }
    return fmt::format("relation k={} E={} ({})", k, rat_str(energy), args);
}

AInfinityAlgebra::AInfinityAlgebra(GradedBasis basis, Exponent trunc, unsigned cap)
    : basis_(std::move(basis)), trunc_(std::move(trunc)), cap_(cap) {
    basis_.validate();
    if (trunc_ <= 0) throw InvariantError("truncation order must be positive");
}

void AInfinityAlgebra::set_gapping(std::vector<Exponent> gapping) {
    for (const auto& e : gapping)
        if (e <= 0) throw InvariantError("gapping energies must be positive");
    std::sort(gapping.begin(), gapping.end());
    gapping_ = std::move(gapping);
}

void AInfinityAlgebra::set_maslov(const Exponent& energy, int mu) {
    if (energy == 0 && mu != 0)
        throw InvariantError("energy-zero operations carry no Maslov shift");
    maslov_[energy] = mu;
}

void AInfinityAlgebra::set_op(unsigned k, const Exponent& energy,
                              const std::vector<size_t>& inputs,
                              const ScalarElement& out) {
    if (inputs.size() != k) throw InvariantError("input tuple length != arity");
    for (size_t i : inputs)
        if (i >= basis_.size()) throw InvariantError("input index out of range");
    for (const auto& [i, c] : out) {
        if (i >= basis_.size()) throw InvariantError("output index out of range");
        if (c.cap() != cap_) throw InvariantError("output scalar cap mismatch");
    }
    if (energy < 0) throw InvariantError("negative energy");
    if (energy >= trunc_) return;
    ScalarElement clean;
    for (const auto& [i, c] : out)
        if (!c.is_zero()) clean.emplace(i, c);
    if (clean.empty()) {
        auto kit = ops_.find(k);
        if (kit != ops_.end()) {
            auto eit = kit->second.find(energy);
            if (eit != kit->second.end()) {
                eit->second.erase(inputs);
                if (eit->second.empty()) kit->second.erase(eit);
                if (kit->second.empty()) ops_.erase(kit);
            }
        }
        return;
    }
    ops_[k][energy][inputs] = std::move(clean);
}

const ScalarElement* AInfinityAlgebra::op(unsigned k, const Exponent& energy,
                                          const std::vector<size_t>& inputs) const {
    auto kit = ops_.find(k);
    if (kit == ops_.end()) return nullptr;
    auto eit = kit->second.find(energy);
    if (eit == kit->second.end()) return nullptr;
    auto it = eit->second.find(inputs);
    return it == eit->second.end() ? nullptr : &it->second;
}

unsigned AInfinityAlgebra::max_arity() const {
    return ops_.empty() ? 0 : ops_.rbegin()->first;
}

void AInfinityAlgebra::validate_homogeneous() {
    std::map<Exponent, int> shifts = maslov_;
    shifts[0] = 0;
    for (const auto& [k, emap] : ops_)
        for (const auto& [E, entries] : emap)
            for (const auto& [inputs, out] : entries) {
                long in_deg = 0;
                for (size_t i : inputs) in_deg += basis_.degrees[i] - 1;
                std::optional<long> out_deg;
                for (const auto& [i, c] : out) {
                    long d = basis_.degrees[i];
                    if (out_deg && *out_deg != d)
                        throw InvariantError(fmt::format(
                            "inhomogeneous output in m[{}, E={}]", k, rat_str(E)));
                    out_deg = d;
                }
                if (!out_deg) continue;
                long mu = in_deg + 2 - *out_deg;
                auto it = shifts.find(E);
                if (it == shifts.end()) {
                    shifts.emplace(E, static_cast<int>(mu));
                } else if (it->second != mu) {
                    throw InvariantError(fmt::format(
                        "degree violation in m[{}, E={}]: shift {} vs recorded {}",
                        k, rat_str(E), mu, it->second));
                }
            }
    maslov_ = std::move(shifts);
    maslov_.erase(0);
}

void AInfinityAlgebra::validate_gapping() const {
    if (gapping_.empty()) return;
    // Energies reachable as sums of gapping generators, below truncation.
    std::set<Exponent> monoid{0};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& e : monoid)
            for (const auto& g : gapping_) {
                Exponent s = e + g;
                if (s < trunc_ && monoid.insert(s).second) grew = true;
            }
    }
    for (const auto& [k, emap] : ops_)
        for (const auto& [E, entries] : emap)
            if (!monoid.count(E))
                throw InvariantError(
                    fmt::format("energy {} outside the gapping monoid", rat_str(E)));
}

Element AInfinityAlgebra::apply_basis(unsigned k,
                                      const std::vector<size_t>& inputs) const {
    Element out;
    auto kit = ops_.find(k);
    if (kit == ops_.end()) return out;
    for (const auto& [E, entries] : kit->second) {
        auto it = entries.find(inputs);
        if (it == entries.end()) continue;
        elem_add(out, scalar_to_element(it->second, E, trunc_, cap_));
    }
    return out;
}

Element AInfinityAlgebra::apply(const std::vector<Element>& inputs) const {
    unsigned k = static_cast<unsigned>(inputs.size());
    Element out;
    auto kit = ops_.find(k);
    if (kit == ops_.end()) return out;
    for (const auto& [E, entries] : kit->second) {
        NovikovSeries tpow = NovikovSeries::t_power(E, trunc_, cap_);
        for (const auto& [tuple, value] : entries) {
            NovikovSeries prod = tpow;
            bool dead = false;
            for (size_t j = 0; j < tuple.size() && !dead; ++j) {
                auto cit = inputs[j].find(tuple[j]);
                if (cit == inputs[j].end() || cit->second.is_zero())
                    dead = true;
                else
                    prod = prod * cit->second;
            }
            if (dead || prod.is_zero()) continue;
            for (const auto& [i, c] : value) {
                NovikovSeries w = prod * c;
                if (w.is_zero()) continue;
                auto oit = out.find(i);
                if (oit == out.end()) {
                    out.emplace(i, w);
                } else {
                    oit->second += w;
                    if (oit->second.is_zero()) out.erase(oit);
                }
            }
        }
    }
    return out;
}

std::vector<AInfinityAlgebra::Violation>
AInfinityAlgebra::check_ainfinity(unsigned k_max) const {
    std::vector<Violation> report;
    size_t n = basis_.size();
    for (unsigned k = 0; k <= k_max; ++k) {
        std::vector<size_t> tuple(k, 0);
        while (true) {
            std::vector<int> degs(k);
            for (unsigned j = 0; j < k; ++j) degs[j] = basis_.degrees[tuple[j]];
            Element residual;
            for (unsigned k2 = 0; k2 <= k; ++k2)
                for (unsigned i = 0; i + k2 <= k; ++i) {
                    std::vector<size_t> mid(tuple.begin() + i, tuple.begin() + i + k2);
                    Element inner = apply_basis(k2, mid);
                    if (elem_is_zero(inner)) continue;
                    std::vector<Element> outer;
                    outer.reserve(k - k2 + 1);
                    for (unsigned j = 0; j < i; ++j)
                        outer.push_back(Element{
                            {tuple[j], NovikovSeries::constant(1, trunc_, cap_)}});
                    outer.push_back(std::move(inner));
                    for (unsigned j = i + k2; j < k; ++j)
                        outer.push_back(Element{
                            {tuple[j], NovikovSeries::constant(1, trunc_, cap_)}});
                    Element term = apply(outer);
                    elem_add_scaled(residual, term,
                                    Rational(shifted_prefix_sign(degs, i)));
                }
            if (!elem_is_zero(residual)) {
                std::set<Exponent> energies;
                for (const auto& [i, c] : residual)
                    for (const auto& [E, s] : c.terms()) energies.insert(E);
                for (const auto& E : energies) report.push_back({k, E, tuple});
            }
            // next tuple
            unsigned j = k;
            while (j > 0) {
                if (++tuple[j - 1] < n) break;
                tuple[j - 1] = 0;
                --j;
            }
            if (j == 0) break;
        }
        if (n == 0) break;
    }
    return report;
}

std::vector<std::string> AInfinityAlgebra::check_unit() const {
    std::vector<std::string> report;
    if (!basis_.unit) {
        report.push_back("no unit declared");
        return report;
    }
    size_t e = *basis_.unit;
    EquivariantScalar one(Rational(1), cap_);
    // Completeness of the two defining entries.
    for (size_t x = 0; x < basis_.size(); ++x) {
        const ScalarElement* left = op(2, 0, {e, x});
        ScalarElement want_left{{x, one}};
        if (!left || !(*left == want_left))
            report.push_back(fmt::format("m[2, E=0]({},{}) != {}", basis_.names[e],
                                         basis_.names[x], basis_.names[x]));
        const ScalarElement* right = op(2, 0, {x, e});
        int sgn = basis_.degrees[x] % 2 == 0 ? 1 : -1;
        ScalarElement want_right{{x, one * Rational(sgn)}};
        if (!right || !(*right == want_right))
            report.push_back(fmt::format("m[2, E=0]({},{}) != {}{}", basis_.names[x],
                                         basis_.names[e], sgn < 0 ? "-" : "",
                                         basis_.names[x]));
    }
    // Everything else touching the unit must vanish.
    for (const auto& [k, emap] : ops_)
        for (const auto& [E, entries] : emap)
            for (const auto& [inputs, out] : entries) {
                bool has_unit =
                    std::find(inputs.begin(), inputs.end(), e) != inputs.end();
                if (!has_unit) continue;
                if (k == 2 && E == 0 && (inputs[0] == e || inputs[1] == e)) continue;
                std::string args;
                for (size_t j = 0; j < inputs.size(); ++j) {
                    if (j) args += ",";
                    args += basis_.names[inputs[j]];
                }
                report.push_back(
                    fmt::format("nonzero m[{}, E={}]({})", k, rat_str(E), args));
            }
    return report;
}

void AInfinityAlgebra::validate_deformation(const Element& b) const {
    for (const auto& [i, c] : b) {
        if (i >= basis_.size()) throw InvariantError("deformation index out of range");
        if (c.is_zero()) continue;
        if (c.valuation() <= 0)
            throw InvariantError(fmt::format(
                "deformation coefficient of {} has zero valuation", basis_.names[i]));
        if (basis_.degrees[i] % 2 == 0)
            throw InvariantError(fmt::format("deformation element {} has even degree",
                                             basis_.names[i]));
        if (c.trunc() != trunc_ || c.cap() != cap_)
            throw InvariantError("deformation series shape mismatch");
    }
}

AInfinityAlgebra AInfinityAlgebra::deform(const Element& b) const {
    validate_deformation(b);
    AInfinityAlgebra out(basis_, trunc_, cap_);
    out.maslov_ = maslov_;
    std::set<Exponent> gaps(gapping_.begin(), gapping_.end());
    for (const auto& [i, c] : b)
        for (const auto& [E, s] : c.terms()) gaps.insert(E);
    if (!gapping_.empty())
        out.gapping_ = std::vector<Exponent>(gaps.begin(), gaps.end());

    for (const auto& [K, emap] : ops_)
        for (const auto& [E, entries] : emap) {
            NovikovSeries tpow = NovikovSeries::t_power(E, trunc_, cap_);
            for (const auto& [inputs, value] : entries) {
                // Keep the positions in `mask`; the rest must be matched by b.
                for (unsigned long mask = 0; mask < (1ul << K); ++mask) {
                    NovikovSeries prod = tpow;
                    std::vector<size_t> kept;
                    bool dead = false;
                    for (unsigned j = 0; j < K && !dead; ++j) {
                        if (mask & (1ul << j)) {
                            kept.push_back(inputs[j]);
                            continue;
                        }
                        auto bit = b.find(inputs[j]);
                        if (bit == b.end())
                            dead = true;
                        else
                            prod = prod * bit->second;
                    }
                    if (dead || prod.is_zero()) continue;
                    for (const auto& [i, c] : value) {
                        NovikovSeries w = prod * c;
                        for (const auto& [newE, sc] : w.terms()) {
                            auto& slot =
                                out.ops_[static_cast<unsigned>(kept.size())][newE]
                                        [kept];
                            ScalarElement add{{i, sc}};
                            scalar_elem_add(slot, add);
                        }
                    }
                }
            }
        }
    // Sweep zero entries produced by cancellation.
    for (auto kit = out.ops_.begin(); kit != out.ops_.end();) {
        for (auto eit = kit->second.begin(); eit != kit->second.end();) {
            for (auto it = eit->second.begin(); it != eit->second.end();) {
                if (scalar_elem_is_zero(it->second))
                    it = eit->second.erase(it);
                else
                    ++it;
            }
            if (eit->second.empty())
                eit = kit->second.erase(eit);
            else
                ++eit;
        }
        if (kit->second.empty())
            kit = out.ops_.erase(kit);
        else
            ++kit;
    }
    return out;
}

std::optional<NovikovSeries> AInfinityAlgebra::is_weak_mc(const Element& b) const {
    if (!basis_.unit) throw InvariantError("is_weak_mc needs a unital algebra");
    validate_deformation(b);
    Element curvature;
    for (const auto& [K, emap] : ops_) {
        std::vector<Element> args(K, b);
        elem_add(curvature, apply(args));
    }
    NovikovSeries w(trunc_, cap_);
    for (const auto& [i, c] : curvature) {
        if (c.is_zero()) continue;
        if (i != *basis_.unit) return std::nullopt;
        w = c;
    }
    return w;
}

AInfinityAlgebra AInfinityAlgebra::restrict_scalars(
    const std::vector<EquivariantScalar>& images, unsigned new_cap) const {
    AInfinityAlgebra out(basis_, trunc_, new_cap);
    out.gapping_ = gapping_;
    out.maslov_ = maslov_;
    for (const auto& [k, emap] : ops_)
        for (const auto& [E, entries] : emap)
            for (const auto& [inputs, value] : entries) {
                ScalarElement nv;
                for (const auto& [i, c] : value) {
                    EquivariantScalar nc = c.substitute(images, new_cap);
                    if (!nc.is_zero()) nv.emplace(i, nc);
                }
                if (!nv.empty()) out.ops_[k][E][inputs] = std::move(nv);
            }
    return out;
}

AInfinityAlgebra AInfinityAlgebra::from_dga(
    GradedBasis basis, const QMat& d,
    const std::map<std::pair<size_t, size_t>, ScalarElement>& products,
    Exponent trunc, unsigned cap) {
    AInfinityAlgebra A(std::move(basis), std::move(trunc), cap);
    size_t n = A.basis_.size();
    if (d.size() != n) throw InvariantError("differential size mismatch");
    for (size_t j = 0; j < n; ++j) {
        ScalarElement out;
        for (size_t i = 0; i < n; ++i)
            if (d[i][j] != 0) out.emplace(i, EquivariantScalar(d[i][j], cap));
        if (!out.empty()) A.set_op(1, 0, {j}, out);
    }
    for (const auto& [ij, value] : products) {
        int sgn = A.basis_.degrees[ij.first] % 2 == 0 ? 1 : -1;
        ScalarElement out;
        for (const auto& [i, c] : value) {
            EquivariantScalar w = c * Rational(sgn);
            if (!w.is_zero()) out.emplace(i, w);
        }
        if (!out.empty()) A.set_op(2, 0, {ij.first, ij.second}, out);
    }
    A.validate_homogeneous();
    return A;
}

namespace {

std::string strip_ws(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

Element AInfinityAlgebra::parse_element(const std::string& text) const {
    Element out;
    std::string t = strip_ws(text);
    if (t.empty() || t == "0") return out;
    // split into signed terms at depth-zero +/-
    std::vector<std::pair<int, std::string>> terms;
    int depth = 0;
    int sign = 1;
    std::string cur;
    for (size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        if (c == '(' || c == '{') ++depth;
        if (c == ')' || c == '}') --depth;
        if (depth == 0 && (c == '+' || c == '-')) {
            char prev = 0;
            for (size_t j = i; j-- > 0;) {
                if (t[j] == ' ' || t[j] == '\t') continue;
                prev = t[j];
                break;
            }
            if (prev == 0 || std::string("*^/({+-").find(prev) == std::string::npos) {
                if (!strip_ws(cur).empty()) terms.emplace_back(sign, strip_ws(cur));
                sign = (c == '-') ? -1 : 1;
                cur.clear();
                continue;
            }
        }
        cur += c;
    }
    if (!strip_ws(cur).empty()) terms.emplace_back(sign, strip_ws(cur));

    for (const auto& [sgn, term] : terms) {
        // last depth-zero '*' separates the coefficient from the basis name
        size_t split = std::string::npos;
        depth = 0;
        for (size_t i = 0; i < term.size(); ++i) {
            char c = term[i];
            if (c == '(' || c == '{') ++depth;
            if (c == ')' || c == '}') --depth;
            if (depth == 0 && c == '*') split = i;
        }
        std::string coeff_text = "1";
        std::string name = term;
        if (split != std::string::npos) {
            coeff_text = strip_ws(term.substr(0, split));
            name = strip_ws(term.substr(split + 1));
        }
        if (coeff_text.size() >= 2 && coeff_text.front() == '(' &&
            coeff_text.back() == ')') {
            int d = 0;
            bool wraps = true;
            for (size_t i = 0; i + 1 < coeff_text.size(); ++i) {
                if (coeff_text[i] == '(') ++d;
                if (coeff_text[i] == ')') --d;
                if (d == 0) {
                    wraps = false;
                    break;
                }
            }
            if (wraps) coeff_text = strip_ws(coeff_text.substr(1, coeff_text.size() - 2));
        }
        size_t idx = basis_.index_of(name);
        NovikovSeries c = NovikovSeries::parse(coeff_text, trunc_, cap_);
        if (sgn < 0) c = c * Rational(-1);
        if (c.is_zero()) continue;
        auto it = out.find(idx);
        if (it == out.end()) {
            out.emplace(idx, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) out.erase(it);
        }
    }
    return out;
}

AInfinityMorphism::AInfinityMorphism(const AInfinityAlgebra* source,
                                     const AInfinityAlgebra* target)
    : source_(source), target_(target) {
    if (!source_ || !target_) throw InvariantError("morphism needs both algebras");
    if (source_->trunc() != target_->trunc() || source_->cap() != target_->cap())
        throw InvariantError("morphism endpoints have mismatched shape");
}

void AInfinityMorphism::set_component(unsigned k, const Exponent& energy,
                                      const std::vector<size_t>& inputs,
                                      const ScalarElement& out) {
    if (inputs.size() != k) throw InvariantError("component tuple length != arity");
    if (energy < 0) throw InvariantError("negative energy");
    if (energy >= source_->trunc()) return;
    ScalarElement clean;
    for (const auto& [i, c] : out)
        if (!c.is_zero()) clean.emplace(i, c);
    if (clean.empty()) return;
    scalar_elem_add(comps_[k][energy][inputs], clean);
    if (scalar_elem_is_zero(comps_[k][energy][inputs])) {
        comps_[k][energy].erase(inputs);
        if (comps_[k][energy].empty()) comps_[k].erase(energy);
        if (comps_[k].empty()) comps_.erase(k);
    }
}

Element AInfinityMorphism::apply_basis(unsigned k,
                                       const std::vector<size_t>& inputs) const {
    Element out;
    auto kit = comps_.find(k);
    if (kit == comps_.end()) return out;
    for (const auto& [E, entries] : kit->second) {
        auto it = entries.find(inputs);
        if (it == entries.end()) continue;
        elem_add(out, scalar_to_element(it->second, E, source_->trunc(),
                                        source_->cap()));
    }
    return out;
}

Element AInfinityMorphism::apply(const std::vector<Element>& inputs) const {
    unsigned k = static_cast<unsigned>(inputs.size());
    Element out;
    auto kit = comps_.find(k);
    if (kit == comps_.end()) return out;
    Exponent trunc = source_->trunc();
    unsigned cap = source_->cap();
    for (const auto& [E, entries] : kit->second) {
        NovikovSeries tpow = NovikovSeries::t_power(E, trunc, cap);
        for (const auto& [tuple, value] : entries) {
            NovikovSeries prod = tpow;
            bool dead = false;
            for (size_t j = 0; j < tuple.size() && !dead; ++j) {
                auto cit = inputs[j].find(tuple[j]);
                if (cit == inputs[j].end() || cit->second.is_zero())
                    dead = true;
                else
                    prod = prod * cit->second;
            }
            if (dead || prod.is_zero()) continue;
            for (const auto& [i, c] : value) {
                NovikovSeries w = prod * c;
                if (w.is_zero()) continue;
                auto oit = out.find(i);
                if (oit == out.end()) {
                    out.emplace(i, w);
                } else {
                    oit->second += w;
                    if (oit->second.is_zero()) out.erase(oit);
                }
            }
        }
    }
    return out;
}

std::vector<AInfinityAlgebra::Violation> AInfinityMorphism::check(unsigned k_max) const {
    std::vector<AInfinityAlgebra::Violation> report;
    const GradedBasis& sb = source_->basis();
    size_t n = sb.size();
    Exponent trunc = source_->trunc();
    unsigned cap = source_->cap();
    for (unsigned k = 0; k <= k_max; ++k) {
        std::vector<size_t> tuple(k, 0);
        while (true) {
            std::vector<int> degs(k);
            for (unsigned j = 0; j < k; ++j) degs[j] = sb.degrees[tuple[j]];
            Element residual;
            // f(..., m(...), ...)
            for (unsigned k2 = 0; k2 <= k; ++k2)
                for (unsigned i = 0; i + k2 <= k; ++i) {
                    std::vector<size_t> mid(tuple.begin() + i, tuple.begin() + i + k2);
                    Element inner = source_->apply_basis(k2, mid);
                    if (elem_is_zero(inner)) continue;
                    std::vector<Element> args;
                    for (unsigned j = 0; j < i; ++j)
                        args.push_back(
                            Element{{tuple[j], NovikovSeries::constant(1, trunc, cap)}});
                    args.push_back(std::move(inner));
                    for (unsigned j = i + k2; j < k; ++j)
                        args.push_back(
                            Element{{tuple[j], NovikovSeries::constant(1, trunc, cap)}});
                    elem_add_scaled(residual, apply(args),
                                    Rational(shifted_prefix_sign(degs, i)));
                }
            // minus m_tgt(f, ..., f) over all compositions (parts may be 0).
            unsigned r_max = target_->max_arity();
            for (unsigned r = 1; r <= r_max; ++r) {
                std::vector<unsigned> parts(r, 0);
                // compositions of k into r nonnegative parts
                std::function<void(unsigned, unsigned)> rec = [&](unsigned pos,
                                                                  unsigned rem) {
                    if (pos == r) {
                        if (rem != 0) return;
                        std::vector<Element> args;
                        unsigned at = 0;
                        for (unsigned s = 0; s < r; ++s) {
                            std::vector<size_t> part(tuple.begin() + at,
                                                     tuple.begin() + at + parts[s]);
                            at += parts[s];
                            Element img = apply_basis(parts[s], part);
                            if (elem_is_zero(img)) return;
                            args.push_back(std::move(img));
                        }
                        elem_add_scaled(residual, target_->apply(args), Rational(-1));
                        return;
                    }
                    for (unsigned take = 0; take <= rem; ++take) {
                        parts[pos] = take;
                        rec(pos + 1, rem - take);
                    }
                };
                rec(0, k);
            }
            if (k == 0)
                elem_add_scaled(residual, target_->apply_basis(0, {}), Rational(-1));
            if (!elem_is_zero(residual)) {
                std::set<Exponent> energies;
                for (const auto& [i, c] : residual)
                    for (const auto& [E, s] : c.terms()) energies.insert(E);
                for (const auto& E : energies) report.push_back({k, E, tuple});
            }
            unsigned j = k;
            while (j > 0) {
                if (++tuple[j - 1] < n) break;
                tuple[j - 1] = 0;
                --j;
            }
            if (j == 0) break;
        }
        if (n == 0) break;
    }
    return report;
}

Element AInfinityMorphism::pushforward_mc(const Element& b) const {
    source_->validate_deformation(b);
    Element out;
    for (const auto& [k, emap] : comps_) {
        std::vector<Element> args(k, b);
        elem_add(out, apply(args));
    }
    return out;
}

} // namespace floerpot
