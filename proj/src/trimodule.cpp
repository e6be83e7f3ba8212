#include "floerpot/trimodule.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

#include "floerpot/error.hpp"

namespace floerpot {

namespace {

int parity_sign(long s) { return ((s % 2) + 2) % 2 == 0 ? 1 : -1; }

ScalarElement mat_apply(const QMat& M, const ScalarElement& v) {
    ScalarElement out;
    for (const auto& [j, c] : v)
        for (size_t r = 0; r < M.size(); ++r) {
            if (M[r][j] == 0) continue;
            EquivariantScalar w = c * M[r][j];
            auto it = out.find(r);
            if (it == out.end()) {
                out.emplace(r, w);
            } else {
                it->second += w;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    return out;
}

ScalarElement apply_entries(
    const std::map<std::vector<size_t>, ScalarElement>& entries,
    const std::vector<ScalarElement>& vs, unsigned cap) {
    ScalarElement out;
    for (const auto& [tuple, value] : entries) {
        EquivariantScalar coeff(Rational(1), cap);
        bool dead = false;
        for (size_t t = 0; t < tuple.size() && !dead; ++t) {
            auto it = vs[t].find(tuple[t]);
            if (it == vs[t].end())
                dead = true;
            else
                coeff = coeff * it->second;
        }
        if (dead || coeff.is_zero()) continue;
        for (const auto& [j, c] : value) {
            EquivariantScalar w = c * coeff;
            if (w.is_zero()) continue;
            auto it = out.find(j);
            if (it == out.end()) {
                out.emplace(j, w);
            } else {
                it->second += w;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    }
    return out;
}

Element apply_table(const AInfinityTriModule::Table& tab,
                    const AInfinityTriModule::Arity& a,
                    const std::vector<Element>& xi, const Element& y,
                    const std::vector<Element>& eta,
                    const std::vector<Element>& zeta, const Exponent& trunc,
                    unsigned cap) {
    Element out;
    auto ait = tab.find(a);
    if (ait == tab.end()) return out;
    std::vector<const Element*> ins;
    ins.reserve(a.total() + 1);
    for (const auto& e : xi) ins.push_back(&e);
    ins.push_back(&y);
    for (const auto& e : eta) ins.push_back(&e);
    for (const auto& e : zeta) ins.push_back(&e);
    for (const auto& [E, entries] : ait->second) {
        NovikovSeries tpow = NovikovSeries::t_power(E, trunc, cap);
        for (const auto& [tuple, value] : entries) {
            NovikovSeries prod = tpow;
            bool dead = false;
            for (size_t j = 0; j < tuple.size() && !dead; ++j) {
                auto cit = ins[j]->find(tuple[j]);
                if (cit == ins[j]->end() || cit->second.is_zero())
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

// Mixed-radix counter over `dims`; returns false when the space is empty.
bool first_tuple(const std::vector<size_t>& dims, std::vector<size_t>& tuple) {
    for (size_t d : dims)
        if (d == 0) return false;
    tuple.assign(dims.size(), 0);
    return true;
}

bool next_tuple(const std::vector<size_t>& dims, std::vector<size_t>& tuple) {
    size_t j = dims.size();
    while (j > 0) {
        if (++tuple[j - 1] < dims[j - 1]) return true;
        tuple[j - 1] = 0;
        --j;
    }
    return false;
}

std::optional<ScalarElement> classical_part(const Element& one,
                                            const GradedBasis& basis) {
    ScalarElement out;
    for (const auto& [i, c] : one) {
        if (i >= basis.size())
            throw InvariantError("candidate element index out of range");
        if (c.is_zero()) continue;
        if (basis.degrees[i] != 0) return std::nullopt;
        EquivariantScalar c0 = c.coeff(0);
        if (!c0.is_zero()) {
            if (!c0.lambda_free()) return std::nullopt;
            out.emplace(i, c0);
        }
    }
    return out;
}

// Classical pairing matrix of n_{1,0,0}(-;1) / n_{0,1,0}(1;-) / n_{0,0,1}(1;-)
// for strand 0 / 1 / 2; nullopt when a lambda term obstructs the rational
// reduction.
std::optional<QMat> cyclic_pairing(const AInfinityTriModule& D,
                                   const ScalarElement& onebar, unsigned strand) {
    AInfinityTriModule::Arity a = strand == 0
                                      ? AInfinityTriModule::Arity{1, 0, 0}
                                      : (strand == 1 ? AInfinityTriModule::Arity{0, 1, 0}
                                                     : AInfinityTriModule::Arity{0, 0, 1});
    const GradedBasis& alg = strand == 0 ? D.left().basis()
                                         : (strand == 1 ? D.right_first().basis()
                                                        : D.right_second().basis());
    QMat M = qmat_zero(D.basis().size(), alg.size());
    for (size_t c = 0; c < alg.size(); ++c)
        for (const auto& [j, q] : onebar) {
            std::vector<size_t> tuple =
                strand == 0 ? std::vector<size_t>{c, j} : std::vector<size_t>{j, c};
            const ScalarElement* v = D.op(a, 0, tuple);
            if (!v) continue;
            for (const auto& [i, s] : *v) {
                if (!s.lambda_free()) return std::nullopt;
                M[i][c] += s.rational_part() * q.rational_part();
            }
        }
    return M;
}

bool classical_differential_kills(const AInfinityTriModule& D,
                                  const ScalarElement& onebar) {
    ScalarElement res;
    for (const auto& [j, q] : onebar) {
        const ScalarElement* v = D.op({0, 0, 0}, 0, {j});
        if (!v) continue;
        scalar_elem_add(res, scalar_elem_scale(*v, q));
    }
    return res.empty();
}

SeriesMat smat_zero(size_t rows, size_t cols, const Exponent& trunc, unsigned cap) {
    return SeriesMat(rows, std::vector<NovikovSeries>(cols, NovikovSeries(trunc, cap)));
}

SeriesMat q_to_smat(const QMat& M, const Exponent& trunc, unsigned cap) {
    SeriesMat out = smat_zero(M.size(), M.empty() ? 0 : M[0].size(), trunc, cap);
    for (size_t r = 0; r < M.size(); ++r)
        for (size_t c = 0; c < M[r].size(); ++c)
            if (M[r][c] != 0) out[r][c] = NovikovSeries::constant(M[r][c], trunc, cap);
    return out;
}

SeriesMat smat_mul(const SeriesMat& A, const SeriesMat& B, const Exponent& trunc,
                   unsigned cap) {
    size_t n = A.size(), m = B.empty() ? 0 : B[0].size(), k = B.size();
    SeriesMat out = smat_zero(n, m, trunc, cap);
    for (size_t r = 0; r < n; ++r)
        for (size_t t = 0; t < k; ++t) {
            if (A[r][t].is_zero()) continue;
            for (size_t c = 0; c < m; ++c) {
                if (B[t][c].is_zero()) continue;
                out[r][c] += A[r][t] * B[t][c];
            }
        }
    return out;
}

bool smat_is_zero(const SeriesMat& M) {
    for (const auto& row : M)
        for (const auto& s : row)
            if (!s.is_zero()) return false;
    return true;
}

// Inverse of a series matrix whose classical part has the given inverse.
SeriesMat smat_inverse(const SeriesMat& A, const QMat& classical_inverse,
                       const Exponent& trunc, unsigned cap) {
    size_t n = A.size();
    SeriesMat AI = q_to_smat(classical_inverse, trunc, cap);
    SeriesMat N = smat_mul(AI, A, trunc, cap);
    NovikovSeries one = NovikovSeries::constant(1, trunc, cap);
    for (size_t i = 0; i < n; ++i) N[i][i] -= one;
    for (auto& row : N)
        for (auto& s : row) s = -s;
    SeriesMat acc = q_to_smat(qmat_identity(n), trunc, cap);
    SeriesMat term = acc;
    while (true) {
        term = smat_mul(term, N, trunc, cap);
        if (smat_is_zero(term)) break;
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < n; ++c) acc[r][c] += term[r][c];
    }
    return smat_mul(acc, AI, trunc, cap);
}

Element smat_column(const SeriesMat& M, size_t c) {
    Element out;
    for (size_t r = 0; r < M.size(); ++r)
        if (!M[r][c].is_zero()) out.emplace(r, M[r][c]);
    return out;
}

Element smat_apply(const SeriesMat& M, const Element& v) {
    Element out;
    for (const auto& [j, s] : v)
        for (size_t r = 0; r < M.size(); ++r) {
            NovikovSeries w = M[r][j] * s;
            if (w.is_zero()) continue;
            auto it = out.find(r);
            if (it == out.end()) {
                out.emplace(r, w);
            } else {
                it->second += w;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    return out;
}

// Whether r lies in the column span of the series matrix M over the truncated
// ring, decided as one exact rational system across all energy levels and
// lambda monomials.
bool series_exact(const SeriesMat& M, const Element& r, const Exponent& trunc,
                  unsigned cap) {
    if (elem_is_zero(r)) return true;
    std::set<Exponent> es{0}, gens;
    size_t nvars = 0;
    unsigned mdeg = 0;
    auto note = [&](const NovikovSeries& s, bool from_matrix) {
        for (const auto& [E, c] : s.terms()) {
            es.insert(E);
            if (E > 0) gens.insert(E);
            for (const auto& [L, q] : c.terms()) {
                (void)q;
                nvars = std::max(nvars, L.size());
                if (from_matrix) mdeg = std::max(mdeg, lambda_degree(L));
            }
        }
    };
    for (const auto& row : M)
        for (const auto& s : row) note(s, true);
    for (const auto& [i, s] : r) note(s, false);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& e : es)
            for (const auto& g : gens) {
                Exponent s = e + g;
                if (s < trunc && es.insert(s).second) grew = true;
            }
    }
    // lambda monomials available to the unknowns: products with matrix
    // monomials must stay below the cap
    unsigned udeg = cap >= mdeg ? cap - mdeg : 0;
    std::vector<LambdaExp> ls{LambdaExp{}};
    std::function<void(LambdaExp&, size_t, unsigned)> lrec =
        [&](LambdaExp& cur, size_t pos, unsigned left) {
            if (pos == nvars) return;
            for (unsigned d = 1; d <= left; ++d) {
                cur[pos] = d;
                ls.push_back(lambda_trim(cur));
                lrec(cur, pos + 1, left - d);
            }
            cur[pos] = 0;
            lrec(cur, pos + 1, left);
        };
    if (nvars > 0 && udeg > 0) {
        LambdaExp cur(nvars, 0);
        lrec(cur, 0, udeg);
    }
    std::vector<Exponent> evec(es.begin(), es.end());
    auto eidx = [&](const Exponent& e) {
        return static_cast<size_t>(std::lower_bound(evec.begin(), evec.end(), e) -
                                   evec.begin());
    };
    std::map<LambdaExp, size_t, LambdaOrder> lidx;
    std::set<LambdaExp, LambdaOrder> all_l(ls.begin(), ls.end());
    for (const auto& row : M)
        for (const auto& s : row)
            for (const auto& [E, c] : s.terms())
                for (const auto& [Lm, q] : c.terms())
                    for (const auto& Lu : ls) {
                        (void)q;
                        (void)E;
                        all_l.insert(lambda_mul(Lm, Lu));
                    }
    for (const auto& [i, s] : r)
        for (const auto& [E, c] : s.terms())
            for (const auto& [L, q] : c.terms()) {
                (void)q;
                all_l.insert(L);
            }
    size_t li = 0;
    for (const auto& L : all_l) lidx[L] = li++;
    size_t rows = M.size(), cols = M.empty() ? 0 : M[0].size();
    size_t ne = evec.size(), nl = all_l.size(), nlu = ls.size();
    QMat sys = qmat_zero(rows * ne * nl, cols * ne * nlu);
    QVec rhs(rows * ne * nl, Rational(0));
    auto eq_row = [&](size_t i, size_t e, size_t l) {
        return (i * ne + e) * nl + l;
    };
    for (size_t rr = 0; rr < rows; ++rr)
        for (size_t cc = 0; cc < cols; ++cc)
            for (const auto& [E1, c1] : M[rr][cc].terms())
                for (const auto& [L1, q1] : c1.terms())
                    for (size_t e2 = 0; e2 < ne; ++e2) {
                        Exponent E = E1 + evec[e2];
                        if (E >= trunc) continue;
                        auto eit = std::lower_bound(evec.begin(), evec.end(), E);
                        if (eit == evec.end() || *eit != E) continue;
                        size_t e = static_cast<size_t>(eit - evec.begin());
                        for (size_t l2 = 0; l2 < nlu; ++l2) {
                            LambdaExp L = lambda_mul(L1, ls[l2]);
                            if (lambda_degree(L) > cap) continue;
                            size_t l = lidx.at(L);
                            sys[eq_row(rr, e, l)][(cc * ne + e2) * nlu + l2] += q1;
                        }
                    }
    for (const auto& [i, s] : r)
        for (const auto& [E, c] : s.terms())
            for (const auto& [L, q] : c.terms())
                rhs[eq_row(i, eidx(E), lidx.at(L))] = q;
    return solve(sys, rhs).has_value();
}

std::vector<std::vector<unsigned>> compositions(unsigned total, unsigned blocks) {
    std::vector<std::vector<unsigned>> out;
    if (blocks == 0) {
        if (total == 0) out.push_back({});
        return out;
    }
    std::vector<unsigned> cur(blocks, 0);
    std::function<void(unsigned, unsigned)> rec = [&](unsigned pos, unsigned left) {
        if (pos + 1 == blocks) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (unsigned a = 0; a <= left; ++a) {
            cur[pos] = a;
            rec(pos + 1, left - a);
        }
    };
    rec(0, total);
    return out;
}

} // namespace

std::string AInfinityTriModule::Violation::str(const AInfinityTriModule& D) const {
    std::string args;
    size_t pos = 0;
    for (unsigned j = 0; j < arity.kpp; ++j, ++pos) {
        if (j) args += ",";
        args += D.left().basis().names[inputs[pos]];
    }
    args += " | " + D.basis().names[inputs[pos]] + " | ";
    ++pos;
    for (unsigned j = 0; j < arity.kp; ++j, ++pos) {
        if (j) args += ",";
        args += D.right_first().basis().names[inputs[pos]];
    }
    args += " | ";
    for (unsigned j = 0; j < arity.k; ++j, ++pos) {
        if (j) args += ",";
        args += D.right_second().basis().names[inputs[pos]];
    }
    return fmt::format("relation ({},{},{}) E={} ({})", arity.kpp, arity.kp,
                       arity.k, rat_str(energy), args);
}

AInfinityTriModule::AInfinityTriModule(AInfinityAlgebra left,
                                       AInfinityAlgebra right_first,
                                       AInfinityAlgebra right_second,
                                       GradedBasis basis)
    : left_(std::move(left)),
      rfirst_(std::move(right_first)),
      rsecond_(std::move(right_second)),
      basis_(std::move(basis)) {
    basis_.validate();
    if (left_.trunc() != rfirst_.trunc() || left_.trunc() != rsecond_.trunc())
        throw InvariantError("component algebras disagree on truncation");
    if (left_.cap() != rfirst_.cap() || left_.cap() != rsecond_.cap())
        throw InvariantError("component algebras disagree on lambda cap");
}

void AInfinityTriModule::set_op(const Arity& a, const Exponent& energy,
                                const std::vector<size_t>& inputs,
                                const ScalarElement& out) {
    if (inputs.size() != a.total() + 1)
        throw InvariantError("input tuple length != arity");
    size_t pos = 0;
    for (unsigned j = 0; j < a.kpp; ++j, ++pos)
        if (inputs[pos] >= left_.basis().size())
            throw InvariantError("xi index out of range");
    if (inputs[pos] >= basis_.size())
        throw InvariantError("module index out of range");
    ++pos;
    for (unsigned j = 0; j < a.kp; ++j, ++pos)
        if (inputs[pos] >= rfirst_.basis().size())
            throw InvariantError("eta index out of range");
    for (unsigned j = 0; j < a.k; ++j, ++pos)
        if (inputs[pos] >= rsecond_.basis().size())
            throw InvariantError("zeta index out of range");
    for (const auto& [i, c] : out) {
        if (i >= basis_.size()) throw InvariantError("output index out of range");
        if (c.cap() != cap()) throw InvariantError("output scalar cap mismatch");
    }
    if (energy < 0) throw InvariantError("negative energy");
    if (energy >= trunc()) return;
    ScalarElement clean;
    for (const auto& [i, c] : out)
        if (!c.is_zero()) clean.emplace(i, c);
    if (clean.empty()) {
        auto ait = ops_.find(a);
        if (ait != ops_.end()) {
            auto eit = ait->second.find(energy);
            if (eit != ait->second.end()) {
                eit->second.erase(inputs);
                if (eit->second.empty()) ait->second.erase(eit);
                if (ait->second.empty()) ops_.erase(ait);
            }
        }
        return;
    }
    ops_[a][energy][inputs] = std::move(clean);
}

const ScalarElement* AInfinityTriModule::op(const Arity& a, const Exponent& energy,
                                            const std::vector<size_t>& inputs) const {
    auto ait = ops_.find(a);
    if (ait == ops_.end()) return nullptr;
    auto eit = ait->second.find(energy);
    if (eit == ait->second.end()) return nullptr;
    auto it = eit->second.find(inputs);
    return it == eit->second.end() ? nullptr : &it->second;
}

Element AInfinityTriModule::apply_basis(const Arity& a,
                                        const std::vector<size_t>& inputs) const {
    Element out;
    auto ait = ops_.find(a);
    if (ait == ops_.end()) return out;
    for (const auto& [E, entries] : ait->second) {
        auto it = entries.find(inputs);
        if (it == entries.end()) continue;
        elem_add(out, scalar_to_element(it->second, E, trunc(), cap()));
    }
    return out;
}

Element AInfinityTriModule::apply(const std::vector<Element>& xi, const Element& y,
                                  const std::vector<Element>& eta,
                                  const std::vector<Element>& zeta) const {
    Arity a{static_cast<unsigned>(xi.size()), static_cast<unsigned>(eta.size()),
            static_cast<unsigned>(zeta.size())};
    return apply_table(ops_, a, xi, y, eta, zeta, trunc(), cap());
}

Complex AInfinityTriModule::classical_complex() const {
    Complex out;
    out.basis = basis_;
    size_t n = basis_.size();
    out.d = qmat_zero(n, n);
    auto ait = ops_.find(Arity{0, 0, 0});
    if (ait != ops_.end()) {
        auto eit = ait->second.find(0);
        if (eit != ait->second.end())
            for (const auto& [tuple, value] : eit->second)
                for (const auto& [i, s] : value) {
                    if (!s.lambda_free())
                        throw InvariantError(
                            "classical module differential must be lambda-free");
                    out.d[i][tuple[0]] = s.rational_part();
                }
    }
    return out;
}

std::vector<AInfinityTriModule::Violation>
AInfinityTriModule::check_trimodule(unsigned k_max) const {
    std::vector<Violation> report;
    const size_t npp = left_.basis().size();
    const size_t np = rfirst_.basis().size();
    const size_t nz = rsecond_.basis().size();
    const size_t nd = basis_.size();
    NovikovSeries one = NovikovSeries::constant(1, trunc(), cap());
    for (unsigned kpp = 0; kpp <= k_max; ++kpp)
        for (unsigned kp = 0; kpp + kp <= k_max; ++kp)
            for (unsigned kz = 0; kpp + kp + kz <= k_max; ++kz) {
                Arity A{kpp, kp, kz};
                std::vector<size_t> dims;
                dims.insert(dims.end(), kpp, npp);
                dims.push_back(nd);
                dims.insert(dims.end(), kp, np);
                dims.insert(dims.end(), kz, nz);
                std::vector<size_t> tuple;
                if (!first_tuple(dims, tuple)) continue;
                do {
                    std::vector<int> xdeg(kpp), edeg(kp), zdeg(kz);
                    for (unsigned t = 0; t < kpp; ++t)
                        xdeg[t] = left_.basis().degrees[tuple[t]];
                    int ydeg = basis_.degrees[tuple[kpp]];
                    for (unsigned t = 0; t < kp; ++t)
                        edeg[t] = rfirst_.basis().degrees[tuple[kpp + 1 + t]];
                    for (unsigned t = 0; t < kz; ++t)
                        zdeg[t] = rsecond_.basis().degrees[tuple[kpp + 1 + kp + t]];
                    long xall = 0;
                    for (unsigned t = 0; t < kpp; ++t) xall += xdeg[t] - 1;
                    long eall = 0;
                    for (unsigned t = 0; t < kp; ++t) eall += edeg[t] - 1;

                    Element residual;
                    // compositions n(xi_1; n(xi_2; y; eta_1; zeta_1); eta_2; zeta_2)
                    for (unsigned i2 = 0; i2 <= kpp; ++i2)
                        for (unsigned j1 = 0; j1 <= kp; ++j1)
                            for (unsigned jz = 0; jz <= kz; ++jz) {
                                Arity inner{kpp - i2, j1, jz};
                                std::vector<size_t> in;
                                for (unsigned t = i2; t < kpp; ++t)
                                    in.push_back(tuple[t]);
                                in.push_back(tuple[kpp]);
                                for (unsigned t = 0; t < j1; ++t)
                                    in.push_back(tuple[kpp + 1 + t]);
                                for (unsigned t = 0; t < jz; ++t)
                                    in.push_back(tuple[kpp + 1 + kp + t]);
                                Element mid = apply_basis(inner, in);
                                if (elem_is_zero(mid)) continue;
                                std::vector<Element> oxi, oeta, ozeta;
                                for (unsigned t = 0; t < i2; ++t)
                                    oxi.push_back(Element{{tuple[t], one}});
                                for (unsigned t = j1; t < kp; ++t)
                                    oeta.push_back(Element{{tuple[kpp + 1 + t], one}});
                                for (unsigned t = jz; t < kz; ++t)
                                    ozeta.push_back(
                                        Element{{tuple[kpp + 1 + kp + t], one}});
                                Element term = apply(oxi, mid, oeta, ozeta);
                                long s = 0;
                                for (unsigned t = 0; t < i2; ++t) s += xdeg[t] - 1;
                                long zc = 0;
                                for (unsigned t = 0; t < jz; ++t) zc += zdeg[t] - 1;
                                long ec = 0;
                                for (unsigned t = j1; t < kp; ++t) ec += edeg[t] - 1;
                                s += zc * ec;
                                elem_add_scaled(residual, term,
                                                Rational(parity_sign(s)));
                            }
                    // algebra insertions on the xi strand
                    for (unsigned rb = 0; rb <= kpp; ++rb)
                        for (unsigned i = 0; i + rb <= kpp; ++i) {
                            std::vector<size_t> blk(tuple.begin() + i,
                                                    tuple.begin() + i + rb);
                            Element mid = left_.apply_basis(rb, blk);
                            if (elem_is_zero(mid)) continue;
                            std::vector<Element> oxi, oeta, ozeta;
                            for (unsigned t = 0; t < i; ++t)
                                oxi.push_back(Element{{tuple[t], one}});
                            oxi.push_back(std::move(mid));
                            for (unsigned t = i + rb; t < kpp; ++t)
                                oxi.push_back(Element{{tuple[t], one}});
                            for (unsigned t = 0; t < kp; ++t)
                                oeta.push_back(Element{{tuple[kpp + 1 + t], one}});
                            for (unsigned t = 0; t < kz; ++t)
                                ozeta.push_back(
                                    Element{{tuple[kpp + 1 + kp + t], one}});
                            Element term =
                                apply(oxi, Element{{tuple[kpp], one}}, oeta, ozeta);
                            long s = 0;
                            for (unsigned t = 0; t < i; ++t) s += xdeg[t] - 1;
                            elem_add_scaled(residual, term, Rational(parity_sign(s)));
                        }
                    // eta strand
                    for (unsigned rb = 0; rb <= kp; ++rb)
                        for (unsigned i = 0; i + rb <= kp; ++i) {
                            std::vector<size_t> blk;
                            for (unsigned t = i; t < i + rb; ++t)
                                blk.push_back(tuple[kpp + 1 + t]);
                            Element mid = rfirst_.apply_basis(rb, blk);
                            if (elem_is_zero(mid)) continue;
                            std::vector<Element> oxi, oeta, ozeta;
                            for (unsigned t = 0; t < kpp; ++t)
                                oxi.push_back(Element{{tuple[t], one}});
                            for (unsigned t = 0; t < i; ++t)
                                oeta.push_back(Element{{tuple[kpp + 1 + t], one}});
                            oeta.push_back(std::move(mid));
                            for (unsigned t = i + rb; t < kp; ++t)
                                oeta.push_back(Element{{tuple[kpp + 1 + t], one}});
                            for (unsigned t = 0; t < kz; ++t)
                                ozeta.push_back(
                                    Element{{tuple[kpp + 1 + kp + t], one}});
                            Element term =
                                apply(oxi, Element{{tuple[kpp], one}}, oeta, ozeta);
                            long s = xall + ydeg;
                            for (unsigned t = 0; t < i; ++t) s += edeg[t] - 1;
                            elem_add_scaled(residual, term, Rational(parity_sign(s)));
                        }
                    // zeta strand
                    for (unsigned rb = 0; rb <= kz; ++rb)
                        for (unsigned i = 0; i + rb <= kz; ++i) {
                            std::vector<size_t> blk;
                            for (unsigned t = i; t < i + rb; ++t)
                                blk.push_back(tuple[kpp + 1 + kp + t]);
                            Element mid = rsecond_.apply_basis(rb, blk);
                            if (elem_is_zero(mid)) continue;
                            std::vector<Element> oxi, oeta, ozeta;
                            for (unsigned t = 0; t < kpp; ++t)
                                oxi.push_back(Element{{tuple[t], one}});
                            for (unsigned t = 0; t < kp; ++t)
                                oeta.push_back(Element{{tuple[kpp + 1 + t], one}});
                            for (unsigned t = 0; t < i; ++t)
                                ozeta.push_back(
                                    Element{{tuple[kpp + 1 + kp + t], one}});
                            ozeta.push_back(std::move(mid));
                            for (unsigned t = i + rb; t < kz; ++t)
                                ozeta.push_back(
                                    Element{{tuple[kpp + 1 + kp + t], one}});
                            Element term =
                                apply(oxi, Element{{tuple[kpp], one}}, oeta, ozeta);
                            long s = xall + ydeg + eall;
                            for (unsigned t = 0; t < i; ++t) s += zdeg[t] - 1;
                            elem_add_scaled(residual, term, Rational(parity_sign(s)));
                        }

                    if (!elem_is_zero(residual)) {
                        std::set<Exponent> energies;
                        for (const auto& [i, c] : residual)
                            for (const auto& [E, s] : c.terms()) energies.insert(E);
                        for (const auto& E : energies)
                            report.push_back({A, E, tuple});
                    }
                } while (next_tuple(dims, tuple));
            }
    return report;
}

AInfinityTriModule AInfinityTriModule::deform_trimodule(const Element& bpp,
                                                        const Element& bp,
                                                        const Element& b) const {
    AInfinityTriModule out(left_.deform(bpp), rfirst_.deform(bp),
                           rsecond_.deform(b), basis_);
    for (const auto& [A, emap] : ops_)
        for (const auto& [E, entries] : emap) {
            NovikovSeries tpow = NovikovSeries::t_power(E, trunc(), cap());
            for (const auto& [inputs, value] : entries) {
                unsigned total = A.total();
                for (unsigned long mask = 0; mask < (1ul << total); ++mask) {
                    NovikovSeries prod = tpow;
                    std::vector<size_t> kxi, keta, kzeta;
                    bool dead = false;
                    for (unsigned j = 0; j < total && !dead; ++j) {
                        size_t pos = j < A.kpp ? j : j + 1;
                        const Element* src =
                            j < A.kpp ? &bpp : (j < A.kpp + A.kp ? &bp : &b);
                        std::vector<size_t>* keep =
                            j < A.kpp ? &kxi : (j < A.kpp + A.kp ? &keta : &kzeta);
                        if (mask & (1ul << j)) {
                            keep->push_back(inputs[pos]);
                            continue;
                        }
                        auto bit = src->find(inputs[pos]);
                        if (bit == src->end())
                            dead = true;
                        else
                            prod = prod * bit->second;
                    }
                    if (dead || prod.is_zero()) continue;
                    std::vector<size_t> kept;
                    kept.insert(kept.end(), kxi.begin(), kxi.end());
                    kept.push_back(inputs[A.kpp]);
                    kept.insert(kept.end(), keta.begin(), keta.end());
                    kept.insert(kept.end(), kzeta.begin(), kzeta.end());
                    Arity na{static_cast<unsigned>(kxi.size()),
                             static_cast<unsigned>(keta.size()),
                             static_cast<unsigned>(kzeta.size())};
                    for (const auto& [i, c] : value) {
                        NovikovSeries w = prod * c;
                        for (const auto& [newE, sc] : w.terms()) {
                            auto& slot = out.ops_[na][newE][kept];
                            ScalarElement add{{i, sc}};
                            scalar_elem_add(slot, add);
                        }
                    }
                }
            }
        }
    for (auto ait = out.ops_.begin(); ait != out.ops_.end();) {
        for (auto eit = ait->second.begin(); eit != ait->second.end();) {
            for (auto it = eit->second.begin(); it != eit->second.end();) {
                if (scalar_elem_is_zero(it->second))
                    it = eit->second.erase(it);
                else
                    ++it;
            }
            if (eit->second.empty())
                eit = ait->second.erase(eit);
            else
                ++eit;
        }
        if (ait->second.empty())
            ait = out.ops_.erase(ait);
        else
            ++ait;
    }
    return out;
}

std::optional<CyclicElement> AInfinityTriModule::is_left_cyclic(
    const Element& one) const {
    auto onebar = classical_part(one, basis_);
    if (!onebar || onebar->empty()) return std::nullopt;
    if (!classical_differential_kills(*this, *onebar)) return std::nullopt;
    if (basis_.size() != left_.basis().size()) return std::nullopt;
    auto M = cyclic_pairing(*this, *onebar, 0);
    if (!M || rank(*M) != basis_.size()) return std::nullopt;
    CyclicElement out;
    out.one = one;
    out.one_classical = *onebar;
    out.left_matrix = *M;
    out.left_inverse = inverse(*M);
    return out;
}

std::optional<CyclicElement> AInfinityTriModule::is_right_cyclic(
    const Element& one, unsigned strand) const {
    if (strand != 1 && strand != 2)
        throw InvariantError("right strand must be 1 (C') or 2 (C)");
    auto onebar = classical_part(one, basis_);
    if (!onebar || onebar->empty()) return std::nullopt;
    if (!classical_differential_kills(*this, *onebar)) return std::nullopt;
    const AInfinityAlgebra& alg = strand == 1 ? rfirst_ : rsecond_;
    if (basis_.size() != alg.basis().size()) return std::nullopt;
    auto M = cyclic_pairing(*this, *onebar, strand);
    if (!M || rank(*M) != basis_.size()) return std::nullopt;
    CyclicElement out;
    out.one = one;
    out.one_classical = *onebar;
    out.right_strand = strand;
    out.right_matrix = *M;
    out.right_inverse = inverse(*M);
    return out;
}

std::optional<CyclicElement> AInfinityTriModule::is_bicyclic(
    const Element& one) const {
    auto L = is_left_cyclic(one);
    if (!L) return std::nullopt;
    auto R = is_right_cyclic(one, 1);
    if (!R) return std::nullopt;
    L->right_strand = 1;
    L->right_matrix = std::move(R->right_matrix);
    L->right_inverse = std::move(R->right_inverse);
    return L;
}

Element compose(const AInfinityTriModule& D, const CyclicElement& cyc,
                const Element& b, const Element& bp) {
    if (cyc.left_inverse.empty())
        throw InvariantError("composition needs a left-cyclic element");
    D.right_second().validate_deformation(b);
    D.right_first().validate_deformation(bp);
    size_t nd = D.basis().size();
    Element bpp;
    std::optional<Exponent> last;
    while (true) {
        AInfinityTriModule ddef = D.deform_trimodule(bpp, bp, b);
        Element r = ddef.apply({}, cyc.one, {}, {});
        if (elem_is_zero(r)) return bpp;
        Exponent lead = D.trunc();
        for (const auto& [i, s] : r) lead = std::min(lead, s.valuation());
        if (last && lead <= *last)
            throw InvariantError(
                "composition induction stalled; tri-module tables corrupt");
        last = lead;
        std::map<LambdaExp, QVec, LambdaOrder> leads;
        for (const auto& [i, s] : r) {
            EquivariantScalar c = s.coeff(lead);
            for (const auto& [L, q] : c.terms())
                leads.try_emplace(L, QVec(nd, Rational(0))).first->second[i] = q;
        }
        for (const auto& [L, v] : leads) {
            QVec c = mat_vec(cyc.left_inverse, v);
            for (size_t j = 0; j < c.size(); ++j) {
                if (c[j] == 0) continue;
                NovikovSeries add = NovikovSeries::monomial(
                    lead, EquivariantScalar::monomial(L, -c[j], D.cap()),
                    D.trunc());
                auto it = bpp.find(j);
                if (it == bpp.end()) {
                    bpp.emplace(j, add);
                } else {
                    it->second += add;
                    if (it->second.is_zero()) bpp.erase(it);
                }
            }
        }
    }
}

Element obstruction_square(const AInfinityTriModule& D, const Element& bpp,
                           const Element& bp, const Element& b, const Element& y,
                           int lambda_sign) {
    if (lambda_sign != 1 && lambda_sign != -1)
        throw InvariantError("lambda sign must be +1 or -1");
    auto wpp = D.left().is_weak_mc(bpp);
    auto wp = D.right_first().is_weak_mc(bp);
    auto w = D.right_second().is_weak_mc(b);
    if (!wpp || !wp || !w)
        throw InvariantError(
            "potential undefined: a deformation is not weak Maurer-Cartan");
    NovikovSeries diff = *wpp - *wp - *w;
    NovikovSeries lam = diff - diff.lambda_free_part();
    NovikovSeries scale =
        lambda_sign > 0 ? diff : diff.lambda_free_part() - lam;
    AInfinityTriModule ddef = D.deform_trimodule(bpp, bp, b);
    Element once = ddef.apply({}, y, {}, {});
    Element out = ddef.apply({}, once, {}, {});
    elem_add(out, elem_scale(y, scale));
    return out;
}

KappaResult chain_iso_kappa(const AInfinityTriModule& D, const CyclicElement& cyc,
                            const Element& bpp, const Element& bp,
                            const Element& b) {
    if (cyc.left_inverse.empty() || cyc.right_strand != 1 ||
        cyc.right_inverse.empty())
        throw InvariantError("chain isomorphism needs a bicyclic element");
    KappaResult out;
    AInfinityTriModule ddef = D.deform_trimodule(bpp, bp, b);
    const AInfinityAlgebra& app = ddef.left();
    const AInfinityAlgebra& ap = ddef.right_first();
    size_t nd = D.basis().size();
    size_t npp = app.basis().size();
    size_t np = ap.basis().size();
    const Exponent& tr = D.trunc();
    unsigned cap = D.cap();
    NovikovSeries one = NovikovSeries::constant(1, tr, cap);

    Element mc = ddef.apply({}, cyc.one, {}, {});
    if (!elem_is_zero(mc))
        out.report.push_back("n(1) != 0: the deformations do not compose");

    SeriesMat phi2 = smat_zero(nd, npp, tr, cap);
    SeriesMat phi1 = smat_zero(nd, np, tr, cap);
    for (size_t c = 0; c < npp; ++c) {
        Element col = ddef.apply({Element{{c, one}}}, cyc.one, {}, {});
        for (const auto& [i, s] : col) phi2[i][c] = s;
    }
    for (size_t c = 0; c < np; ++c) {
        Element col = ddef.apply({}, cyc.one, {Element{{c, one}}}, {});
        for (const auto& [i, s] : col) phi1[i][c] = s;
    }

    for (size_t c = 0; c < npp; ++c) {
        Element lhs = smat_apply(phi2, app.apply_basis(1, {c}));
        elem_add(lhs, ddef.apply({}, smat_column(phi2, c), {}, {}));
        if (!elem_is_zero(lhs))
            out.report.push_back(fmt::format("chain identity fails at {} (xi)",
                                             app.basis().names[c]));
    }
    for (size_t c = 0; c < np; ++c) {
        Element lhs = smat_apply(phi1, ap.apply_basis(1, {c}));
        elem_add(lhs, ddef.apply({}, smat_column(phi1, c), {}, {}));
        if (!elem_is_zero(lhs))
            out.report.push_back(fmt::format("chain identity fails at {} (eta)",
                                             ap.basis().names[c]));
    }

    SeriesMat phi2inv = smat_inverse(phi2, cyc.left_inverse, tr, cap);
    out.kappa = smat_mul(phi2inv, phi1, tr, cap);

    SeriesMat dpp = smat_zero(npp, npp, tr, cap);
    for (size_t c = 0; c < npp; ++c) {
        Element dc = app.apply_basis(1, {c});
        for (const auto& [i, s] : dc) dpp[i][c] = s;
    }

    std::vector<size_t> cocycles;
    for (size_t c = 0; c < np; ++c)
        if (elem_is_zero(ap.apply_basis(1, {c}))) cocycles.push_back(c);

    bool plus_ok = true, minus_ok = true, split = false;
    for (size_t c1 : cocycles)
        for (size_t c2 : cocycles) {
            Element lhs =
                app.apply({smat_column(out.kappa, c1), smat_column(out.kappa, c2)});
            Element rhs = smat_apply(out.kappa, ap.apply_basis(2, {c1, c2}));
            Element rp = lhs;
            elem_add_scaled(rp, rhs, Rational(-1));
            Element rm = lhs;
            elem_add_scaled(rm, rhs, Rational(1));
            bool pe = series_exact(dpp, rp, tr, cap);
            bool me = series_exact(dpp, rm, tr, cap);
            if (pe != me) split = true;
            plus_ok = plus_ok && pe;
            minus_ok = minus_ok && me;
        }
    if (plus_ok && (!split || !minus_ok))
        out.product_sign = 1;
    else if (minus_ok)
        out.product_sign = -1;
    else
        out.report.push_back("product identity fails for both signs");

    if (ap.basis().unit && app.basis().unit) {
        Element ke = smat_column(out.kappa, *ap.basis().unit);
        Element rp = ke;
        Element rm = ke;
        Element epp{{*app.basis().unit, one}};
        elem_add_scaled(rp, epp, Rational(-1));
        elem_add_scaled(rm, epp, Rational(1));
        bool pe = series_exact(dpp, rp, tr, cap);
        bool me = series_exact(dpp, rm, tr, cap);
        if (pe)
            out.unit_sign = 1;
        else if (me)
            out.unit_sign = -1;
        else
            out.report.push_back("unit identity fails for both signs");
    } else {
        out.report.push_back("component algebras lack units");
    }
    return out;
}

TriTransferResult transfer_trimodule(const AInfinityTriModule& D,
                                     const Contraction& c_D,
                                     const TransferResult& left,
                                     const TransferResult& right_first,
                                     const TransferResult& right_second,
                                     unsigned k_max, const Exponent& E_max) {
    Complex cd = D.classical_complex();
    if (cd.basis.names != c_D.source.basis.names ||
        cd.basis.degrees != c_D.source.basis.degrees)
        throw InvariantError("contraction does not match the module's complex");
    if (cd.d != c_D.source.d)
        throw InvariantError(
            "contraction differential disagrees with n[0,0,0, E=0]");
    size_t n = D.basis().size();
    size_t nh = c_D.target.basis.size();
    unsigned cap = D.cap();
    Exponent bound = std::min(E_max, D.trunc());

    std::set<Exponent> energies{0}, gens;
    for (const auto& [A, emap] : D.ops())
        for (const auto& [E, entries] : emap)
            if (E > 0) gens.insert(E);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& e : energies)
            for (const auto& g : gens) {
                Exponent s = e + g;
                if (s < bound && energies.insert(s).second) grew = true;
            }
    }

    using Arity = AInfinityTriModule::Arity;
    AInfinityTriModule::Table itd, nk;
    for (size_t t = 0; t < nh; ++t) {
        ScalarElement col;
        for (size_t r = 0; r < n; ++r)
            if (c_D.i[r][t] != 0) col.emplace(r, EquivariantScalar(c_D.i[r][t], cap));
        if (!col.empty()) itd[{0, 0, 0}][0][{t}] = std::move(col);
        ScalarElement dcol;
        for (size_t r = 0; r < nh; ++r)
            if (c_D.target.d[r][t] != 0)
                dcol.emplace(r, EquivariantScalar(c_D.target.d[r][t], cap));
        if (!dcol.empty()) nk[{0, 0, 0}][0][{t}] = std::move(dcol);
    }

    const size_t npp = D.left().basis().size();
    const size_t np = D.right_first().basis().size();
    const size_t nz = D.right_second().basis().size();
    EquivariantScalar unit_scalar(Rational(1), cap);

    for (const auto& E : energies)
        for (unsigned tot = 0; tot <= k_max; ++tot)
            for (unsigned kpp = 0; kpp <= tot; ++kpp)
                for (unsigned kp = 0; kpp + kp <= tot; ++kp) {
                    unsigned kz = tot - kpp - kp;
                    if (tot == 0 && E == 0) continue;
                    Arity A{kpp, kp, kz};
                    std::vector<size_t> dims;
                    dims.insert(dims.end(), kpp, npp);
                    dims.push_back(nh);
                    dims.insert(dims.end(), kp, np);
                    dims.insert(dims.end(), kz, nz);
                    std::vector<size_t> tuple;
                    if (!first_tuple(dims, tuple)) continue;
                    do {
                        ScalarElement S;
                        for (const auto& [A1, emap] : D.ops()) {
                            if (A1.kpp > kpp || A1.kp > kp || A1.k > kz) continue;
                            Arity A2{kpp - A1.kpp, kp - A1.kp, kz - A1.k};
                            auto a2it = itd.find(A2);
                            if (a2it == itd.end()) continue;
                            for (const auto& [E1, entries] : emap) {
                                if (E1 > E) continue;
                                if (A1 == Arity{0, 0, 0} && E1 == 0) continue;
                                Exponent E2 = E - E1;
                                auto e2it = a2it->second.find(E2);
                                if (e2it == a2it->second.end()) continue;
                                std::vector<size_t> in;
                                for (unsigned t = A1.kpp; t < kpp; ++t)
                                    in.push_back(tuple[t]);
                                in.push_back(tuple[kpp]);
                                for (unsigned t = 0; t < A2.kp; ++t)
                                    in.push_back(tuple[kpp + 1 + t]);
                                for (unsigned t = 0; t < A2.k; ++t)
                                    in.push_back(tuple[kpp + 1 + kp + t]);
                                auto vit = e2it->second.find(in);
                                if (vit == e2it->second.end()) continue;
                                std::vector<ScalarElement> vs(A1.total() + 1);
                                size_t slot = 0;
                                for (unsigned t = 0; t < A1.kpp; ++t)
                                    vs[slot++] = {{tuple[t], unit_scalar}};
                                vs[slot++] = vit->second;
                                for (unsigned t = A2.kp; t < kp; ++t)
                                    vs[slot++] = {{tuple[kpp + 1 + t], unit_scalar}};
                                for (unsigned t = A2.k; t < kz; ++t)
                                    vs[slot++] = {
                                        {tuple[kpp + 1 + kp + t], unit_scalar}};
                                ScalarElement term = apply_entries(entries, vs, cap);
                                long zc = 0;
                                for (unsigned t = 0; t < A2.k; ++t)
                                    zc += D.right_second()
                                              .basis()
                                              .degrees[tuple[kpp + 1 + kp + t]] -
                                          1;
                                long ec = 0;
                                for (unsigned t = A2.kp; t < kp; ++t)
                                    ec += D.right_first()
                                              .basis()
                                              .degrees[tuple[kpp + 1 + t]] -
                                          1;
                                if (parity_sign(zc * ec) < 0)
                                    for (auto& [idx, v] : term) v = -v;
                                scalar_elem_add(S, term);
                            }
                        }
                        if (!S.empty()) {
                            ScalarElement iv = mat_apply(c_D.h, S);
                            for (auto& [idx, v] : iv) v = -v;
                            if (!iv.empty()) itd[A][E][tuple] = std::move(iv);
                            ScalarElement mv = mat_apply(c_D.p, S);
                            if (!mv.empty()) nk[A][E][tuple] = std::move(mv);
                        }
                    } while (next_tuple(dims, tuple));
                }

    AInfinityMorphism fpp = left.inclusion_morphism(D.left());
    AInfinityMorphism fp = right_first.inclusion_morphism(D.right_first());
    AInfinityMorphism fz = right_second.inclusion_morphism(D.right_second());

    unsigned maxpp = 0, maxp = 0, maxz = 0;
    for (const auto* tab : {&nk, &itd})
        for (const auto& [A, emap] : *tab) {
            maxpp = std::max(maxpp, A.kpp);
            maxp = std::max(maxp, A.kp);
            maxz = std::max(maxz, A.k);
        }

    auto build_blocks = [](const AInfinityMorphism& f,
                           const std::vector<size_t>& strand,
                           const std::vector<unsigned>& comp,
                           std::vector<Element>& blocks) {
        size_t pos = 0;
        for (unsigned a : comp) {
            std::vector<size_t> sub(strand.begin() + pos, strand.begin() + pos + a);
            Element blk = f.apply_basis(a, sub);
            if (elem_is_zero(blk)) return false;
            blocks.push_back(std::move(blk));
            pos += a;
        }
        return true;
    };

    AInfinityTriModule module(left.algebra, right_first.algebra,
                              right_second.algebra, c_D.target.basis);
    AInfinityTriModule::Table incl;
    const size_t hpp = left.algebra.basis().size();
    const size_t hp = right_first.algebra.basis().size();
    const size_t hz = right_second.algebra.basis().size();
    NovikovSeries one_series = NovikovSeries::constant(1, D.trunc(), cap);

    for (unsigned rpp = 0; rpp <= k_max; ++rpp)
        for (unsigned rp = 0; rpp + rp <= k_max; ++rp)
            for (unsigned rz = 0; rpp + rp + rz <= k_max; ++rz) {
                Arity A{rpp, rp, rz};
                std::vector<size_t> dims;
                dims.insert(dims.end(), rpp, hpp);
                dims.push_back(nh);
                dims.insert(dims.end(), rp, hp);
                dims.insert(dims.end(), rz, hz);
                std::vector<size_t> tuple;
                if (!first_tuple(dims, tuple)) continue;
                do {
                    std::vector<size_t> sx(tuple.begin(), tuple.begin() + rpp);
                    Element yel{{tuple[rpp], one_series}};
                    std::vector<size_t> se(tuple.begin() + rpp + 1,
                                           tuple.begin() + rpp + 1 + rp);
                    std::vector<size_t> sz(tuple.begin() + rpp + 1 + rp,
                                           tuple.end());
                    Element acc_n, acc_i;
                    for (unsigned cp = 0; cp <= maxpp; ++cp)
                        for (const auto& comp_x : compositions(rpp, cp)) {
                            std::vector<Element> bx;
                            if (!build_blocks(fpp, sx, comp_x, bx)) continue;
                            for (unsigned ce = 0; ce <= maxp; ++ce)
                                for (const auto& comp_e : compositions(rp, ce)) {
                                    std::vector<Element> be;
                                    if (!build_blocks(fp, se, comp_e, be)) continue;
                                    for (unsigned cz = 0; cz <= maxz; ++cz)
                                        for (const auto& comp_z :
                                             compositions(rz, cz)) {
                                            std::vector<Element> bz;
                                            if (!build_blocks(fz, sz, comp_z, bz))
                                                continue;
                                            Arity ia{cp, ce, cz};
                                            elem_add(acc_n,
                                                     apply_table(nk, ia, bx, yel, be,
                                                                 bz, D.trunc(), cap));
                                            elem_add(acc_i,
                                                     apply_table(itd, ia, bx, yel, be,
                                                                 bz, D.trunc(), cap));
                                        }
                                }
                        }
                    std::map<Exponent, ScalarElement> by_e;
                    for (const auto& [i, s] : acc_n)
                        for (const auto& [E, c] : s.terms()) by_e[E][i] = c;
                    for (const auto& [E, se2] : by_e) module.set_op(A, E, tuple, se2);
                    by_e.clear();
                    for (const auto& [i, s] : acc_i)
                        for (const auto& [E, c] : s.terms()) by_e[E][i] = c;
                    for (const auto& [E, se2] : by_e)
                        if (!scalar_elem_is_zero(se2)) incl[A][E][tuple] = se2;
                } while (next_tuple(dims, tuple));
            }

    return {std::move(module), std::move(incl)};
}

} // namespace floerpot
