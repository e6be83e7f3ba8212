#include "floerpot/contraction.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

namespace floerpot {

void Complex::validate() const {
    basis.validate();
    size_t n = basis.size();
    if (d.size() != n) throw InvariantError("differential has wrong row count");
    for (const auto& row : d)
        if (row.size() != n) throw InvariantError("differential is not square");
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (d[i][j] != 0 && basis.degrees[i] != basis.degrees[j] + 1)
                throw InvariantError(
                    fmt::format("differential entry ({},{}) breaks the grading",
                                basis.names[i], basis.names[j]));
    QMat dd = mat_mul(d, d);
    for (const auto& row : dd)
        for (const auto& v : row)
            if (v != 0) throw InvariantError("differential does not square to zero");
}

namespace {

bool is_zero_mat(const QMat& M) {
    for (const auto& row : M)
        for (const auto& v : row)
            if (v != 0) return false;
    return true;
}

QMat mat_sub(const QMat& A, const QMat& B) {
    QMat R = A;
    for (size_t i = 0; i < R.size(); ++i)
        for (size_t j = 0; j < R[i].size(); ++j) R[i][j] -= B[i][j];
    return R;
}

QMat mat_add(const QMat& A, const QMat& B) {
    QMat R = A;
    for (size_t i = 0; i < R.size(); ++i)
        for (size_t j = 0; j < R[i].size(); ++j) R[i][j] += B[i][j];
    return R;
}

} // namespace

std::vector<std::string> check_strong_contraction(const Contraction& c) {
    std::vector<std::string> report;
    size_t n = c.source.basis.size();
    size_t m = c.target.basis.size();
    try {
        c.source.validate();
    } catch (const InvariantError& e) {
        report.push_back(std::string("source: ") + e.what());
        return report;
    }
    try {
        c.target.validate();
    } catch (const InvariantError& e) {
        report.push_back(std::string("target: ") + e.what());
        return report;
    }
    if (c.i.size() != n || (n && c.i[0].size() != m) || c.p.size() != m ||
        (m && c.p[0].size() != n) || c.h.size() != n || (n && c.h[0].size() != n)) {
        report.push_back("map shapes");
        return report;
    }
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < m; ++b)
            if (c.i[a][b] != 0 &&
                c.source.basis.degrees[a] != c.target.basis.degrees[b]) {
                report.push_back("i degree");
                goto after_i;
            }
after_i:
    for (size_t a = 0; a < m; ++a)
        for (size_t b = 0; b < n; ++b)
            if (c.p[a][b] != 0 &&
                c.target.basis.degrees[a] != c.source.basis.degrees[b]) {
                report.push_back("p degree");
                goto after_p;
            }
after_p:
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b)
            if (c.h[a][b] != 0 &&
                c.source.basis.degrees[a] != c.source.basis.degrees[b] - 1) {
                report.push_back("h degree");
                goto after_h;
            }
after_h:
    if (!is_zero_mat(mat_sub(mat_mul(c.i, c.target.d), mat_mul(c.source.d, c.i))))
        report.push_back("i chain map");
    if (!is_zero_mat(mat_sub(mat_mul(c.p, c.source.d), mat_mul(c.target.d, c.p))))
        report.push_back("p chain map");
    if (!is_zero_mat(mat_sub(mat_mul(c.p, c.i), qmat_identity(m))))
        report.push_back("p∘i = Id");
    QMat lhs = mat_sub(qmat_identity(n), m ? mat_mul(c.i, c.p) : qmat_zero(n, n));
    QMat rhs = mat_add(mat_mul(c.source.d, c.h), mat_mul(c.h, c.source.d));
    if (!is_zero_mat(mat_sub(lhs, rhs))) report.push_back("homotopy identity");
    if (!is_zero_mat(mat_mul(c.h, c.i))) report.push_back("h∘i");
    if (!is_zero_mat(mat_mul(c.p, c.h))) report.push_back("p∘h");
    if (!is_zero_mat(mat_mul(c.h, c.h))) report.push_back("h∘h");
    return report;
}

Contraction make_strong_contraction(const Complex& A) {
    A.validate();
    size_t n = A.basis.size();

    std::map<int, std::vector<size_t>> by_deg;
    for (size_t i = 0; i < n; ++i) by_deg[A.basis.degrees[i]].push_back(i);

    // Per global index: role vectors assembled below.
    std::vector<QVec> u_cols;           // change-of-basis columns
    std::vector<int> roles;             // 0 = image, 1 = harmonic, 2 = lift
    std::vector<QVec> harm_cols;        // harmonic vectors in order
    std::vector<std::string> h_names;
    std::vector<int> h_degs;
    std::optional<size_t> h_unit;
    std::map<int, std::vector<QVec>> lift_by_deg;  // for inverting d

    auto embed = [&](int deg, const QVec& local) {
        QVec g(n, Rational(0));
        const auto& idx = by_deg[deg];
        for (size_t t = 0; t < idx.size(); ++t) g[idx[t]] = local[t];
        return g;
    };

    for (const auto& [deg, idx] : by_deg) {
        size_t m = idx.size();
        // image of d from the previous degree, in local coordinates
        std::vector<QVec> im_rows;
        auto prev = by_deg.find(deg - 1);
        if (prev != by_deg.end()) {
            QMat rows;
            for (size_t j : prev->second) {
                QVec r(m, Rational(0));
                bool nz = false;
                for (size_t t = 0; t < m; ++t) {
                    r[t] = A.d[idx[t]][j];
                    if (r[t] != 0) nz = true;
                }
                if (nz) rows.push_back(std::move(r));
            }
            size_t rk = rref(rows);
            for (size_t t = 0; t < rk; ++t) im_rows.push_back(rows[t]);
        }
        // kernel of d leaving this degree
        QMat block;
        auto next = by_deg.find(deg + 1);
        if (next != by_deg.end()) {
            for (size_t r : next->second) {
                QVec row(m, Rational(0));
                for (size_t t = 0; t < m; ++t) row[t] = A.d[r][idx[t]];
                block.push_back(std::move(row));
            }
        }
        std::vector<QVec> ker =
            block.empty() ? std::vector<QVec>() : kernel_basis(block);
        if (block.empty()) {
            for (size_t t = 0; t < m; ++t) {
                QVec v(m, Rational(0));
                v[t] = 1;
                ker.push_back(std::move(v));
            }
        }

        std::vector<QVec> chosen = im_rows;
        auto try_add = [&](const QVec& v) {
            QMat M(chosen.begin(), chosen.end());
            M.push_back(v);
            if (rref(M) == chosen.size() + 1) {
                chosen.push_back(v);
                return true;
            }
            return false;
        };
        std::vector<QVec> harm_local;
        if (A.basis.unit && A.basis.degrees[*A.basis.unit] == deg) {
            size_t local = static_cast<size_t>(
                std::find(idx.begin(), idx.end(), *A.basis.unit) - idx.begin());
            QVec ev(m, Rational(0));
            ev[local] = 1;
            bool closed = true;
            if (!block.empty()) {
                QVec img = mat_vec(block, ev);
                for (const auto& v2 : img)
                    if (v2 != 0) closed = false;
            }
            if (!closed) throw InvariantError("unit is not closed");
            if (!try_add(ev)) throw InvariantError("unit is exact");
            harm_local.push_back(ev);
        }
        for (const auto& v : ker)
            if (try_add(v)) harm_local.push_back(v);
        std::vector<QVec> lift_local;
        for (size_t t = 0; t < m; ++t) {
            QVec ev(m, Rational(0));
            ev[t] = 1;
            if (try_add(ev)) lift_local.push_back(ev);
        }

        for (const auto& v : im_rows) {
            u_cols.push_back(embed(deg, v));
            roles.push_back(0);
        }
        for (const auto& v : harm_local) {
            QVec g = embed(deg, v);
            size_t support = 0, last = 0;
            for (size_t t = 0; t < n; ++t)
                if (g[t] != 0) {
                    ++support;
                    last = t;
                }
            if (support == 1 && g[last] == 1)
                h_names.push_back(A.basis.names[last]);
            else
                h_names.push_back(
                    fmt::format("h{}_{}", deg, harm_cols.size()));
            if (A.basis.unit && g[*A.basis.unit] == 1 && support == 1)
                h_unit = harm_cols.size();
            h_degs.push_back(deg);
            harm_cols.push_back(g);
            u_cols.push_back(std::move(g));
            roles.push_back(1);
        }
        for (const auto& v : lift_local) {
            QVec g = embed(deg, v);
            lift_by_deg[deg].push_back(g);
            u_cols.push_back(std::move(g));
            roles.push_back(2);
        }
    }

    size_t nh = harm_cols.size();
    QMat U = qmat_zero(n, n);
    for (size_t cidx = 0; cidx < n; ++cidx)
        for (size_t r = 0; r < n; ++r) U[r][cidx] = u_cols[cidx][r];
    QMat Uinv = inverse(U);

    // h on the image columns: solve d (lift-combination) = column.
    QMat hU = qmat_zero(n, n);
    QMat pU = qmat_zero(nh, n);
    size_t hpos = 0;
    for (size_t cidx = 0; cidx < n; ++cidx) {
        if (roles[cidx] == 1) {
            pU[hpos++][cidx] = 1;
            continue;
        }
        if (roles[cidx] != 0) continue;
        int deg = 0;
        for (size_t r = 0; r < n; ++r)
            if (u_cols[cidx][r] != 0) {
                deg = A.basis.degrees[r];
                break;
            }
        const auto& lifts = lift_by_deg[deg - 1];
        QMat dl = qmat_zero(n, lifts.size());
        for (size_t t = 0; t < lifts.size(); ++t) {
            QVec img = mat_vec(A.d, lifts[t]);
            for (size_t r = 0; r < n; ++r) dl[r][t] = img[r];
        }
        auto sol = solve(dl, u_cols[cidx]);
        if (!sol) throw InvariantError("image column has no lift");
        for (size_t t = 0; t < lifts.size(); ++t)
            for (size_t r = 0; r < n; ++r) hU[r][cidx] += lifts[t][r] * (*sol)[t];
    }

    Contraction out;
    out.source = A;
    GradedBasis HB;
    HB.names = h_names;
    HB.degrees = h_degs;
    HB.unit = h_unit;
    out.target.basis = std::move(HB);
    out.target.d = qmat_zero(nh, nh);
    out.i = qmat_zero(n, nh);
    for (size_t t = 0; t < nh; ++t)
        for (size_t r = 0; r < n; ++r) out.i[r][t] = harm_cols[t][r];
    out.p = mat_mul(pU, Uinv);
    out.h = mat_mul(hU, Uinv);
    return out;
}

namespace {

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

// Applies the fixed-energy entry table of m_{r,E1} to r scalar vectors.
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

} // namespace

AInfinityMorphism TransferResult::inclusion_morphism(
    const AInfinityAlgebra& original) const {
    AInfinityMorphism f(&algebra, &original);
    for (const auto& [k, emap] : inclusion)
        for (const auto& [E, entries] : emap)
            for (const auto& [tuple, value] : entries)
                f.set_component(k, E, tuple, value);
    return f;
}

TransferResult transfer_algebra(const AInfinityAlgebra& alg, const Contraction& c,
                                unsigned k_max, const Exponent& E_max) {
    if (alg.basis().names != c.source.basis.names ||
        alg.basis().degrees != c.source.basis.degrees)
        throw InvariantError("contraction does not match the algebra's complex");
    size_t n = alg.basis().size();
    unsigned cap = alg.cap();
    // classical differential must agree with the contraction's d
    QMat m10 = qmat_zero(n, n);
    {
        auto kit = alg.ops().find(1);
        if (kit != alg.ops().end()) {
            auto eit = kit->second.find(0);
            if (eit != kit->second.end())
                for (const auto& [tuple, value] : eit->second)
                    for (const auto& [i, s] : value) {
                        if (!s.lambda_free())
                            throw InvariantError(
                                "classical differential must be lambda-free");
                        m10[i][tuple[0]] = s.rational_part();
                    }
        }
    }
    if (m10 != c.source.d)
        throw InvariantError("contraction differential disagrees with m[1, E=0]");
    if (alg.basis().unit) {
        QVec e(n, Rational(0));
        e[*alg.basis().unit] = 1;
        if (mat_vec(c.i, mat_vec(c.p, e)) != e)
            throw InvariantError("contraction does not fix the unit");
    }

    size_t nh = c.target.basis.size();
    Exponent bound = std::min(E_max, alg.trunc());

    // achievable energies: sums of table energies below the bound
    std::set<Exponent> energies{0};
    std::set<Exponent> gens;
    for (const auto& [k, emap] : alg.ops())
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

    AInfinityAlgebra::Table itilde, mh;
    for (size_t t = 0; t < nh; ++t) {
        ScalarElement col;
        for (size_t r = 0; r < n; ++r)
            if (c.i[r][t] != 0) col.emplace(r, EquivariantScalar(c.i[r][t], cap));
        if (!col.empty()) itilde[1][0][{t}] = std::move(col);
        ScalarElement dcol;
        for (size_t r = 0; r < nh; ++r)
            if (c.target.d[r][t] != 0)
                dcol.emplace(r, EquivariantScalar(c.target.d[r][t], cap));
        if (!dcol.empty()) mh[1][0][{t}] = std::move(dcol);
    }

    for (const auto& E : energies) {
        for (unsigned k = 0; k <= k_max; ++k) {
            if (k == 1 && E == 0) continue;
            std::vector<size_t> tuple(k, 0);
            while (true) {
                ScalarElement S;
                for (const auto& [r, emap] : alg.ops()) {
                    for (const auto& [E1, entries] : emap) {
                        if (r == 1 && E1 == 0) continue;
                        if (E1 > E) continue;
                        Exponent rem = E - E1;
                        if (r == 0) {
                            if (k == 0 && rem == 0)
                                scalar_elem_add(S,
                                                entries.at(std::vector<size_t>{}));
                            continue;
                        }
                        std::vector<ScalarElement> vs(r);
                        std::function<void(unsigned, unsigned, const Exponent&)> rec =
                            [&](unsigned blk, unsigned pos, const Exponent& left) {
                                if (blk == r) {
                                    if (pos != k || left != 0) return;
                                    ScalarElement term =
                                        apply_entries(entries, vs, cap);
                                    scalar_elem_add(S, term);
                                    return;
                                }
                                for (unsigned a = 0; pos + a <= k; ++a) {
                                    auto ait = itilde.find(a);
                                    if (ait == itilde.end()) continue;
                                    std::vector<size_t> sub(
                                        tuple.begin() + pos,
                                        tuple.begin() + pos + a);
                                    for (const auto& [g, ent] : ait->second) {
                                        if (a == 0 && g == 0) continue;
                                        if (g > left) continue;
                                        auto vit = ent.find(sub);
                                        if (vit == ent.end()) continue;
                                        vs[blk] = vit->second;
                                        rec(blk + 1, pos + a, left - g);
                                    }
                                }
                            };
                        rec(0, 0, rem);
                    }
                }
                if (!S.empty()) {
                    // The homotopy enters negated: with Id - i p = d h + h d the
                    // inclusion components -h(S) make the morphism identity close.
                    ScalarElement iv = mat_apply(c.h, S);
                    for (auto& [idx, v] : iv) v = -v;
                    if (!iv.empty()) itilde[k][E][tuple] = std::move(iv);
                    ScalarElement mv = mat_apply(c.p, S);
                    if (!mv.empty()) mh[k][E][tuple] = std::move(mv);
                }
                unsigned j = k;
                while (j > 0) {
                    if (++tuple[j - 1] < nh) break;
                    tuple[j - 1] = 0;
                    --j;
                }
                if (j == 0) break;
            }
            if (nh == 0 && k > 0) break;
        }
    }

    TransferResult out{AInfinityAlgebra(c.target.basis, alg.trunc(), cap),
                       std::move(itilde)};
    for (const auto& [k, emap] : mh)
        for (const auto& [E, entries] : emap)
            for (const auto& [tuple, value] : entries)
                out.algebra.set_op(k, E, tuple, value);
    if (!alg.gapping().empty()) out.algebra.set_gapping(alg.gapping());
    for (const auto& [E, mu] : alg.maslov())
        if (E != 0) out.algebra.set_maslov(E, mu);
    return out;
}

} // namespace floerpot
