#pragma once

#include "floerpot/ainfinity.hpp"
#include "floerpot/contraction.hpp"
#include "floerpot/trimodule.hpp"

#include <map>
#include <string>
#include <vector>

namespace testutil {

using namespace floerpot;

inline EquivariantScalar sc(const Rational& c, unsigned cap = 1) {
    return EquivariantScalar(c, cap);
}

inline Element basis_elem(const AInfinityAlgebra& A, size_t i) {
    return Element{{i, NovikovSeries::constant(1, A.trunc(), A.cap())}};
}

// Exterior algebra on two odd generators, zero differential.
inline AInfinityAlgebra exterior2(Exponent trunc, unsigned cap = 1) {
    GradedBasis B{{"e", "th1", "th2", "th12"}, {0, 1, 1, 2}, 0};
    QMat d(4, QVec(4, Rational(0)));
    std::map<std::pair<size_t, size_t>, ScalarElement> prod;
    auto P = [&](size_t a, size_t b, size_t out, int s) {
        prod[{a, b}] = ScalarElement{{out, sc(Rational(s), cap)}};
    };
    for (size_t x = 0; x < 4; ++x) {
        P(0, x, x, 1);
        if (x) P(x, 0, x, 1);
    }
    P(1, 2, 3, 1);
    P(2, 1, 3, -1);
    return AInfinityAlgebra::from_dga(B, d, prod, trunc, cap);
}

// Simplicial cochains of an interval with the cup product (no unit element).
inline AInfinityAlgebra interval_cochains(Exponent trunc) {
    GradedBasis B{{"f0", "f1", "ed"}, {0, 0, 1}, std::nullopt};
    QMat d(3, QVec(3, Rational(0)));
    d[2][0] = Rational(-1);
    d[2][1] = Rational(1);
    std::map<std::pair<size_t, size_t>, ScalarElement> prod;
    prod[{0, 0}] = ScalarElement{{0, sc(1)}};
    prod[{1, 1}] = ScalarElement{{1, sc(1)}};
    prod[{0, 2}] = ScalarElement{{2, sc(1)}};
    prod[{2, 1}] = ScalarElement{{2, sc(1)}};
    return AInfinityAlgebra::from_dga(B, d, prod, trunc, 1);
}

// Nilmanifold-style dga: exterior algebra on x, y, z with dz = xy.
inline AInfinityAlgebra heisenberg(Exponent trunc) {
    GradedBasis B{{"one", "x", "y", "z", "xy", "xz", "yz", "xyz"},
                  {0, 1, 1, 1, 2, 2, 2, 3},
                  0};
    QMat d(8, QVec(8, Rational(0)));
    d[4][3] = 1;
    std::map<std::pair<size_t, size_t>, ScalarElement> prod;
    auto P = [&](size_t a, size_t b, size_t out, int s) {
        prod[{a, b}] = ScalarElement{{out, sc(Rational(s))}};
    };
    for (size_t j = 0; j < 8; ++j) {
        P(0, j, j, 1);
        if (j) P(j, 0, j, 1);
    }
    P(1, 2, 4, 1), P(2, 1, 4, -1);  // x.y
    P(1, 3, 5, 1), P(3, 1, 5, -1);  // x.z
    P(2, 3, 6, 1), P(3, 2, 6, -1);  // y.z
    P(1, 6, 7, 1), P(6, 1, 7, 1);   // x.yz, yz.x
    P(2, 5, 7, -1), P(5, 2, 7, -1); // y.xz, xz.y
    P(3, 4, 7, 1), P(4, 3, 7, 1);   // z.xy, xy.z
    return AInfinityAlgebra::from_dga(B, d, prod, trunc, 1);
}

// Classical complex underlying an algebra (its m[1, E=0] as a matrix).
inline Complex complex_of(const AInfinityAlgebra& A) {
    size_t n = A.basis().size();
    Complex c;
    c.basis = A.basis();
    c.d = qmat_zero(n, n);
    auto kit = A.ops().find(1);
    if (kit != A.ops().end()) {
        auto eit = kit->second.find(0);
        if (eit != kit->second.end())
            for (const auto& [tuple, value] : eit->second)
                for (const auto& [i, s] : value)
                    c.d[i][tuple[0]] = s.rational_part();
    }
    return c;
}

// Conjugation by the strict filtered isomorphism Phi = Id + T^E phi, phi a
// degree-preserving basis map with phi(unit) = 0.
inline AInfinityAlgebra transport(const AInfinityAlgebra& A, const Exponent& E,
                                  const std::map<size_t, Element>& phi) {
    size_t n = A.basis().size();
    NovikovSeries tpow = NovikovSeries::t_power(E, A.trunc(), A.cap());
    auto apply_phi = [&](const Element& x) {
        Element out;
        for (const auto& [i, c] : x) {
            auto it = phi.find(i);
            if (it != phi.end()) elem_add(out, elem_scale(it->second, c));
        }
        return out;
    };
    std::vector<Element> Phi(n), PhiInv(n);
    for (size_t i = 0; i < n; ++i) {
        Element base = basis_elem(A, i);
        Phi[i] = base;
        elem_add(Phi[i], elem_scale(apply_phi(base), tpow));
        PhiInv[i] = base;
        Element term = base;
        Rational sign = -1;
        for (int l = 0; l < 64; ++l) {
            term = elem_scale(apply_phi(term), tpow);
            if (elem_is_zero(term)) break;
            elem_add_scaled(PhiInv[i], term, sign);
            sign = -sign;
        }
    }
    auto expand = [&](const std::vector<Element>& images, const Element& x) {
        Element out;
        for (const auto& [i, c] : x) elem_add(out, elem_scale(images[i], c));
        return out;
    };
    AInfinityAlgebra out(A.basis(), A.trunc(), A.cap());
    for (const auto& [k, emap] : A.ops()) {
        std::vector<size_t> tuple(k, 0);
        while (true) {
            std::vector<Element> args;
            for (size_t j : tuple) args.push_back(Phi[j]);
            Element img = expand(PhiInv, A.apply(args));
            std::map<Exponent, ScalarElement> by_energy;
            for (const auto& [i, c] : img)
                for (const auto& [en, s] : c.terms()) by_energy[en][i] = s;
            for (const auto& [en, value] : by_energy) out.set_op(k, en, tuple, value);
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
    return out;
}

// Rank-one unital algebra: just e with e.e = e.
inline AInfinityAlgebra trivial_unital(Exponent trunc, unsigned cap = 1) {
    GradedBasis B{{"e"}, {0}, 0};
    AInfinityAlgebra A(B, trunc, cap);
    A.set_op(2, 0, {0, 0}, ScalarElement{{0, sc(1, cap)}});
    return A;
}

// Four-dimensional dga with non-trivial differential: d(u) = v, th.u = v,
// u.th = -v; cohomology is spanned by e and th.
inline AInfinityAlgebra b4(Exponent trunc) {
    GradedBasis B{{"e", "th", "u", "v"}, {0, 1, 1, 2}, 0};
    QMat d(4, QVec(4, Rational(0)));
    d[3][2] = 1;
    std::map<std::pair<size_t, size_t>, ScalarElement> prod;
    for (size_t x = 0; x < 4; ++x) {
        prod[{0, x}] = ScalarElement{{x, sc(1)}};
        if (x) prod[{x, 0}] = ScalarElement{{x, sc(1)}};
    }
    prod[{1, 2}] = ScalarElement{{3, sc(1)}};
    prod[{2, 1}] = ScalarElement{{3, sc(-1)}};
    return AInfinityAlgebra::from_dga(B, d, prod, trunc, 1);
}

// Exterior algebra on th1, th2 with the equivariant Cartan-type operation
// m[1, E=a]: th1 -> l1.e, th12 -> l1.th2 (index for the circle weight).
inline AInfinityAlgebra equivariant_exterior(Exponent trunc, const Exponent& a) {
    AInfinityAlgebra A = exterior2(trunc, 2);
    A.set_op(1, a, {1}, ScalarElement{{0, EquivariantScalar::monomial({1}, 1, 2)}});
    A.set_op(1, a, {3}, ScalarElement{{2, EquivariantScalar::monomial({1}, 1, 2)}});
    A.set_maslov(a, 2);
    return A;
}

// Diagonal tri-module of a unital algebra: n[k'',k',0] are the algebra
// operations with a sign twist on the eta strand, and the third strand acts
// only through the unit of C.
inline AInfinityTriModule flatten_diagonal(const AInfinityAlgebra& A,
                                           const AInfinityAlgebra& C) {
    AInfinityTriModule D(A, A, C, A.basis());
    for (const auto& [k, emap] : A.ops()) {
        if (k == 0) continue;
        for (const auto& [E, entries] : emap)
            for (const auto& [tuple, value] : entries)
                for (unsigned kpp = 0; kpp < k; ++kpp) {
                    unsigned kp = k - 1 - kpp;
                    long s = 0;
                    for (unsigned t = kpp + 1; t < k; ++t)
                        s += A.basis().degrees[tuple[t]] - 1;
                    ScalarElement v = value;
                    if (((s % 2) + 2) % 2)
                        for (auto& [i, c] : v) c = -c;
                    D.set_op({kpp, kp, 0}, E, tuple, v);
                }
    }
    size_t eu = *C.basis().unit;
    for (size_t y = 0; y < A.basis().size(); ++y) {
        int sg = ((A.basis().degrees[y] - 1) % 2 + 2) % 2 ? -1 : 1;
        D.set_op({0, 0, 1}, 0, {y, eu},
                 ScalarElement{{y, sc(Rational(sg), A.cap())}});
    }
    return D;
}

// One-dimensional module over three copies of A seeing only the unit action;
// n[0,0,0] vanishes identically, so squaring isolates the potential term.
inline AInfinityTriModule unit_toy(const AInfinityAlgebra& A) {
    GradedBasis M{{"y"}, {0}, std::nullopt};
    AInfinityTriModule D(A, A, A, M);
    size_t e = *A.basis().unit;
    D.set_op({1, 0, 0}, 0, {e, 0}, ScalarElement{{0, sc(1, A.cap())}});
    D.set_op({0, 1, 0}, 0, {0, e}, ScalarElement{{0, sc(-1, A.cap())}});
    D.set_op({0, 0, 1}, 0, {0, e}, ScalarElement{{0, sc(-1, A.cap())}});
    return D;
}

inline Contraction identity_contraction(const Complex& c) {
    size_t n = c.basis.size();
    return Contraction{c, c, qmat_identity(n), qmat_identity(n), qmat_zero(n, n)};
}

inline TransferResult identity_transfer(const AInfinityAlgebra& A) {
    TransferResult out{A, {}};
    for (size_t j = 0; j < A.basis().size(); ++j)
        out.inclusion[1][0][{j}] = ScalarElement{{j, sc(1, A.cap())}};
    return out;
}

// Potential-only model: basis e, x_1..x_n; for each vector v_i of area A_i the
// operation m_{k,A_i}(x_{j_1},..,x_{j_k}) = (prod_l v_i[j_l] / k!) e, together
// with the unit products.
inline AInfinityAlgebra clifford_model(const std::vector<std::vector<Rational>>& v,
                                       const std::vector<Exponent>& areas,
                                       Exponent trunc, unsigned kmax) {
    size_t n = v.front().size();
    GradedBasis B;
    B.names.push_back("e");
    B.degrees.push_back(0);
    for (size_t j = 1; j <= n; ++j) {
        B.names.push_back("x" + std::to_string(j));
        B.degrees.push_back(1);
    }
    B.unit = 0;
    AInfinityAlgebra A(B, trunc, 1);
    for (size_t j = 0; j <= n; ++j) {
        A.set_op(2, 0, {0, j}, ScalarElement{{j, sc(1)}});
        if (j) A.set_op(2, 0, {j, 0}, ScalarElement{{j, sc(-1)}});
    }
    std::map<std::pair<Exponent, std::vector<size_t>>, Rational> acc;
    for (size_t i = 0; i < v.size(); ++i) {
        Rational kfact = 1;
        std::vector<std::vector<size_t>> tuples{{}};
        for (unsigned k = 0; k <= kmax; ++k) {
            if (k) kfact *= k;
            for (const auto& t : tuples) {
                Rational c = Rational(1) / kfact;
                for (size_t j : t) c *= v[i][j - 1];
                if (c != 0) acc[{areas[i], t}] += c;
            }
            std::vector<std::vector<size_t>> next;
            for (const auto& t : tuples)
                for (size_t j = 1; j <= n; ++j) {
                    auto u = t;
                    u.push_back(j);
                    next.push_back(std::move(u));
                }
            tuples = std::move(next);
        }
    }
    for (const auto& [key, c] : acc)
        if (c != 0)
            A.set_op(static_cast<unsigned>(key.second.size()), key.first, key.second,
                     ScalarElement{{0, sc(c)}});
    return A;
}

} // namespace testutil
