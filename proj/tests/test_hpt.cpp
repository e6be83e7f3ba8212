#include "doctest.h"

#include "helpers.hpp"

#include <functional>
#include <set>

using namespace floerpot;
using namespace testutil;

namespace {

const Rational HALF = Rational(1) / 2;

ScalarElement mapply(const QMat& M, const ScalarElement& v) {
    ScalarElement out;
    for (const auto& [j, s] : v)
        for (size_t r = 0; r < M.size(); ++r)
            if (M[r][j] != 0) scalar_elem_add(out, ScalarElement{{r, s * M[r][j]}});
    return out;
}

ScalarElement apply_op(const AInfinityAlgebra& A, unsigned r, const Exponent& E1,
                       const std::vector<ScalarElement>& vs) {
    ScalarElement out;
    std::vector<size_t> idx(r);
    std::function<void(unsigned, const EquivariantScalar&)> rec =
        [&](unsigned pos, const EquivariantScalar& coef) {
            if (pos == r) {
                const ScalarElement* entry = A.op(r, E1, idx);
                if (entry) scalar_elem_add(out, scalar_elem_scale(*entry, coef));
                return;
            }
            for (const auto& [j, s] : vs[pos]) {
                idx[pos] = j;
                rec(pos + 1, coef * s);
            }
        };
    rec(0, EquivariantScalar(Rational(1), A.cap()));
    return out;
}

ScalarElement oracle_itilde(const AInfinityAlgebra& A, const Contraction& c,
                            const std::vector<size_t>& hs, const Exponent& E,
                            const std::set<Exponent>& energies);

// Sum over planar rooted trees, evaluated by honest recursion: every subtree
// is recomputed from scratch, no tables are consulted.
ScalarElement oracle_S(const AInfinityAlgebra& A, const Contraction& c,
                       const std::vector<size_t>& hs, const Exponent& E,
                       const std::set<Exponent>& energies) {
    unsigned k = static_cast<unsigned>(hs.size());
    ScalarElement total;
    for (const auto& [r, emap] : A.ops()) {
        for (const auto& [E1, entries] : emap) {
            if (r == 1 && E1 == 0) continue;
            if (E1 > E) continue;
            Exponent rem = E - E1;
            if (r == 0) {
                if (k == 0 && rem == 0)
                    scalar_elem_add(total, entries.at(std::vector<size_t>{}));
                continue;
            }
            std::vector<ScalarElement> vs(r);
            std::function<void(unsigned, unsigned, const Exponent&)> rec =
                [&](unsigned blk, unsigned pos, const Exponent& left) {
                    if (blk == r) {
                        if (pos != k || left != 0) return;
                        scalar_elem_add(total, apply_op(A, r, E1, vs));
                        return;
                    }
                    for (unsigned a = 0; pos + a <= k; ++a) {
                        std::vector<size_t> sub(hs.begin() + pos,
                                                hs.begin() + pos + a);
                        for (const auto& g : energies) {
                            if (a == 0 && g == 0) continue;
                            if (g > left) continue;
                            // a block carrying everything leaves (0,0) blocks
                            // behind; skipping it also keeps the recursion
                            // well-founded
                            if (a == k && g == E) continue;
                            vs[blk] = oracle_itilde(A, c, sub, g, energies);
                            if (vs[blk].empty()) continue;
                            rec(blk + 1, pos + a, left - g);
                        }
                    }
                };
            rec(0, 0, rem);
        }
    }
    return total;
}

ScalarElement oracle_itilde(const AInfinityAlgebra& A, const Contraction& c,
                            const std::vector<size_t>& hs, const Exponent& E,
                            const std::set<Exponent>& energies) {
    if (hs.size() == 1 && E == 0) {
        ScalarElement col;
        for (size_t r = 0; r < c.i.size(); ++r)
            if (c.i[r][hs[0]] != 0)
                col.emplace(r, EquivariantScalar(c.i[r][hs[0]], A.cap()));
        return col;
    }
    if (hs.empty() && E == 0) return {};
    ScalarElement out = mapply(c.h, oracle_S(A, c, hs, E, energies));
    for (auto& [i, s] : out) s = -s;
    return out;
}

void compare_with_oracle(const AInfinityAlgebra& A, const Contraction& c,
                         const TransferResult& tr, unsigned k_max,
                         const std::set<Exponent>& energies) {
    size_t nh = c.target.basis.size();
    auto table_at = [](const AInfinityAlgebra::Table& T, unsigned k,
                       const Exponent& E,
                       const std::vector<size_t>& tuple) -> ScalarElement {
        auto kit = T.find(k);
        if (kit == T.end()) return {};
        auto eit = kit->second.find(E);
        if (eit == kit->second.end()) return {};
        auto tit = eit->second.find(tuple);
        if (tit == eit->second.end()) return {};
        return tit->second;
    };
    for (const auto& E : energies) {
        for (unsigned k = 0; k <= k_max; ++k) {
            std::vector<size_t> tuple(k, 0);
            while (true) {
                ScalarElement mv, iv;
                if (k == 1 && E == 0) {
                    for (size_t r = 0; r < nh; ++r)
                        if (c.target.d[r][tuple[0]] != 0)
                            mv.emplace(r, EquivariantScalar(c.target.d[r][tuple[0]],
                                                            A.cap()));
                    for (size_t r = 0; r < c.i.size(); ++r)
                        if (c.i[r][tuple[0]] != 0)
                            iv.emplace(r, EquivariantScalar(c.i[r][tuple[0]],
                                                            A.cap()));
                } else {
                    ScalarElement S = oracle_S(A, c, tuple, E, energies);
                    mv = mapply(c.p, S);
                    iv = mapply(c.h, S);
                    for (auto& [i, s] : iv) s = -s;
                }
                const ScalarElement* got = tr.algebra.op(k, E, tuple);
                CHECK((got ? *got : ScalarElement{}) == mv);
                CHECK(table_at(tr.inclusion, k, E, tuple) == iv);
                unsigned j = k;
                while (j > 0) {
                    if (++tuple[j - 1] < nh) break;
                    tuple[j - 1] = 0;
                    --j;
                }
                if (j == 0) break;
            }
            if (nh == 0) break;
        }
    }
}

// Algebra with a curvature term supported on both the unit and an exact class.
AInfinityAlgebra curved_heisenberg(Exponent trunc) {
    auto A = heisenberg(trunc);
    A.set_op(0, Rational(1), {}, ScalarElement{{0, sc(1)}, {4, sc(1)}});
    return A;
}

} // namespace

TEST_CASE("complex validation") {
    Complex C;
    C.basis = GradedBasis{{"a", "b", "c"}, {0, 1, 2}, std::nullopt};
    C.d = qmat_zero(3, 3);
    C.d[1][0] = 1;
    C.d[2][1] = 1;
    CHECK_THROWS_AS(C.validate(), InvariantError);

    Complex G;
    G.basis = GradedBasis{{"a", "b"}, {0, 0}, std::nullopt};
    G.d = qmat_zero(2, 2);
    G.d[1][0] = 1;
    CHECK_THROWS_AS(G.validate(), InvariantError);
}

TEST_CASE("acyclic two-term complex contracts to zero") {
    GradedBasis B{{"q0", "q1"}, {0, 1}, std::nullopt};
    Complex C{B, qmat_zero(2, 2)};
    C.d[1][0] = 1;
    auto c = make_strong_contraction(C);
    CHECK(check_strong_contraction(c).empty());
    CHECK(c.target.basis.size() == 0);
    CHECK(c.h[0][1] == 1);

    auto A = AInfinityAlgebra::from_dga(B, C.d, {}, Exponent(2), 1);
    auto tr = transfer_algebra(A, c, 3, Exponent(2));
    CHECK(tr.algebra.basis().size() == 0);
    CHECK(tr.algebra.ops().empty());
}

TEST_CASE("zero differential gives the identity contraction") {
    GradedBasis B{{"v", "a", "b", "f"}, {0, 1, 1, 2}, 0};
    Complex C{B, qmat_zero(4, 4)};
    auto c = make_strong_contraction(C);
    CHECK(check_strong_contraction(c).empty());
    CHECK(c.target.basis.names == std::vector<std::string>{"v", "a", "b", "f"});
    CHECK(c.target.basis.degrees == std::vector<int>{0, 1, 1, 2});
    CHECK(c.i == qmat_identity(4));
    CHECK(c.p == qmat_identity(4));
    CHECK(c.h == qmat_zero(4, 4));
}

TEST_CASE("interval cochains contract onto one idempotent class") {
    auto A = interval_cochains(Exponent(2));
    auto c = make_strong_contraction(complex_of(A));
    CHECK(check_strong_contraction(c).empty());
    REQUIRE(c.target.basis.size() == 1);
    CHECK(c.target.basis.names[0] == "h0_0");
    CHECK(c.target.basis.degrees[0] == 0);
    CHECK(c.h[0][2] == -1);
    CHECK(c.i[0][0] == 1);
    CHECK(c.i[1][0] == 1);
    CHECK(c.i[2][0] == 0);

    auto tr = transfer_algebra(A, c, 3, Exponent(2));
    CHECK(tr.algebra.check_ainfinity(4).empty());
    REQUIRE(tr.algebra.op(2, 0, {0, 0}) != nullptr);
    CHECK(*tr.algebra.op(2, 0, {0, 0}) == ScalarElement{{0, sc(1)}});
}

TEST_CASE("strong-contraction checker isolates failures") {
    auto A = heisenberg(Exponent(1));
    auto c = make_strong_contraction(complex_of(A));
    CHECK(check_strong_contraction(c).empty());

    auto broken = c;
    broken.h[3][4] = 2;
    CHECK(check_strong_contraction(broken) ==
          std::vector<std::string>{"homotopy identity"});

    // perturb the homotopy by a cycle-valued term: the chain-homotopy identity
    // survives but strongness does not
    size_t nh = c.target.basis.size();
    QMat C = qmat_zero(nh, nh);
    C[0][1] = 1;
    auto weak = c;
    QMat eta = mat_mul(c.i, mat_mul(C, c.p));
    for (size_t r = 0; r < eta.size(); ++r)
        for (size_t s = 0; s < eta[r].size(); ++s) weak.h[r][s] += eta[r][s];
    CHECK(check_strong_contraction(weak) ==
          std::vector<std::string>{"h∘i", "p∘h"});
}

TEST_CASE("transfer computes the cohomology ring and its Massey products") {
    auto A = heisenberg(Exponent(1));
    auto c = make_strong_contraction(complex_of(A));
    REQUIRE(c.target.basis.names ==
            std::vector<std::string>{"one", "x", "y", "xz", "yz", "xyz"});
    auto tr = transfer_algebra(A, c, 4, Exponent(1));
    const auto& H = tr.algebra;
    REQUIRE(H.basis().unit.has_value());
    CHECK(*H.basis().unit == 0);
    CHECK(H.check_ainfinity(4).empty());
    CHECK(H.check_unit().empty());

    auto op = [&](unsigned k, std::vector<size_t> t) { return H.op(k, 0, t); };
    CHECK(op(1, {1}) == nullptr);
    CHECK(op(2, {1, 2}) == nullptr); // [x][y] dies with dz = xy
    REQUIRE(op(2, {1, 4}) != nullptr);
    CHECK(*op(2, {1, 4}) == ScalarElement{{5, sc(-1)}});
    CHECK(*op(2, {2, 3}) == ScalarElement{{5, sc(1)}});
    CHECK(*op(2, {3, 2}) == ScalarElement{{5, sc(-1)}});

    // triple products reach the generators killed at arity two
    CHECK(*op(3, {1, 1, 2}) == ScalarElement{{3, sc(-1)}});
    CHECK(*op(3, {1, 2, 1}) == ScalarElement{{3, sc(2)}});
    CHECK(*op(3, {2, 1, 1}) == ScalarElement{{3, sc(-1)}});
    CHECK(*op(3, {2, 2, 1}) == ScalarElement{{4, sc(1)}});
    CHECK(*op(3, {2, 1, 2}) == ScalarElement{{4, sc(-2)}});
    CHECK(*op(3, {1, 2, 2}) == ScalarElement{{4, sc(1)}});

    CHECK(tr.inclusion.at(2).at(0).at({1, 2}) == ScalarElement{{3, sc(1)}});
    CHECK(tr.inclusion.at(2).at(0).at({2, 1}) == ScalarElement{{3, sc(-1)}});
    CHECK(tr.inclusion.at(2).at(0).count({1, 1}) == 0);

    auto f = tr.inclusion_morphism(A);
    CHECK(f.check(4).empty());
}

TEST_CASE("identity contraction leaves the operations unchanged") {
    auto A0 = exterior2(Exponent(2));
    std::map<size_t, Element> phi{{3, basis_elem(A0, 3)}};
    auto B = transport(A0, HALF, phi);
    REQUIRE(B.check_ainfinity(3).empty());

    Complex C = complex_of(B);
    Contraction id{C, C, qmat_identity(4), qmat_identity(4), qmat_zero(4, 4)};
    CHECK(check_strong_contraction(id).empty());
    auto tr = transfer_algebra(B, id, 3, Exponent(2));
    CHECK(tr.algebra.ops() == B.ops());
    CHECK(tr.inclusion.size() == 1);
    CHECK(tr.inclusion.count(1) == 1);
}

TEST_CASE("transfer validates its inputs") {
    auto A = heisenberg(Exponent(1));
    auto c = make_strong_contraction(complex_of(A));

    auto wrong = c;
    wrong.source.d[4][3] = 0;
    CHECK_THROWS_AS(transfer_algebra(A, wrong, 2, Exponent(1)), InvariantError);

    auto L = A;
    L.set_op(1, 0, {1}, ScalarElement{{4, EquivariantScalar::lambda(1, 1)}});
    CHECK_THROWS_AS(transfer_algebra(L, c, 2, Exponent(1)), InvariantError);
}

TEST_CASE("pushforward through the transfer preserves potentials") {
    auto A = heisenberg(Exponent(2));
    auto c = make_strong_contraction(complex_of(A));
    auto tr = transfer_algebra(A, c, 4, Exponent(2));
    auto f = tr.inclusion_morphism(A);
    CHECK(f.check(3).empty());

    CHECK(elem_is_zero(f.pushforward_mc({})));

    NovikovSeries t12 = NovikovSeries::t_power(HALF, Exponent(2), 1);
    Element b{{1, t12}, {2, t12 * Rational(2)}};
    Element P = f.pushforward_mc(b);
    CHECK(P == b); // the corrections through z cancel pairwise
    auto WH = tr.algebra.is_weak_mc(b);
    auto WA = A.is_weak_mc(P);
    REQUIRE(WH.has_value());
    REQUIRE(WA.has_value());
    CHECK(*WH == *WA);
    CHECK(WH->is_zero());
}

TEST_CASE("curved transfer and a nonvanishing potential") {
    auto A = curved_heisenberg(Exponent(2));
    REQUIRE(A.check_ainfinity(3).empty());
    auto c = make_strong_contraction(complex_of(A));
    auto tr = transfer_algebra(A, c, 4, Exponent(2));
    const auto& H = tr.algebra;
    CHECK(H.check_ainfinity(3).empty());

    // only the unit component of the curvature survives
    REQUIRE(H.op(0, 1, {}) != nullptr);
    CHECK(*H.op(0, 1, {}) == ScalarElement{{0, sc(1)}});
    CHECK(tr.inclusion.at(0).at(1).at({}) == ScalarElement{{3, sc(-1)}});

    auto f = tr.inclusion_morphism(A);
    CHECK(f.check(3).empty());

    NovikovSeries t12 = NovikovSeries::t_power(HALF, Exponent(2), 1);
    NovikovSeries t1 = NovikovSeries::t_power(1, Exponent(2), 1);
    Element b{{1, t12}};
    Element P = f.pushforward_mc(b);
    CHECK(P == Element{{1, t12}, {3, t1 * Rational(-1)}});

    auto WH = H.is_weak_mc(b);
    auto WA = A.is_weak_mc(P);
    REQUIRE(WH.has_value());
    REQUIRE(WA.has_value());
    CHECK(*WH == *WA);
    CHECK(*WH == t1);

    // a lower energy bound drops the curved entries entirely
    auto low = transfer_algebra(A, c, 4, HALF);
    CHECK(low.algebra.op(0, 1, {}) == nullptr);
}

TEST_CASE("tree-sum oracle matches the inductive transfer") {
    GradedBasis B{{"e", "th1", "th2", "th12", "u", "v"}, {0, 1, 1, 2, 0, 1}, 0};
    QMat d = qmat_zero(6, 6);
    d[5][4] = 1;
    std::map<std::pair<size_t, size_t>, ScalarElement> prod;
    auto P = [&](size_t a, size_t b, size_t out, int s) {
        prod[{a, b}] = ScalarElement{{out, sc(Rational(s))}};
    };
    for (size_t j = 0; j < 6; ++j) {
        P(0, j, j, 1);
        if (j) P(j, 0, j, 1);
    }
    P(1, 2, 3, 1);
    P(2, 1, 3, -1);
    auto A0 = AInfinityAlgebra::from_dga(B, d, prod, Exponent(2), 1);
    std::map<size_t, Element> phi{{5, basis_elem(A0, 1)}, {3, basis_elem(A0, 3)}};
    auto A = transport(A0, HALF, phi);
    REQUIRE(A.check_ainfinity(3).empty());

    auto c = make_strong_contraction(complex_of(A));
    CHECK(check_strong_contraction(c).empty());
    REQUIRE(c.target.basis.names ==
            std::vector<std::string>{"e", "th1", "th2", "th12"});
    CHECK(c.h[4][5] == 1);

    auto tr = transfer_algebra(A, c, 3, Exponent(2));
    CHECK(tr.algebra.check_ainfinity(3).empty());
    CHECK(tr.algebra.check_unit().empty());
    REQUIRE(tr.algebra.op(2, HALF, {1, 2}) != nullptr);
    CHECK(*tr.algebra.op(2, HALF, {1, 2}) == ScalarElement{{3, sc(1)}});

    std::set<Exponent> energies{0, HALF, Rational(1), Rational(3) / 2};
    compare_with_oracle(A, c, tr, 3, energies);

    auto Ah = curved_heisenberg(Exponent(2));
    auto ch = make_strong_contraction(complex_of(Ah));
    auto trh = transfer_algebra(Ah, ch, 3, Exponent(2));
    compare_with_oracle(Ah, ch, trh, 3, {0, Rational(1)});
}
