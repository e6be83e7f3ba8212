#include "floerpot/toric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

#include "floerpot/error.hpp"

namespace floerpot {

namespace {

QVec to_q(const ZVec& v) {
    QVec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = Rational(v[i]);
    return out;
}

QMat to_q(const ZMat& m) {
    QMat out;
    out.reserve(m.size());
    for (const ZVec& row : m) out.push_back(to_q(row));
    return out;
}

ZVec integral(const QVec& v, const char* what) {
    ZVec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (denominator(v[i]) != 1)
            throw InvariantError(fmt::format("{} is not integral", what));
        out[i] = numerator(v[i]);
    }
    return out;
}

ZExp zexp_of(const ZVec& v) {
    ZExp out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        out[i] = static_cast<long>(v[i].convert_to<long long>());
    return out;
}

std::string index_list(const std::vector<size_t>& s) {
    std::string out;
    for (size_t i : s) out += (out.empty() ? "" : ",") + std::to_string(i);
    return "{" + out + "}";
}

std::string zvec_str(const ZVec& v) {
    std::string out;
    for (const Integer& x : v) out += (out.empty() ? "" : ",") + x.str();
    return "(" + out + ")";
}

// "q_1^2*q_2^-4" from kernel-basis coordinates; empty for the zero vector.
std::string q_monomial(const ZVec& coords, const char* prefix) {
    std::string out;
    for (size_t j = 0; j < coords.size(); ++j) {
        if (coords[j] == 0) continue;
        if (!out.empty()) out += "*";
        out += fmt::format("{}_{}", prefix, j + 1);
        if (coords[j] != 1) out += fmt::format("^{}", coords[j].str());
    }
    return out;
}

std::string tpow_str(const Exponent& e) {
    if (denominator(e) == 1) return fmt::format("T^{}", rat_str(e));
    return fmt::format("T^{{{}}}", rat_str(e));
}

void require_mori_basis(const CurveClassLattice& cl) {
    if (cl.mori.size() != cl.rank())
        throw InvariantError(
            "the extremal effective classes do not form a lattice basis");
    if (cl.rank() == 0) return;
    Rational dm = det(to_q(cl.mori));
    if (dm != 1 && dm != -1)
        throw InvariantError(
            "the extremal effective classes do not form a lattice basis");
}

void require_semifano(const CurveClassLattice& cl) {
    ZVec w;
    if (!check_semifano(cl, &w))
        throw InvariantError(fmt::format(
            "not semi-Fano: the extremal class {} has negative first Chern number",
            zvec_str(w)));
}

std::vector<Exponent> generator_energies(const CurveClassLattice& cl,
                                         const std::vector<Exponent>& areas) {
    std::vector<Exponent> out;
    for (const ZVec& g : cl.mori) {
        Exponent e = cl.energy(g, areas);
        if (e <= 0)
            throw InvariantError(fmt::format(
                "the effective class {} has nonpositive energy", zvec_str(g)));
        out.push_back(e);
    }
    return out;
}

std::vector<std::string> mori_var_names(const CurveClassLattice& cl) {
    std::vector<std::string> vars;
    for (const ZVec& g : cl.mori) vars.push_back(q_monomial(g, "q"));
    return vars;
}

} // namespace

void ToricData::validate() const {
    if (rays.empty()) throw InvariantError("a fan needs at least one ray");
    const size_t d = rays[0].size();
    if (d == 0) throw InvariantError("rays must have positive dimension");
    for (const ZVec& v : rays) {
        if (v.size() != d) throw InvariantError("rays of mixed dimension");
        if (gcd_all(v) != 1)
            throw InvariantError(fmt::format("non-primitive ray {}", zvec_str(v)));
    }
    if (areas.size() != nrays())
        throw InvariantError("one area parameter per ray required");
    for (const Exponent& a : areas)
        if (a <= 0) throw InvariantError("area parameters must be positive");
    if (names.size() != nrays())
        throw InvariantError("one divisor name per ray required");
    for (const auto& cone : max_cones) {
        if (cone.size() != d)
            throw InvariantError(
                fmt::format("cone {} is not top-dimensional", index_list(cone)));
        std::set<size_t> seen;
        QMat M;
        for (size_t i : cone) {
            if (i < 1 || i > nrays() || !seen.insert(i).second)
                throw InvariantError(
                    fmt::format("cone {} has invalid ray indices", index_list(cone)));
            M.push_back(to_q(rays[i - 1]));
        }
        Rational dm = det(M);
        if (dm != 1 && dm != -1)
            throw InvariantError(
                fmt::format("cone {} is not unimodular", index_list(cone)));
    }
}

bool ToricData::is_orthant() const {
    if (nrays() != dim()) return false;
    for (size_t i = 0; i < nrays(); ++i)
        for (size_t p = 0; p < dim(); ++p)
            if (rays[i][p] != (i == p ? 1 : 0)) return false;
    return true;
}

bool ToricData::cone_spanned(const std::vector<size_t>& s) const {
    for (const auto& cone : max_cones) {
        bool inside = true;
        for (size_t i : s)
            inside = inside && std::find(cone.begin(), cone.end(), i) != cone.end();
        if (inside) return true;
    }
    return false;
}

std::string ToricData::ray_name(size_t i) const {
    if (i < 1 || i > nrays()) throw InvariantError("ray index out of range");
    return names[i - 1];
}

void SubtorusAction::validate(size_t n) const {
    if (level.size() != generators.size())
        throw InvariantError("one moment level per subtorus generator required");
    for (const ZVec& g : generators)
        if (g.size() != n)
            throw InvariantError("subtorus generators of the wrong dimension");
    if (generators.empty()) return;
    if (floerpot::rank(to_q(generators)) != generators.size())
        throw InvariantError("subtorus generators are not linearly independent");
    for (const Integer& div : smith_normal_form(generators))
        if (div != 1 && div != -1 && div != 0)
            throw InvariantError("the subtorus lattice is not saturated");
}

ZVec CurveClassLattice::pairing(const ZVec& c) const {
    if (c.size() != rank()) throw InvariantError("class of the wrong rank");
    ZVec out(nrays(), 0);
    for (size_t p = 0; p < nrays(); ++p)
        for (size_t j = 0; j < rank(); ++j) out[p] += inclusion[p][j] * c[j];
    return out;
}

Integer CurveClassLattice::c1(const ZVec& c) const {
    Integer out = 0;
    for (const Integer& x : pairing(c)) out += x;
    return out;
}

Exponent CurveClassLattice::energy(const ZVec& c,
                                   const std::vector<Exponent>& areas) const {
    if (areas.size() != nrays())
        throw InvariantError("one area parameter per ray required");
    ZVec pv = pairing(c);
    Exponent out = 0;
    for (size_t p = 0; p < nrays(); ++p) out += areas[p] * Rational(pv[p]);
    return out;
}

ZVec CurveClassLattice::mori_coordinates(const ZVec& c) const {
    require_mori_basis(*this);
    if (c.size() != rank()) throw InvariantError("class of the wrong rank");
    QMat A(rank(), QVec(mori.size(), Rational(0)));
    for (size_t t = 0; t < rank(); ++t)
        for (size_t a = 0; a < mori.size(); ++a) A[t][a] = Rational(mori[a][t]);
    auto sol = solve(A, to_q(c));
    if (!sol)
        throw InvariantError("the class is not a combination of extremal classes");
    return integral(*sol, "the extremal-class coordinate vector");
}

ZVec CurveClassLattice::class_of_mori(const ZVec& m) const {
    if (m.size() != mori.size())
        throw InvariantError("one coordinate per extremal class required");
    ZVec out(rank(), 0);
    for (size_t a = 0; a < mori.size(); ++a)
        for (size_t t = 0; t < rank(); ++t) out[t] += m[a] * mori[a][t];
    return out;
}

void CurveClassLattice::validate() const {
    const size_t n = nrays(), r = rank();
    if (projection.empty() || projection[0].size() != n)
        throw InvariantError("projection of the wrong shape");
    const size_t d = projection.size();
    if (d + r != n) throw InvariantError("ranks do not add up");
    for (size_t p = 0; p < d; ++p)
        for (size_t j = 0; j < r; ++j) {
            Integer acc = 0;
            for (size_t q = 0; q < n; ++q) acc += projection[p][q] * inclusion[q][j];
            if (acc != 0)
                throw InvariantError("kernel classes are not killed by the rays");
        }
    if (r > 0 && floerpot::rank(to_q(inclusion)) != r)
        throw InvariantError("kernel basis is not independent");
    if (floerpot::rank(to_q(projection)) != d)
        throw InvariantError("the rays do not span");
}

CurveClassLattice curve_class_lattice(const ToricData& td) {
    td.validate();
    const size_t n = td.nrays(), d = td.dim();

    CurveClassLattice cl;
    cl.projection = ZMat(d, ZVec(n, 0));
    for (size_t p = 0; p < d; ++p)
        for (size_t i = 0; i < n; ++i) cl.projection[p][i] = td.rays[i][p];
    if (floerpot::rank(to_q(cl.projection)) != d)
        throw InvariantError("the rays do not span the ambient lattice");

    std::vector<ZVec> kernel;
    smith_normal_form(cl.projection, &kernel);
    const size_t r = kernel.size();

    bool std_prefix = n >= d;
    for (size_t i = 0; std_prefix && i < d; ++i)
        for (size_t p = 0; p < d; ++p)
            std_prefix = std_prefix && td.rays[i][p] == (i == p ? 1 : 0);

    std::vector<ZVec> basis = kernel;
    if (r == 0) {
        cl.psi_normalized = std_prefix;
    } else if (std_prefix) {
        // Rebase so class j reads off the extra ray d+j alone.
        QMat E(r, QVec(r, Rational(0)));
        for (size_t s = 0; s < r; ++s)
            for (size_t j = 0; j < r; ++j) E[s][j] = Rational(kernel[j][d + s]);
        Rational dm = det(E);
        if (dm == 1 || dm == -1) {
            QMat X = inverse(E);
            for (size_t j = 0; j < r; ++j) {
                QVec col(n, Rational(0));
                for (size_t s = 0; s < r; ++s)
                    for (size_t p = 0; p < n; ++p)
                        col[p] += X[s][j] * Rational(kernel[s][p]);
                basis[j] = integral(col, "the normalized kernel basis");
            }
            cl.psi_normalized = true;
        }
    }
    cl.inclusion = ZMat(n, ZVec(r, 0));
    for (size_t p = 0; p < n; ++p)
        for (size_t j = 0; j < r; ++j) cl.inclusion[p][j] = basis[j][p];

    // Wall relations: one primitive class per pair of adjacent top cones.
    std::set<ZVec> walls;
    for (size_t a = 0; a < td.max_cones.size(); ++a) {
        for (size_t b = a + 1; b < td.max_cones.size(); ++b) {
            std::vector<size_t> ca = td.max_cones[a], cb = td.max_cones[b];
            std::sort(ca.begin(), ca.end());
            std::sort(cb.begin(), cb.end());
            std::vector<size_t> shared, all;
            std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                                  std::back_inserter(shared));
            std::set_union(ca.begin(), ca.end(), cb.begin(), cb.end(),
                           std::back_inserter(all));
            if (shared.size() != d - 1 || all.size() != d + 1) continue;
            QMat M(d, QVec(all.size(), Rational(0)));
            for (size_t p = 0; p < d; ++p)
                for (size_t t = 0; t < all.size(); ++t)
                    M[p][t] = Rational(td.rays[all[t] - 1][p]);
            auto kb = kernel_basis(M);
            if (kb.size() != 1)
                throw InvariantError(fmt::format(
                    "degenerate wall between cones {} and {}",
                    index_list(td.max_cones[a]), index_list(td.max_cones[b])));
            ZVec rel = primitive_vector(kb[0]);
            std::vector<size_t> off;
            for (size_t t = 0; t < all.size(); ++t)
                if (std::find(shared.begin(), shared.end(), all[t]) == shared.end())
                    off.push_back(t);
            for (size_t t : off)
                if (rel[t] == 0)
                    throw InvariantError("wall relation misses an off-wall ray");
            if (rel[off[0]] < 0)
                for (Integer& x : rel) x = -x;
            if (rel[off[1]] < 0)
                throw InvariantError("wall relation with opposite off-wall signs");
            ZVec cvec(n, 0);
            for (size_t t = 0; t < all.size(); ++t) cvec[all[t] - 1] = rel[t];
            QMat inc = to_q(cl.inclusion);
            auto coords = solve(inc, to_q(cvec));
            if (!coords)
                throw InvariantError("wall relation outside the kernel lattice");
            walls.insert(integral(*coords, "the wall class"));
        }
    }

    // Keep only extremal classes: drop anything that is a nonnegative
    // combination of the rest.
    std::vector<ZVec> gens(walls.begin(), walls.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < gens.size() && !changed; ++i) {
            if (gens.size() <= 1) break;
            std::vector<ZVec> others;
            for (size_t j = 0; j < gens.size(); ++j)
                if (j != i) others.push_back(gens[j]);
            std::vector<LinearConstraint> cs;
            for (size_t t = 0; t < r; ++t) {
                QVec a(others.size());
                for (size_t j = 0; j < others.size(); ++j) a[j] = Rational(others[j][t]);
                cs.push_back({a, Rational(gens[i][t]), LinearConstraint::EQ});
            }
            for (size_t j = 0; j < others.size(); ++j) {
                QVec a(others.size(), Rational(0));
                a[j] = -1;
                cs.push_back({a, Rational(0), LinearConstraint::LE});
            }
            if (feasible(cs, others.size())) {
                gens.erase(gens.begin() + static_cast<long>(i));
                changed = true;
            }
        }
    }
    cl.mori = gens;
    return cl;
}

LaurentPotential basic_disc_potential(const ToricData& td, Exponent trunc,
                                      unsigned cap) {
    td.validate();
    if (trunc == 0) {
        trunc = 1;
        for (const Exponent& a : td.areas) trunc += a;
    }
    LaurentPotential W(td.dim(), trunc, cap);
    for (size_t i = 0; i < td.nrays(); ++i)
        W.add_term(zexp_of(td.rays[i]),
                   NovikovSeries::t_power(td.areas[i], trunc, cap));
    return W;
}

LaurentPotential equivariant_potential(const ToricData& td, const SubtorusAction& sub,
                                       Exponent trunc, unsigned cap) {
    td.validate();
    sub.validate(td.dim());
    if (sub.rank() > 0 && cap < 2)
        throw InvariantError("equivariant potentials need lambda cap >= 2");
    LaurentPotential W = basic_disc_potential(td, trunc, cap);
    for (size_t r = 0; r < sub.rank(); ++r)
        W.add_log(static_cast<unsigned>(r + 1), zexp_of(sub.generators[r]));
    return W;
}

bool check_fano(const CurveClassLattice& cl, ZVec* witness) {
    for (const ZVec& g : cl.mori)
        if (cl.c1(g) <= 0) {
            if (witness) *witness = g;
            return false;
        }
    return true;
}

bool check_semifano(const CurveClassLattice& cl, ZVec* witness) {
    for (const ZVec& g : cl.mori)
        if (cl.c1(g) < 0) {
            if (witness) *witness = g;
            return false;
        }
    return true;
}

namespace {

std::vector<LinearConstraint> polytope_constraints(const ToricData& td) {
    std::vector<LinearConstraint> cs;
    for (size_t i = 0; i < td.nrays(); ++i) {
        QVec a = to_q(td.rays[i]);
        for (Rational& x : a) x = -x;
        cs.push_back({a, td.areas[i], LinearConstraint::LE});
    }
    return cs;
}

std::vector<LinearConstraint> slice_constraints(const SubtorusAction& sub) {
    std::vector<LinearConstraint> cs;
    for (size_t r = 0; r < sub.rank(); ++r)
        cs.push_back({to_q(sub.generators[r]), sub.level[r], LinearConstraint::EQ});
    return cs;
}

bool point_in_polytope(const ToricData& td, const QVec& x) {
    for (size_t i = 0; i < td.nrays(); ++i) {
        Rational v = td.areas[i];
        for (size_t p = 0; p < td.dim(); ++p) v += Rational(td.rays[i][p]) * x[p];
        if (v < 0) return false;
    }
    return true;
}

} // namespace

MissedReport missed_divisors(const ToricData& td, const SubtorusAction& sub) {
    td.validate();
    sub.validate(td.dim());
    const size_t d = td.dim();
    std::vector<LinearConstraint> base = polytope_constraints(td);
    for (const LinearConstraint& c : slice_constraints(sub)) base.push_back(c);
    if (!feasible(base, d))
        throw InvariantError("the moment level misses the polytope");

    for (const auto& cone : td.max_cones) {
        QMat M;
        QVec rhs;
        for (size_t j : cone) {
            M.push_back(to_q(td.rays[j - 1]));
            rhs.push_back(-td.areas[j - 1]);
        }
        auto x = solve(M, rhs);
        if (!x || !point_in_polytope(td, *x)) continue;
        bool on_slice = sub.rank() > 0;
        for (size_t r = 0; r < sub.rank(); ++r) {
            Rational acc = 0;
            for (size_t p = 0; p < d; ++p) acc += Rational(sub.generators[r][p]) * (*x)[p];
            on_slice = on_slice && acc == sub.level[r];
        }
        if (on_slice)
            throw InvariantError(fmt::format(
                "the moment level passes through the vertex of cone {}",
                index_list(cone)));
    }

    MissedReport rep;
    for (size_t i = 1; i <= td.nrays(); ++i) {
        std::vector<LinearConstraint> cs = base;
        cs.push_back({to_q(td.rays[i - 1]), -td.areas[i - 1], LinearConstraint::EQ});
        (feasible(cs, d) ? rep.hit : rep.missed).push_back(i);
    }
    return rep;
}

int maslov_index_correspondence(const ToricData& td, const SubtorusAction& sub,
                                const std::vector<size_t>& stratum, size_t i) {
    td.validate();
    sub.validate(td.dim());
    const size_t d = td.dim();
    if (i < 1 || i > td.nrays()) throw InvariantError("divisor index out of range");
    std::vector<size_t> S = stratum;
    std::sort(S.begin(), S.end());
    if (std::adjacent_find(S.begin(), S.end()) != S.end())
        throw InvariantError("stratum with repeated divisors");
    for (size_t j : S)
        if (j < 1 || j > td.nrays())
            throw InvariantError("stratum index out of range");
    if (std::find(S.begin(), S.end(), i) != S.end())
        throw InvariantError(
            fmt::format("divisor {} already lies in the stratum", i));
    S.push_back(i);
    std::sort(S.begin(), S.end());
    if (!td.cone_spanned(S))
        throw InvariantError(fmt::format(
            "not a correspondence class: the rays {} span no cone", index_list(S)));

    if (sub.rank() == 0)
        throw InvariantError(
            "not a correspondence class: the subtorus direction meets the "
            "stratum normal trivially");
    QMat A(d, QVec(sub.rank(), Rational(0)));
    for (size_t p = 0; p < d; ++p)
        for (size_t r = 0; r < sub.rank(); ++r) A[p][r] = Rational(sub.generators[r][p]);
    QMat B(d, QVec(S.size(), Rational(0)));
    for (size_t p = 0; p < d; ++p)
        for (size_t t = 0; t < S.size(); ++t) B[p][t] = Rational(td.rays[S[t] - 1][p]);

    auto inter = span_intersection(A, B);
    if (inter.empty())
        throw InvariantError(
            "not a correspondence class: the subtorus direction meets the "
            "stratum normal trivially");
    if (inter.size() > 1) {
        std::string cand;
        for (const QVec& v : inter)
            cand += (cand.empty() ? "" : ", ") + zvec_str(primitive_vector(v));
        throw InvariantError(fmt::format(
            "ambiguous correspondence class: the intersection has rank {} "
            "with candidate directions {}",
            inter.size(), cand));
    }

    ZVec v = primitive_vector(inter[0]);
    auto sol = solve(B, to_q(v));
    if (!sol) throw InvariantError("direction vector escapes the stratum span");
    ZVec coeffs = integral(*sol, "the disc class");
    size_t pos = static_cast<size_t>(
        std::find(S.begin(), S.end(), i) - S.begin());
    if (coeffs[pos] == 0)
        throw InvariantError(fmt::format(
            "not a correspondence class: no D_{} component in the direction {}",
            i, zvec_str(v)));
    if (coeffs[pos] < 0)
        for (Integer& x : coeffs) x = -x;
    Integer total = 0;
    for (const Integer& x : coeffs) total += x;
    return static_cast<int>(2 * total.convert_to<long long>());
}

MultiSeries g_series(const CurveClassLattice& cl, size_t l, unsigned N,
                     Exponent trunc, unsigned cap) {
    if (l < 1 || l > cl.nrays()) throw InvariantError("ray index out of range");
    require_semifano(cl);
    require_mori_basis(cl);
    const size_t r = cl.mori.size();
    MultiSeries g(mori_var_names(cl), N + 1, trunc, cap);

    std::vector<unsigned> m(r, 0);
    std::function<void(size_t, unsigned)> walk = [&](size_t pos, unsigned left) {
        if (pos == r) {
            ZVec mz(r);
            bool zero = true;
            for (size_t a = 0; a < r; ++a) {
                mz[a] = m[a];
                zero = zero && m[a] == 0;
            }
            if (zero) return;
            ZVec pv = cl.pairing(cl.class_of_mori(mz));
            Integer chern = 0;
            for (const Integer& x : pv) chern += x;
            if (chern != 0 || pv[l - 1] >= 0) return;
            for (size_t p = 0; p < pv.size(); ++p)
                if (p != l - 1 && pv[p] < 0) return;
            Integer neg = -pv[l - 1];
            Rational coef = factorial((neg - 1).convert_to<unsigned>());
            for (size_t p = 0; p < pv.size(); ++p)
                if (p != l - 1) coef /= factorial(pv[p].convert_to<unsigned>());
            if (neg % 2 != 0) coef = -coef;
            g.add_term(m, NovikovSeries::constant(coef, trunc, cap));
            return;
        }
        for (unsigned v = 0; v <= left; ++v) {
            m[pos] = v;
            walk(pos + 1, left - v);
        }
        m[pos] = 0;
    };
    walk(0, N);
    return g;
}

namespace {

std::string factor_str(const CurveClassLattice& cl, const MultiSeries& s,
                       const char* prefix) {
    std::string out;
    for (const auto& [k, c] : s.terms()) {
        if (c.is_zero()) continue;
        Rational coef = c.coeff(0).rational_part();
        ZVec kz(k.size());
        for (size_t a = 0; a < k.size(); ++a) kz[a] = k[a];
        std::string mono = q_monomial(cl.class_of_mori(kz), prefix);
        bool neg = coef < 0;
        Rational ac = neg ? -coef : coef;
        std::string piece = mono.empty()
                                ? rat_str(ac)
                                : (ac == 1 ? mono : rat_str(ac) + "*" + mono);
        if (out.empty())
            out = (neg ? "-" : "") + piece;
        else
            out += (neg ? " - " : " + ") + piece;
    }
    return out.empty() ? "0" : out;
}

} // namespace

std::string MirrorMap::str() const {
    std::string out;
    for (size_t j = 0; j < forward_factor.size(); ++j)
        out += fmt::format("q_{}(qc) = qc_{} * ({})\n", j + 1, j + 1,
                           factor_str(cl, forward_factor[j], "qc"));
    for (size_t j = 0; j < inverse_factor.size(); ++j)
        out += fmt::format("qc_{}(q) = q_{} * ({}){}", j + 1, j + 1,
                           factor_str(cl, inverse_factor[j], "q"),
                           j + 1 < inverse_factor.size() ? "\n" : "");
    return out;
}

MirrorMap mirror_map(const CurveClassLattice& cl, const ToricData& td, unsigned N,
                     Exponent trunc, unsigned cap) {
    td.validate();
    if (cl.nrays() != td.nrays())
        throw InvariantError("curve class lattice does not match the fan");
    if (!cl.psi_normalized)
        throw InvariantError("the kernel basis is not in normalized form");
    require_semifano(cl);
    require_mori_basis(cl);
    const size_t n = cl.nrays(), r = cl.rank();

    MirrorMap mm;
    mm.cl = cl;
    mm.areas = td.areas;
    std::vector<std::string> vars = mori_var_names(cl);

    std::vector<MultiSeries> E;
    for (size_t l = 1; l <= n; ++l) {
        mm.g.push_back(g_series(cl, l, N, trunc, cap));
        E.push_back(mm.g.back().exp());
    }
    for (size_t a = 0; a < r; ++a) {
        ZVec pv = cl.pairing(cl.mori[a]);
        MultiSeries f = MultiSeries::variable(a, vars, N + 1, trunc, cap);
        for (size_t l = 0; l < n; ++l)
            if (pv[l] != 0)
                f = f * E[l].pow(-static_cast<long>(pv[l].convert_to<long long>()));
        mm.u_forward.push_back(f);
    }
    mm.u_inverse = reversion_triangular(mm.u_forward);
    MultiSeries one = MultiSeries::constant(NovikovSeries::constant(1, trunc, cap),
                                            vars, N + 1);
    for (size_t j = 0; j < r; ++j) {
        MultiSeries fwd = one, inv = one;
        for (size_t l = 0; l < n; ++l) {
            long p = static_cast<long>(cl.inclusion[l][j].convert_to<long long>());
            if (p == 0) continue;
            fwd = fwd * E[l].pow(-p);
            inv = inv * E[l].pow(p);
        }
        mm.forward_factor.push_back(fwd);
        mm.inverse_factor.push_back(inv.substitute(mm.u_inverse));
    }
    return mm;
}

namespace {

// exp(g_l) written in the unchecked variables and instantiated at
// q^{mori_a} = T^{energy_a}, one series per ray.
std::vector<NovikovSeries> instantiated_factors(const CurveClassLattice& cl,
                                                const ToricData& td, unsigned N,
                                                const Exponent& trunc, unsigned cap,
                                                const std::vector<Exponent>& energies) {
    MirrorMap mm = mirror_map(cl, td, N, trunc, cap);
    std::vector<NovikovSeries> values;
    for (const Exponent& e : energies)
        values.push_back(NovikovSeries::t_power(e, trunc, cap));
    std::vector<NovikovSeries> out;
    for (size_t l = 0; l < cl.nrays(); ++l)
        out.push_back(
            mm.g[l].exp().substitute(mm.u_inverse).evaluate(values));
    return out;
}

void require_basis_cone(const CurveClassLattice& cl, const ToricData& td) {
    const size_t d = td.dim();
    if (!cl.psi_normalized)
        throw InvariantError("the kernel basis is not in normalized form");
    for (size_t i = 0; i < d; ++i)
        for (size_t p = 0; p < d; ++p)
            if (td.rays[i][p] != (i == p ? 1 : 0))
                throw InvariantError("the first rays do not form the basis cone");
    std::vector<size_t> basis_cone;
    for (size_t i = 1; i <= d; ++i) basis_cone.push_back(i);
    if (!td.cone_spanned(basis_cone))
        throw InvariantError("the basis cone is missing from the fan");
}

} // namespace

LaurentPotential semifano_potential(const CurveClassLattice& cl, const ToricData& td,
                                    unsigned N, Exponent trunc) {
    td.validate();
    if (cl.nrays() != td.nrays())
        throw InvariantError("curve class lattice does not match the fan");
    const size_t n = td.nrays(), d = td.dim(), r = cl.rank();
    if (d + r != n) throw InvariantError("ranks do not add up");
    require_basis_cone(cl, td);
    require_semifano(cl);
    require_mori_basis(cl);

    std::vector<Exponent> gen_energy = generator_energies(cl, td.areas);
    std::vector<Exponent> psi_energy;
    for (size_t j = 0; j < r; ++j) {
        ZVec ej(r, 0);
        ej[j] = 1;
        psi_energy.push_back(cl.energy(ej, td.areas));
    }
    if (trunc == 0) {
        Exponent base = 0, gmax = 0;
        for (const Exponent& e : psi_energy) base = std::max(base, e);
        for (const Exponent& e : gen_energy) gmax = std::max(gmax, e);
        trunc = base + Rational(N) * gmax + 1;
    }

    std::vector<NovikovSeries> coeffs(
        n, NovikovSeries::constant(1, trunc, 1));
    if (r > 0) coeffs = instantiated_factors(cl, td, N, trunc, 1, gen_energy);

    LaurentPotential W(d, trunc, 1);
    for (size_t l = 0; l < n; ++l) {
        NovikovSeries c = coeffs[l];
        if (l >= d) c = c * NovikovSeries::t_power(psi_energy[l - d], trunc, 1);
        W.add_term(zexp_of(td.rays[l]), c);
    }
    return W;
}

LaurentPotential correspondence_equivariant_potential(const ToricData& td_Y,
                                                      const CurveClassLattice& cl,
                                                      const ToricData& td_X, unsigned N,
                                                      Exponent trunc) {
    td_Y.validate();
    td_X.validate();
    if (!td_Y.is_orthant())
        throw InvariantError("the total space is not a coordinate orthant");
    const size_t n = td_Y.dim();
    if (td_X.nrays() != n || cl.nrays() != n)
        throw InvariantError("rays of the base must match the coordinates");
    if (!cl.psi_normalized)
        throw InvariantError("the kernel basis is not in normalized form");
    require_semifano(cl);
    require_mori_basis(cl);
    const size_t r = cl.rank();

    std::vector<Exponent> gen_energy = generator_energies(cl, td_X.areas);
    if (trunc == 0) {
        Exponent gmax = 0;
        for (const Exponent& e : gen_energy) gmax = std::max(gmax, e);
        trunc = Rational(N) * gmax + 1;
    }

    LaurentPotential W(n, trunc, 2);
    if (r == 0) return W;

    MirrorMap mm = mirror_map(cl, td_X, N, trunc, 2);
    std::vector<NovikovSeries> values;
    for (const Exponent& e : gen_energy)
        values.push_back(NovikovSeries::t_power(e, trunc, 2));
    MultiSeries one = MultiSeries::constant(
        NovikovSeries::constant(1, trunc, 2), mm.u_inverse[0].vars(), N + 1);
    NovikovSeries total(trunc, 2);
    for (size_t j = 0; j < r; ++j) {
        NovikovSeries h = (mm.inverse_factor[j] - one).log1p().evaluate(values);
        total += h * (EquivariantScalar::lambda(static_cast<unsigned>(j + 1), 2) *
                      Rational(-1));
    }
    if (!total.is_zero()) W.add_term(ZExp(n, 0), total);
    return W;
}

std::string TelemanReport::str() const {
    if (!ok)
        return fmt::format("mismatch at relative T-order {}: {}",
                           rat_str(mismatch_order ? *mismatch_order : Exponent(0)),
                           detail);
    std::string out = "OK, coordinate change:";
    for (size_t i = 0; i < shifts.size(); ++i) {
        std::string piece = fmt::format("zt{}", i + 1);
        if (shifts[i] != 0) piece = tpow_str(shifts[i]) + " * " + piece;
        if (!units[i].is_one()) piece += " * (" + units[i].str() + ")";
        out += fmt::format("{} z{} = {}", i == 0 ? "" : ",", i + 1, piece);
    }
    return out;
}

TelemanReport verify_teleman(const ToricData& td_Y, const SubtorusAction& sub,
                             const ToricData& td_X, unsigned N) {
    td_Y.validate();
    td_X.validate();
    if (!td_Y.is_orthant())
        throw InvariantError("the total space is not a coordinate orthant");
    const size_t n = td_Y.dim(), d = td_X.dim();
    if (td_X.nrays() != n)
        throw InvariantError("rays of the base must match the coordinates");
    sub.validate(n);

    CurveClassLattice cl = curve_class_lattice(td_X);
    const size_t r = cl.rank();
    if (sub.rank() != r)
        throw InvariantError("subtorus rank must match the kernel rank");
    require_basis_cone(cl, td_X);
    require_semifano(cl);
    require_mori_basis(cl);
    for (size_t j = 0; j < r; ++j)
        for (size_t p = 0; p < n; ++p)
            if (sub.generators[j][p] != cl.inclusion[p][j])
                throw InvariantError(
                    "subtorus generators do not match the curve class basis");

    std::vector<Exponent> gen_energy = generator_energies(cl, td_X.areas);
    Exponent gmax = 0, psimax = 0, amax = 0;
    for (const Exponent& e : gen_energy) gmax = std::max(gmax, e);
    for (size_t j = 0; j < r; ++j) {
        ZVec ej(r, 0);
        ej[j] = 1;
        psimax = std::max(psimax, cl.energy(ej, td_X.areas));
    }
    for (const Exponent& a : td_Y.areas) amax = std::max(amax, a);
    Exponent trunc = amax + psimax + Rational(N + 1) * gmax + 1;

    std::vector<NovikovSeries> values(r, NovikovSeries::constant(1, trunc, 2));
    if (r > 0) {
        MirrorMap mm = mirror_map(cl, td_X, N, trunc, 2);
        std::vector<NovikovSeries> uvals;
        for (const Exponent& e : gen_energy)
            uvals.push_back(NovikovSeries::t_power(e, trunc, 2));
        for (size_t j = 0; j < r; ++j)
            values[j] = mm.inverse_factor[j].evaluate(uvals);
    }

    LaurentPotential WY = equivariant_potential(td_Y, sub, trunc, 2);
    std::vector<Constraint> cons;
    std::vector<size_t> elim;
    for (size_t j = 0; j < r; ++j) {
        cons.push_back({zexp_of(sub.generators[j]), values[j]});
        elim.push_back(d + 1 + j);
    }
    LaurentPotential L = restrict_potential(WY, cons, elim);
    if (!L.log_part().empty())
        throw InvariantError("a logarithmic covector survived the restriction");
    NovikovSeries absorbed(trunc, 2);
    for (size_t j = 0; j < r; ++j)
        absorbed += log_unit(values[j]) *
                    EquivariantScalar::lambda(static_cast<unsigned>(j + 1), 2);
    if (L.coeff(ZExp(d, 0)) != absorbed)
        throw InvariantError("the lambda part fails to cancel the correspondence "
                             "potential");

    LaurentPotential R = semifano_potential(cl, td_X, N, trunc);

    TelemanReport rep;
    for (size_t i = 0; i < d; ++i) {
        ZExp ei(d, 0);
        ei[i] = 1;
        NovikovSeries Li = L.coeff(ei);
        NovikovSeries Ri = R.coeff(ei).with_cap(2);
        if (Li.is_zero() || !Li.lambda_free() || Ri.is_zero()) {
            rep.mismatch_order = Exponent(0);
            rep.detail = fmt::format("no usable linear term at z{}", i + 1);
            return rep;
        }
        Exponent a = Li.valuation();
        rep.shifts.push_back(a);
        rep.units.push_back(shift_energy(Li, -a) * Ri.inverse());
    }

    std::set<ZExp> keys;
    const ZExp zero(d, 0);
    for (const auto& [e, c] : L.terms())
        if (e != zero) keys.insert(e);
    for (const auto& [e, c] : R.terms()) keys.insert(e);
    for (size_t i = 0; i < d; ++i) {
        ZExp ei(d, 0);
        ei[i] = 1;
        keys.erase(ei);
    }

    std::optional<Exponent> worst;
    ZExp worst_key;
    for (const ZExp& w : keys) {
        NovikovSeries Lw = L.coeff(w);
        NovikovSeries Ew = R.coeff(w).with_cap(2);
        Exponent shift = 0;
        for (size_t i = 0; i < d; ++i) {
            shift += rep.shifts[i] * Rational(w[i]);
            if (w[i] != 0) Ew = Ew * rep.units[i].pow(w[i]);
        }
        Exponent rel;
        if (!Ew.is_zero() && Ew.valuation() + shift < 0) {
            rel = 0;
        } else {
            NovikovSeries expected = shift_energy(Ew, shift);
            NovikovSeries diff = Lw - expected;
            if (diff.is_zero()) continue;
            Exponent base = std::min(Lw.valuation(), expected.valuation());
            rel = diff.valuation() - base;
        }
        if (!worst || rel < *worst) {
            worst = rel;
            worst_key = w;
        }
    }

    if (worst) {
        rep.mismatch_order = worst;
        std::string ws;
        for (long x : worst_key) ws += (ws.empty() ? "" : ",") + std::to_string(x);
        rep.detail =
            fmt::format("potentials disagree at the z-exponent ({})", ws);
        rep.ok = false;
        return rep;
    }
    rep.ok = true;
    rep.detail = "lambda terms cancel against the correspondence potential";
    return rep;
}

CorrespondenceClasses correspondence_disc_classes(const ToricData& td_Y,
                                                  const SubtorusAction& sub,
                                                  const ToricData& td_X) {
    td_Y.validate();
    td_X.validate();
    sub.validate(td_Y.dim());
    CurveClassLattice cl = curve_class_lattice(td_X);
    const size_t n = td_Y.nrays(), d = td_Y.dim(), r = cl.rank(), k = sub.rank();

    MissedReport mr = missed_divisors(td_Y, sub);
    if (!mr.missed.empty() && k + 1 > d)
        throw InvariantError("the subtorus leaves no stratum directions");
    CorrespondenceClasses cc;
    cc.missed = mr.missed;

    for (size_t i : mr.missed) {
        size_t adj = 0;
        for (size_t j : mr.hit) {
            std::vector<size_t> pair = {std::min(i, j), std::max(i, j)};
            if (td_Y.cone_spanned(pair)) {
                adj = j;
                break;
            }
        }
        if (adj == 0)
            throw InvariantError(fmt::format(
                "no stratum adjacent to the missed divisor D_{}", i));
        DiscClass dc;
        dc.label = fmt::format("beta_{}^{}", i, td_Y.ray_name(adj));
        dc.basic = ZVec(n, 0);
        dc.basic[i - 1] = 1;
        dc.sphere = ZVec(r, 0);
        dc.maslov = maslov_index_correspondence(td_Y, sub, {adj}, i);

        // Vertices of (facet adj) ^ slice: complete the k + 1 equalities with
        // d - k - 1 further facets and keep the feasible solutions.
        std::vector<QVec> pts;
        std::vector<size_t> others;
        for (size_t t = 1; t <= td_Y.nrays(); ++t)
            if (t != adj) others.push_back(t);
        const size_t extra = d - k - 1;
        std::vector<size_t> combo;
        std::function<void(size_t)> pick = [&](size_t start) {
            if (combo.size() == extra) {
                QMat M;
                QVec rhs;
                for (size_t q = 0; q < k; ++q) {
                    M.push_back(to_q(sub.generators[q]));
                    rhs.push_back(sub.level[q]);
                }
                M.push_back(to_q(td_Y.rays[adj - 1]));
                rhs.push_back(-td_Y.areas[adj - 1]);
                for (size_t t : combo) {
                    M.push_back(to_q(td_Y.rays[t - 1]));
                    rhs.push_back(-td_Y.areas[t - 1]);
                }
                if (det(M) != 0) {
                    auto x = solve(M, rhs);
                    if (x && point_in_polytope(td_Y, *x)) pts.push_back(*x);
                }
                return;
            }
            for (size_t t = start; t < others.size(); ++t) {
                combo.push_back(others[t]);
                pick(t + 1);
                combo.pop_back();
            }
        };
        pick(0);
        if (pts.empty())
            throw InvariantError(fmt::format(
                "the stratum face at D_{} has no vertices", adj));
        std::optional<Exponent> emin;
        for (const QVec& x : pts) {
            Exponent e = td_Y.areas[i - 1];
            for (size_t p = 0; p < d; ++p) e += Rational(td_Y.rays[i - 1][p]) * x[p];
            if (!emin || e < *emin) emin = e;
        }
        dc.energy = *emin;
        cc.lifted.push_back(dc);
    }

    for (size_t j = 0; j < r; ++j) {
        ZVec ej(r, 0);
        ej[j] = 1;
        DiscClass dc;
        dc.label = fmt::format("sphere_{}", j + 1);
        dc.basic = ZVec(n, 0);
        dc.sphere = ej;
        dc.maslov = static_cast<int>((2 * cl.c1(ej)).convert_to<long long>());
        dc.energy = cl.energy(ej, td_X.areas);
        cc.spheres.push_back(dc);
    }

    ZMat rows;
    for (const DiscClass& dc : cc.lifted) {
        ZVec row = dc.basic;
        row.insert(row.end(), dc.sphere.begin(), dc.sphere.end());
        rows.push_back(row);
    }
    for (const DiscClass& dc : cc.spheres) {
        ZVec row = dc.basic;
        row.insert(row.end(), dc.sphere.begin(), dc.sphere.end());
        rows.push_back(row);
    }
    if (!rows.empty())
        for (const Integer& dv : smith_normal_form(rows))
            if (dv != 0) ++cc.rank;
    return cc;
}

} // namespace floerpot
