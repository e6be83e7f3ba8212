#include "floerpot/linalg.hpp"

#include <algorithm>

#include "floerpot/error.hpp"

namespace floerpot {

QMat qmat_zero(size_t rows, size_t cols) { return QMat(rows, QVec(cols, 0)); }

QMat qmat_identity(size_t n) {
    QMat M = qmat_zero(n, n);
    for (size_t i = 0; i < n; ++i) M[i][i] = 1;
    return M;
}

QVec mat_vec(const QMat& A, const QVec& x) {
    QVec y(A.size(), 0);
    for (size_t i = 0; i < A.size(); ++i)
        for (size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
    return y;
}

QMat mat_mul(const QMat& A, const QMat& B) {
    size_t n = A.size(), m = B.empty() ? 0 : B[0].size(), k = B.size();
    QMat C = qmat_zero(n, m);
    for (size_t i = 0; i < n; ++i)
        for (size_t l = 0; l < k; ++l) {
            if (A[i][l] == 0) continue;
            for (size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
        }
    return C;
}

size_t rref(QMat& M) {
    size_t rows = M.size(), cols = rows ? M[0].size() : 0, r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && M[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(M[p], M[r]);
        Rational inv = Rational(1) / M[r][c];
        for (size_t j = c; j < cols; ++j) M[r][j] *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || M[i][c] == 0) continue;
            Rational f = M[i][c];
            for (size_t j = c; j < cols; ++j) M[i][j] -= f * M[r][j];
        }
        ++r;
    }
    return r;
}

size_t rank(QMat M) { return rref(M); }

std::vector<QVec> kernel_basis(const QMat& A) {
    size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    QMat M = A;
    rref(M);
    std::vector<long> pivot_of_col(cols, -1);
    for (size_t r = 0; r < rows; ++r) {
        size_t c = 0;
        while (c < cols && M[r][c] == 0) ++c;
        if (c < cols) pivot_of_col[c] = static_cast<long>(r);
    }
    std::vector<QVec> basis;
    for (size_t c = 0; c < cols; ++c) {
        if (pivot_of_col[c] != -1) continue;
        QVec v(cols, 0);
        v[c] = 1;
        for (size_t j = 0; j < cols; ++j)
            if (pivot_of_col[j] != -1) v[j] = -M[static_cast<size_t>(pivot_of_col[j])][c];
        basis.push_back(std::move(v));
    }
    return basis;
}

std::optional<QVec> solve(const QMat& A, const QVec& b) {
    size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    QMat M = A;
    for (size_t i = 0; i < rows; ++i) M[i].push_back(b[i]);
    rref(M);
    QVec x(cols, 0);
    for (size_t i = 0; i < rows; ++i) {
        size_t c = 0;
        while (c < cols && M[i][c] == 0) ++c;
        if (c == cols) {
            if (M[i][cols] != 0) return std::nullopt;
            continue;
        }
        x[c] = M[i][cols];
    }
    return x;
}

QMat inverse(const QMat& A) {
    size_t n = A.size();
    QMat M = A;
    for (size_t i = 0; i < n; ++i) {
        QMat I = qmat_identity(n);
        M[i].insert(M[i].end(), I[i].begin(), I[i].end());
    }
    rref(M);
    for (size_t i = 0; i < n; ++i)
        if (M[i][i] != 1) throw InvariantError("matrix is singular");
    QMat out = qmat_zero(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) out[i][j] = M[i][n + j];
    return out;
}

Rational det(QMat A) {
    size_t n = A.size();
    Rational d = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        while (p < n && A[p][c] == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            std::swap(A[p], A[c]);
            d = -d;
        }
        d *= A[c][c];
        Rational inv = Rational(1) / A[c][c];
        for (size_t i = c + 1; i < n; ++i) {
            if (A[i][c] == 0) continue;
            Rational f = A[i][c] * inv;
            for (size_t j = c; j < n; ++j) A[i][j] -= f * A[c][j];
        }
    }
    return d;
}

std::vector<QVec> span_intersection(const QMat& A, const QMat& B) {
    size_t dim = A.size();
    if (dim != B.size()) throw InvariantError("span_intersection: ambient mismatch");
    size_t na = A.empty() ? 0 : A[0].size(), nb = B.empty() ? 0 : B[0].size();
    if (na == 0 || nb == 0) return {};
    // Solve A a - B b = 0; intersection vectors are A a.
    QMat M = qmat_zero(dim, na + nb);
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = 0; j < na; ++j) M[i][j] = A[i][j];
        for (size_t j = 0; j < nb; ++j) M[i][na + j] = -B[i][j];
    }
    std::vector<QVec> out;
    QMat span;
    for (const QVec& k : kernel_basis(M)) {
        QVec v(dim, 0);
        for (size_t i = 0; i < dim; ++i)
            for (size_t j = 0; j < na; ++j) v[i] += A[i][j] * k[j];
        span.push_back(v);
        if (rank(span) == span.size())
            out.push_back(std::move(v));
        else
            span.pop_back();
    }
    return out;
}

ZVec primitive_vector(const QVec& v) {
    Integer lcm_den = 1;
    for (const auto& x : v)
        lcm_den = boost::multiprecision::lcm(lcm_den, denominator(x));
    std::vector<Integer> ints;
    ints.reserve(v.size());
    for (const auto& x : v) ints.push_back(numerator(x) * (lcm_den / denominator(x)));
    Integer g = gcd_all(ints);
    if (g == 0) return ints;
    for (auto& x : ints) x /= g;
    return ints;
}

std::vector<Integer> smith_normal_form(ZMat A, std::vector<ZVec>* kernel) {
    size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    ZMat V(cols, ZVec(cols, 0));
    for (size_t i = 0; i < cols; ++i) V[i][i] = 1;
    auto col_op = [&](size_t a, size_t b, const Integer& f) {
        // col_a -= f * col_b
        for (size_t i = 0; i < rows; ++i) A[i][a] -= f * A[i][b];
        for (size_t i = 0; i < cols; ++i) V[i][a] -= f * V[i][b];
    };
    auto col_swap = [&](size_t a, size_t b) {
        for (size_t i = 0; i < rows; ++i) std::swap(A[i][a], A[i][b]);
        for (size_t i = 0; i < cols; ++i) std::swap(V[i][a], V[i][b]);
    };
    size_t t = 0;
    std::vector<Integer> diag;
    while (t < rows && t < cols) {
        // Find a nonzero entry in the remaining block.
        size_t pi = t, pj = t;
        bool found = false;
        Integer best = 0;
        for (size_t i = t; i < rows; ++i)
            for (size_t j = t; j < cols; ++j)
                if (A[i][j] != 0 &&
                    (!found || abs(A[i][j]) < best)) {
                    best = abs(A[i][j]);
                    pi = i;
                    pj = j;
                    found = true;
                }
        if (!found) break;
        std::swap(A[pi], A[t]);
        if (pj != t) col_swap(pj, t);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (size_t i = t + 1; i < rows; ++i) {
                if (A[i][t] == 0) continue;
                Integer q = A[i][t] / A[t][t];
                for (size_t j = t; j < cols; ++j) A[i][j] -= q * A[t][j];
                if (A[i][t] != 0) {
                    std::swap(A[i], A[t]);
                    clean = false;
                }
            }
            for (size_t j = t + 1; j < cols; ++j) {
                if (A[t][j] == 0) continue;
                Integer q = A[t][j] / A[t][t];
                col_op(j, t, q);
                if (A[t][j] != 0) {
                    col_swap(j, t);
                    clean = false;
                }
            }
        }
        diag.push_back(abs(A[t][t]));
        ++t;
    }
    // Enforce the divisibility chain d_1 | d_2 | ...
    for (size_t i = 0; i + 1 < diag.size(); ++i)
        for (size_t j = i + 1; j < diag.size(); ++j) {
            Integer g = boost::multiprecision::gcd(diag[i], diag[j]);
            Integer l = diag[i] / g * diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    if (kernel) {
        kernel->clear();
        for (size_t j = t; j < cols; ++j) {
            ZVec v(cols);
            for (size_t i = 0; i < cols; ++i) v[i] = V[i][j];
            kernel->push_back(std::move(v));
        }
    }
    return diag;
}

namespace {

struct Ineq {
    QVec a;
    Rational b;
    bool strict;
};

} // namespace

bool feasible(std::vector<LinearConstraint> cs, size_t nvars) {
    // Substitute equations away first.
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < cs.size(); ++i) {
            if (cs[i].kind != LinearConstraint::EQ) continue;
            size_t piv = nvars;
            for (size_t j = 0; j < nvars; ++j)
                if (cs[i].a[j] != 0) {
                    piv = j;
                    break;
                }
            if (piv == nvars) {
                if (cs[i].b != 0) return false;
                cs.erase(cs.begin() + static_cast<long>(i));
                progress = true;
                break;
            }
            LinearConstraint eq = cs[i];
            cs.erase(cs.begin() + static_cast<long>(i));
            Rational inv = Rational(1) / eq.a[piv];
            for (auto& c : cs) {
                if (c.a[piv] == 0) continue;
                Rational f = c.a[piv] * inv;
                for (size_t j = 0; j < nvars; ++j) c.a[j] -= f * eq.a[j];
                c.b -= f * eq.b;
            }
            progress = true;
            break;
        }
    }
    std::vector<Ineq> ineqs;
    for (auto& c : cs) {
        if (c.kind == LinearConstraint::EQ) {
            // Only reachable for an all-zero row handled above; keep as two
            // opposite inequalities for safety.
            ineqs.push_back({c.a, c.b, false});
            QVec neg = c.a;
            for (auto& x : neg) x = -x;
            ineqs.push_back({neg, -c.b, false});
        } else {
            ineqs.push_back({c.a, c.b, c.kind == LinearConstraint::LT});
        }
    }
    for (size_t v = 0; v < nvars; ++v) {
        std::vector<Ineq> pos, neg, rest;
        for (auto& q : ineqs) {
            if (q.a[v] > 0)
                pos.push_back(std::move(q));
            else if (q.a[v] < 0)
                neg.push_back(std::move(q));
            else
                rest.push_back(std::move(q));
        }
        for (const auto& p : pos)
            for (const auto& n : neg) {
                // p: a.x <= b with a_v > 0, n: c.x <= d with c_v < 0.
                Ineq combined;
                combined.a.assign(nvars, 0);
                Rational fp = -n.a[v], fn = p.a[v];
                for (size_t j = 0; j < nvars; ++j)
                    combined.a[j] = fp * p.a[j] + fn * n.a[j];
                combined.b = fp * p.b + fn * n.b;
                combined.strict = p.strict || n.strict;
                rest.push_back(std::move(combined));
            }
        ineqs = std::move(rest);
    }
    for (const auto& q : ineqs) {
        if (q.strict ? !(0 < q.b) : !(0 <= q.b)) return false;
    }
    return true;
}

} // namespace floerpot
