#include "cwqr/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace cwqr {

void TripletMatrix::add(int row, int col, double value) {
    if (row < 0 || row >= n_rows_ || col < 0 || col >= n_cols_)
        throw std::out_of_range("triplet index out of range");
    entries_.push_back(Triplet{row, col, value});
}

CsrMatrix CsrMatrix::from_triplets(const TripletMatrix& t) {
    CsrMatrix a;
    a.n_rows_ = t.n_rows();
    a.n_cols_ = t.n_cols();

    // Counting sort by row, then per-row sort by column with duplicate folding.
    std::vector<std::size_t> count(t.n_rows() + 1, 0);
    for (const Triplet& e : t.entries()) count[e.row + 1]++;
    for (int r = 0; r < t.n_rows(); ++r) count[r + 1] += count[r];

    std::vector<int> cols(t.entries().size());
    std::vector<double> vals(t.entries().size());
    {
        std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
        for (const Triplet& e : t.entries()) {
            const std::size_t p = cursor[e.row]++;
            cols[p] = e.col;
            vals[p] = e.value;
        }
    }

    a.offsets_.assign(t.n_rows() + 1, 0);
    a.cols_.reserve(cols.size());
    a.values_.reserve(vals.size());

    std::vector<int> order;
    for (int r = 0; r < t.n_rows(); ++r) {
        const std::size_t lo = count[r], hi = count[r + 1];
        order.resize(hi - lo);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int u, int v) {
            return cols[lo + u] < cols[lo + v];
        });
        int last_col = -1;
        for (int q : order) {
            const int c = cols[lo + q];
            const double v = vals[lo + q];
            if (c == last_col) {
                a.values_.back() += v;
            } else {
                a.cols_.push_back(c);
                a.values_.push_back(v);
                last_col = c;
            }
        }
        // Prune entries that vanished (or nearly so) after folding.
        std::size_t w = a.offsets_[r];
        for (std::size_t p = a.offsets_[r]; p < a.values_.size(); ++p) {
            if (std::abs(a.values_[p]) >= 1e-300) {
                a.cols_[w] = a.cols_[p];
                a.values_[w] = a.values_[p];
                ++w;
            }
        }
        a.cols_.resize(w);
        a.values_.resize(w);
        a.offsets_[r + 1] = w;
    }
    return a;
}

void CsrMatrix::matvec(const double* x, double* y) const {
    for (int r = 0; r < n_rows_; ++r) {
        double acc = 0.0;
        const std::size_t hi = offsets_[r + 1];
        for (std::size_t p = offsets_[r]; p < hi; ++p) acc += values_[p] * x[cols_[p]];
        y[r] = acc;
    }
}

void CsrMatrix::matvec_transpose(const double* x, double* y) const {
    std::fill(y, y + n_cols_, 0.0);
    for (int r = 0; r < n_rows_; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        const std::size_t hi = offsets_[r + 1];
        for (std::size_t p = offsets_[r]; p < hi; ++p) y[cols_[p]] += values_[p] * xr;
    }
}

CsrMatrix CsrMatrix::transpose() const {
    CsrMatrix t;
    t.n_rows_ = n_cols_;
    t.n_cols_ = n_rows_;
    t.offsets_.assign(n_cols_ + 1, 0);
    for (int c : cols_) t.offsets_[c + 1]++;
    for (int c = 0; c < n_cols_; ++c) t.offsets_[c + 1] += t.offsets_[c];
    t.cols_.resize(nnz());
    t.values_.resize(nnz());
    std::vector<std::size_t> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
    for (int r = 0; r < n_rows_; ++r) {
        for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
            const std::size_t q = cursor[cols_[p]]++;
            t.cols_[q] = r;
            t.values_[q] = values_[p];
        }
    }
    return t;
}

std::vector<double> matvec(const CsrMatrix& a, const std::vector<double>& x) {
    if (int(x.size()) != a.n_cols()) throw std::invalid_argument("matvec: shape mismatch");
    std::vector<double> y(a.n_rows());
    a.matvec(x.data(), y.data());
    return y;
}

std::vector<double> matvec_transpose(const CsrMatrix& a, const std::vector<double>& x) {
    if (int(x.size()) != a.n_rows())
        throw std::invalid_argument("matvec_transpose: shape mismatch");
    std::vector<double> y(a.n_cols());
    a.matvec_transpose(x.data(), y.data());
    return y;
}

namespace {

double nrm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> column_norms(const CsrMatrix& a) {
    std::vector<double> d(a.n_cols(), 0.0);
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (std::size_t p = 0; p < vals.size(); ++p) d[cols[p]] += vals[p] * vals[p];
    for (double& x : d) x = (x > 0.0) ? std::sqrt(x) : 1.0;
    return d;
}

}  // namespace

std::pair<std::vector<double>, LsqReport> cgls_solve(const CsrMatrix& a,
                                                     const CsrMatrix& at,
                                                     const std::vector<double>& b,
                                                     const LsqOptions& opts) {
    const int m = a.n_rows(), n = a.n_cols();
    if (int(b.size()) != m) throw std::invalid_argument("cgls_solve: rhs shape mismatch");
    if (at.n_rows() != n || at.n_cols() != m)
        throw std::invalid_argument("cgls_solve: transpose shape mismatch");
    const long max_iter = opts.max_iter >= 0 ? opts.max_iter : 10L * n;

    const std::vector<double> d = column_norms(a);  // column equilibration

    // Work in the scaled variable y = D x, so columns of A D^{-1} have unit norm.
    std::vector<double> y(n, 0.0);
    if (opts.warm_start) {
        if (int(opts.warm_start->size()) != n)
            throw std::invalid_argument("cgls_solve: warm start shape mismatch");
        for (int i = 0; i < n; ++i) y[i] = (*opts.warm_start)[i] * d[i];
    }

    std::vector<double> tmp(n), r(m), s(n), p(n), q(m);

    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) tmp[i] = v[i] / d[i];
        a.matvec(tmp.data(), out.data());
    };
    auto apply_t = [&](const std::vector<double>& v, std::vector<double>& out) {
        at.matvec(v.data(), out.data());
        for (int i = 0; i < n; ++i) out[i] /= d[i];
    };

    // Reference gradient norm at x = 0 (independent of the warm start).
    apply_t(b, s);
    const double grad_ref = nrm2(s);

    apply(y, q);
    for (int i = 0; i < m; ++i) r[i] = b[i] - q[i];
    apply_t(r, s);

    double gamma = 0.0;
    for (double v : s) gamma += v * v;
    p = s;

    LsqReport report;
    double grad_norm = std::sqrt(gamma);
    long it = 0;
    if (grad_ref == 0.0) {
        // A^T b = 0: x = 0 is already optimal, ignore any warm start.
        report.converged = true;
        std::vector<double> x(n, 0.0);
        report.relative_residual = 0.0;
        return {std::move(x), report};
    }
    for (; it < max_iter && grad_norm > opts.tol * grad_ref; ++it) {
        apply(p, q);
        double qq = 0.0;
        for (double v : q) qq += v * v;
        if (qq == 0.0) break;  // direction in the null space; cannot improve
        const double alpha = gamma / qq;
        for (int i = 0; i < n; ++i) y[i] += alpha * p[i];
        for (int i = 0; i < m; ++i) r[i] -= alpha * q[i];
        apply_t(r, s);
        double gamma_new = 0.0;
        for (double v : s) gamma_new += v * v;
        const double beta = gamma_new / gamma;
        gamma = gamma_new;
        grad_norm = std::sqrt(gamma);
        for (int i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
    }

    report.iterations = it;
    report.converged = grad_norm <= opts.tol * grad_ref;

    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i] / d[i];

    // Report the unscaled optimality measure at the returned point.
    std::vector<double> ax(m), g(n), gb(n);
    a.matvec(x.data(), ax.data());
    for (int i = 0; i < m; ++i) ax[i] -= b[i];
    at.matvec(ax.data(), g.data());
    at.matvec(b.data(), gb.data());
    const double denom = nrm2(gb);
    report.relative_residual = denom > 0.0 ? nrm2(g) / denom : nrm2(g);
    return {std::move(x), report};
}

std::pair<std::vector<double>, LsqReport> solve_least_squares(
    const CsrMatrix& a, const std::vector<double>& b, double tol, long max_iter) {
    LsqOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    const CsrMatrix at = a.transpose();
    return cgls_solve(a, at, b, opts);
}

std::vector<double> dense_oracle_solve(const CsrMatrix& a, const std::vector<double>& b) {
    const int n = a.n_cols();
    const int m = a.n_rows();
    if (n > 2000) throw std::invalid_argument("dense_oracle_solve: too many columns");
    if (int(b.size()) != m) throw std::invalid_argument("dense_oracle_solve: rhs mismatch");

    const std::vector<double> d = column_norms(a);

    // G = B^T B and h = B^T b with B = A D^{-1}.
    std::vector<double> g(std::size_t(n) * n, 0.0);
    std::vector<double> h(n, 0.0);
    const auto& off = a.row_offsets();
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (int r = 0; r < m; ++r) {
        for (std::size_t p = off[r]; p < off[r + 1]; ++p) {
            const int cp = cols[p];
            const double vp = vals[p] / d[cp];
            h[cp] += vp * b[r];
            for (std::size_t q = off[r]; q < off[r + 1]; ++q) {
                const int cq = cols[q];
                g[std::size_t(cp) * n + cq] += vp * (vals[q] / d[cq]);
            }
        }
    }

    // Plain Cholesky first.
    std::vector<double> l(g);
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
        double diag = l[std::size_t(k) * n + k];
        for (int q = 0; q < k; ++q) diag -= l[std::size_t(k) * n + q] * l[std::size_t(k) * n + q];
        if (!(diag > 0.0)) {
            ok = false;
            break;
        }
        const double lkk = std::sqrt(diag);
        l[std::size_t(k) * n + k] = lkk;
        for (int r = k + 1; r < n; ++r) {
            double v = l[std::size_t(r) * n + k];
            for (int q = 0; q < k; ++q)
                v -= l[std::size_t(r) * n + q] * l[std::size_t(k) * n + q];
            l[std::size_t(r) * n + k] = v / lkk;
        }
    }

    std::vector<double> x(n);
    if (ok) {
        // Solve L z = h, L^T w = z.
        std::vector<double> z(n);
        for (int r = 0; r < n; ++r) {
            double v = h[r];
            for (int q = 0; q < r; ++q) v -= l[std::size_t(r) * n + q] * z[q];
            z[r] = v / l[std::size_t(r) * n + r];
        }
        for (int r = n - 1; r >= 0; --r) {
            double v = z[r];
            for (int q = r + 1; q < n; ++q) v -= l[std::size_t(q) * n + r] * x[q];
            x[r] = v / l[std::size_t(r) * n + r];
        }
    } else {
        // Diagonally pivoted retry for semi-definite corner cases.
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<double> w(g);
        auto at_ = [&](int r, int c) -> double& { return w[std::size_t(r) * n + c]; };
        for (int k = 0; k < n; ++k) {
            int piv = k;
            for (int r = k + 1; r < n; ++r)
                if (at_(perm[r], perm[r]) > at_(perm[piv], perm[piv])) piv = r;
            std::swap(perm[k], perm[piv]);
            const double diag = at_(perm[k], perm[k]);
            if (!(diag > 0.0)) throw std::runtime_error("dense_oracle_solve: singular normal matrix");
            const double inv = 1.0 / diag;
            for (int r = k + 1; r < n; ++r) {
                const double f = at_(perm[r], perm[k]) * inv;
                for (int c = k + 1; c < n; ++c)
                    at_(perm[r], perm[c]) -= f * at_(perm[k], perm[c]);
                at_(perm[r], perm[k]) = f;
            }
        }
        // Forward/backward substitution in permuted order (LDL^T form).
        std::vector<double> z(n);
        for (int r = 0; r < n; ++r) {
            double v = h[perm[r]];
            for (int q = 0; q < r; ++q) v -= at_(perm[r], perm[q]) * z[q];
            z[r] = v;
        }
        for (int r = 0; r < n; ++r) z[r] /= at_(perm[r], perm[r]);
        std::vector<double> xx(n);
        for (int r = n - 1; r >= 0; --r) {
            double v = z[r];
            for (int q = r + 1; q < n; ++q) v -= at_(perm[q], perm[r]) * xx[q];
            xx[r] = v;
        }
        for (int r = 0; r < n; ++r) x[perm[r]] = xx[r];
    }

    for (int i = 0; i < n; ++i) x[i] /= d[i];
    return x;
}

void write_matrix_market(const CsrMatrix& a, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%d %d %zu\n", a.n_rows(), a.n_cols(), a.nnz());
    const auto& off = a.row_offsets();
    for (int r = 0; r < a.n_rows(); ++r)
        for (std::size_t p = off[r]; p < off[r + 1]; ++p)
            std::fprintf(f, "%d %d %.17g\n", r + 1, a.col_indices()[p] + 1, a.values()[p]);
    std::fclose(f);
}

void write_vector(const std::vector<double>& v, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open file: " + path);
    for (double x : v) std::fprintf(f, "%.17g\n", x);
    std::fclose(f);
}

}  // namespace cwqr
