#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cwqr {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Unordered (row, col, value) entries; duplicates are summed on conversion.
class TripletMatrix {
public:
    TripletMatrix(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {}

    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    const std::vector<Triplet>& entries() const { return entries_; }

    void add(int row, int col, double value);
    void reserve(std::size_t n) { entries_.reserve(n); }

private:
    int n_rows_, n_cols_;
    std::vector<Triplet> entries_;
};

/// Compressed sparse rows with strictly increasing columns per row.
/// Entries with |value| < 1e-300 are pruned during conversion.
class CsrMatrix {
public:
    CsrMatrix() = default;

    static CsrMatrix from_triplets(const TripletMatrix& t);

    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const { return offsets_; }
    const std::vector<int>& col_indices() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    void matvec(const double* x, double* y) const;            // y = A x
    void matvec_transpose(const double* x, double* y) const;  // y = A^T x

    CsrMatrix transpose() const;

private:
    int n_rows_ = 0, n_cols_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<int> cols_;
    std::vector<double> values_;
};

std::vector<double> matvec(const CsrMatrix& a, const std::vector<double>& x);
std::vector<double> matvec_transpose(const CsrMatrix& a, const std::vector<double>& x);

struct LsqReport {
    long iterations = 0;
    double relative_residual = 0.0;  // ||A^T(Ax-b)|| / ||A^T b||
    bool converged = false;
};

struct LsqOptions {
    double tol = 1e-10;
    long max_iter = -1;  // -1: 10 * n_cols
    const std::vector<double>* warm_start = nullptr;
};

/// CGLS on the column-equilibrated normal equations. Deterministic; the
/// convergence test is the preconditioned gradient norm relative to its
/// value at x = 0.
std::pair<std::vector<double>, LsqReport> cgls_solve(const CsrMatrix& a,
                                                     const CsrMatrix& at,
                                                     const std::vector<double>& b,
                                                     const LsqOptions& opts);

std::pair<std::vector<double>, LsqReport> solve_least_squares(
    const CsrMatrix& a, const std::vector<double>& b, double tol, long max_iter);

/// Dense normal-equations reference: Cholesky, with a diagonally pivoted
/// retry when a pivot fails. Requires n_cols <= 2000.
std::vector<double> dense_oracle_solve(const CsrMatrix& a, const std::vector<double>& b);

void write_matrix_market(const CsrMatrix& a, const std::string& path);
void write_vector(const std::vector<double>& v, const std::string& path);

}  // namespace cwqr
