#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "slef/kernels.hpp"

namespace slef {

struct Triplet {
    std::int32_t row;
    std::int32_t col;
    double value;
};

// Square CSR matrix with sorted column indices inside each row.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t n, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> col,
              std::vector<double> val);
    // rows x cols; duplicates are summed
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return rows_; }
    std::size_t nnz() const { return val_.size(); }

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::int32_t>& col_index() const { return col_; }
    const std::vector<double>& values() const { return val_; }
    std::vector<double>& values() { return val_; }

    kernels::CsrView view() const { return {rows_, row_ptr_.data(), col_.data(), val_.data()}; }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> diagonal() const;
    // position of a(i,i) in values(); -1 if structurally absent
    std::int64_t diagonal_position(std::size_t i) const;
    double entry(std::size_t i, std::size_t j) const;
    bool is_symmetric(double rel_tol) const;
    CsrMatrix transpose() const;
    // A + diag(d), same pattern as A when every diagonal is present
    CsrMatrix with_diagonal_shift(std::span<const double> d) const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<std::int32_t> col_;
    std::vector<double> val_;

    friend CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);
};

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

struct LinearSolveStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class JacobiPreconditioner final : public Preconditioner {
public:
    explicit JacobiPreconditioner(const CsrMatrix& a);
    void apply(std::span<const double> r, std::span<double> z) const override;

private:
    std::vector<double> inv_diag_;
};

// Conjugate gradients with diagonal preconditioning. Relative residual stop;
// the iteration cap is 10 * dimension.
std::vector<double> solve_linear(const CsrMatrix& a, std::span<const double> rhs, double tol,
                                 LinearSolveStats* stats = nullptr);

std::vector<double> pcg(const CsrMatrix& a, std::span<const double> rhs, double tol,
                        const Preconditioner& m, std::span<const double> x0,
                        std::size_t max_iter, LinearSolveStats* stats = nullptr);

// Sparse Cholesky (Eigen simplicial LLT, AMD ordering). The symbolic analysis is
// kept while the sparsity pattern stays the same.
class DirectSolver {
public:
    DirectSolver();
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    void factorize(const CsrMatrix& a);
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Galerkin V-cycle on structured index sets: unknowns carry integer grid
// coordinates, the coarse set is the even-even subset, interpolation is
// (bi)linear. Used only as a CG preconditioner.
class MultigridPreconditioner final : public Preconditioner {
public:
    explicit MultigridPreconditioner(std::vector<std::array<std::int32_t, 2>> coords,
                                     std::size_t coarsest = 3000);
    ~MultigridPreconditioner() override;

    void update(const CsrMatrix& a);
    void apply(std::span<const double> r, std::span<double> z) const override;
    std::size_t levels() const;

private:
    struct Level;
    std::vector<std::unique_ptr<Level>> levels_;
    DirectSolver coarse_;
    void cycle(std::size_t l) const;
};

enum class LinearBackend { automatic, direct, multigrid, jacobi };

const char* backend_name(LinearBackend b);

struct LinearOptions {
    LinearBackend backend = LinearBackend::automatic;
    double tol = 1e-11;
    // automatic picks direct below this many unknowns
    std::size_t direct_limit = 400000;
};

// What the Newton loop and the harmonic solves talk to.
class SpdSystemSolver {
public:
    SpdSystemSolver(LinearOptions opts, std::vector<std::array<std::int32_t, 2>> coords);
    ~SpdSystemSolver();

    void set_matrix(const CsrMatrix& a);
    std::vector<double> solve(std::span<const double> rhs, std::span<const double> guess = {});
    LinearBackend backend() const { return backend_; }
    std::size_t total_iterations() const { return total_iterations_; }

private:
    LinearOptions opts_;
    LinearBackend backend_;
    std::vector<std::array<std::int32_t, 2>> coords_;
    const CsrMatrix* a_ = nullptr;
    std::unique_ptr<DirectSolver> direct_;
    std::unique_ptr<MultigridPreconditioner> mg_;
    std::unique_ptr<JacobiPreconditioner> jacobi_;
    std::size_t total_iterations_ = 0;
};

}  // namespace slef
