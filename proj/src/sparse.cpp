#include "slef/sparse.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "slef/errors.hpp"

namespace slef {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> col,
                     std::vector<double> val)
    : rows_(n), cols_(n), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {
    if (row_ptr_.size() != n + 1 || col_.size() != val_.size() ||
        static_cast<std::size_t>(row_ptr_.back()) != val_.size())
        throw InvalidArgument("CsrMatrix: inconsistent arrays");
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    m.col_.reserve(t.size());
    m.val_.reserve(t.size());
    for (std::size_t k = 0; k < t.size();) {
        const auto r = t[k].row, c = t[k].col;
        if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= rows || static_cast<std::size_t>(c) >= cols)
            throw InvalidArgument("CsrMatrix: triplet out of range");
        double v = 0.0;
        for (; k < t.size() && t[k].row == r && t[k].col == c; ++k) v += t[k].value;
        m.col_.push_back(c);
        m.val_.push_back(v);
        ++m.row_ptr_[r + 1];
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
    return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    kernels::spmv(view(), x.data(), y.data());
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

std::int64_t CsrMatrix::diagonal_position(std::size_t i) const {
    auto b = col_.begin() + row_ptr_[i], e = col_.begin() + row_ptr_[i + 1];
    auto it = std::lower_bound(b, e, static_cast<std::int32_t>(i));
    if (it == e || *it != static_cast<std::int32_t>(i)) return -1;
    return it - col_.begin();
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        if (auto p = diagonal_position(i); p >= 0) d[i] = val_[p];
    return d;
}

double CsrMatrix::entry(std::size_t i, std::size_t j) const {
    auto b = col_.begin() + row_ptr_[i], e = col_.begin() + row_ptr_[i + 1];
    auto it = std::lower_bound(b, e, static_cast<std::int32_t>(j));
    return (it != e && *it == static_cast<std::int32_t>(j)) ? val_[it - col_.begin()] : 0.0;
}

bool CsrMatrix::is_symmetric(double rel_tol) const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const double a = val_[k], b = entry(col_[k], i);
            if (std::fabs(a - b) > rel_tol * std::max(std::fabs(a), std::fabs(b))) return false;
        }
    return true;
}

CsrMatrix CsrMatrix::transpose() const {
    CsrMatrix t;
    t.rows_ = cols_;
    t.cols_ = rows_;
    t.row_ptr_.assign(cols_ + 1, 0);
    for (auto c : col_) ++t.row_ptr_[c + 1];
    for (std::size_t i = 0; i < cols_; ++i) t.row_ptr_[i + 1] += t.row_ptr_[i];
    t.col_.resize(col_.size());
    t.val_.resize(val_.size());
    std::vector<std::int64_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i)
        for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const auto p = next[col_[k]]++;
            t.col_[p] = static_cast<std::int32_t>(i);
            t.val_[p] = val_[k];
        }
    return t;
}

CsrMatrix CsrMatrix::with_diagonal_shift(std::span<const double> d) const {
    CsrMatrix m = *this;
    for (std::size_t i = 0; i < rows_; ++i) {
        const auto p = diagonal_position(i);
        if (p < 0) throw InvalidArgument("with_diagonal_shift: missing diagonal entry");
        m.val_[p] += d[i];
    }
    return m;
}

// Gustavson row-by-row product with a dense accumulator.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidArgument("multiply: shape mismatch");
    CsrMatrix c;
    c.rows_ = a.rows_;
    c.cols_ = b.cols_;
    c.row_ptr_.assign(a.rows_ + 1, 0);
    std::vector<double> acc(b.cols_, 0.0);
    std::vector<std::int32_t> mark(b.cols_, -1);
    std::vector<std::int32_t> touched;
    for (std::size_t i = 0; i < a.rows_; ++i) {
        touched.clear();
        for (auto ka = a.row_ptr_[i]; ka < a.row_ptr_[i + 1]; ++ka) {
            const auto j = a.col_[ka];
            const double av = a.val_[ka];
            for (auto kb = b.row_ptr_[j]; kb < b.row_ptr_[j + 1]; ++kb) {
                const auto col = b.col_[kb];
                if (mark[col] != static_cast<std::int32_t>(i)) {
                    mark[col] = static_cast<std::int32_t>(i);
                    acc[col] = 0.0;
                    touched.push_back(col);
                }
                acc[col] += av * b.val_[kb];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto col : touched) {
            c.col_.push_back(col);
            c.val_.push_back(acc[col]);
        }
        c.row_ptr_[i + 1] = static_cast<std::int64_t>(c.col_.size());
    }
    return c;
}

JacobiPreconditioner::JacobiPreconditioner(const CsrMatrix& a) : inv_diag_(a.diagonal()) {
    for (auto& d : inv_diag_) {
        if (!(d > 0.0)) throw InvalidArgument("Jacobi: nonpositive diagonal");
        d = 1.0 / d;
    }
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    kernels::hadamard(inv_diag_, r, z);
}

std::vector<double> pcg(const CsrMatrix& a, std::span<const double> rhs, double tol,
                        const Preconditioner& m, std::span<const double> x0, std::size_t max_iter,
                        LinearSolveStats* stats) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw InvalidArgument("pcg: rhs size mismatch");
    std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), z(n), p(n), q(n);
    const double bnorm = std::sqrt(kernels::dot(rhs, rhs));
    if (bnorm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return x;
    }
    if (!x0.empty()) {
        std::copy(x0.begin(), x0.end(), x.begin());
        a.multiply(x, q);
        kernels::axpy(-1.0, q, r);
    }
    double rnorm = std::sqrt(kernels::dot(r, r));
    std::size_t it = 0;
    if (rnorm > tol * bnorm) {
        m.apply(r, z);
        p = z;
        double rz = kernels::dot(r, z);
        for (it = 1; it <= max_iter; ++it) {
            a.multiply(p, q);
            const double pq = kernels::dot(p, q);
            if (!(pq > 0.0)) throw ConvergenceError("pcg: operator not positive definite", rnorm / bnorm, it);
            const double alpha = rz / pq;
            kernels::axpy(alpha, p, x);
            kernels::axpy(-alpha, q, r);
            rnorm = std::sqrt(kernels::dot(r, r));
            if (rnorm <= tol * bnorm) break;
            m.apply(r, z);
            const double rz_new = kernels::dot(r, z);
            kernels::xpay(z, rz_new / rz, p);
            rz = rz_new;
        }
        if (it > max_iter)
            throw ConvergenceError("pcg: iteration cap " + std::to_string(max_iter) + " reached",
                                   rnorm / bnorm, max_iter);
    }
    if (stats) *stats = {it, rnorm / bnorm};
    return x;
}

std::vector<double> solve_linear(const CsrMatrix& a, std::span<const double> rhs, double tol,
                                 LinearSolveStats* stats) {
    if (!(tol > 0.0 && tol <= 1e-6)) throw InvalidArgument("solve_linear: tol must lie in (0, 1e-6]");
    JacobiPreconditioner m(a);
    return pcg(a, rhs, tol, m, {}, 10 * std::max<std::size_t>(a.size(), 1), stats);
}

// ---------------------------------------------------------------- direct

struct DirectSolver::Impl {
    using Mat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    Eigen::SimplicialLLT<Mat, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
    Mat m;
    std::vector<std::int64_t> pattern_ptr;
    std::vector<std::int32_t> pattern_col;
    bool analyzed = false;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factorize(const CsrMatrix& a) {
    auto& s = *impl_;
    const bool same = s.analyzed && s.pattern_ptr == a.row_ptr() && s.pattern_col == a.col_index();
    if (!same) {
        // Eigen gets A^T (column-major storage then matches the CSR arrays entry
        // for entry); A is symmetric so the factor is the same.
        const int n = static_cast<int>(a.size());
        s.m = Impl::Mat(n, n);
        std::vector<Eigen::Triplet<double, int>> t;
        t.reserve(a.nnz());
        for (int i = 0; i < n; ++i)
            for (auto k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
                t.emplace_back(a.col_index()[k], i, a.values()[k]);
        s.m.setFromTriplets(t.begin(), t.end());
        s.m.makeCompressed();
        s.llt.analyzePattern(s.m);
        s.pattern_ptr = a.row_ptr();
        s.pattern_col = a.col_index();
        s.analyzed = true;
    } else {
        double* v = s.m.valuePtr();
        for (std::size_t k = 0; k < a.nnz(); ++k) v[k] = a.values()[k];
    }
    s.llt.factorize(s.m);
    if (s.llt.info() != Eigen::Success) throw ConvergenceError("direct solver: factorization failed", 0.0, 0);
}

std::vector<double> DirectSolver::solve(std::span<const double> rhs) const {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = impl_->llt.solve(b);
    return {x.data(), x.data() + x.size()};
}

// ---------------------------------------------------------------- multigrid

struct MultigridPreconditioner::Level {
    std::vector<std::array<std::int32_t, 2>> coords;
    CsrMatrix a;
    CsrMatrix p;   // fine <- coarse
    CsrMatrix pt;
    std::vector<std::int64_t> diag_pos;
    mutable std::vector<double> x, b, r;
};

MultigridPreconditioner::MultigridPreconditioner(std::vector<std::array<std::int32_t, 2>> coords,
                                                 std::size_t coarsest) {
    auto top = std::make_unique<Level>();
    top->coords = std::move(coords);
    levels_.push_back(std::move(top));
    while (levels_.back()->coords.size() > coarsest) {
        Level& fine = *levels_.back();
        const auto& fc = fine.coords;
        std::unordered_map<std::int64_t, std::int32_t> coarse_id;
        auto key = [](std::int64_t i, std::int64_t j) { return (i << 32) ^ (j & 0xffffffffLL); };
        auto next = std::make_unique<Level>();
        for (const auto& c : fc)
            if (c[0] % 2 == 0 && c[1] % 2 == 0) {
                coarse_id.emplace(key(c[0] / 2, c[1] / 2), static_cast<std::int32_t>(next->coords.size()));
                next->coords.push_back({c[0] / 2, c[1] / 2});
            }
        if (next->coords.empty() || next->coords.size() * 2 > fc.size()) break;
        std::vector<Triplet> t;
        t.reserve(fc.size() * 4);
        for (std::size_t i = 0; i < fc.size(); ++i) {
            const auto ci = fc[i][0], cj = fc[i][1];
            const std::int32_t xs[2] = {ci >> 1, (ci + 1) >> 1};
            const std::int32_t ys[2] = {cj >> 1, (cj + 1) >> 1};
            const int nx = (ci & 1) ? 2 : 1, ny = (cj & 1) ? 2 : 1;
            const double w = 1.0 / (nx * ny);
            for (int a = 0; a < nx; ++a)
                for (int b = 0; b < ny; ++b) {
                    auto it = coarse_id.find(key(xs[a], ys[b]));
                    if (it != coarse_id.end()) t.push_back({static_cast<std::int32_t>(i), it->second, w});
                }
        }
        fine.p = CsrMatrix::from_triplets(fc.size(), next->coords.size(), std::move(t));
        fine.pt = fine.p.transpose();
        levels_.push_back(std::move(next));
    }
}

MultigridPreconditioner::~MultigridPreconditioner() = default;

std::size_t MultigridPreconditioner::levels() const { return levels_.size(); }

void MultigridPreconditioner::update(const CsrMatrix& a) {
    levels_[0]->a = a;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        Level& lv = *levels_[l];
        if (l > 0) {
            const Level& f = *levels_[l - 1];
            lv.a = multiply(f.pt, multiply(f.a, f.p));
        }
        const std::size_t n = lv.a.size();
        lv.diag_pos.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            lv.diag_pos[i] = lv.a.diagonal_position(i);
            if (lv.diag_pos[i] < 0 || !(lv.a.values()[lv.diag_pos[i]] > 0.0))
                throw InvalidArgument("multigrid: nonpositive diagonal on level " + std::to_string(l));
        }
        lv.x.assign(n, 0.0);
        lv.b.assign(n, 0.0);
        lv.r.assign(n, 0.0);
    }
    coarse_.factorize(levels_.back()->a);
}

namespace {

void gauss_seidel(const CsrMatrix& a, const std::vector<std::int64_t>& dpos, const std::vector<double>& b,
                  std::vector<double>& x, bool forward) {
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_index();
    const auto& v = a.values();
    const auto n = static_cast<std::int64_t>(a.size());
    for (std::int64_t s = 0; s < n; ++s) {
        const std::int64_t i = forward ? s : n - 1 - s;
        double acc = b[i];
        for (auto k = rp[i]; k < rp[i + 1]; ++k) acc -= v[k] * x[ci[k]];
        x[i] += acc / v[dpos[i]];
    }
}

}  // namespace

void MultigridPreconditioner::cycle(std::size_t l) const {
    const Level& lv = *levels_[l];
    if (l + 1 == levels_.size()) {
        auto sol = coarse_.solve(lv.b);
        std::copy(sol.begin(), sol.end(), lv.x.begin());
        return;
    }
    std::fill(lv.x.begin(), lv.x.end(), 0.0);
    gauss_seidel(lv.a, lv.diag_pos, lv.b, lv.x, true);
    lv.a.multiply(lv.x, lv.r);
    for (std::size_t i = 0; i < lv.r.size(); ++i) lv.r[i] = lv.b[i] - lv.r[i];
    const Level& co = *levels_[l + 1];
    lv.pt.multiply(lv.r, co.b);
    cycle(l + 1);
    lv.p.multiply(co.x, lv.r);
    kernels::axpy(1.0, lv.r, lv.x);
    gauss_seidel(lv.a, lv.diag_pos, lv.b, lv.x, false);
}

void MultigridPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    const Level& top = *levels_[0];
    std::copy(r.begin(), r.end(), top.b.begin());
    cycle(0);
    std::copy(top.x.begin(), top.x.end(), z.begin());
}

// ---------------------------------------------------------------- facade

const char* backend_name(LinearBackend b) {
    switch (b) {
        case LinearBackend::automatic: return "automatic";
        case LinearBackend::direct: return "direct";
        case LinearBackend::multigrid: return "multigrid";
        case LinearBackend::jacobi: return "jacobi";
    }
    return "?";
}

SpdSystemSolver::SpdSystemSolver(LinearOptions opts, std::vector<std::array<std::int32_t, 2>> coords)
    : opts_(opts), backend_(opts.backend), coords_(std::move(coords)) {
    if (backend_ == LinearBackend::automatic)
        backend_ = (coords_.size() > opts_.direct_limit) ? LinearBackend::multigrid : LinearBackend::direct;
    if (backend_ == LinearBackend::multigrid && coords_.empty())
        throw InvalidArgument("multigrid backend needs grid coordinates");
}

SpdSystemSolver::~SpdSystemSolver() = default;

void SpdSystemSolver::set_matrix(const CsrMatrix& a) {
    a_ = &a;
    switch (backend_) {
        case LinearBackend::direct:
            if (!direct_) direct_ = std::make_unique<DirectSolver>();
            direct_->factorize(a);
            break;
        case LinearBackend::multigrid:
            if (!mg_) mg_ = std::make_unique<MultigridPreconditioner>(coords_);
            mg_->update(a);
            break;
        default:
            jacobi_ = std::make_unique<JacobiPreconditioner>(a);
    }
}

std::vector<double> SpdSystemSolver::solve(std::span<const double> rhs, std::span<const double> guess) {
    if (!a_) throw InvalidArgument("SpdSystemSolver: no matrix set");
    LinearSolveStats st;
    switch (backend_) {
        case LinearBackend::direct: return direct_->solve(rhs);
        case LinearBackend::multigrid: {
            auto x = pcg(*a_, rhs, opts_.tol, *mg_, guess, 500, &st);
            total_iterations_ += st.iterations;
            return x;
        }
        default: {
            auto x = pcg(*a_, rhs, opts_.tol, *jacobi_, guess, 10 * a_->size(), &st);
            total_iterations_ += st.iterations;
            return x;
        }
    }
}

}  // namespace slef
