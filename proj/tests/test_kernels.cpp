#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "slef/kernels.hpp"
#include "slef/mesh.hpp"
#include "slef/sparse.hpp"

using namespace slef;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// 5-point stencil on an m x m grid plus a diagonal shift
CsrMatrix grid_matrix(int m, double shift) {
    std::vector<Triplet> t;
    auto id = [m](int i, int j) { return i * m + j; };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            t.push_back({id(i, j), id(i, j), 4.0 + shift});
            if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
            if (i + 1 < m) t.push_back({id(i, j), id(i + 1, j), -1.0});
            if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
            if (j + 1 < m) t.push_back({id(i, j), id(i, j + 1), -1.0});
        }
    return CsrMatrix::from_triplets(m * m, m * m, std::move(t));
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("scalar and avx2 kernels agree") {
        if (!kernels::avx2_available()) {
            MESSAGE("no AVX2 on this machine; equivalence not exercised");
            return;
        }
        std::mt19937_64 rng(7);
        // odd lengths hit the remainder loops
        for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 1001u}) {
            const auto a = random_vec(n, rng), b = random_vec(n, rng);
            const double ds = kernels::scalar::dot(a.data(), b.data(), n);
            const double dv = kernels::avx2::dot(a.data(), b.data(), n);
            CHECK(dv == doctest::Approx(ds).epsilon(1e-13));
            CHECK(kernels::avx2::norm_inf(a.data(), n) == kernels::scalar::norm_inf(a.data(), n));

            auto y1 = b, y2 = b;
            kernels::scalar::axpy(0.37, a.data(), y1.data(), n);
            kernels::avx2::axpy(0.37, a.data(), y2.data(), n);
            CHECK(max_diff(y1, y2) <= 1e-15);

            y1 = b, y2 = b;
            kernels::scalar::xpay(a.data(), -1.3, y1.data(), n);
            kernels::avx2::xpay(a.data(), -1.3, y2.data(), n);
            CHECK(max_diff(y1, y2) <= 1e-15);

            std::vector<double> z1(n), z2(n);
            kernels::scalar::hadamard(a.data(), b.data(), z1.data(), n);
            kernels::avx2::hadamard(a.data(), b.data(), z2.data(), n);
            CHECK(max_diff(z1, z2) == 0.0);
        }
        const auto A = grid_matrix(23, 0.5);
        const auto x = random_vec(A.rows(), rng);
        std::vector<double> y1(A.rows()), y2(A.rows());
        kernels::scalar::spmv(A.view(), x.data(), y1.data());
        kernels::avx2::spmv(A.view(), x.data(), y2.data());
        CHECK(max_diff(y1, y2) <= 1e-14);
    }

    TEST_CASE("forcing the isa switches the dispatched path") {
        kernels::force_isa(kernels::Isa::scalar);
        CHECK(kernels::active_isa() == kernels::Isa::scalar);
        std::vector<double> a{1, 2, 3}, b{4, 5, 6};
        CHECK(kernels::dot(a, b) == 32.0);
        kernels::force_isa(kernels::Isa::avx2);
        CHECK(kernels::dot(a, b) == 32.0);
        CHECK(kernels::active_isa() == (kernels::avx2_available() ? kernels::Isa::avx2 : kernels::Isa::scalar));
    }

    TEST_CASE("one-unknown system gives rhs over diagonal") {
        const auto A = CsrMatrix::from_triplets(1, 1, {{0, 0, 4.0}});
        const std::vector<double> rhs{3.0};
        CHECK(solve_linear(A, rhs, 1e-14)[0] == doctest::Approx(0.75));
    }

    TEST_CASE("PCG matches a dense factorization on a random SPD system") {
        std::mt19937_64 rng(11);
        // 50 unknowns: a 5-point stencil with a random positive diagonal shift
        std::vector<Triplet> t;
        std::uniform_real_distribution<double> u(0.0, 2.0);
        const int n = 50;
        for (int i = 0; i < n; ++i) {
            t.push_back({i, i, 4.0 + u(rng)});
            if (i + 1 < n) {
                t.push_back({i, i + 1, -1.0});
                t.push_back({i + 1, i, -1.0});
            }
            if (i + 7 < n) {
                t.push_back({i, i + 7, -1.0});
                t.push_back({i + 7, i, -1.0});
            }
        }
        const auto A = CsrMatrix::from_triplets(n, n, t);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (const auto& e : t) D(e.row, e.col) += e.value;
        const auto b = random_vec(n, rng);
        const Eigen::VectorXd ref = D.llt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
        const auto x = solve_linear(A, b, 1e-13);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(x[i] - ref[i]));
        CHECK(err <= 1e-8);
        DirectSolver ds;
        ds.factorize(A);
        const auto y = ds.solve(b);
        for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    }

    TEST_CASE("multigrid-preconditioned CG agrees with the direct backend") {
        auto mesh = build_polar_mesh(make_sector(2.0, 1.0), 128, 64, 1.02);
        const auto lap = assemble_laplacian(*mesh);
        std::mt19937_64 rng(3);
        const auto b = random_vec(mesh->unknowns, rng);
        LinearOptions direct{LinearBackend::direct, 1e-12};
        LinearOptions mg{LinearBackend::multigrid, 1e-12};
        SpdSystemSolver s1(direct, mesh->grid_coord), s2(mg, mesh->grid_coord);
        s1.set_matrix(lap.stiffness);
        s2.set_matrix(lap.stiffness);
        const auto x1 = s1.solve(b), x2 = s2.solve(b);
        double scale = 0.0;
        for (double v : x1) scale = std::max(scale, std::fabs(v));
        CHECK(max_diff(x1, x2) <= 1e-9 * scale);
        CHECK(s2.total_iterations() < 100);
    }

    TEST_CASE("csr helpers") {
        const auto A = grid_matrix(4, 1.0);
        CHECK(A.is_symmetric(1e-15));
        CHECK(A.entry(0, 0) == 5.0);
        CHECK(A.entry(0, 1) == -1.0);
        CHECK(A.entry(0, 5) == 0.0);
        const std::vector<double> d(A.rows(), 2.0);
        CHECK(A.with_diagonal_shift(d).entry(3, 3) == 7.0);
        const auto AA = multiply(A, A.transpose());
        std::vector<double> x(A.rows(), 1.0);
        const auto ax = A.multiply(x);
        const auto aax = AA.multiply(x);
        CHECK(max_diff(A.multiply(ax), aax) <= 1e-12);
    }
}
