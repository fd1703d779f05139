#pragma once

// Low-level vector kernels used by the iterative solvers. Each has a scalar
// reference version and an AVX2 version; dispatch happens at runtime.

#include <cstddef>
#include <cstdint>
#include <span>

namespace slef::kernels {

struct CsrView {
    std::size_t rows = 0;
    const std::int64_t* row_ptr = nullptr;
    const std::int32_t* col = nullptr;
    const double* val = nullptr;
};

enum class Isa { scalar, avx2 };

bool avx2_available();
Isa active_isa();
// Tests use this to pin a path. Requesting avx2 on a machine without it is ignored.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y = x + beta * y
void xpay(std::span<const double> x, double beta, std::span<double> y);
// z = d .* r
void hadamard(std::span<const double> d, std::span<const double> r, std::span<double> z);
// y = A x
void spmv(const CsrView& a, const double* x, double* y);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double norm_inf(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void xpay(const double* x, double beta, double* y, std::size_t n);
void hadamard(const double* d, const double* r, double* z, std::size_t n);
void spmv(const CsrView& a, const double* x, double* y);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double norm_inf(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void xpay(const double* x, double beta, double* y, std::size_t n);
void hadamard(const double* d, const double* r, double* z, std::size_t n);
void spmv(const CsrView& a, const double* x, double* y);
}  // namespace avx2

}  // namespace slef::kernels
