#include "slef/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace slef::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm_inf(const double* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(a[i]));
    return m;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay(const double* x, double beta, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void hadamard(const double* d, const double* r, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = d[i] * r[i];
}

void spmv(const CsrView& a, const double* x, double* y) {
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

}  // namespace scalar

#if !defined(SLEF_HAVE_AVX2_TU)
// Non-x86 builds: the avx2 namespace forwards to scalar so the symbols exist.
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double norm_inf(const double* a, std::size_t n) { return scalar::norm_inf(a, n); }
void axpy(double al, const double* x, double* y, std::size_t n) { scalar::axpy(al, x, y, n); }
void xpay(const double* x, double be, double* y, std::size_t n) { scalar::xpay(x, be, y, n); }
void hadamard(const double* d, const double* r, double* z, std::size_t n) { scalar::hadamard(d, r, z, n); }
void spmv(const CsrView& a, const double* x, double* y) { scalar::spmv(a, x, y); }
}  // namespace avx2
#endif

namespace {

Isa detect() {
#if defined(SLEF_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
    return Isa::scalar;
}

std::atomic<int>& isa_slot() {
    static std::atomic<int> slot{static_cast<int>(detect())};
    return slot;
}

}  // namespace

bool avx2_available() {
#if defined(SLEF_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_available()) isa = Isa::scalar;
    isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) {
    return active_isa() == Isa::avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                     : scalar::dot(a.data(), b.data(), a.size());
}

double norm_inf(std::span<const double> a) {
    return active_isa() == Isa::avx2 ? avx2::norm_inf(a.data(), a.size())
                                     : scalar::norm_inf(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (active_isa() == Isa::avx2)
        avx2::axpy(alpha, x.data(), y.data(), x.size());
    else
        scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
    if (active_isa() == Isa::avx2)
        avx2::xpay(x.data(), beta, y.data(), x.size());
    else
        scalar::xpay(x.data(), beta, y.data(), x.size());
}

void hadamard(std::span<const double> d, std::span<const double> r, std::span<double> z) {
    if (active_isa() == Isa::avx2)
        avx2::hadamard(d.data(), r.data(), z.data(), d.size());
    else
        scalar::hadamard(d.data(), r.data(), z.data(), d.size());
}

void spmv(const CsrView& a, const double* x, double* y) {
    if (active_isa() == Isa::avx2)
        avx2::spmv(a, x, y);
    else
        scalar::spmv(a, x, y);
}

}  // namespace slef::kernels
