#include "psam/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "psam/error.hpp"

namespace psam {
namespace {

constexpr std::size_t kMaxJacobiDim = 16;
constexpr int kMaxSweeps = 100;

// Cyclic Jacobi on a row-major Hermitian block `a` (overwritten; its diagonal
// holds the eigenvalues on return). When `v` is non-null it must hold the
// identity on entry and accumulates the eigenvectors as columns.
void jacobi_in_place(cplx* a, std::size_t n, cplx* v) {
    auto at = [n](cplx* m, std::size_t r, std::size_t c) -> cplx& { return m[r * n + c]; };

    for (std::size_t i = 0; i < n; ++i) at(a, i, i) = at(a, i, i).real();

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double e = std::norm(at(a, i, j));
                total += e;
                if (i != j) off += e;
            }
        if (off == 0.0 || off <= 1e-32 * total) return;

        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = at(a, p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;

                // Phase e^{-i phi} makes the (p,q) entry real, then a real
                // rotation annihilates it.
                const cplx phase = std::conj(apq) / mag;
                const double tau = (at(a, q, q).real() - at(a, p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const cplx jpp = c;
                const cplx jpq = s;
                const cplx jqp = -s * phase;
                const cplx jqq = c * phase;

                for (std::size_t k = 0; k < n; ++k) {  // A <- A J
                    const cplx akp = at(a, k, p);
                    const cplx akq = at(a, k, q);
                    at(a, k, p) = akp * jpp + akq * jqp;
                    at(a, k, q) = akp * jpq + akq * jqq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // A <- J^H A
                    const cplx apk = at(a, p, k);
                    const cplx aqk = at(a, q, k);
                    at(a, p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    at(a, q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                at(a, p, q) = 0.0;
                at(a, q, p) = 0.0;
                at(a, p, p) = at(a, p, p).real();
                at(a, q, q) = at(a, q, q).real();

                if (v != nullptr)
                    for (std::size_t k = 0; k < n; ++k) {
                        const cplx vkp = at(v, k, p);
                        const cplx vkq = at(v, k, q);
                        at(v, k, p) = vkp * jpp + vkq * jqp;
                        at(v, k, q) = vkp * jpq + vkq * jqq;
                    }
            }
    }
    fail(ErrorKind::Contract, "hermitian_eig: Jacobi sweeps did not converge");
}

template <typename Index>
void order_descending(std::span<const double> values, std::span<Index> order) {
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index i, Index j) {
        if (values[i] != values[j]) return values[i] > values[j];
        return i > j;
    });
}

void check_hermitian_square(const ComplexMatrix& a, const char* who) {
    require(a.square(), ErrorKind::Contract, std::string(who) + ": matrix is not square");
    require(a.rows() <= kMaxJacobiDim, ErrorKind::Domain,
            std::string(who) + ": dimension exceeds the small-matrix limit of 16");
    require(is_hermitian(a, 1e-10), ErrorKind::Contract, std::string(who) + ": matrix is not Hermitian");
}

}  // namespace

ComplexMatrix HermitianEig::reconstruct() const {
    const std::size_t n = values.size();
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += vectors(i, k) * values[k] * std::conj(vectors(j, k));
            out(i, j) = s;
        }
    return out;
}

HermitianEig hermitian_eig(const ComplexMatrix& a) {
    check_hermitian_square(a, "hermitian_eig");
    const std::size_t n = a.rows();

    ComplexMatrix work = a;
    ComplexMatrix v = ComplexMatrix::identity(n);
    jacobi_in_place(work.data().data(), n, v.data().data());

    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = work(i, i).real();
    std::vector<std::size_t> order(n);
    order_descending<std::size_t>(diag, order);

    HermitianEig out{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

void hermitian_eigenvalues(std::span<const cplx> a, std::size_t n, std::span<double> out) {
    require(n <= kMaxJacobiDim && a.size() >= n * n && out.size() >= n, ErrorKind::Domain,
            "hermitian_eigenvalues: bad dimensions");
    std::array<cplx, kMaxJacobiDim * kMaxJacobiDim> work{};
    std::copy_n(a.begin(), n * n, work.begin());
    jacobi_in_place(work.data(), n, nullptr);
    for (std::size_t i = 0; i < n; ++i) out[i] = work[i * n + i].real();
    std::sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), std::greater<>());
}

ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
    const HermitianEig eig = hermitian_eig(a);
    const double smallest = eig.values.back();
    if (smallest < -1e-10)
        fail(ErrorKind::NotPsd, "psd_sqrt: negative eigenvalue " + std::to_string(smallest));
    HermitianEig root = eig;
    for (auto& v : root.values) v = std::sqrt(std::max(v, 0.0));
    return root.reconstruct();
}

ComplexMatrix psd_inverse(const ComplexMatrix& a) {
    const HermitianEig eig = hermitian_eig(a);
    const double smallest = eig.values.back();
    if (!(smallest > 1e-12))
        throw SingularMatrixError(smallest, "psd_inverse: smallest eigenvalue " + std::to_string(smallest) +
                                                " is not above 1e-12");
    HermitianEig inv = eig;
    for (auto& v : inv.values) v = 1.0 / v;
    return inv.reconstruct();
}

double log2det_pd(const ComplexMatrix& a) {
    require(a.square(), ErrorKind::Contract, "log2det_pd: matrix is not square");
    const std::size_t n = a.rows();
    ComplexMatrix l(n, n);
    double log_det = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l(j, k));
        require(diag > 0.0, ErrorKind::Contract, "log2det_pd: matrix is not positive definite");
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        log_det += std::log(ljj);
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return 2.0 * log_det / std::numbers::ln2;
}

double log2det_identity_plus_scaled(std::span<const cplx> w, std::size_t n, std::span<const double> d) {
    std::array<std::size_t, kMaxJacobiDim> active{};
    std::array<double, kMaxJacobiDim> root{};
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0.0) {
            active[k] = i;
            root[k] = std::sqrt(d[i]);
            ++k;
        }
    if (k == 0) return 0.0;

    // In-place Cholesky of M = I + D^{1/2} W D^{1/2} on the active block,
    // lower triangle only.
    std::array<cplx, kMaxJacobiDim * kMaxJacobiDim> m{};
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c <= r; ++c)
            m[r * k + c] = root[r] * root[c] * w[active[r] * n + active[c]] + (r == c ? 1.0 : 0.0);

    double log_det = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double diag = m[j * k + j].real();
        for (std::size_t t = 0; t < j; ++t) diag -= std::norm(m[j * k + t]);
        require(diag > 0.0, ErrorKind::Contract, "log2det_identity_plus_scaled: lost positive definiteness");
        const double ljj = std::sqrt(diag);
        m[j * k + j] = ljj;
        log_det += std::log(ljj);
        for (std::size_t i = j + 1; i < k; ++i) {
            cplx s = m[i * k + j];
            for (std::size_t t = 0; t < j; ++t) s -= m[i * k + t] * std::conj(m[j * k + t]);
            m[i * k + j] = s / ljj;
        }
    }
    return 2.0 * log_det / std::numbers::ln2;
}

}  // namespace psam
