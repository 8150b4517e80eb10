// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

namespace linalg {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major n x n).
/// Returns eigenvalues; `vectors` holds eigenvectors as columns.
inline std::vector<double> jacobi_eigh(std::vector<double> a, std::size_t n,
                                       std::vector<double> &vectors) {
    vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        vectors[i * n + i] = 1.0;
    }
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) {
                    continue;
                }
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors[k * n + p];
                    const double vkq = vectors[k * n + q];
                    vectors[k * n + p] = c * vkp - s * vkq;
                    vectors[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<double> eigenvalues(n);
    for (std::size_t i = 0; i < n; ++i) {
        eigenvalues[i] = a[i * n + i];
    }
    return eigenvalues;
}

inline std::vector<double> matmul(const std::vector<double> &a, const std::vector<double> &b,
                                  std::size_t n) {
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    return c;
}

/// Symmetric PSD square root via eigendecomposition. Eigenvalues in
/// [-clip_tol, 0) are clipped to zero; anything further negative is an error.
inline std::vector<double> sym_matrix_sqrt(const std::vector<double> &a, std::size_t n,
                                           double clip_tol = 1e-8) {
    std::vector<double> vectors;
    std::vector<double> eigenvalues = jacobi_eigh(a, n, vectors);
    for (double &lambda : eigenvalues) {
        if (lambda < -clip_tol) {
            throw DataError("matrix is indefinite beyond tolerance (eigenvalue " +
                            std::to_string(lambda) + ")");
        }
        lambda = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
    }
    // V * sqrt(D) * V^T
    std::vector<double> scaled(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            scaled[i * n + j] = vectors[i * n + j] * eigenvalues[j];
        }
    }
    std::vector<double> result(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += scaled[i * n + k] * vectors[j * n + k];
            }
            result[i * n + j] = acc;
        }
    }
    return result;
}

} // namespace linalg

namespace detail {

inline void check_covariance(const std::vector<double> &cov, std::size_t n, const char *which) {
    if (cov.size() != n * n) {
        throw std::invalid_argument(std::string(which) + ": covariance must be n x n");
    }
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(cov[i * n + i]));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(cov[i * n + j] - cov[j * n + i]) > 1e-8 * scale) {
                throw DataError(std::string(which) + ": covariance is not symmetric");
            }
        }
    }
}

} // namespace detail

/**
 * Fréchet distance between two Gaussians:
 *   ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1 S2)^(1/2)).
 * The cross term uses tr((S1 S2)^(1/2)) = tr((sqrt(S1) S2 sqrt(S1))^(1/2)),
 * keeping every square root on a symmetric matrix. Eigenvalues down to -1e-8
 * are treated as zero; matrices indefinite beyond that tolerance are rejected.
 */
inline double frechet_distance(const std::vector<double> &mu1, const std::vector<double> &cov1,
                               const std::vector<double> &mu2, const std::vector<double> &cov2) {
    const std::size_t n = mu1.size();
    if (mu2.size() != n || n == 0) {
        throw std::invalid_argument("frechet_distance: mean dimension mismatch");
    }
    detail::check_covariance(cov1, n, "cov1");
    detail::check_covariance(cov2, n, "cov2");

    double mean_term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = mu1[i] - mu2[i];
        mean_term += d * d;
    }
    double trace1 = 0.0, trace2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        trace1 += cov1[i * n + i];
        trace2 += cov2[i * n + i];
    }

    const std::vector<double> root1 = linalg::sym_matrix_sqrt(cov1, n);
    std::vector<double> inner = linalg::matmul(linalg::matmul(root1, cov2, n), root1, n);
    // Symmetrize away round-off before the second square root.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (inner[i * n + j] + inner[j * n + i]);
            inner[i * n + j] = avg;
            inner[j * n + i] = avg;
        }
    }
    std::vector<double> vectors;
    std::vector<double> eigenvalues = linalg::jacobi_eigh(std::move(inner), n, vectors);
    double cross = 0.0;
    for (double lambda : eigenvalues) {
        if (lambda < -1e-8) {
            throw DataError("frechet_distance: cross product matrix indefinite beyond tolerance");
        }
        cross += lambda > 0.0 ? std::sqrt(lambda) : 0.0;
    }
    return mean_term + trace1 + trace2 - 2.0 * cross;
}

/// Sample mean and (n-1)-normalized covariance of row-major features [N, D].
inline void fit_gaussian(const std::vector<std::vector<double>> &rows, std::vector<double> &mu,
                         std::vector<double> &cov) {
    if (rows.size() < 2) {
        throw DataError("fit_gaussian: need at least two samples");
    }
    const std::size_t n = rows.size();
    const std::size_t d = rows[0].size();
    mu.assign(d, 0.0);
    for (const auto &row : rows) {
        if (row.size() != d) {
            throw DataError("fit_gaussian: ragged feature rows");
        }
        for (std::size_t j = 0; j < d; ++j) {
            mu[j] += row[j];
        }
    }
    for (double &v : mu) {
        v /= static_cast<double>(n);
    }
    cov.assign(d * d, 0.0);
    for (const auto &row : rows) {
        for (std::size_t i = 0; i < d; ++i) {
            const double di = row[i] - mu[i];
            for (std::size_t j = i; j < d; ++j) {
                cov[i * d + j] += di * (row[j] - mu[j]);
            }
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov[i * d + j] /= denom;
            cov[j * d + i] = cov[i * d + j];
        }
    }
}

} // namespace sdaqec
