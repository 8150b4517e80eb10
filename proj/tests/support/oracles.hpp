// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace test_support {

// ---------------------------------------------------------------------------
// Central finite differences.
// ---------------------------------------------------------------------------

inline double central_difference(const std::function<double(double)> &f, double x,
                                 double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Relative agreement check used by the gradient suites: passes when
/// |a - b| <= atol + rtol * max(|a|, |b|).
inline bool grads_close(double analytic, double numeric, double rtol = 1e-4,
                        double atol = 1e-7) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return std::abs(analytic - numeric) <= atol + rtol * scale;
}

// ---------------------------------------------------------------------------
// Dense matrix quantum oracle. Basis convention matches the library: qubit 0
// is the most significant index bit.
// ---------------------------------------------------------------------------

using CMatrix = std::vector<std::vector<std::complex<double>>>;
using CVector = std::vector<std::complex<double>>;

inline CMatrix cidentity(std::size_t n) {
    CMatrix m(n, CVector(n, {0.0, 0.0}));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = 1.0;
    }
    return m;
}

inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    const std::size_t ar = a.size(), ac = a[0].size();
    const std::size_t br = b.size(), bc = b[0].size();
    CMatrix out(ar * br, CVector(ac * bc, {0.0, 0.0}));
    for (std::size_t i = 0; i < ar; ++i) {
        for (std::size_t j = 0; j < ac; ++j) {
            for (std::size_t k = 0; k < br; ++k) {
                for (std::size_t l = 0; l < bc; ++l) {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    return out;
}

inline CMatrix matmul(const CMatrix &a, const CMatrix &b) {
    const std::size_t n = a.size(), m = b[0].size(), k = b.size();
    CMatrix out(n, CVector(m, {0.0, 0.0}));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t j = 0; j < m; ++j) {
                out[i][j] += a[i][p] * b[p][j];
            }
        }
    }
    return out;
}

inline CVector matvec(const CMatrix &a, const CVector &x) {
    CVector y(a.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            y[i] += a[i][j] * x[j];
        }
    }
    return y;
}

inline CMatrix ry_matrix(double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    return {{std::complex<double>(c), std::complex<double>(-s)},
            {std::complex<double>(s), std::complex<double>(c)}};
}

/// Embed a single-qubit gate on `qubit` of an n-qubit register.
inline CMatrix single_qubit_full(const CMatrix &u, std::size_t qubit, std::size_t n_qubits) {
    CMatrix out = cidentity(1);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        out = kron(out, q == qubit ? u : cidentity(2));
    }
    return out;
}

/// Dense CNOT built directly from its action on basis states.
inline CMatrix cnot_full(std::size_t control, std::size_t target, std::size_t n_qubits) {
    const std::size_t dim = static_cast<std::size_t>(1) << n_qubits;
    const std::size_t cstride = static_cast<std::size_t>(1) << (n_qubits - 1 - control);
    const std::size_t tstride = static_cast<std::size_t>(1) << (n_qubits - 1 - target);
    CMatrix out(dim, CVector(dim, {0.0, 0.0}));
    for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t j = (i & cstride) ? (i ^ tstride) : i;
        out[j][i] = 1.0;
    }
    return out;
}

/// Full unitary of the layered RY/CNOT circuit (thetas row-major [L][Q]).
inline CMatrix circuit_unitary(const std::vector<double> &thetas, std::size_t n_layers,
                               std::size_t n_qubits) {
    const std::size_t dim = static_cast<std::size_t>(1) << n_qubits;
    CMatrix u = cidentity(dim);
    for (std::size_t layer = 0; layer < n_layers; ++layer) {
        for (std::size_t q = 0; q < n_qubits; ++q) {
            u = matmul(single_qubit_full(ry_matrix(thetas[layer * n_qubits + q]), q, n_qubits),
                       u);
        }
        for (std::size_t q = 0; q + 1 < n_qubits; ++q) {
            u = matmul(cnot_full(q, q + 1, n_qubits), u);
        }
    }
    return u;
}

inline double dense_measure_z(const CVector &psi, std::size_t qubit, std::size_t n_qubits) {
    const std::size_t stride = static_cast<std::size_t>(1) << (n_qubits - 1 - qubit);
    double expectation = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double p = std::norm(psi[i]);
        expectation += (i & stride) ? -p : p;
    }
    return expectation;
}

// ---------------------------------------------------------------------------
// Pairwise Mann-Whitney AUC with half credit for ties.
// ---------------------------------------------------------------------------

inline double mann_whitney_auc(const std::vector<double> &scores, const std::vector<int> &labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) {
            continue;
        }
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) {
                continue;
            }
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    if (pairs == 0) {
        throw std::invalid_argument("mann_whitney_auc: need both classes");
    }
    return wins / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// Denman-Beavers square root iteration (independent of eigendecompositions).
// ---------------------------------------------------------------------------

using DMatrix = std::vector<double>; // row-major square

inline DMatrix dinverse(DMatrix a, std::size_t n) {
    DMatrix inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        inv[i * n + i] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot * n + col]) < 1e-14) {
            throw std::runtime_error("dinverse: singular matrix");
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a[pivot * n + j], a[col * n + j]);
                std::swap(inv[pivot * n + j], inv[col * n + j]);
            }
        }
        const double diag = a[col * n + col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col * n + j] /= diag;
            inv[col * n + j] /= diag;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double factor = a[r * n + col];
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                a[r * n + j] -= factor * a[col * n + j];
                inv[r * n + j] -= factor * inv[col * n + j];
            }
        }
    }
    return inv;
}

inline DMatrix dmatmul(const DMatrix &a, const DMatrix &b, std::size_t n) {
    DMatrix c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                c[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    return c;
}

/// Matrix square root for matrices with positive real eigenvalues.
inline DMatrix denman_beavers_sqrt(const DMatrix &a, std::size_t n, int iterations = 60) {
    DMatrix y = a;
    DMatrix z(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        z[i * n + i] = 1.0;
    }
    for (int it = 0; it < iterations; ++it) {
        const DMatrix y_inv = dinverse(y, n);
        const DMatrix z_inv = dinverse(z, n);
        DMatrix y_next(n * n), z_next(n * n);
        for (std::size_t i = 0; i < n * n; ++i) {
            y_next[i] = 0.5 * (y[i] + z_inv[i]);
            z_next[i] = 0.5 * (z[i] + y_inv[i]);
        }
        y = std::move(y_next);
        z = std::move(z_next);
    }
    return y;
}

inline double dtrace(const DMatrix &a, std::size_t n) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t += a[i * n + i];
    }
    return t;
}

} // namespace test_support
