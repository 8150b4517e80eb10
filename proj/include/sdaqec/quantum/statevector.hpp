// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

/**
 * Exact n-qubit state. Amplitudes are indexed by computational basis state;
 * qubit 0 is the most significant bit of the index, so for two qubits the
 * order is |00>, |01>, |10>, |11>.
 */
struct Statevector {
    std::size_t n_qubits = 0;
    std::vector<std::complex<double>> amplitudes;

    Statevector() = default;

    explicit Statevector(std::size_t n)
        : n_qubits(n), amplitudes(static_cast<std::size_t>(1) << n, {0.0, 0.0}) {}

    std::size_t dim() const { return amplitudes.size(); }

    double norm_sq() const {
        double acc = 0.0;
        for (const auto &a : amplitudes) {
            acc += std::norm(a);
        }
        return acc;
    }
};

inline Statevector basis_state(std::size_t n_qubits, std::size_t index = 0) {
    Statevector psi(n_qubits);
    psi.amplitudes.at(index) = 1.0;
    return psi;
}

namespace detail {

inline void check_qubit(const Statevector &psi, std::size_t qubit, const char *op) {
    if (qubit >= psi.n_qubits) {
        throw std::out_of_range(std::string(op) + ": qubit " + std::to_string(qubit) +
                                " out of range for " + std::to_string(psi.n_qubits) + " qubits");
    }
}

/// Bit position stride for a qubit (qubit 0 is the most significant bit).
inline std::size_t qubit_stride(std::size_t n_qubits, std::size_t qubit) {
    return static_cast<std::size_t>(1) << (n_qubits - 1 - qubit);
}

} // namespace detail

/// Y-rotation by `theta` on one qubit, applied over strided amplitude pairs.
/// RY(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]].
inline void apply_ry(Statevector &psi, std::size_t qubit, double theta) {
    detail::check_qubit(psi, qubit, "apply_ry");
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    const std::size_t stride = detail::qubit_stride(psi.n_qubits, qubit);
    for (std::size_t base = 0; base < psi.dim(); base += 2 * stride) {
        for (std::size_t offset = 0; offset < stride; ++offset) {
            const std::size_t i0 = base + offset;
            const std::size_t i1 = i0 + stride;
            const std::complex<double> a0 = psi.amplitudes[i0];
            const std::complex<double> a1 = psi.amplitudes[i1];
            psi.amplitudes[i0] = c * a0 - s * a1;
            psi.amplitudes[i1] = s * a0 + c * a1;
        }
    }
}

/// Derivative of RY with respect to theta applied to a state:
/// dRY/dtheta = 0.5 * [[-sin(theta/2), -cos(theta/2)], [cos(theta/2), -sin(theta/2)]].
inline void apply_ry_derivative(Statevector &psi, std::size_t qubit, double theta) {
    detail::check_qubit(psi, qubit, "apply_ry_derivative");
    const double c = 0.5 * std::cos(theta / 2.0);
    const double s = 0.5 * std::sin(theta / 2.0);
    const std::size_t stride = detail::qubit_stride(psi.n_qubits, qubit);
    for (std::size_t base = 0; base < psi.dim(); base += 2 * stride) {
        for (std::size_t offset = 0; offset < stride; ++offset) {
            const std::size_t i0 = base + offset;
            const std::size_t i1 = i0 + stride;
            const std::complex<double> a0 = psi.amplitudes[i0];
            const std::complex<double> a1 = psi.amplitudes[i1];
            psi.amplitudes[i0] = -s * a0 - c * a1;
            psi.amplitudes[i1] = c * a0 - s * a1;
        }
    }
}

/// CNOT: swaps target-bit pairs on basis states whose control bit is 1.
inline void apply_cnot(Statevector &psi, std::size_t control, std::size_t target) {
    detail::check_qubit(psi, control, "apply_cnot");
    detail::check_qubit(psi, target, "apply_cnot");
    if (control == target) {
        throw std::invalid_argument("apply_cnot: control and target must differ");
    }
    const std::size_t cstride = detail::qubit_stride(psi.n_qubits, control);
    const std::size_t tstride = detail::qubit_stride(psi.n_qubits, target);
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        if ((i & cstride) != 0 && (i & tstride) == 0) {
            std::swap(psi.amplitudes[i], psi.amplitudes[i | tstride]);
        }
    }
}

/// Pauli-Z expectation of one qubit: sum of (+|-)|amplitude|^2 by bit value.
inline double measure_z(const Statevector &psi, std::size_t qubit) {
    detail::check_qubit(psi, qubit, "measure_z");
    const std::size_t stride = detail::qubit_stride(psi.n_qubits, qubit);
    double expectation = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        const double p = std::norm(psi.amplitudes[i]);
        expectation += (i & stride) ? -p : p;
    }
    return expectation;
}

/// L2-normalize a feature vector; the all-zero vector maps to e_0 so the
/// downstream encoding always receives a valid state. Values are pre-scaled
/// by the largest magnitude so the sum of squares cannot overflow.
inline std::vector<double> normalize_features(const std::vector<double> &f) {
    double peak = 0.0;
    for (double v : f) {
        if (!std::isfinite(v)) {
            throw DataError("normalize_features: non-finite input");
        }
        peak = std::max(peak, std::abs(v));
    }
    std::vector<double> out(f.size(), 0.0);
    if (peak == 0.0) {
        out[0] = 1.0;
        return out;
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = f[i] / peak;
        norm_sq += out[i] * out[i];
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double &v : out) {
        v *= inv;
    }
    return out;
}

/// Load a unit-norm real vector of length 2^n as the amplitudes of an n-qubit state.
inline Statevector amplitude_encode(const std::vector<double> &f_norm) {
    const std::size_t dim = f_norm.size();
    if (dim == 0 || (dim & (dim - 1)) != 0) {
        throw ConfigError("amplitude_encode: length must be a power of two, got " +
                          std::to_string(dim));
    }
    double norm_sq = 0.0;
    for (double v : f_norm) {
        norm_sq += v * v;
    }
    if (std::abs(norm_sq - 1.0) > 1e-9) {
        throw ConfigError("amplitude_encode: input is not unit norm");
    }
    std::size_t n = 0;
    while ((static_cast<std::size_t>(1) << n) < dim) {
        ++n;
    }
    Statevector psi(n);
    for (std::size_t i = 0; i < dim; ++i) {
        psi.amplitudes[i] = f_norm[i];
    }
    return psi;
}

} // namespace sdaqec
