// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"
#include "sdaqec/quantum/statevector.hpp"

namespace sdaqec {

/**
 * Trainable circuit shape: per layer, an RY rotation on every qubit followed
 * by a CNOT chain over adjacent qubits (open line, no wraparound). `thetas`
 * is row-major [n_layers][n_qubits]. `measured_qubits` allows the wide
 * encoding mode where only a prefix of the register is read out.
 */
struct CircuitParams {
    std::size_t n_qubits = 4;
    std::size_t n_layers = 2;
    std::size_t measured_qubits = 4;
    std::vector<double> thetas = std::vector<double>(8, 0.0);

    double theta(std::size_t layer, std::size_t qubit) const {
        return thetas[layer * n_qubits + qubit];
    }

    std::size_t parameter_count() const { return n_layers * n_qubits; }

    void validate() const {
        if (n_qubits == 0 || n_qubits > 12) {
            throw ConfigError("n_qubits must be in [1, 12]");
        }
        if (n_layers == 0) {
            throw ConfigError("n_layers must be positive");
        }
        if (measured_qubits == 0 || measured_qubits > n_qubits) {
            throw ConfigError("measured_qubits must be in [1, n_qubits]");
        }
        if (thetas.size() != n_layers * n_qubits) {
            throw ConfigError("thetas must have n_layers * n_qubits entries");
        }
        for (double t : thetas) {
            if (!std::isfinite(t)) {
                throw ConfigError("circuit angles must be finite");
            }
        }
    }
};

/// Classification head mapping measured expectations (or reduced features in
/// the ablation arm) to two logits.
struct HeadParams {
    std::size_t in_dim = 4;
    std::vector<double> w = std::vector<double>(8, 0.0); // [2][in_dim]
    std::vector<double> b = std::vector<double>(2, 0.0);

    std::size_t parameter_count() const { return w.size() + b.size(); }
};

/// Run the layered RY/CNOT circuit on an encoded state.
inline Statevector run_circuit(Statevector psi, const CircuitParams &params) {
    params.validate();
    if (psi.n_qubits != params.n_qubits) {
        throw ConfigError("run_circuit: state has " + std::to_string(psi.n_qubits) +
                          " qubits, circuit expects " + std::to_string(params.n_qubits));
    }
    for (std::size_t layer = 0; layer < params.n_layers; ++layer) {
        for (std::size_t q = 0; q < params.n_qubits; ++q) {
            apply_ry(psi, q, params.theta(layer, q));
        }
        for (std::size_t q = 0; q + 1 < params.n_qubits; ++q) {
            apply_cnot(psi, q, q + 1);
        }
    }
    return psi;
}

inline std::array<double, 2> softmax2(const std::array<double, 2> &z) {
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m);
    const double e1 = std::exp(z[1] - m);
    const double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

struct QuantumForward {
    std::vector<double> f_norm;
    bool zero_input = false;    // all-zero feature vector hit the e_0 fallback
    double input_norm = 0.0;    // L2 norm of the raw feature vector
    Statevector encoded;
    std::vector<Statevector> states_after_gate; // one entry per applied gate
    std::vector<double> expectations;           // measured_qubits values
    std::array<double, 2> logits{};
    std::array<double, 2> probs{};
};

/// Full quantum head: normalize -> encode -> circuit -> Z expectations ->
/// linear head -> softmax. The returned record keeps every intermediate state
/// so `quantum_backward` can run without re-simulation.
inline QuantumForward quantum_forward(const std::vector<double> &f_reduced,
                                      const CircuitParams &circuit, const HeadParams &head) {
    circuit.validate();
    const std::size_t dim = static_cast<std::size_t>(1) << circuit.n_qubits;
    if (f_reduced.size() != dim) {
        throw ConfigError("quantum_forward: feature dim " + std::to_string(f_reduced.size()) +
                          " does not match 2^" + std::to_string(circuit.n_qubits));
    }
    if (head.in_dim != circuit.measured_qubits || head.w.size() != 2 * head.in_dim) {
        throw ConfigError("quantum_forward: head dimensions do not match measured qubits");
    }

    for (double v : f_reduced) {
        if (!std::isfinite(v)) {
            throw TrainingDiverged("quantum_forward: non-finite feature vector");
        }
    }

    QuantumForward fwd;
    fwd.f_norm = normalize_features(f_reduced);
    // ||f|| recovered as f . f_norm, which cannot overflow for finite input.
    double norm = 0.0;
    for (std::size_t i = 0; i < f_reduced.size(); ++i) {
        norm += f_reduced[i] * fwd.f_norm[i];
    }
    fwd.input_norm = norm;
    fwd.zero_input = norm == 0.0;
    fwd.encoded = amplitude_encode(fwd.f_norm);

    Statevector psi = fwd.encoded;
    fwd.states_after_gate.reserve(circuit.n_layers * (2 * circuit.n_qubits - 1));
    for (std::size_t layer = 0; layer < circuit.n_layers; ++layer) {
        for (std::size_t q = 0; q < circuit.n_qubits; ++q) {
            apply_ry(psi, q, circuit.theta(layer, q));
            fwd.states_after_gate.push_back(psi);
        }
        for (std::size_t q = 0; q + 1 < circuit.n_qubits; ++q) {
            apply_cnot(psi, q, q + 1);
            fwd.states_after_gate.push_back(psi);
        }
    }

    fwd.expectations.resize(circuit.measured_qubits);
    for (std::size_t q = 0; q < circuit.measured_qubits; ++q) {
        fwd.expectations[q] = measure_z(psi, q);
    }

    for (std::size_t k = 0; k < 2; ++k) {
        double acc = head.b[k];
        for (std::size_t q = 0; q < head.in_dim; ++q) {
            acc += head.w[k * head.in_dim + q] * fwd.expectations[q];
        }
        fwd.logits[k] = acc;
    }
    fwd.probs = softmax2(fwd.logits);
    return fwd;
}

struct QuantumGradients {
    std::vector<double> d_thetas;   // [n_layers * n_qubits]
    std::vector<double> d_head_w;   // [2 * in_dim]
    std::array<double, 2> d_head_b{};
    std::vector<double> d_features; // w.r.t. the raw reduced features
};

/**
 * Reverse-mode gradients through the exact simulation.
 *
 * The state gradient is seeded from d(loss)/d(expectations), mapped through
 * the |amplitude|^2 measurement, then pulled back gate by gate: each unitary
 * U contributes its angle gradient Re<g, dU/dtheta psi_in> and propagates the
 * state gradient as U^dagger g. The L2 normalization of the feature vector is
 * differentiated exactly; the zero-vector fallback is a constant with zero
 * gradient.
 */
inline QuantumGradients quantum_backward(const QuantumForward &fwd, const CircuitParams &circuit,
                                         const HeadParams &head,
                                         const std::array<double, 2> &d_logits) {
    QuantumGradients grads;
    grads.d_thetas.assign(circuit.parameter_count(), 0.0);
    grads.d_head_w.assign(head.w.size(), 0.0);
    grads.d_features.assign(fwd.f_norm.size(), 0.0);

    // Head: z = W m + b.
    std::vector<double> d_expect(head.in_dim, 0.0);
    for (std::size_t k = 0; k < 2; ++k) {
        grads.d_head_b[k] = d_logits[k];
        for (std::size_t q = 0; q < head.in_dim; ++q) {
            grads.d_head_w[k * head.in_dim + q] = d_logits[k] * fwd.expectations[q];
            d_expect[q] += d_logits[k] * head.w[k * head.in_dim + q];
        }
    }

    // Measurement: m_q = sum_i s_q(i) |a_i|^2  =>  g_i = 2 a_i sum_q s_q(i) dm_q.
    const Statevector &final_state = fwd.states_after_gate.empty()
                                         ? fwd.encoded
                                         : fwd.states_after_gate.back();
    Statevector g(circuit.n_qubits);
    for (std::size_t i = 0; i < final_state.dim(); ++i) {
        double sign_sum = 0.0;
        for (std::size_t q = 0; q < head.in_dim; ++q) {
            const std::size_t stride = detail::qubit_stride(circuit.n_qubits, q);
            sign_sum += (i & stride) ? -d_expect[q] : d_expect[q];
        }
        g.amplitudes[i] = 2.0 * sign_sum * final_state.amplitudes[i];
    }

    // Walk the gate list backwards.
    std::size_t gate = fwd.states_after_gate.size();
    for (std::size_t layer = circuit.n_layers; layer-- > 0;) {
        for (std::size_t q = circuit.n_qubits - 1; q + 1 >= 2; --q) {
            --gate;
            apply_cnot(g, q - 1, q); // CNOT is self-inverse
        }
        for (std::size_t q = circuit.n_qubits; q-- > 0;) {
            --gate;
            const Statevector &input_state =
                gate == 0 ? fwd.encoded : fwd.states_after_gate[gate - 1];
            const double theta = circuit.theta(layer, q);

            Statevector dpsi = input_state;
            apply_ry_derivative(dpsi, q, theta);
            double acc = 0.0;
            for (std::size_t i = 0; i < dpsi.dim(); ++i) {
                acc += std::real(std::conj(g.amplitudes[i]) * dpsi.amplitudes[i]);
            }
            grads.d_thetas[layer * circuit.n_qubits + q] = acc;

            apply_ry(g, q, -theta); // RY(theta)^dagger
        }
    }

    // Through the encoding (identity on real amplitudes) and the normalization.
    if (!fwd.zero_input) {
        std::vector<double> g_fnorm(fwd.f_norm.size());
        for (std::size_t i = 0; i < g_fnorm.size(); ++i) {
            g_fnorm[i] = std::real(g.amplitudes[i]);
        }
        double dot = 0.0;
        for (std::size_t i = 0; i < g_fnorm.size(); ++i) {
            dot += g_fnorm[i] * fwd.f_norm[i];
        }
        for (std::size_t i = 0; i < g_fnorm.size(); ++i) {
            grads.d_features[i] = (g_fnorm[i] - fwd.f_norm[i] * dot) / fwd.input_norm;
        }
    }
    return grads;
}

/// Gradient of per-qubit Z expectations with respect to one circuit angle via
/// the parameter-shift identity. Used as an independent check of
/// `quantum_backward`, not as the production gradient path.
inline std::vector<double> parameter_shift_expectation_grad(const std::vector<double> &f_reduced,
                                                            const CircuitParams &circuit,
                                                            std::size_t theta_index) {
    const double half_pi = 1.5707963267948966;
    CircuitParams plus = circuit;
    CircuitParams minus = circuit;
    plus.thetas[theta_index] += half_pi;
    minus.thetas[theta_index] -= half_pi;

    const std::vector<double> f_norm = normalize_features(f_reduced);
    const Statevector psi_plus = run_circuit(amplitude_encode(f_norm), plus);
    const Statevector psi_minus = run_circuit(amplitude_encode(f_norm), minus);

    std::vector<double> grad(circuit.measured_qubits);
    for (std::size_t q = 0; q < circuit.measured_qubits; ++q) {
        grad[q] = 0.5 * (measure_z(psi_plus, q) - measure_z(psi_minus, q));
    }
    return grad;
}

/// Human-readable gate listing for the audit subcommand.
inline std::string describe_circuit(const CircuitParams &params) {
    params.validate();
    std::string out;
    out += "qubits: " + std::to_string(params.n_qubits) + "\n";
    out += "layers: " + std::to_string(params.n_layers) + "\n";
    out += "measured qubits: " + std::to_string(params.measured_qubits) + "\n";
    out += "circuit parameters: " + std::to_string(params.parameter_count()) + "\n";
    for (std::size_t layer = 0; layer < params.n_layers; ++layer) {
        out += "layer " + std::to_string(layer) + ":\n";
        for (std::size_t q = 0; q < params.n_qubits; ++q) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "  RY(q%zu, theta=%.6f)\n", q,
                          params.theta(layer, q));
            out += buf;
        }
        for (std::size_t q = 0; q + 1 < params.n_qubits; ++q) {
            out += "  CNOT(q" + std::to_string(q) + " -> q" + std::to_string(q + 1) + ")\n";
        }
    }
    for (std::size_t q = 0; q < params.measured_qubits; ++q) {
        out += "measure <Z> on q" + std::to_string(q) + "\n";
    }
    return out;
}

} // namespace sdaqec
