"""Single-Trotter-step generalized coupled-cluster circuit and gradients.

Each excitation generator's anti-Hermitian Pauli form i*sum_s kappa_s P_s
is compiled into rotations exp(-i theta_k c_s P_s) with real c_s =
-kappa_s; strings inside one generator mutually commute, so a single
Trotter step is exact per generator.  String order within a generator is
frozen lexicographically and generator order follows the input list,
because Trotterized circuits are ordering-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .fermion import ExcitationGenerator
from .pauli import (PauliString, PauliSum, pauli_action, paulisum_action)
from .statevector import StateVector, apply_pauli_exponential

ROTATION_COEFF_TOL = 1e-12


@dataclass(frozen=True)
class Rotation:
    string: PauliString
    coefficient: float
    parameter_index: int


@dataclass(frozen=True)
class AnsatzCircuit:
    """Ordered Pauli rotations on working qubits only."""

    n_working_qubits: int
    rotations: Tuple[Rotation, ...]
    parameter_count: int

    def __post_init__(self):
        for rot in self.rotations:
            if not 0 <= rot.parameter_index < self.parameter_count:
                raise ValueError("rotation parameter index out of range")
            if rot.string.n_qubits != self.n_working_qubits:
                raise ValueError("rotation string register mismatch")


def parameter_vector(values: Sequence[float]) -> np.ndarray:
    theta = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")
    return theta


def build_uccgsd(generators: Sequence[ExcitationGenerator]) -> AnsatzCircuit:
    """Compile generators into the single-Trotter-step circuit."""
    if not generators:
        raise ValueError("no generators given")
    n_working = generators[0].pauli_form.n_qubits
    rotations: List[Rotation] = []
    for gen in generators:
        if gen.pauli_form.n_qubits != n_working:
            raise ValueError("generators disagree on the working register")
        for string, coeff in gen.pauli_form.sorted_terms():
            if abs(coeff.real) > ROTATION_COEFF_TOL:
                raise ValueError(
                    f"generator {gen.label()} is not anti-Hermitian")
            if max(string.support(), default=0) >= n_working:
                raise ValueError(
                    f"generator {gen.label()} touches ancilla indices")
            rotations.append(Rotation(string, -coeff.imag, gen.parameter_index))
    n_params = 1 + max(g.parameter_index for g in generators)
    return AnsatzCircuit(n_working, tuple(rotations), n_params)


def apply_ansatz(circuit: AnsatzCircuit, theta: Sequence[float],
                 state: StateVector) -> StateVector:
    """Apply U(theta) (x) 1 in place; ancilla qubits are never touched."""
    theta = parameter_vector(theta)
    if theta.size != circuit.parameter_count:
        raise ValueError(
            f"expected {circuit.parameter_count} parameters, got {theta.size}")
    if state.n_qubits < circuit.n_working_qubits:
        raise ValueError("state register smaller than the ansatz")
    for rot in circuit.rotations:
        angle = 2.0 * theta[rot.parameter_index] * rot.coefficient
        if angle != 0.0:
            apply_pauli_exponential(state, rot.string, angle)
    return state


def apply_ansatz_inverse(circuit: AnsatzCircuit, theta: Sequence[float],
                         state: StateVector) -> StateVector:
    theta = parameter_vector(theta)
    for rot in reversed(circuit.rotations):
        angle = -2.0 * theta[rot.parameter_index] * rot.coefficient
        if angle != 0.0:
            apply_pauli_exponential(state, rot.string, angle)
    return state


def circuit_unitary(circuit: AnsatzCircuit, theta: Sequence[float]) -> np.ndarray:
    """Dense matrix of U(theta), for small-register oracle checks."""
    dim = 1 << circuit.n_working_qubits
    cols = []
    for index in range(dim):
        state = StateVector(circuit.n_working_qubits)
        state.amplitudes[0] = 0.0
        state.amplitudes[index] = 1.0
        apply_ansatz(circuit, theta, state)
        cols.append(state.amplitudes)
    return np.array(cols).T


def expectation_objective(circuit: AnsatzCircuit, h: PauliSum,
                          initial: StateVector) -> Callable[[np.ndarray], float]:
    """theta -> <init| U^dag (H (x) 1) U |init> as a plain callable."""
    def objective(theta: np.ndarray) -> float:
        state = initial.copy()
        apply_ansatz(circuit, theta, state)
        value = 0.0 + 0.0j
        for string, coeff in h.items():
            value += coeff * np.vdot(state.amplitudes,
                                     pauli_action(string, state.n_qubits,
                                                  state.amplitudes))
        return float(value.real)
    return objective


def value_and_gradient(circuit: AnsatzCircuit, theta: Sequence[float],
                       h: PauliSum, initial: StateVector
                       ) -> Tuple[float, np.ndarray]:
    """Energy and its exact parameter-shift gradient in one double sweep.

    Every rotation r contributes the two-sided shift value
    (E(phi_r + pi/2) - E(phi_r - pi/2))/2, accumulated onto its parameter
    with the chain-rule factor 2*c_r.  The backward sweep evaluates those
    shifted expectations algebraically (equal by the rotation identity
    U(phi +- pi/2) = U(phi) exp(-+ i pi/4 P)), which costs O(R) instead of
    O(R^2) circuit executions; tests pin equality against literal shifted
    executions and finite differences.
    """
    theta = parameter_vector(theta)
    if theta.size != circuit.parameter_count:
        raise ValueError("parameter count mismatch")
    n = initial.n_qubits
    psi = initial.copy()
    apply_ansatz(circuit, theta, psi)
    lam = paulisum_action(h, n, psi.amplitudes)
    energy = float(np.vdot(psi.amplitudes, lam).real)
    grad = np.zeros(circuit.parameter_count)
    lam_state = StateVector(n, lam)  # raw H|psi>, deliberately unnormalized
    for rot in reversed(circuit.rotations):
        angle = 2.0 * theta[rot.parameter_index] * rot.coefficient
        if angle != 0.0:
            apply_pauli_exponential(psi, rot.string, -angle)
            apply_pauli_exponential(lam_state, rot.string, -angle)
        # d<H>/dphi_r = Im <lambda_r|P_r|psi_r>; undoing rotation r first
        # changes nothing because U_r commutes with its own string.
        p_psi = pauli_action(rot.string, n, psi.amplitudes)
        grad[rot.parameter_index] += 2.0 * rot.coefficient * float(
            np.vdot(lam_state.amplitudes, p_psi).imag)
    return energy, grad


def gradient(circuit: AnsatzCircuit, theta: Sequence[float], h: PauliSum,
             initial: StateVector, method: str = "sweep") -> np.ndarray:
    """Exact analytic gradient of the expectation objective.

    ``sweep`` evaluates the parameter-shift values in one backward pass;
    ``shifted`` runs the literal two shifted circuit executions per
    rotation (O(R^2), used as the oracle route in tests).
    """
    theta = parameter_vector(theta)
    if method == "sweep":
        return value_and_gradient(circuit, theta, h, initial)[1]
    if method != "shifted":
        raise ValueError(f"unknown gradient method {method!r}")
    objective = expectation_objective(circuit, h, initial)
    grad = np.zeros(circuit.parameter_count)
    for r, rot in enumerate(circuit.rotations):
        if rot.coefficient == 0.0:
            continue
        plus = _shifted_value(circuit, theta, r, math.pi / 2, objective, h, initial)
        minus = _shifted_value(circuit, theta, r, -math.pi / 2, objective, h, initial)
        grad[rot.parameter_index] += 2.0 * rot.coefficient * (plus - minus) / 2.0
    return grad


def _shifted_value(circuit: AnsatzCircuit, theta: np.ndarray, which: int,
                   shift: float, objective, h: PauliSum,
                   initial: StateVector) -> float:
    """Full expectation with rotation ``which`` shifted in its own angle."""
    state = initial.copy()
    for r, rot in enumerate(circuit.rotations):
        angle = 2.0 * theta[rot.parameter_index] * rot.coefficient
        if r == which:
            angle += shift
        if angle != 0.0:
            apply_pauli_exponential(state, rot.string, angle)
    value = 0.0 + 0.0j
    for string, coeff in h.items():
        value += coeff * np.vdot(state.amplitudes,
                                 pauli_action(string, state.n_qubits,
                                              state.amplitudes))
    return float(value.real)
