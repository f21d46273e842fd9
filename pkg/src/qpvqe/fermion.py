"""Fermionic terms, Jordan-Wigner encoding, and excitation generators.

Spin-orbitals follow the interleaved ordering: spatial orbital p with
spin alpha sits on qubit 2p, spin beta on qubit 2p+1.  Creation operators
map as a_p^dag -> (prod_{k<p} Z_k)(X_p - i Y_p)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .pauli import PauliString, PauliSum, multiply


@dataclass(frozen=True)
class FermionTerm:
    """coefficient * a_{m1}^(d1) a_{m2}^(d2) ... with d in {dagger, not}."""

    coefficient: complex
    ladder: Tuple[Tuple[int, bool], ...]  # (mode, dagger)


def spin_orbital(spatial: int, spin: str) -> int:
    """Interleaved map: (p, alpha) -> 2p, (p, beta) -> 2p+1."""
    if spin not in ("a", "b"):
        raise ValueError("spin must be 'a' or 'b'")
    return 2 * spatial + (0 if spin == "a" else 1)


def spin_of(mode: int) -> float:
    """S_z contribution of one occupied mode: +1/2 alpha, -1/2 beta."""
    return 0.5 if mode % 2 == 0 else -0.5


def _ladder_paulisum(mode: int, dagger: bool, n_modes: int) -> PauliSum:
    z_prefix = {k: "Z" for k in range(mode)}
    x_string = PauliString.from_map(n_modes, {**z_prefix, mode: "X"})
    y_string = PauliString.from_map(n_modes, {**z_prefix, mode: "Y"})
    sign = -1.0j if dagger else 1.0j
    return PauliSum(n_modes, {x_string: 0.5, y_string: 0.5 * sign})


def jordan_wigner(term: FermionTerm, n_modes: int) -> PauliSum:
    """Standard JW image of one fermionic term, expanded and simplified."""
    for mode, _ in term.ladder:
        if not 0 <= mode < n_modes:
            raise ValueError(f"mode {mode} out of range for {n_modes} modes")
    acc: Dict[PauliString, complex] = {PauliString(n_modes): term.coefficient}
    for mode, dagger in term.ladder:
        factor = _ladder_paulisum(mode, dagger, n_modes)
        nxt: Dict[PauliString, complex] = {}
        for s_a, c_a in acc.items():
            for s_b, c_b in factor.items():
                phase, prod = multiply(s_a, s_b)
                nxt[prod] = nxt.get(prod, 0.0) + c_a * c_b * phase
        acc = nxt
    return PauliSum(n_modes, acc)


def jordan_wigner_sum(terms: Sequence[FermionTerm], n_modes: int) -> PauliSum:
    out = PauliSum(n_modes)
    for term in terms:
        out = out + jordan_wigner(term, n_modes)
    return out


def number_operator(n_modes: int) -> PauliSum:
    """JW image of N = sum_k a_k^dag a_k = sum_k (1 - Z_k)/2."""
    terms = {PauliString(n_modes): 0.5 * n_modes}
    for k in range(n_modes):
        terms[PauliString.from_map(n_modes, {k: "Z"})] = -0.5
    return PauliSum(n_modes, terms)


def sz_operator(n_modes: int) -> PauliSum:
    """JW image of S_z = (1/2) sum_p (n_{p,alpha} - n_{p,beta})."""
    if n_modes % 2:
        raise ValueError("interleaved register needs an even mode count")
    terms: Dict[PauliString, complex] = {}
    for k in range(n_modes):
        sign = -1.0 if k % 2 == 0 else 1.0  # (1 - Z)/2 with prefactor +-1/2
        terms[PauliString.from_map(n_modes, {k: "Z"})] = 0.25 * sign
    return PauliSum(n_modes, terms)


@dataclass(frozen=True)
class ExcitationGenerator:
    """Anti-Hermitian generator G - G^dag of one parameterized excitation.

    ``indices`` are spatial (p, q) for singles (both spin channels share the
    parameter) and spin-orbital (p, q, r, s) for doubles, meaning
    a_p^dag a_q^dag a_r a_s with p<q, r<s.
    """

    kind: str  # "single" | "double"
    indices: Tuple[int, ...]
    parameter_index: int
    pauli_form: PauliSum

    def __post_init__(self):
        if self.kind not in ("single", "double"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if not self.pauli_form.is_anti_hermitian(1e-12):
            raise ValueError("generator pauli_form must be anti-Hermitian")

    def label(self) -> str:
        head = "s" if self.kind == "single" else "d"
        return head + ":" + ",".join(str(i) for i in self.indices)


def _single_generator(p: int, q: int, n_modes: int) -> PauliSum:
    # Spin-restricted: alpha and beta channels of the spatial pair share t.
    terms = []
    for spin in ("a", "b"):
        hi, lo = spin_orbital(q, spin), spin_orbital(p, spin)
        terms.append(FermionTerm(1.0, ((hi, True), (lo, False))))
        terms.append(FermionTerm(-1.0, ((lo, True), (hi, False))))
    return jordan_wigner_sum(terms, n_modes)


def _double_generator(p: int, q: int, r: int, s: int, n_modes: int) -> PauliSum:
    terms = [
        FermionTerm(1.0, ((p, True), (q, True), (r, False), (s, False))),
        FermionTerm(-1.0, ((s, True), (r, True), (q, False), (p, False))),
    ]
    return jordan_wigner_sum(terms, n_modes)


def parse_excitation_label(label: str) -> Tuple[str, Tuple[int, ...]]:
    """Parse "s:0,1" or "d:0,1,2,3" into (kind, indices)."""
    head, _, rest = label.strip().partition(":")
    indices = tuple(int(t) for t in rest.split(",") if t.strip() != "")
    if head == "s" and len(indices) == 2:
        return "single", indices
    if head == "d" and len(indices) == 4:
        return "double", indices
    raise ValueError(f"bad excitation label {label!r}")


def enumerate_sz_excitations(
        m_spatial: int,
        include_doubles: bool = True,
        effective: Optional[Sequence[str]] = None) -> List[ExcitationGenerator]:
    """Generalized S_z-preserving excitation generators over 2M spin-orbitals.

    Full mode lists every spatial single pair p<q (one shared parameter per
    pair across the two spin channels) followed by every spin-orbital
    double a_p^dag a_q^dag a_r a_s with p<q, r<s, (p,q) < (r,s)
    lexicographically and matching pair spin projection, in ascending index
    order.  ``effective`` restricts to an explicit list of generator labels
    ("s:p,q" / "d:p,q,r,s"), preserving the given order.
    """
    if m_spatial < 1:
        raise ValueError("need at least one spatial orbital")
    n_modes = 2 * m_spatial

    def build(kind: str, indices: Tuple[int, ...], param: int) -> ExcitationGenerator:
        if kind == "single":
            p, q = indices
            if not 0 <= p < q < m_spatial:
                raise ValueError(f"bad spatial single indices {indices}")
            form = _single_generator(p, q, n_modes)
        else:
            p, q, r, s = indices
            if not (0 <= p < q < n_modes and 0 <= r < s < n_modes):
                raise ValueError(f"bad double indices {indices}")
            if (p, q) == (r, s):
                raise ValueError(f"double {indices} is diagonal")
            if spin_of(p) + spin_of(q) != spin_of(r) + spin_of(s):
                raise ValueError(f"double {indices} changes S_z")
            form = _double_generator(p, q, r, s, n_modes)
        if len(form) == 0:
            raise ValueError(f"excitation {kind}{indices} vanishes identically")
        return ExcitationGenerator(kind, indices, param, form)

    if effective is not None:
        labels = list(effective)
        if not labels:
            raise ValueError("effective excitation list is empty")
        return [build(*parse_excitation_label(lab), param)
                for param, lab in enumerate(labels)]

    generators: List[ExcitationGenerator] = []
    param = 0
    for p in range(m_spatial):
        for q in range(p + 1, m_spatial):
            generators.append(build("single", (p, q), param))
            param += 1
    if include_doubles:
        pairs = [(p, q) for p in range(n_modes) for q in range(p + 1, n_modes)]
        for i, (p, q) in enumerate(pairs):
            for (r, s) in pairs[i + 1:]:
                if spin_of(p) + spin_of(q) != spin_of(r) + spin_of(s):
                    continue
                generators.append(build("double", (p, q, r, s), param))
                param += 1
    return generators
