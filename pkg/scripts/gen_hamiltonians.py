#!/usr/bin/env python3
"""Generate the molecular qubit-Hamiltonian fixtures under data/hamiltonians/.

Contributor tool, not part of the engine: it runs a tiny restricted
Hartree-Fock (STO-3G, s and p shells, McMurchie-Davidson integrals),
transforms to the molecular-orbital basis, applies an optional frozen core,
and writes the Jordan-Wigner qubit Hamiltonian (interleaved spin-orbital
ordering) in the text format the harness parses.  Nuclear repulsion and any
core energy are folded into the identity coefficient so file energies are
total energies in Hartree.

Requires numpy + scipy (Boys function via hyp1f1).  Regenerating fixtures:

    python scripts/gen_hamiltonians.py --out data/hamiltonians
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys

import numpy as np
from scipy.special import hyp1f1

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qpvqe.fermion import FermionTerm, jordan_wigner_sum  # noqa: E402
from qpvqe.harness import serialize_hamiltonian  # noqa: E402

ANGSTROM_TO_BOHR = 1.8897259886

# STO-3G exponents/contractions (Basis Set Exchange values).
STO3G = {
    "H": [("S", [3.42525091, 0.62391373, 0.16885540],
           [0.15432897, 0.53532814, 0.44463454])],
    "Li": [("S", [16.1195750, 2.9362007, 0.7946505],
            [0.15432897, 0.53532814, 0.44463454]),
           ("SP", [0.6362897, 0.1478601, 0.0480887],
            [-0.09996723, 0.39951283, 0.70011547],
            [0.15591627, 0.60768372, 0.39195739])],
}

CHARGES = {"H": 1, "Li": 3}


def boys(m, x):
    return hyp1f1(m + 0.5, m + 1.5, -x) / (2.0 * m + 1.0)


def hermite_e(i, j, t, qx, a, b):
    """Hermite expansion coefficient E_t^{ij} for a Gaussian product."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (hermite_e(i - 1, j, t - 1, qx, a, b) / (2 * p)
                - (q * qx / a) * hermite_e(i - 1, j, t, qx, a, b)
                + (t + 1) * hermite_e(i - 1, j, t + 1, qx, a, b))
    return (hermite_e(i, j - 1, t - 1, qx, a, b) / (2 * p)
            + (q * qx / b) * hermite_e(i, j - 1, t, qx, a, b)
            + (t + 1) * hermite_e(i, j - 1, t + 1, qx, a, b))


def overlap_prim(a, lmn1, ra, b, lmn2, rb):
    s = 1.0
    for lx1, lx2, x1, x2 in zip(lmn1, lmn2, ra, rb):
        s *= hermite_e(lx1, lx2, 0, x1 - x2, a, b)
    return s * (math.pi / (a + b)) ** 1.5


def kinetic_prim(a, lmn1, ra, b, lmn2, rb):
    l2, m2, n2 = lmn2
    term0 = b * (2 * (l2 + m2 + n2) + 3) * overlap_prim(a, lmn1, ra, b, lmn2, rb)
    term1 = -2 * b * b * (
        overlap_prim(a, lmn1, ra, b, (l2 + 2, m2, n2), rb)
        + overlap_prim(a, lmn1, ra, b, (l2, m2 + 2, n2), rb)
        + overlap_prim(a, lmn1, ra, b, (l2, m2, n2 + 2), rb))
    term2 = -0.5 * (
        l2 * (l2 - 1) * overlap_prim(a, lmn1, ra, b, (l2 - 2, m2, n2), rb)
        + m2 * (m2 - 1) * overlap_prim(a, lmn1, ra, b, (l2, m2 - 2, n2), rb)
        + n2 * (n2 - 1) * overlap_prim(a, lmn1, ra, b, (l2, m2, n2 - 2), rb))
    return term0 + term1 + term2


def hermite_coulomb(t, u, v, n, p, pc):
    """Auxiliary R^n_{tuv} built on the Boys function."""
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * (pc[0] ** 2 + pc[1] ** 2 + pc[2] ** 2))
    if t > 0:
        val = pc[0] * hermite_coulomb(t - 1, u, v, n + 1, p, pc)
        if t > 1:
            val += (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, pc)
        return val
    if u > 0:
        val = pc[1] * hermite_coulomb(t, u - 1, v, n + 1, p, pc)
        if u > 1:
            val += (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, pc)
        return val
    val = pc[2] * hermite_coulomb(t, u, v - 1, n + 1, p, pc)
    if v > 1:
        val += (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, pc)
    return val


def nuclear_prim(a, lmn1, ra, b, lmn2, rb, rc):
    p = a + b
    rp = [(a * x1 + b * x2) / p for x1, x2 in zip(ra, rb)]
    pc = [x - xc for x, xc in zip(rp, rc)]
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        for u in range(lmn1[1] + lmn2[1] + 1):
            for v in range(lmn1[2] + lmn2[2] + 1):
                val += (hermite_e(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
                        * hermite_e(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
                        * hermite_e(lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b)
                        * hermite_coulomb(t, u, v, 0, p, pc))
    return val * 2.0 * math.pi / p


def eri_prim(a, lmn1, ra, b, lmn2, rb, c, lmn3, rc, d, lmn4, rd):
    p, q = a + b, c + d
    alpha = p * q / (p + q)
    rp = [(a * x1 + b * x2) / p for x1, x2 in zip(ra, rb)]
    rq = [(c * x3 + d * x4) / q for x3, x4 in zip(rc, rd)]
    pq = [x1 - x2 for x1, x2 in zip(rp, rq)]
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        for u in range(lmn1[1] + lmn2[1] + 1):
            for v in range(lmn1[2] + lmn2[2] + 1):
                e_ab = (hermite_e(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
                        * hermite_e(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
                        * hermite_e(lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b))
                if e_ab == 0.0:
                    continue
                for tau in range(lmn3[0] + lmn4[0] + 1):
                    for nu in range(lmn3[1] + lmn4[1] + 1):
                        for phi in range(lmn3[2] + lmn4[2] + 1):
                            e_cd = (hermite_e(lmn3[0], lmn4[0], tau, rc[0] - rd[0], c, d)
                                    * hermite_e(lmn3[1], lmn4[1], nu, rc[1] - rd[1], c, d)
                                    * hermite_e(lmn3[2], lmn4[2], phi, rc[2] - rd[2], c, d))
                            if e_cd == 0.0:
                                continue
                            val += (e_ab * e_cd * (-1.0) ** (tau + nu + phi)
                                    * hermite_coulomb(t + tau, u + nu, v + phi,
                                                      0, alpha, pq))
    return val * 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


class Contracted:
    """Contracted Cartesian Gaussian with normalized primitives."""

    def __init__(self, center, lmn, exps, coefs):
        self.center = tuple(center)
        self.lmn = tuple(lmn)
        self.exps = list(exps)
        norms = []
        for a in exps:
            s = overlap_prim(a, lmn, center, a, lmn, center)
            norms.append(1.0 / math.sqrt(s))
        self.coefs = [c * n for c, n in zip(coefs, norms)]
        # normalize the contraction
        s = 0.0
        for ca, a in zip(self.coefs, self.exps):
            for cb, b in zip(self.coefs, self.exps):
                s += ca * cb * overlap_prim(a, lmn, center, b, lmn, center)
        self.coefs = [c / math.sqrt(s) for c in self.coefs]


def build_basis(atoms):
    basis = []
    for symbol, center in atoms:
        for shell in STO3G[symbol]:
            if shell[0] == "S":
                _, exps, coefs = shell
                basis.append(Contracted(center, (0, 0, 0), exps, coefs))
            elif shell[0] == "SP":
                _, exps, s_coefs, p_coefs = shell
                basis.append(Contracted(center, (0, 0, 0), exps, s_coefs))
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    basis.append(Contracted(center, lmn, exps, p_coefs))
    return basis


def one_electron(basis, atoms, kernel):
    n = len(basis)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            gi, gj = basis[i], basis[j]
            val = 0.0
            for ca, a in zip(gi.coefs, gi.exps):
                for cb, b in zip(gj.coefs, gj.exps):
                    val += ca * cb * kernel(a, gi.lmn, gi.center,
                                            b, gj.lmn, gj.center)
            out[i, j] = out[j, i] = val
    return out


def nuclear_attraction(basis, atoms):
    n = len(basis)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            gi, gj = basis[i], basis[j]
            val = 0.0
            for symbol, rc in atoms:
                z = CHARGES[symbol]
                for ca, a in zip(gi.coefs, gi.exps):
                    for cb, b in zip(gj.coefs, gj.exps):
                        val -= z * ca * cb * nuclear_prim(
                            a, gi.lmn, gi.center, b, gj.lmn, gj.center, rc)
            out[i, j] = out[j, i] = val
    return out


def electron_repulsion(basis):
    n = len(basis)
    eri = np.zeros((n, n, n, n))
    done = set()
    for i, j, k, l in itertools.product(range(n), repeat=4):
        key = tuple(sorted([tuple(sorted([i, j])), tuple(sorted([k, l]))]))
        if key in done:
            continue
        done.add(key)
        gi, gj, gk, gl = basis[i], basis[j], basis[k], basis[l]
        val = 0.0
        for ca, a in zip(gi.coefs, gi.exps):
            for cb, b in zip(gj.coefs, gj.exps):
                for cc, c in zip(gk.coefs, gk.exps):
                    for cd, d in zip(gl.coefs, gl.exps):
                        val += ca * cb * cc * cd * eri_prim(
                            a, gi.lmn, gi.center, b, gj.lmn, gj.center,
                            c, gk.lmn, gk.center, d, gl.lmn, gl.center)
        for (p, q) in ((i, j), (j, i)):
            for (r, s) in ((k, l), (l, k)):
                eri[p, q, r, s] = eri[r, s, p, q] = val
    return eri


def nuclear_repulsion(atoms):
    e = 0.0
    for (s1, r1), (s2, r2) in itertools.combinations(atoms, 2):
        d = math.dist(r1, r2)
        e += CHARGES[s1] * CHARGES[s2] / d
    return e


def restricted_hartree_fock(h_core, s_mat, eri, n_electrons, max_iter=300,
                            tol=1e-12, damping=0.35):
    n = h_core.shape[0]
    n_occ = n_electrons // 2
    s_val, s_vec = np.linalg.eigh(s_mat)
    x = s_vec @ np.diag(s_val ** -0.5) @ s_vec.T
    density = np.zeros((n, n))
    energy = 0.0
    for it in range(max_iter):
        j_mat = np.einsum("pqrs,rs->pq", eri, density)
        k_mat = np.einsum("prqs,rs->pq", eri, density)
        fock = h_core + 2.0 * j_mat - k_mat
        f_prime = x.T @ fock @ x
        _, c_prime = np.linalg.eigh(f_prime)
        coeffs = x @ c_prime
        new_density = coeffs[:, :n_occ] @ coeffs[:, :n_occ].T
        if it > 0:
            new_density = (1 - damping) * new_density + damping * density
        new_energy = np.sum(new_density * (2.0 * h_core + 2.0 * j_mat - k_mat))
        if abs(new_energy - energy) < tol and it > 1:
            density = new_density
            break
        density, energy = new_density, new_energy
    # final clean diagonalization at converged density
    j_mat = np.einsum("pqrs,rs->pq", eri, density)
    k_mat = np.einsum("prqs,rs->pq", eri, density)
    fock = h_core + 2.0 * j_mat - k_mat
    _, c_prime = np.linalg.eigh(x.T @ fock @ x)
    coeffs = x @ c_prime
    density = coeffs[:, :n_occ] @ coeffs[:, :n_occ].T
    e_elec = np.sum(density * (h_core + fock))
    return e_elec, coeffs


def mo_integrals(h_core, eri, coeffs):
    h_mo = coeffs.T @ h_core @ coeffs
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, coeffs, coeffs,
                       coeffs, coeffs, optimize=True)
    return h_mo, eri_mo


def freeze_core(h_mo, eri_mo, n_freeze):
    """Fold the lowest n_freeze doubly-occupied orbitals into constants."""
    if n_freeze == 0:
        return 0.0, h_mo, eri_mo
    core = range(n_freeze)
    e_core = 0.0
    for c in core:
        e_core += 2.0 * h_mo[c, c]
        for c2 in core:
            e_core += 2.0 * eri_mo[c, c, c2, c2] - eri_mo[c, c2, c2, c]
    n = h_mo.shape[0]
    active = list(range(n_freeze, n))
    h_eff = np.zeros((len(active), len(active)))
    for i, p in enumerate(active):
        for j, q in enumerate(active):
            val = h_mo[p, q]
            for c in core:
                val += 2.0 * eri_mo[p, q, c, c] - eri_mo[p, c, c, q]
            h_eff[i, j] = val
    eri_eff = eri_mo[np.ix_(active, active, active, active)]
    return e_core, h_eff, eri_eff


def qubit_hamiltonian(h_mo, eri_mo, constant):
    """Second-quantized spin-orbital Hamiltonian, interleaved JW image."""
    m = h_mo.shape[0]
    n_modes = 2 * m
    terms = [FermionTerm(constant, ())]
    for p in range(m):
        for q in range(m):
            if abs(h_mo[p, q]) < 1e-14:
                continue
            for sigma in range(2):
                terms.append(FermionTerm(
                    h_mo[p, q], ((2 * p + sigma, True), (2 * q + sigma, False))))
    # 1/2 sum <PQ|RS> aP+ aQ+ aS aR with <PQ|RS> = (pr|qs) delta delta
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    coeff = 0.5 * eri_mo[p, r, q, s]
                    if abs(coeff) < 1e-14:
                        continue
                    for sp in range(2):
                        for sq in range(2):
                            mp, mq = 2 * p + sp, 2 * q + sq
                            mr, ms = 2 * r + sp, 2 * s + sq
                            if mp == mq or mr == ms:
                                continue
                            terms.append(FermionTerm(
                                coeff, ((mp, True), (mq, True),
                                        (ms, False), (mr, False))))
    return jordan_wigner_sum(terms, n_modes)


def molecule_hamiltonian(atoms, n_electrons, n_freeze=0):
    basis = build_basis(atoms)
    s_mat = one_electron(basis, atoms, overlap_prim)
    t_mat = one_electron(basis, atoms, kinetic_prim)
    v_mat = nuclear_attraction(basis, atoms)
    eri = electron_repulsion(basis)
    h_core = t_mat + v_mat
    e_elec, coeffs = restricted_hartree_fock(h_core, s_mat, eri, n_electrons)
    e_nuc = nuclear_repulsion(atoms)
    h_mo, eri_mo = mo_integrals(h_core, eri, coeffs)
    e_core, h_act, eri_act = freeze_core(h_mo, eri_mo, n_freeze)
    ham = qubit_hamiltonian(h_act, eri_act, e_nuc + e_core)
    return ham, e_elec + e_nuc


def h2_geometry(r_angstrom):
    r = r_angstrom * ANGSTROM_TO_BOHR
    return [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]


def lih_geometry(r_angstrom):
    r = r_angstrom * ANGSTROM_TO_BOHR
    return [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]


def h4_geometry(r_angstrom):
    r = r_angstrom * ANGSTROM_TO_BOHR
    return [("H", (0.0, 0.0, i * r)) for i in range(4)]


def write(ham, path, comment):
    with open(path, "w") as fh:
        fh.write(f"# {comment}\n")
        fh.write(serialize_hamiltonian(ham))
    print(f"wrote {path} ({len(ham)} terms)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/hamiltonians")
    parser.add_argument("--only", choices=["h2", "lih", "h4"], default=None)
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    if args.only in (None, "h2"):
        for i in range(26):
            r = 0.5 + 0.1 * i
            ham, e_hf = molecule_hamiltonian(h2_geometry(r), 2)
            write(ham, os.path.join(args.out, f"h2_{r:.2f}.ham"),
                  f"H2 STO-3G, bond length {r:.2f} A, RHF total {e_hf:.8f} Ha")
    if args.only in (None, "lih"):
        ham, e_hf = molecule_hamiltonian(lih_geometry(1.60), 4, n_freeze=1)
        write(ham, os.path.join(args.out, "lih_1.60.ham"),
              f"LiH STO-3G frozen-core, bond length 1.60 A, RHF total {e_hf:.8f} Ha")
    if args.only in (None, "h4"):
        ham, e_hf = molecule_hamiltonian(h4_geometry(0.90), 4)
        write(ham, os.path.join(args.out, "h4_0.90.ham"),
              f"Linear H4 STO-3G, spacing 0.90 A, RHF total {e_hf:.8f} Ha")


if __name__ == "__main__":
    main()
