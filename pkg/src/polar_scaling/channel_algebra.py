"""Exact BSC-mixture arithmetic for binary memoryless symmetric channels.

A BMS channel is stored through its BSC-decomposition ``sum_j a_j BSC(p_j)``.
Serial and parallel combination act bilinearly on the decomposition, so every
operation here is exact up to float rounding.  Atom counts grow quickly with
combination depth; this module is meant as a brute-force oracle for small
channels, not as a density-evolution engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MERGE_TOL = 1e-14


@dataclass(frozen=True)
class BscAtom:
    weight: float
    crossover: float


@dataclass(frozen=True)
class BscMix:
    """Weighted list of BSC atoms.  Canonical mixes are sorted by crossover."""

    atoms: tuple[BscAtom, ...]

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=float)

    @property
    def crossovers(self) -> np.ndarray:
        return np.array([a.crossover for a in self.atoms], dtype=float)

    def __len__(self) -> int:
        return len(self.atoms)

    @classmethod
    def from_arrays(cls, weights, crossovers) -> "BscMix":
        return canonicalize(cls(tuple(BscAtom(float(w), float(p))
                                      for w, p in zip(weights, crossovers))))


def _check_prob(p: float, name: str) -> None:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"{name}={p!r} is not a probability")


def make_bsc(p: float) -> BscMix:
    _check_prob(p, "p")
    return BscMix((BscAtom(1.0, min(p, 1.0 - p)),))


def make_bec(eps: float) -> BscMix:
    _check_prob(eps, "eps")
    atoms = [BscAtom(1.0 - eps, 0.0), BscAtom(eps, 0.5)]
    return BscMix(tuple(a for a in atoms if a.weight > 0.0))


def _canonical_arrays(w: np.ndarray, p: np.ndarray) -> BscMix:
    p = np.minimum(p, 1.0 - p)
    keep = w > 0.0
    w, p = w[keep], p[keep]
    order = np.argsort(p, kind="stable")
    w, p = w[order], p[order]
    atoms: list[BscAtom] = []
    if len(p):
        # group runs whose consecutive gaps are within MERGE_TOL relative to the
        # crossover: Z ~ 2 sqrt(p) near 0, so an absolute gap would move Z by ~sqrt(tol)
        breaks = np.flatnonzero(np.diff(p) > MERGE_TOL * p[1:]) + 1
        for idx in np.split(np.arange(len(p)), breaks):
            atoms.append(BscAtom(float(w[idx].sum()), float(p[idx[0]])))
    return BscMix(tuple(atoms))


def canonicalize(m: BscMix) -> BscMix:
    """Fold crossovers into [0, 1/2], merge equal ones, drop empty atoms."""
    return _canonical_arrays(m.weights, m.crossovers)


def serial(a: BscMix, b: BscMix) -> BscMix:
    """Check-node combination: ``BSC(p) S BSC(q) = BSC(p(1-q) + (1-p)q)``."""
    p = a.crossovers[:, None]
    q = b.crossovers[None, :]
    w = a.weights[:, None] * b.weights[None, :]
    # p*q and its complement, each summed from its own products so the fold
    # min(c, 1 - c) never forms 1 - c by cancellation
    star = p * (1.0 - q) + (1.0 - p) * q
    other = p * q + (1.0 - p) * (1.0 - q)
    return _canonical_arrays(w.ravel(), np.minimum(star, other).ravel())


def parallel(a: BscMix, b: BscMix) -> BscMix:
    """Variable-node combination.

    Each atom pair splits into a conflicting branch of weight ``p*q`` (the
    star product) and a consistent branch of weight ``1 - p*q``.
    """
    p = a.crossovers[:, None]
    q = b.crossovers[None, :]
    w = a.weights[:, None] * b.weights[None, :]
    pq, pqb, pbq, pbqb = p * q, p * (1.0 - q), (1.0 - p) * q, (1.0 - p) * (1.0 - q)
    ws, ps = [], []
    for x, y in ((pqb, pbq), (pq, pbqb)):
        weight = x + y
        live = weight > 0.0
        ws.append((w * weight)[live])
        ps.append(np.minimum(x, y)[live] / weight[live])
    return _canonical_arrays(np.concatenate(ws), np.concatenate(ps))


def bhattacharyya(m: BscMix) -> float:
    p = m.crossovers
    return float(np.sum(m.weights * 2.0 * np.sqrt(p * (1.0 - p))))


def bsc_from_z(z: float) -> float:
    """Crossover in [0, 1/2] of the BSC whose Bhattacharyya parameter is z."""
    _check_prob(z, "z")
    return 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - z * z)))


def random_mix(rng: np.random.Generator, atoms: int = 3) -> BscMix:
    """Random finite BSC mixture, handy for property tests."""
    w = rng.dirichlet(np.ones(atoms))
    p = rng.uniform(0.0, 0.5, size=atoms)
    return BscMix.from_arrays(w, p)
