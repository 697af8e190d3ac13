"""Real Lie algebras given by structure constants.

Array layout: ``c[k, i, j]`` holds C^k_{ij}, the coefficient of e_k in
[e_i, e_j].  Indices are 0-based internally and 1-based in JSON.

Operator conventions (the single place they are fixed):

* ``coadjoint_matrix(alg, zeta)`` is A_zeta with A_zeta x = Pi(x) zeta, where
  Pi_ij(x) = C^k_ij x_k.  Entry (i, k) equals sum_j C^k_ij zeta_j.
* ``adjoint_matrix(alg, zeta)`` is the transpose of A_zeta, i.e. entry (k, i)
  equals sum_j C^k_ij zeta_j, the matrix of eta -> [eta, zeta].  Transposition
  makes the two operators share a characteristic polynomial, which is the
  property every spectral test in this package relies on.  The map
  eta -> [zeta, eta] is its negative and has the negated spectrum, which does
  not change whether zeta is hyperbolic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AntisymmetryViolation,
    InvalidParameter,
    JacobiViolation,
    ParseError,
    SchemaError,
)
from .spectrum import EPS_IM, EPS_RE, SpectrumReport, spectrum

ANTISYMMETRY_TOL = 1e-12
JACOBI_TOL = 1e-10
MAX_DIM = 8
DEFAULT_SEED = 1729

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in itertools.permutations(range(3)):
    LEVI_CIVITA[_i, _j, _k] = (_j - _i) * (_k - _i) * (_k - _j) / 2


def jacobi_residual(c: np.ndarray) -> float:
    """Max |sum_m C^m_ij C^l_mk + cyclic| over all (i, j, k, l)."""
    # t[l, i, j, k] = sum_m C^m_ij C^l_mk
    t = np.einsum("mij,lmk->lijk", c, c)
    cyc = t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


@dataclass(frozen=True)
class StructureConstants:
    dim: int
    c: np.ndarray = field(repr=False)
    jacobi: float = 0.0

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.c, np.asarray(x, float), np.asarray(y, float))

    def poisson_matrix(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x, float), self.c, axes=(0, 0))

    def to_json_dict(self) -> dict:
        entries = []
        for i, j in itertools.combinations(range(self.dim), 2):
            for k in range(self.dim):
                v = float(self.c[k, i, j])
                if v != 0.0:
                    entries.append({"k": k + 1, "i": i + 1, "j": j + 1, "value": v})
        return {"dim": self.dim, "c": entries}

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructureConstants):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.c, other.c)

    def __hash__(self) -> int:
        return hash((self.dim, self.c.tobytes()))


@dataclass(frozen=True)
class EllisMacCallumData:
    m: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(3, 3)
        a = np.array(self.a, dtype=float).reshape(3)
        if not np.array_equal(m, m.T):
            raise InvalidParameter("m must be exactly symmetric")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(a))):
            raise InvalidParameter("m and a must be finite")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "a", a)

    @property
    def klass(self) -> str:
        return "A" if not np.any(self.a) else "B"

    def to_json_dict(self) -> dict:
        return {"m": self.m.tolist(), "a": self.a.tolist()}


def new_lie_algebra(c, dim: int | None = None) -> StructureConstants:
    arr = np.array(c, dtype=float)
    if arr.ndim != 3 or len(set(arr.shape)) != 1:
        raise InvalidParameter(f"structure constants must be n x n x n, got {arr.shape}")
    n = arr.shape[0]
    if dim is not None and dim != n:
        raise InvalidParameter(f"dim={dim} does not match array size {n}")
    if not 1 <= n <= MAX_DIM:
        raise InvalidParameter(f"dimension {n} outside 1..{MAX_DIM}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("structure constants must be finite")
    asym = float(np.max(np.abs(arr + arr.transpose(0, 2, 1))))
    if asym > ANTISYMMETRY_TOL:
        raise AntisymmetryViolation(f"max |C^k_ij + C^k_ji| = {asym:.3e}")
    arr = 0.5 * (arr - arr.transpose(0, 2, 1))
    jac = jacobi_residual(arr)
    if jac > JACOBI_TOL:
        raise JacobiViolation(f"Jacobi residual {jac:.3e} exceeds {JACOBI_TOL:g}")
    arr.setflags(write=False)
    return StructureConstants(n, arr, jac)


def from_upper_entries(dim: int, entries) -> StructureConstants:
    """Build from (k, i, j, value) with i < j, 0-based; lower half is implied."""
    arr = np.zeros((dim, dim, dim))
    for k, i, j, v in entries:
        if not i < j:
            raise InvalidParameter(f"entry ({k},{i},{j}) needs i < j")
        arr[k, i, j] += v
        arr[k, j, i] -= v
    return new_lie_algebra(arr, dim)


def em_tensor(m, a) -> np.ndarray:
    """C^i_jk = eps_jks m^si + delta^i_k a_j - delta^i_j a_k as c[i, j, k]."""
    m = np.asarray(m, float)
    a = np.asarray(a, float)
    eye = np.eye(3)
    return (
        np.einsum("jks,si->ijk", LEVI_CIVITA, m)
        + np.einsum("ik,j->ijk", eye, a)
        - np.einsum("ij,k->ijk", eye, a)
    )


def from_ellis_maccallum(data: EllisMacCallumData) -> StructureConstants:
    return new_lie_algebra(em_tensor(data.m, data.a), 3)


def adjoint_matrix(alg: StructureConstants, zeta) -> np.ndarray:
    return coadjoint_matrix(alg, zeta).T.copy()


def coadjoint_matrix(alg: StructureConstants, zeta) -> np.ndarray:
    z = np.asarray(zeta, dtype=float)
    return np.einsum("kij,j->ik", alg.c, z)


@dataclass(frozen=True)
class HyperbolicSearch:
    n_random: int = 256
    rng_seed: int = DEFAULT_SEED
    eps_re: float = EPS_RE
    eps_im: float = EPS_IM


def hyperbolic_candidates(n: int, config: HyperbolicSearch):
    """Yield candidates in the fixed order: e_i, then +-e_i +- e_j, then random."""
    eye = np.eye(n)
    for i in range(n):
        yield eye[i]
    for i, j in itertools.combinations(range(n), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            yield si * eye[i] + sj * eye[j]
    rng = np.random.default_rng(config.rng_seed)
    for _ in range(config.n_random):
        v = rng.standard_normal(n)
        yield v / np.linalg.norm(v)


def hyperbolic_eigenvalue(report: SpectrumReport, config: HyperbolicSearch) -> float | None:
    reals = [
        z.real
        for z in report.eigenvalues
        if abs(z.imag) < config.eps_im and abs(z.real) > config.eps_re
    ]
    if not reals:
        return None
    return max(reals, key=lambda r: (abs(r), r))


def find_hyperbolic_element(
    alg: StructureConstants, config: HyperbolicSearch | None = None
) -> tuple[np.ndarray, float] | None:
    config = config or HyperbolicSearch()
    for zeta in hyperbolic_candidates(alg.dim, config):
        lam = hyperbolic_eigenvalue(spectrum(adjoint_matrix(alg, zeta)), config)
        if lam is not None:
            return zeta, lam
    return None


# ---------------------------------------------------------------- JSON I/O

def algebra_from_json_dict(obj) -> StructureConstants:
    if not isinstance(obj, dict) or "dim" not in obj or "c" not in obj:
        raise SchemaError("algebra JSON needs keys 'dim' and 'c'")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or not 1 <= dim <= MAX_DIM:
        raise SchemaError(f"'dim' must be an integer in 1..{MAX_DIM}")
    if not isinstance(obj["c"], list):
        raise SchemaError("'c' must be a list")
    entries = []
    for e in obj["c"]:
        if not isinstance(e, dict) or set(e) != {"k", "i", "j", "value"}:
            raise SchemaError("each entry needs exactly k, i, j, value")
        k, i, j, v = e["k"], e["i"], e["j"], e["value"]
        for idx in (k, i, j):
            if not isinstance(idx, int) or isinstance(idx, bool) or not 1 <= idx <= dim:
                raise SchemaError(f"index {idx!r} outside 1..{dim}")
        if not i < j:
            raise SchemaError(f"entry (k={k}, i={i}, j={j}) must have i < j")
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaError(f"value {v!r} is not a number")
        entries.append((k - 1, i - 1, j - 1, float(v)))
    return from_upper_entries(dim, entries)


def algebra_from_json(text: str) -> StructureConstants:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return algebra_from_json_dict(obj)


def algebra_to_json(alg: StructureConstants) -> str:
    return json.dumps(alg.to_json_dict())
