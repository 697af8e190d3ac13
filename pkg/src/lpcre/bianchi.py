"""Bianchi catalog of three-dimensional real Lie algebras.

Each entry keeps three things apart:

* ``em``: the Ellis-MacCallum pair (m, a) of the type,
* ``table_poisson``: the tabulated Poisson tensor as linear forms in x,
  stored as ``coef[i, j, k]`` = coefficient of x_k in Pi_ij,
* ``algebra``: the structure constants read off the tabulated tensor, which
  is what every downstream computation uses.

``em_algebra`` is the algebra generated from (m, a) by the EM formula. For
one row (V) the two disagree by the orientation of e3; ``em_agrees`` reports
this instead of hiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    LEVI_CIVITA,
    EllisMacCallumData,
    StructureConstants,
    em_tensor,
    find_hyperbolic_element,
    from_ellis_maccallum,
    new_lie_algebra,
)
from .errors import InvalidParameter, NotEMAdapted, UnrecognizedForm
from .poisson import LiePoisson, ScalarFunction

MATCH_TOL = 1e-12

TAGS = ("I", "II", "VI_MINUS_1", "VII_0", "VIII", "IX", "III", "IV", "V", "VI_H", "VII_H")
ALPHA = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

_DISPLAY = {"VI_MINUS_1": "VI_-1", "VII_0": "VII_0", "VI_H": "VI_h", "VII_H": "VII_h"}


@dataclass(frozen=True)
class BianchiType:
    tag: str
    h: float | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidParameter(f"unknown Bianchi tag {self.tag!r}")
        if self.tag in ("VI_H", "VII_H"):
            if self.h is None or not math.isfinite(self.h):
                raise InvalidParameter(f"{self.tag} needs a finite parameter h")
            h = float(self.h)
            object.__setattr__(self, "h", h)
            if self.tag == "VI_H" and h in (0.0, -1.0, 1.0):
                alias = {0.0: "III", -1.0: "VI_MINUS_1", 1.0: "V"}[h]
                raise InvalidParameter(f"VI_h requires h not in {{0, -1, 1}} (h={h:g} is {alias})")
            if self.tag == "VII_H" and h == 0.0:
                raise InvalidParameter("VII_h requires h != 0 (h=0 is VII_0)")
        elif self.h is not None:
            raise InvalidParameter(f"{self.tag} takes no parameter")

    @property
    def klass(self) -> str:
        return "A" if self.tag in ("I", "II", "VI_MINUS_1", "VII_0", "VIII", "IX") else "B"

    @property
    def name(self) -> str:
        base = _DISPLAY.get(self.tag, self.tag)
        return base if self.h is None else f"{base}(h={self.h:g})"

    def to_json_dict(self) -> dict:
        return {"tag": self.tag, "h": self.h}

    @classmethod
    def parse(cls, text: str) -> "BianchiType":
        """Parse ``VIII``, ``VI_H:2``, ``VII_h=3`` or ``VI_-1``."""
        t = text.strip()
        for sep in (":", "="):
            if sep in t:
                tag, h = t.split(sep, 1)
                return cls(tag.strip().upper(), float(h))
        t = t.upper()
        aliases = {"VI_-1": "VI_MINUS_1", "VI-1": "VI_MINUS_1", "VII0": "VII_0"}
        return cls(aliases.get(t, t))


# ----------------------------------------------------------- table data

def ellis_maccallum(bt: BianchiType) -> EllisMacCallumData:
    z = np.zeros(3)
    e3 = np.array([0.0, 0.0, 1.0])
    tag, h = bt.tag, bt.h
    if tag == "I":
        return EllisMacCallumData(np.zeros((3, 3)), z)
    if tag == "II":
        return EllisMacCallumData(np.diag([1.0, 0, 0]), z)
    if tag == "VI_MINUS_1":
        return EllisMacCallumData(-ALPHA, z)
    if tag == "VII_0":
        return EllisMacCallumData(np.diag([-1.0, -1, 0]), z)
    if tag == "VIII":
        return EllisMacCallumData(np.diag([-1.0, 1, 1]), z)
    if tag == "IX":
        return EllisMacCallumData(np.diag([1.0, 1, 1]), z)
    if tag == "III":
        return EllisMacCallumData(-0.5 * ALPHA, -0.5 * e3)
    if tag == "IV":
        return EllisMacCallumData(np.diag([1.0, 0, 0]), -e3)
    if tag == "V":
        return EllisMacCallumData(np.zeros((3, 3)), -e3)
    if tag == "VI_H":
        return EllisMacCallumData((h - 1) / 2 * ALPHA, -(h + 1) / 2 * e3)
    return EllisMacCallumData(np.diag([-1.0, -1, 0]) + h / 2 * ALPHA, -h / 2 * e3)


def _forms(upper: dict) -> np.ndarray:
    """Antisymmetric coefficient array from {(i, j): {k: coef}} (1-based, i<j)."""
    coef = np.zeros((3, 3, 3))
    for (i, j), form in upper.items():
        for k, v in form.items():
            coef[i - 1, j - 1, k - 1] = v
            coef[j - 1, i - 1, k - 1] = -v
    return coef


def table_poisson(bt: BianchiType) -> np.ndarray:
    """Tabulated Poisson tensor, coef[i, j, k] = coefficient of x_k in Pi_ij."""
    tag, h = bt.tag, bt.h
    rows = {
        "I": {},
        "II": {(2, 3): {1: 1}},
        "VI_MINUS_1": {(1, 3): {1: 1}, (2, 3): {2: -1}},
        "VII_0": {(1, 3): {2: 1}, (2, 3): {1: -1}},
        "VIII": {(1, 2): {3: 1}, (1, 3): {2: -1}, (2, 3): {1: -1}},
        "IX": {(1, 2): {3: 1}, (1, 3): {2: -1}, (2, 3): {1: 1}},
        "III": {(1, 3): {1: 1}},
        "IV": {(1, 3): {1: 1}, (2, 3): {1: 1, 2: 1}},
        "V": {(1, 3): {1: -1}, (2, 3): {2: -1}},
    }
    if tag in rows:
        return _forms(rows[tag])
    if tag == "VI_H":
        return _forms({(1, 3): {1: 1}, (2, 3): {2: h}})
    return _forms({(1, 3): {2: 1}, (2, 3): {1: -1, 2: h}})


def constants_from_forms(coef: np.ndarray) -> StructureConstants:
    """Pi_ij = C^k_ij x_k, so C^k_ij is coef[i, j, k]."""
    return new_lie_algebra(np.transpose(coef, (2, 0, 1)), 3)


def forms_from_constants(alg: StructureConstants) -> np.ndarray:
    return np.transpose(alg.c, (1, 2, 0)).copy()


# --------------------------------------------------------------- Casimirs

def _pos_x1(x):
    return x[0] > 0


def _casimirs(bt: BianchiType) -> list[ScalarFunction]:
    tag, h = bt.tag, bt.h
    e = np.eye(3)
    sf = ScalarFunction
    if tag == "I":
        return [sf(f"x{i + 1}", (lambda x, i=i: x[i]), (lambda x, i=i: e[i].copy()), casimir=True)
                for i in range(3)]
    if tag == "II":
        return [sf("x1", lambda x: x[0], lambda x: e[0].copy(), casimir=True)]
    if tag == "VI_MINUS_1":
        return [sf("x1*x2", lambda x: x[0] * x[1], lambda x: np.array([x[1], x[0], 0.0]),
                   casimir=True)]
    if tag == "VII_0":
        return [sf("x1**2 + x2**2", lambda x: x[0] ** 2 + x[1] ** 2,
                   lambda x: np.array([2 * x[0], 2 * x[1], 0.0]), casimir=True)]
    if tag == "VIII":
        return [sf("-x1**2 + x2**2 + x3**2", lambda x: -x[0] ** 2 + x[1] ** 2 + x[2] ** 2,
                   lambda x: np.array([-2 * x[0], 2 * x[1], 2 * x[2]]), casimir=True)]
    if tag == "IX":
        return [sf("x1**2 + x2**2 + x3**2", lambda x: float(x @ x),
                   lambda x: 2 * np.asarray(x, float), casimir=True)]
    if tag == "III":
        return [sf("x2", lambda x: x[1], lambda x: e[1].copy(), casimir=True)]
    if tag == "IV":
        return [sf("x2/x1 - log(x1)", lambda x: x[1] / x[0] - math.log(x[0]),
                   lambda x: np.array([-x[1] / x[0] ** 2 - 1 / x[0], 1 / x[0], 0.0]),
                   _pos_x1, True, "x1 > 0")]
    if tag == "V":
        return [sf("x2/x1", lambda x: x[1] / x[0],
                   lambda x: np.array([-x[1] / x[0] ** 2, 1 / x[0], 0.0]),
                   _pos_x1, True, "x1 > 0")]
    if tag == "VI_H":
        return [sf(f"x2*x1**({-h:g})", lambda x: x[1] * x[0] ** (-h),
                   lambda x: np.array([-h * x[1] * x[0] ** (-h - 1), x[0] ** (-h), 0.0]),
                   _pos_x1, True, "x1 > 0")]
    return [_vii_casimir(h)]


def _vii_casimir(h: float) -> ScalarFunction:
    """Casimir of VII_h built from the invariant linear forms u = x1 + mu x2.

    The tensor generates the planar flow x1' = -x2, x2' = x1 - h x2, whose
    matrix has eigenvalues mu with mu**2 + h mu + 1 = 0; u' = mu u.
    """
    if abs(h) > 2:
        r = math.sqrt(h * h - 4)
        m1, m2 = (-h - r) / 2, (-h + r) / 2

        def f(x):
            u1, u2 = x[0] + m1 * x[1], x[0] + m2 * x[1]
            return m2 * math.log(abs(u1)) - m1 * math.log(abs(u2))

        def g(x):
            u1, u2 = x[0] + m1 * x[1], x[0] + m2 * x[1]
            return np.array([m2 / u1 - m1 / u2, m2 * m1 / u1 - m1 * m2 / u2, 0.0])

        def dom(x):
            return x[0] + m1 * x[1] != 0 and x[0] + m2 * x[1] != 0

        name = f"{m2:.17g}*log|x1 + {m1:.17g}*x2| - {m1:.17g}*log|x1 + {m2:.17g}*x2|"
        return ScalarFunction(name, f, g, dom, True, "x1 + mu_i x2 != 0")

    if abs(h) == 2:
        mu = -h / 2

        def f(x):
            u = x[0] + mu * x[1]
            return x[1] / u - mu * math.log(abs(u))

        def g(x):
            u = x[0] + mu * x[1]
            return np.array([-x[1] / u**2 - mu / u, -mu * x[1] / u**2, 0.0])

        def dom(x):
            return x[0] + mu * x[1] != 0

        return ScalarFunction(f"x2/u - {mu:g}*log|u|, u = x1 + {mu:g}*x2", f, g, dom, True,
                              "x1 + mu x2 != 0")

    w = math.sqrt(4 - h * h) / 2
    kappa = h / (2 * w)

    def f(x):
        p, q = x[0] - h / 2 * x[1], w * x[1]
        return 0.5 * math.log(p * p + q * q) + kappa * math.atan2(q, p)

    def g(x):
        p, q = x[0] - h / 2 * x[1], w * x[1]
        r2 = p * p + q * q
        dp = np.array([1.0, -h / 2, 0.0])
        dq = np.array([0.0, w, 0.0])
        return ((p * dp + q * dq) + kappa * (p * dq - q * dp)) / r2

    def dom(x):
        p, q = x[0] - h / 2 * x[1], w * x[1]
        return not (q == 0 and p <= 0)

    name = f"log|u| + {kappa:.17g}*arg(u), u = x1 - {h / 2:g}*x2 + i*{w:.17g}*x2"
    return ScalarFunction(name, f, g, dom, True, "u off the closed negative real axis")


# ----------------------------------------------------------------- entries

@dataclass(frozen=True)
class CatalogEntry:
    bianchi: BianchiType
    em: EllisMacCallumData
    table_poisson: np.ndarray = field(repr=False)
    algebra: StructureConstants = field(repr=False)
    em_algebra: StructureConstants = field(repr=False)
    casimirs: list = field(repr=False)
    klass: str
    cre_flag: bool

    @property
    def poisson(self) -> LiePoisson:
        return LiePoisson(self.algebra)

    @property
    def em_agrees(self) -> bool:
        return bool(np.array_equal(forms_from_constants(self.em_algebra), self.table_poisson))

    def to_json_dict(self) -> dict:
        return {
            "type": self.bianchi.name,
            "tag": self.bianchi.tag,
            "h": self.bianchi.h,
            "m": self.em.m.tolist(),
            "a": self.em.a.tolist(),
            "poisson": _forms_to_strings(self.table_poisson),
            "algebra": self.algebra.to_json_dict(),
            "casimirs": [{"expr": c.name, "domain": c.domain_text} for c in self.casimirs],
            "class": self.klass,
            "cre": self.cre_flag,
            "em_agrees": self.em_agrees,
        }


def _forms_to_strings(coef: np.ndarray) -> list[list[str]]:
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            terms = []
            for k in range(3):
                v = coef[i, j, k]
                if v == 0:
                    continue
                mag = "" if abs(v) == 1 else f"{abs(v):g}*"
                body = mag + f"x{k + 1}"
                if not terms:
                    terms.append(("-" if v < 0 else "") + body)
                else:
                    terms.append(("- " if v < 0 else "+ ") + body)
            row.append(" ".join(terms) if terms else "0")
        out.append(row)
    return out


def cre_admissible(bt: BianchiType) -> bool:
    if bt.tag in ("III", "IV", "V", "VI_MINUS_1", "VI_H", "VIII"):
        return True
    if bt.tag == "VII_H":
        return abs(bt.h) >= 2
    return False


def catalog(bt: BianchiType) -> CatalogEntry:
    em = ellis_maccallum(bt)
    coef = table_poisson(bt)
    return CatalogEntry(
        bianchi=bt,
        em=em,
        table_poisson=coef,
        algebra=constants_from_forms(coef),
        em_algebra=from_ellis_maccallum(em),
        casimirs=_casimirs(bt),
        klass=bt.klass,
        cre_flag=cre_admissible(bt),
    )


def catalog_rows(vi_h: float = 2.0, vii_small: float = 1.0, vii_large: float = 3.0) -> list[CatalogEntry]:
    """All rows in table order; VII_h appears once per CRE regime."""
    if not 0 < abs(vii_small) < 2:
        raise InvalidParameter("the small VII_h parameter needs 0 < |h| < 2")
    if not abs(vii_large) >= 2:
        raise InvalidParameter("the large VII_h parameter needs |h| >= 2")
    types = [BianchiType(t) for t in TAGS[:9]]
    types += [BianchiType("VI_H", vi_h), BianchiType("VII_H", vii_small), BianchiType("VII_H", vii_large)]
    return [catalog(t) for t in types]


# ---------------------------------------------------------- classification

def decompose_em(alg: StructureConstants) -> EllisMacCallumData:
    """Recover (m, a) with em_tensor(m, a) equal to the constants.

    a_b = -1/2 C^k_kb and m^li = 1/2 eps_ljk (C^i_jk - delta^i_k a_j + delta^i_j a_k).
    Raises NotEMAdapted when a class B algebra does not have a along e3 with
    m supported on the upper-left block.
    """
    if alg.dim != 3:
        raise InvalidParameter("decompose_em needs a three-dimensional algebra")
    c = alg.c
    a = -0.5 * np.einsum("kkb->b", c)
    eye = np.eye(3)
    rest = c - np.einsum("ik,j->ijk", eye, a) + np.einsum("ij,k->ijk", eye, a)
    m = 0.5 * np.einsum("ljk,ijk->li", LEVI_CIVITA, rest)
    m = 0.5 * (m + m.T)
    err = float(np.max(np.abs(em_tensor(m, a) - c)))
    if err > MATCH_TOL:
        raise NotEMAdapted(f"EM reconstruction error {err:.3e}")
    if np.any(np.abs(a) > MATCH_TOL):
        off = max(abs(a[0]), abs(a[1]), abs(m[0, 2]), abs(m[1, 2]), abs(m[2, 2]))
        if off > MATCH_TOL:
            raise NotEMAdapted("class B algebra is not in an EM-adapted basis (a along e3, m in the 1-2 block)")
        a = np.array([0.0, 0.0, a[2]])
        m = m.copy()
        m[0, 2] = m[2, 0] = m[1, 2] = m[2, 1] = m[2, 2] = 0.0
    else:
        a = np.zeros(3)
    return EllisMacCallumData(m, a)


def _close(x, y) -> bool:
    return bool(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float))) <= MATCH_TOL)


def _classify_a(m: np.ndarray) -> BianchiType:
    ev = np.linalg.eigvalsh(m)
    tol = MATCH_TOL * max(1.0, float(np.max(np.abs(ev))))
    pos = int(np.sum(ev > tol))
    neg = int(np.sum(ev < -tol))
    rank = pos + neg
    if rank == 0:
        return BianchiType("I")
    if rank == 1:
        return BianchiType("II")
    if rank == 2:
        return BianchiType("VII_0" if pos == 2 or neg == 2 else "VI_MINUS_1")
    return BianchiType("IX" if pos == 3 or neg == 3 else "VIII")


def _classify_b(m: np.ndarray, a3: float) -> BianchiType | None:
    block = m[:2, :2]
    if abs(a3 + 1) <= MATCH_TOL:
        if _close(block, 0):
            return BianchiType("V")
        if _close(block, np.diag([1.0, 0.0])):
            return BianchiType("IV")
    if abs(a3 + 0.5) <= MATCH_TOL and _close(block, -0.5 * ALPHA[:2, :2]):
        return BianchiType("III")
    h6 = -2 * a3 - 1
    if min(abs(h6), abs(h6 + 1), abs(h6 - 1)) > MATCH_TOL and _close(block, (h6 - 1) / 2 * ALPHA[:2, :2]):
        return BianchiType("VI_H", h6)
    h7 = -2 * a3
    if abs(h7) > MATCH_TOL and _close(block, np.diag([-1.0, -1.0]) + h7 / 2 * ALPHA[:2, :2]):
        return BianchiType("VII_H", h7)
    return None


def flip_e3(alg: StructureConstants) -> StructureConstants:
    """Constants in the basis (e1, e2, -e3)."""
    sign = np.ones(3)
    sign[2] = -1
    c = np.einsum("kij,k,i,j->kij", alg.c, sign, sign, sign)
    return new_lie_algebra(c, 3)


def classify(alg: StructureConstants) -> BianchiType:
    em = decompose_em(alg)
    if em.klass == "A":
        return _classify_a(em.m)
    found = _classify_b(em.m, em.a[2])
    if found is None:
        # the tables fix the orientation of e3; accept the opposite one too
        flipped = decompose_em(flip_e3(alg))
        found = _classify_b(flipped.m, flipped.a[2])
    if found is None:
        raise UnrecognizedForm(
            f"class B data m={em.m.tolist()}, a={em.a.tolist()} matches no catalog row"
        )
    return found


def admits_hyperbolic(bt: BianchiType, config=None) -> bool:
    return find_hyperbolic_element(catalog(bt).algebra, config) is not None
