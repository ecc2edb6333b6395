"""Cyclic BIBD codebooks for expurgated PPM.

A (Q, K, lam) symmetric BIBD code is a set of Q binary vectors of length Q
and Hamming weight K, pairwise dot product exactly lam, obtained as the
cyclic shifts of the incidence vector of a cyclic difference set.  All EPPM
modulation in this package derives from these codebooks.

Chip indices are 0-based throughout.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "BadParams",
    "NotADifferenceSet",
    "NoDesignFound",
    "DesignParams",
    "Codebook",
    "build_codebook",
    "find_difference_set",
    "complement_codebook",
    "papr",
    "canonical_rotation",
    "load_catalog",
    "save_catalog",
    "catalog_codebook",
    "CATALOG_PARAMS",
]


class BadParams(ValueError):
    """Parameters violate the symmetric-design identity lam*(Q-1) = K*(K-1)."""


class NotADifferenceSet(ValueError):
    """A base set whose cyclic shifts do not have constant pairwise correlation."""


class NoDesignFound(LookupError):
    """Search exhausted (or hit its budget) without finding a difference set."""


# Parameter triples shipped in the bundled catalog: all known designs with
# Q <= 100 from the standard PAPR table, plus (19, 9, 4).
CATALOG_PARAMS = [
    (7, 3, 1),
    (11, 5, 2),
    (13, 4, 1),
    (19, 9, 4),
    (21, 5, 1),
    (31, 6, 1),
    (35, 17, 8),
    (40, 13, 4),
    (57, 8, 1),
    (91, 10, 1),
]


@dataclass(frozen=True)
class DesignParams:
    """(Q, K, lam) triple of a symmetric cyclic BIBD code.

    Q is the code length (chips per symbol), K the code weight (pulses per
    symbol) and lam the pairwise cross-correlation between codewords.
    """

    q: int
    k: int
    lam: int

    def __post_init__(self):
        if not (0 < self.lam < self.k < self.q):
            raise BadParams(f"need 0 < lam < K < Q, got ({self.q}, {self.k}, {self.lam})")
        if self.lam * (self.q - 1) != self.k * (self.k - 1):
            raise BadParams(
                f"identity lam*(Q-1) = K*(K-1) fails: "
                f"{self.lam}*{self.q - 1} != {self.k}*{self.k - 1}"
            )

    @property
    def papr(self) -> Fraction:
        """Peak-to-average power ratio Q/K, exact."""
        return Fraction(self.q, self.k)

    @property
    def gamma(self) -> Fraction:
        """Complement-branch weight lam/(K-lam) of the correlation decoder."""
        return Fraction(self.lam, self.k - self.lam)

    def complement(self) -> "DesignParams":
        return DesignParams(self.q, self.q - self.k, self.q - 2 * self.k + self.lam)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Q x Q binary incidence matrix of a cyclic BIBD code.

    ``rows[m]`` is the m-th right cyclic shift of the base incidence vector;
    any two distinct rows have dot product exactly ``params.lam``.
    """

    params: DesignParams
    base_set: tuple[int, ...]
    rows: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def lam(self) -> int:
        return self.params.lam

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.rows, other.rows)


def _incidence(q: int, base_set) -> np.ndarray:
    v = np.zeros(q, dtype=np.int64)
    v[list(base_set)] = 1
    return v


def build_codebook(params: DesignParams, base_set) -> Codebook:
    """Build the Q-row cyclic codebook generated by ``base_set``.

    Validates the constant-correlation property exhaustively over all row
    pairs; raises NotADifferenceSet if any pair correlates differently from
    lam, BadParams if the design identity fails (done by DesignParams).
    """
    q, k, lam = params.q, params.k, params.lam
    base = sorted(set(int(i) for i in base_set))
    if len(base) != k:
        raise NotADifferenceSet(f"base set must have {k} distinct indices, got {len(base)}")
    if base[0] < 0 or base[-1] >= q:
        raise NotADifferenceSet(f"base set indices must lie in [0, {q})")

    first = _incidence(q, base)
    rows = np.stack([np.roll(first, m) for m in range(q)])
    gram = rows @ rows.T
    off = gram[~np.eye(q, dtype=bool)]
    if not np.all(np.diag(gram) == k) or not np.all(off == lam):
        bad = int(off[off != lam][0]) if np.any(off != lam) else int(np.diag(gram)[0])
        raise NotADifferenceSet(
            f"base set {base} of ({q},{k},{lam}): found pairwise correlation {bad} != {lam}"
        )
    return Codebook(params=params, base_set=tuple(base), rows=rows)


def canonical_rotation(q: int, base_set) -> tuple[int, ...]:
    """Lexicographically minimal translate of ``base_set`` containing 0."""
    s = sorted(int(i) % q for i in base_set)
    best = None
    for t in s:
        cand = tuple(sorted((i - t) % q for i in s))
        if best is None or cand < best:
            best = cand
    return best


def find_difference_set(q: int, k: int, lam: int, node_budget: int | None = None) -> list[int]:
    """Backtracking search for a (q, k, lam) cyclic difference set.

    Enumerates K-subsets of Z_q containing 0 in lexicographic order and
    returns the first whose cyclic differences each occur exactly lam times,
    normalized to its canonical rotation.  Output is deterministic.

    Raises NoDesignFound when the identity lam*(q-1) = k*(k-1) fails, when
    the search space is exhausted, or when ``node_budget`` nodes were
    explored without success (the "catalog-missing" case).
    """
    if not (0 < lam < k < q):
        raise NoDesignFound(f"need 0 < lam < K < Q, got ({q}, {k}, {lam})")
    if lam * (q - 1) != k * (k - 1):
        raise NoDesignFound(
            f"no ({q},{k},{lam}) design exists: lam*(Q-1)={lam * (q - 1)} != K*(K-1)={k * (k - 1)}"
        )

    counts = [0] * q
    chosen = [0]
    nodes = 0

    def try_add(x: int) -> bool:
        done = 0
        for s in chosen:
            d1 = (x - s) % q
            d2 = (s - x) % q
            counts[d1] += 1
            counts[d2] += 1
            done += 1
            if counts[d1] > lam or counts[d2] > lam:
                for t in chosen[:done]:
                    counts[(x - t) % q] -= 1
                    counts[(t - x) % q] -= 1
                return False
        return True

    def remove(x: int) -> None:
        for s in chosen:
            counts[(x - s) % q] -= 1
            counts[(s - x) % q] -= 1

    def rec(start: int) -> bool:
        nonlocal nodes
        if len(chosen) == k:
            return True
        remaining = k - len(chosen)
        for x in range(start, q - remaining + 1):
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                raise NoDesignFound(
                    f"({q},{k},{lam}): node budget {node_budget} exhausted (catalog-missing)"
                )
            if try_add(x):
                chosen.append(x)
                if rec(x + 1):
                    return True
                chosen.pop()
                remove(x)
        return False

    if rec(1):
        return list(canonical_rotation(q, chosen))
    raise NoDesignFound(f"search exhausted: no ({q},{k},{lam}) cyclic difference set")


def complement_codebook(cb: Codebook) -> Codebook:
    """Codebook with rows 1 - c_m; params become (Q, Q-K, Q-2K+lam)."""
    comp_params = cb.params.complement()
    comp_base = tuple(i for i in range(cb.q) if i not in cb.base_set)
    return build_codebook(comp_params, comp_base)


def papr(cb: Codebook) -> Fraction:
    """Exact peak-to-average power ratio Q/K of the codebook."""
    return cb.params.papr


# ---------------------------------------------------------------------------
# Catalog file: one design per line, "Q K lam : i0,i1,..."


def _parse_catalog(text: str) -> dict[tuple[int, int, int], tuple[int, ...]]:
    designs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            head, tail = line.split(":")
            q, k, lam = (int(t) for t in head.split())
            base = tuple(int(t) for t in tail.split(","))
        except ValueError as exc:
            raise NotADifferenceSet(f"catalog line {lineno} malformed: {line!r}") from exc
        # loader re-validates the correlation property on every entry
        build_codebook(DesignParams(q, k, lam), base)
        designs[(q, k, lam)] = base
    return designs


def load_catalog(path=None) -> dict[tuple[int, int, int], tuple[int, ...]]:
    """Load and validate a catalog file; defaults to the bundled catalog."""
    if path is None:
        text = importlib.resources.files("eppm.data").joinpath("bibd_catalog.txt").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return _parse_catalog(text)


def save_catalog(designs: dict[tuple[int, int, int], tuple[int, ...]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (q, k, lam), base in sorted(designs.items()):
            fh.write(f"{q} {k} {lam} : {','.join(str(i) for i in base)}\n")


def catalog_codebook(q: int, k: int, lam: int) -> Codebook:
    """Build a codebook for a cataloged design."""
    designs = load_catalog()
    key = (q, k, lam)
    if key not in designs:
        raise NoDesignFound(f"({q},{k},{lam}) not in the bundled catalog")
    return build_codebook(DesignParams(q, k, lam), designs[key])
