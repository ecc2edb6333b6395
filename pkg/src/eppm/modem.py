"""Bit-to-chip-frame mapping for EPPM and its multilevel / overlapped variants.

Frames are 1-D float arrays of nonnegative chip amplitudes, normalized so
1.0 is the peak received power of the full LED array.  Frame length is Q for
EPPM/MEPPM and Q+v-1 for overlapped EPPM.

Bit mapping is natural binary over the first 2**floor(log2(alphabet))
symbols of each scheme's canonical symbol enumeration; the remaining symbols
are never transmitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from eppm.codes import Codebook

__all__ = [
    "BitWidthMismatch",
    "BadLevelCount",
    "LengthMismatch",
    "Kind",
    "Permutation",
    "ModulationScheme",
    "bits_to_index",
    "index_to_bits",
    "rank_combination",
    "unrank_combination",
    "rank_multiset",
    "unrank_multiset",
    "encode_eppm",
    "encode_meppm",
    "meppm_frame",
    "meppm_selection",
    "encode_oeppm",
    "oeppm_frame",
    "encode_baseline",
    "bit_rate",
    "apply_interleaver",
    "deinterleave",
]


class BitWidthMismatch(ValueError):
    """Bit vector length does not match the scheme's bits per symbol."""


class BadLevelCount(ValueError):
    """Multilevel scheme needs N >= 1."""


class LengthMismatch(ValueError):
    """Frame length incompatible with the operation."""


class Kind(str, Enum):
    EPPM = "EPPM"
    MEPPM_I = "MEPPM_I"
    MEPPM_II = "MEPPM_II"
    OEPPM = "OEPPM"
    PPM = "PPM"
    VPPM = "VPPM"
    OOK = "OOK"
    PAM4 = "PAM4"


@dataclass(frozen=True, eq=False)
class Permutation:
    """Symbol-length interleaver map with its precomputed inverse.

    ``forward`` is a bijection on [0, Q); interleaving reads chip
    ``forward[j]`` of the input into chip ``j`` of the output.
    """

    forward: np.ndarray
    inverse: np.ndarray = field(repr=False)

    @classmethod
    def from_forward(cls, forward) -> "Permutation":
        fwd = np.asarray(forward, dtype=np.int64)
        q = len(fwd)
        if sorted(fwd.tolist()) != list(range(q)):
            raise ValueError("forward map is not a bijection on [0, Q)")
        inv = np.argsort(fwd)
        return cls(forward=fwd, inverse=inv)

    @classmethod
    def identity(cls, q: int) -> "Permutation":
        idx = np.arange(q, dtype=np.int64)
        return cls(forward=idx, inverse=idx.copy())

    @classmethod
    def random(cls, q: int, rng: np.random.Generator) -> "Permutation":
        return cls.from_forward(rng.permutation(q))

    def __len__(self) -> int:
        return len(self.forward)

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.forward, other.forward)

    def matrix(self) -> np.ndarray:
        """Permutation matrix P such that (x @ P)[j] = x[forward[j]]."""
        q = len(self.forward)
        p = np.zeros((q, q), dtype=np.int64)
        p[self.forward, np.arange(q)] = 1
        return p

    def to_text(self) -> str:
        return " ".join(str(i) for i in self.forward)

    @classmethod
    def from_text(cls, text: str) -> "Permutation":
        return cls.from_forward([int(t) for t in text.split()])


@dataclass(frozen=True)
class ModulationScheme:
    """Descriptor of a modulation: kind plus the parameters it needs.

    codebook   -- required for the EPPM family
    n_levels   -- codewords summed per MEPPM symbol (N >= 1)
    v          -- overlap length in chips for OEPPM (v >= 1)
    interleaver-- optional symbol-length permutation (EPPM/MEPPM only)
    slots      -- slot count for PPM / chips per symbol for VPPM
    vppm_width -- VPPM pulse-width fraction (PAPR = 1/width)
    """

    kind: Kind
    codebook: Codebook | None = None
    n_levels: int = 1
    v: int = 1
    interleaver: Permutation | None = None
    slots: int | None = None
    vppm_width: float | None = None

    def __post_init__(self):
        if self.kind in (Kind.EPPM, Kind.MEPPM_I, Kind.MEPPM_II, Kind.OEPPM):
            if self.codebook is None:
                raise ValueError(f"{self.kind.value} needs a codebook")
        if self.kind in (Kind.MEPPM_I, Kind.MEPPM_II) and self.n_levels < 1:
            raise BadLevelCount(f"N must be >= 1, got {self.n_levels}")
        if self.kind is Kind.OEPPM and self.v < 1:
            raise ValueError(f"v must be >= 1, got {self.v}")
        if self.kind is Kind.PPM and (self.slots is None or self.slots < 2):
            raise ValueError("PPM needs slots >= 2")
        if self.kind is Kind.VPPM:
            if self.vppm_width is None or not (0 < self.vppm_width <= 1):
                raise ValueError("VPPM needs 0 < vppm_width <= 1")
            n = self.slots if self.slots is not None else _width_den(self.vppm_width)
            on = self.vppm_width * n
            if abs(on - round(on)) > 1e-9 or round(on) < 1:
                raise ValueError(
                    f"vppm_width {self.vppm_width} not representable on {n} chips"
                )

    @property
    def q(self) -> int:
        if self.codebook is not None:
            return self.codebook.q
        if self.kind is Kind.PPM:
            return self.slots
        raise ValueError(f"{self.kind.value} has no code length")

    @property
    def alphabet_size(self) -> int:
        """Number of distinct symbols the scheme can represent."""
        if self.kind in (Kind.EPPM, Kind.OEPPM):
            return self.q
        if self.kind is Kind.MEPPM_I:
            return math.comb(self.q, self.n_levels)
        if self.kind is Kind.MEPPM_II:
            # multisets of up to N codewords (empty included)
            return math.comb(self.q + self.n_levels, self.n_levels)
        if self.kind is Kind.PPM:
            return self.slots
        if self.kind in (Kind.VPPM, Kind.OOK):
            return 2
        if self.kind is Kind.PAM4:
            return 4
        raise AssertionError(self.kind)

    @property
    def bits_per_symbol(self) -> int:
        return self.alphabet_size.bit_length() - 1

    @property
    def chips_per_symbol(self) -> int:
        if self.kind is Kind.OEPPM:
            return self.q + self.v - 1
        if self.kind in (Kind.EPPM, Kind.MEPPM_I, Kind.MEPPM_II):
            return self.q
        if self.kind is Kind.PPM:
            return self.slots
        if self.kind is Kind.VPPM:
            return self.slots if self.slots is not None else _width_den(self.vppm_width)
        if self.kind is Kind.OOK:
            return 1
        if self.kind is Kind.PAM4:
            return 1
        raise AssertionError(self.kind)


def _width_den(width: float) -> int:
    """Smallest chip count on which the VPPM width is an integer number of chips."""
    from fractions import Fraction

    return Fraction(width).limit_denominator(512).denominator


# ---------------------------------------------------------------------------
# Bit packing and combinatorial (un)ranking


def bits_to_index(bits) -> int:
    """Natural binary, MSB first."""
    value = 0
    for b in np.asarray(bits).tolist():
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {b}")
        value = (value << 1) | int(b)
    return value


def index_to_bits(index: int, width: int) -> np.ndarray:
    if not 0 <= index < (1 << width):
        raise ValueError(f"index {index} does not fit in {width} bits")
    return np.array([(index >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.int64)


def unrank_combination(rank: int, n: int, k: int) -> tuple[int, ...]:
    """rank-th k-subset of [0, n) in lexicographic order of sorted tuples."""
    if not 0 <= rank < math.comb(n, k):
        raise ValueError(f"rank {rank} out of range for C({n},{k})")
    out = []
    x = 0
    for slot in range(k, 0, -1):
        while True:
            c = math.comb(n - x - 1, slot - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def rank_combination(subset, n: int) -> int:
    subset = sorted(subset)
    k = len(subset)
    rank = 0
    prev = -1
    for slot, x in enumerate(subset):
        for y in range(prev + 1, x):
            rank += math.comb(n - y - 1, k - slot - 1)
        prev = x
    return rank


def unrank_multiset(rank: int, n: int, k: int) -> tuple[int, ...]:
    """rank-th non-decreasing k-tuple over [0, n), lexicographic."""
    if not 0 <= rank < math.comb(n + k - 1, k):
        raise ValueError(f"rank {rank} out of range for multisets({n},{k})")
    out = []
    lo = 0
    for slot in range(k, 0, -1):
        x = lo
        while True:
            # tuples starting with x: multisets of size slot-1 over [x, n)
            c = math.comb((n - x) + slot - 2, slot - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        lo = x
    return tuple(out)


def rank_multiset(tup, n: int) -> int:
    tup = sorted(tup)
    k = len(tup)
    rank = 0
    lo = 0
    for slot, x in enumerate(tup):
        for y in range(lo, x):
            rank += math.comb((n - y) + (k - slot) - 2, k - slot - 1)
        lo = x
    return rank


# ---------------------------------------------------------------------------
# Encoders


def _check_bits(bits, scheme: ModulationScheme) -> int:
    bits = np.asarray(bits)
    if bits.shape != (scheme.bits_per_symbol,):
        raise BitWidthMismatch(
            f"{scheme.kind.value} expects {scheme.bits_per_symbol} bits, got {bits.shape}"
        )
    return bits_to_index(bits)


def encode_eppm(bits, scheme: ModulationScheme) -> tuple[int, np.ndarray]:
    """Map bits to (symbol index, chip frame) for plain EPPM."""
    if scheme.kind is not Kind.EPPM:
        raise ValueError(f"expected EPPM scheme, got {scheme.kind.value}")
    m = _check_bits(bits, scheme)
    frame = scheme.codebook.rows[m].astype(np.float64)
    if scheme.interleaver is not None:
        frame = apply_interleaver(frame, scheme.interleaver)
    return m, frame


def meppm_selection(index: int, scheme: ModulationScheme) -> tuple[int, ...]:
    """Codeword indices summed in MEPPM symbol ``index``.

    Type I enumerates N-subsets of the Q codewords.  Type II enumerates
    multisets of size <= N (empty multiset = dark symbol), realized as
    N-multisets over Q+1 labels where label Q means "no codeword".
    """
    q, n = scheme.q, scheme.n_levels
    if scheme.kind is Kind.MEPPM_I:
        return unrank_combination(index, q, n)
    if scheme.kind is Kind.MEPPM_II:
        return tuple(i for i in unrank_multiset(index, q + 1, n) if i < q)
    raise ValueError(f"expected MEPPM scheme, got {scheme.kind.value}")


def meppm_rank(selection, scheme: ModulationScheme) -> int:
    """Inverse of meppm_selection."""
    q, n = scheme.q, scheme.n_levels
    if scheme.kind is Kind.MEPPM_I:
        return rank_combination(selection, q)
    if scheme.kind is Kind.MEPPM_II:
        padded = tuple(sorted(selection)) + (q,) * (n - len(selection))
        return rank_multiset(padded, q + 1)
    raise ValueError(f"expected MEPPM scheme, got {scheme.kind.value}")


def meppm_frame(index: int, scheme: ModulationScheme) -> np.ndarray:
    """Chip frame of MEPPM symbol ``index``: (1/N) * sum of selected codewords."""
    sel = meppm_selection(index, scheme)
    frame = np.zeros(scheme.q, dtype=np.float64)
    for i in sel:
        frame += scheme.codebook.rows[i]
    frame /= scheme.n_levels
    if scheme.interleaver is not None:
        frame = apply_interleaver(frame, scheme.interleaver)
    return frame


def encode_meppm(bits, scheme: ModulationScheme) -> np.ndarray:
    if scheme.kind not in (Kind.MEPPM_I, Kind.MEPPM_II):
        raise ValueError(f"expected MEPPM scheme, got {scheme.kind.value}")
    return meppm_frame(_check_bits(bits, scheme), scheme)


def oeppm_frame(index: int, scheme: ModulationScheme) -> np.ndarray:
    """Overlapped-EPPM frame: codeword 1s start width-v pulses on Q+v-1 chips.

    Amplitude 1/N_LED per pulse with N_LED = min(v, K) pulse-modulated LEDs,
    so the frame peak never exceeds 1.
    """
    q, k, v = scheme.q, scheme.codebook.k, scheme.v
    n_led = min(v, k)
    frame = np.zeros(q + v - 1, dtype=np.float64)
    for j in np.nonzero(scheme.codebook.rows[index])[0]:
        frame[j : j + v] += 1.0 / n_led
    return frame


def encode_oeppm(bits, scheme: ModulationScheme) -> np.ndarray:
    if scheme.kind is not Kind.OEPPM:
        raise ValueError(f"expected OEPPM scheme, got {scheme.kind.value}")
    return oeppm_frame(_check_bits(bits, scheme), scheme)


PAM4_LEVELS = np.array([0.0, 1 / 3, 2 / 3, 1.0])


def encode_baseline(bits, scheme: ModulationScheme) -> np.ndarray:
    """PPM, VPPM, OOK and 4-PAM reference frames."""
    kind = scheme.kind
    if kind is Kind.PPM:
        m = _check_bits(bits, scheme)
        frame = np.zeros(scheme.slots, dtype=np.float64)
        frame[m] = 1.0
        return frame
    if kind is Kind.VPPM:
        m = _check_bits(bits, scheme)
        n = scheme.chips_per_symbol
        on = round(scheme.vppm_width * n)
        frame = np.zeros(n, dtype=np.float64)
        if m == 0:
            frame[:on] = 1.0
        else:
            frame[n - on :] = 1.0
        return frame
    if kind is Kind.OOK:
        m = _check_bits(bits, scheme)
        return np.array([float(m)])
    if kind is Kind.PAM4:
        m = _check_bits(bits, scheme)
        return np.array([PAM4_LEVELS[m]])
    raise ValueError(f"{kind.value} is not a baseline scheme")


def oeppm_papr(scheme: ModulationScheme):
    """PAPR of overlapped EPPM: N_LED*(Q+v-1)/(v*K) with N_LED = min(v, K)."""
    from fractions import Fraction

    if scheme.kind is not Kind.OEPPM:
        raise ValueError(f"expected OEPPM scheme, got {scheme.kind.value}")
    q, k, v = scheme.q, scheme.codebook.k, scheme.v
    return Fraction(min(v, k) * (q + v - 1), v * k)


# ---------------------------------------------------------------------------
# Rates


def bit_rate(scheme: ModulationScheme, t_led: float) -> float:
    """Achievable bits/second for an LED with impulse-response duration t_led.

    For the EPPM family the chip time is t_led/v (pulses exactly fill the
    LED response), so a symbol lasts t_led*(Q+v-1)/v and carries
    log2(alphabet) bits; v -> inf approaches log2(alphabet)/t_led.
    """
    if t_led <= 0:
        raise ValueError("t_led must be positive")
    kind = scheme.kind
    if kind in (Kind.EPPM, Kind.OEPPM, Kind.MEPPM_I, Kind.MEPPM_II):
        q, v = scheme.q, scheme.v
        if kind is Kind.EPPM:
            payload = math.log2(q)
            v = 1
        elif kind is Kind.OEPPM:
            payload = math.log2(q)
        elif kind is Kind.MEPPM_I:
            payload = math.log2(math.comb(q, scheme.n_levels))
        else:
            payload = math.log2(math.comb(q + scheme.n_levels, scheme.n_levels))
        return payload / t_led * v / (q + v - 1)
    if kind is Kind.PPM:
        return math.log2(scheme.slots) / (scheme.slots * t_led)
    if kind is Kind.OOK:
        return 1.0 / t_led
    if kind is Kind.PAM4:
        return 2.0 / t_led
    if kind is Kind.VPPM:
        # pulse width w*T_s must be at least t_led
        return scheme.vppm_width / t_led
    raise AssertionError(kind)


# ---------------------------------------------------------------------------
# Interleaving


def apply_interleaver(frame: np.ndarray, p: Permutation) -> np.ndarray:
    """Chip j of the output is chip forward[j] of the input."""
    frame = np.asarray(frame)
    if frame.shape[-1] != len(p):
        raise LengthMismatch(
            f"frame length {frame.shape[-1]} != permutation length {len(p)}"
        )
    return frame[..., p.forward]


def deinterleave(frame: np.ndarray, p: Permutation) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.shape[-1] != len(p):
        raise LengthMismatch(
            f"frame length {frame.shape[-1]} != permutation length {len(p)}"
        )
    return frame[..., p.inverse]
