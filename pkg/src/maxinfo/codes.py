"""Binary linear and affine codes given by parity-check matrices.

Bit strings are Python ints with position 0 stored in the most significant bit,
so integer order coincides with lexicographic order of the bit sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    CapExceeded,
    ConfigInvalid,
    DegenerateCode,
    Exhausted,
    LengthMismatch,
    ParamOutOfRange,
    ParseError,
)
from .prob import enumeration_cap

# Above this length members are Python ints in object arrays instead of uint64.
WORD_BITS = 64


@dataclass(frozen=True)
class BitString:
    length: int
    value: int

    def __post_init__(self):
        if self.length < 0 or not 0 <= self.value < (1 << self.length) or (self.length == 0 and self.value):
            raise ParamOutOfRange("value does not fit in the given length")

    @classmethod
    def from_str(cls, bits: str) -> "BitString":
        if any(ch not in "01" for ch in bits):
            raise ParamOutOfRange(f"not a bit string: {bits!r}")
        return cls(len(bits), int(bits, 2) if bits else 0)

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        return cls.from_str("".join(str(int(b)) for b in bits))

    @classmethod
    def from_hex(cls, text: str, length: int) -> "BitString":
        return cls(length, int(text, 16))

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""

    def __xor__(self, other: "BitString") -> "BitString":
        if other.length != self.length:
            raise LengthMismatch("xor of bit strings with different lengths")
        return BitString(self.length, self.value ^ other.value)

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def bit(self, position: int) -> int:
        return (self.value >> (self.length - 1 - position)) & 1

    def to_tuple(self) -> tuple:
        return tuple(int(ch) for ch in str(self))

    def hex(self) -> str:
        return format(self.value, f"0{max(1, math.ceil(self.length / 4))}x")


def distance(a: BitString, b: BitString) -> int:
    return (a ^ b).weight


def gf2_rref(rows, n: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot positions)."""
    rows = list(rows)
    pivots = []
    rank = 0
    for pos in range(n):
        bit = 1 << (n - 1 - pos)
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & bit), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & bit:
                rows[i] ^= rows[rank]
        pivots.append(pos)
        rank += 1
    return rows[:rank], pivots


def gf2_rank(rows, n: int) -> int:
    return len(gf2_rref(rows, n)[0])


def _parity(value: int) -> int:
    return value.bit_count() & 1


def _span(basis: list[int], n: int) -> np.ndarray:
    """All XOR combinations of ``basis``, sorted ascending."""
    dtype = np.uint64 if n <= WORD_BITS else object
    out = np.zeros(1, dtype=dtype)
    for vec in basis:
        out = np.concatenate([out, out ^ (np.uint64(vec) if dtype is np.uint64 else vec)])
    out.sort()
    return out


def _popcount(values: np.ndarray) -> np.ndarray:
    if values.dtype == object:
        return np.array([int(v).bit_count() for v in values], dtype=np.int64)
    return np.bitwise_count(values).astype(np.int64)


@dataclass(frozen=True)
class ParityCheckCode:
    """Null space of a full-row-rank binary ``r x n`` matrix ``H``.

    Args:
        n: code length.
        rows: rows of ``H`` as ints (position 0 in the most significant bit).
        d_min: minimum distance, if known.
        verified: whether ``d_min`` was confirmed by exhaustive enumeration.
    """

    n: int
    rows: tuple
    d_min: int | None = None
    verified: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        if self.n < 1:
            raise ParamOutOfRange("code length must be positive")
        if any(not 0 <= row < (1 << self.n) for row in self.rows):
            raise LengthMismatch("parity-check row wider than n")
        if gf2_rank(self.rows, self.n) != len(self.rows):
            raise ParamOutOfRange("parity-check matrix must have full row rank")
        if self.r == self.n:
            raise DegenerateCode("square parity-check matrix leaves only the zero codeword")

    @classmethod
    def from_matrix(cls, matrix, d_min: int | None = None, verified: bool = False) -> "ParityCheckCode":
        matrix = np.asarray(matrix, dtype=np.int64) % 2
        if matrix.ndim != 2:
            raise ParamOutOfRange("matrix must be two-dimensional")
        rows = [int("".join(map(str, row)), 2) if len(row) else 0 for row in matrix]
        return cls(matrix.shape[1], tuple(rows), d_min, verified)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def k(self) -> int:
        return self.n - self.r

    def matrix(self) -> np.ndarray:
        return np.array([[(row >> (self.n - 1 - j)) & 1 for j in range(self.n)] for row in self.rows], dtype=np.uint8)

    @cached_property
    def _rref(self):
        return gf2_rref(self.rows, self.n)

    @cached_property
    def null_basis(self) -> list[int]:
        """Basis of ``{c : Hc = 0}``, one vector per free position."""
        reduced, pivots = self._rref
        free = [p for p in range(self.n) if p not in set(pivots)]
        basis = []
        for f in free:
            vec = 1 << (self.n - 1 - f)
            fbit = vec
            for row, p in zip(reduced, pivots):
                if row & fbit:
                    vec |= 1 << (self.n - 1 - p)
            basis.append(vec)
        return basis

    def particular_solution(self, a: BitString) -> int:
        """Some ``x`` with ``Hx = a``."""
        if a.length != self.r:
            raise LengthMismatch(f"syndrome must have {self.r} bits")
        # Row-reduce the augmented system [H | a] alongside H.
        aug = [(row << 1) | a.bit(i) for i, row in enumerate(self.rows)]
        reduced, pivots = gf2_rref(aug, self.n + 1)
        x = 0
        for row, p in zip(reduced, pivots):
            if p == self.n:
                raise ParamOutOfRange("syndrome not attainable")
            if row & 1:
                x |= 1 << (self.n - 1 - p)
        return x

    def check_cap(self, cap: int | None = None) -> None:
        cap = enumeration_cap() if cap is None else cap
        if self.k > 62 or (1 << self.k) > cap:
            raise CapExceeded(f"enumerating 2^{self.k} codewords exceeds cap {cap}")

    def codewords(self, cap: int | None = None) -> np.ndarray:
        """All codewords, ascending."""
        self.check_cap(cap)
        if "codewords" not in self._cache:
            self._cache["codewords"] = _span(self.null_basis, self.n)
        return self._cache["codewords"]

    def to_json(self) -> dict:
        width = max(1, math.ceil(self.n / 4))
        return {
            "n": self.n,
            "r": self.r,
            "rows": [format(row, f"0{width}x") for row in self.rows],
            "d_min": self.d_min,
            "verified": self.verified,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ParityCheckCode":
        try:
            n, r = int(data["n"]), int(data["r"])
            rows = tuple(int(h, 16) for h in data["rows"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed code description: {exc}") from exc
        if len(rows) != r:
            raise ConfigInvalid(f"declared r={r} but {len(rows)} rows given")
        d_min = data.get("d_min")
        return cls(n, rows, None if d_min is None else int(d_min), bool(data.get("verified", False)))


def save_code(code: ParityCheckCode, path) -> None:
    Path(path).write_text(json.dumps(code.to_json(), indent=2) + "\n")


def load_code(path) -> ParityCheckCode:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", exc.lineno) from exc
    return ParityCheckCode.from_json(data)


def syndrome(code: ParityCheckCode, x: BitString) -> BitString:
    """``Hx`` over GF(2)."""
    if x.length != code.n:
        raise LengthMismatch(f"expected {code.n} bits, got {x.length}")
    value = 0
    for row in code.rows:
        value = (value << 1) | _parity(row & x.value)
    return BitString(code.r, value)


def min_distance(code: ParityCheckCode, cap: int | None = None) -> int:
    """Minimum nonzero codeword weight by exhaustive enumeration."""
    words = code.codewords(cap)
    return int(_popcount(words[1:]).min())


def verify_code(code: ParityCheckCode, cap: int | None = None) -> ParityCheckCode:
    """Return a copy with ``d_min`` set to the enumerated minimum distance."""
    verified = ParityCheckCode(code.n, code.rows, min_distance(code, cap), True)
    verified._cache.update(code._cache)
    return verified


def theorem_rows(n: int, d_min: int) -> int:
    return min(n - 1, math.ceil(3 * d_min * math.log2(n) - 1e-9))


def random_code_with_distance(
    n: int,
    d_min: int,
    max_tries: int,
    rng: np.random.Generator,
    r: int | None = None,
    mode: str = "theorem",
    cap: int | None = None,
) -> ParityCheckCode:
    """Rejection-sample a random full-rank parity-check matrix with verified distance.

    Args:
        n: code length.
        d_min: required minimum distance.
        max_tries: number of candidate matrices to try.
        rng: random stream.
        r: number of parity rows. Defaults to ``min(n - 1, ceil(3 d_min log2 n))``;
            an explicit value is accepted in demo mode only.
        mode: ``"theorem"`` or ``"demo"``.
        cap: bound on the ``2^(n-r)`` codewords enumerated per candidate.

    Returns:
        A verified code with minimum distance at least ``d_min``.
    """
    if mode not in ("theorem", "demo"):
        raise ConfigInvalid(f"unknown mode {mode!r}")
    if not 0 < d_min < n / 2:
        raise ParamOutOfRange("need 0 < d_min < n/2")
    default_r = theorem_rows(n, d_min)
    if r is None:
        r = default_r
    elif mode == "theorem" and r != default_r:
        raise ParamOutOfRange("explicit row count is only allowed in demo mode")
    if mode == "theorem" and n - math.ceil(3 * d_min * math.log2(n) - 1e-9) < 1:
        raise ParamOutOfRange("n - ceil(3 d_min log2 n) must be at least 1 in theorem mode")
    if not 1 <= r < n:
        raise ParamOutOfRange("need 1 <= r < n")
    cap = enumeration_cap() if cap is None else cap
    if n - r > 62 or (1 << (n - r)) > cap:
        raise CapExceeded(f"verifying 2^{n - r} codewords exceeds cap {cap}")
    for _ in range(max_tries):
        rows = [int.from_bytes(rng.bytes((n + 7) // 8), "big") >> (8 * ((n + 7) // 8) - n) for _ in range(r)]
        if gf2_rank(rows, n) != r:
            continue
        code = ParityCheckCode(n, tuple(rows))
        found = min_distance(code, cap)
        if found >= d_min:
            return verify_code(code, cap)
    raise Exhausted(f"no [{n},{n - r}] code with distance >= {d_min} in {max_tries} tries")


@dataclass(frozen=True)
class AffineCoset:
    """``C_a = {c : Hc = a}``."""

    code: ParityCheckCode
    a: BitString

    def __post_init__(self):
        if self.a.length != self.code.r:
            raise LengthMismatch(f"syndrome must have {self.code.r} bits")

    @cached_property
    def offset(self) -> int:
        return self.code.particular_solution(self.a)

    def members(self, cap: int | None = None) -> np.ndarray:
        """All coset members, ascending."""
        words = self.code.codewords(cap)
        if words.dtype == object:
            out = np.array([int(w) ^ self.offset for w in words], dtype=object)
        else:
            out = words ^ np.uint64(self.offset)
        out.sort()
        return out

    @property
    def size(self) -> int:
        return 1 << self.code.k


def nearest_codeword(coset: AffineCoset, x: BitString, cap: int | None = None) -> tuple[BitString, int]:
    """Closest coset member to ``x``; ties go to the lexicographically smallest."""
    n = coset.code.n
    if x.length != n:
        raise LengthMismatch(f"expected {n} bits, got {x.length}")
    members = coset.members(cap)
    if members.dtype == object:
        dists = np.array([(int(m) ^ x.value).bit_count() for m in members], dtype=np.int64)
    else:
        dists = np.bitwise_count(members ^ np.uint64(x.value)).astype(np.int64)
    # members ascending, so argmin returns the smallest tied member
    best = int(np.argmin(dists))
    return BitString(n, int(members[best])), int(dists[best])


def coset_distance_table(coset: AffineCoset, cap: int | None = None) -> np.ndarray:
    """Distance from every ``x`` in ``{0,1}^n`` to the coset, by multi-source BFS."""
    n = coset.code.n
    cap = enumeration_cap() if cap is None else cap
    if n > 40 or (1 << n) > cap:
        raise CapExceeded(f"table over 2^{n} strings exceeds cap {cap}")
    dist = np.full(1 << n, -1, dtype=np.int64)
    frontier = coset.members(cap).astype(np.int64)
    dist[frontier] = 0
    flips = (1 << np.arange(n, dtype=np.int64))
    level = 0
    while len(frontier):
        level += 1
        cand = np.unique((frontier[:, None] ^ flips[None, :]).ravel())
        cand = cand[dist[cand] < 0]
        dist[cand] = level
        frontier = cand
    return dist


def hamming_ball_volume(n: int, radius: int) -> int:
    """Number of length-``n`` strings within Hamming distance ``radius`` of a point."""
    if not 0 <= radius <= n:
        raise ParamOutOfRange("need 0 <= radius <= n")
    return sum(math.comb(n, i) for i in range(radius + 1))


def packing_holds(code: ParityCheckCode) -> bool:
    """``2^(n-r) Vol(B_2s) <= 2^n`` with ``s = floor((d_min - 1)/4)``."""
    if code.d_min is None:
        raise ParamOutOfRange("code distance unknown")
    s = (code.d_min - 1) // 4
    return (1 << code.k) * hamming_ball_volume(code.n, 2 * s) <= 1 << code.n


def hamming_code(m: int = 3) -> ParityCheckCode:
    """The ``[2^m - 1, 2^m - 1 - m, 3]`` Hamming code; column ``j`` of ``H`` is ``j + 1`` in binary."""
    n = (1 << m) - 1
    matrix = [[((j + 1) >> (m - 1 - i)) & 1 for j in range(n)] for i in range(m)]
    return ParityCheckCode.from_matrix(matrix, d_min=3, verified=True)


def repetition_code(n: int) -> ParityCheckCode:
    """``{0^n, 1^n}``, checked by ``x_0 + x_i = 0`` for each ``i``."""
    rows = [(1 << (n - 1)) | (1 << (n - 1 - i)) for i in range(1, n)]
    return ParityCheckCode(n, tuple(rows), n, True)


def extended_hamming_code() -> ParityCheckCode:
    """The ``[8, 4, 4]`` extended Hamming code."""
    base = hamming_code(3).matrix()
    top = np.hstack([base, np.zeros((3, 1), dtype=np.uint8)])
    matrix = np.vstack([top, np.ones((1, 8), dtype=np.uint8)])
    return ParityCheckCode.from_matrix(matrix, d_min=4, verified=True)
