"""Exact finite probability substrate.

Domains, probability mass functions, product priors over datasets, joint
distributions of (dataset, outcome) pairs and mechanism kernels. Masses are
numpy arrays, either binary64 or ``object`` arrays of :class:`fractions.Fraction`
for the exact backend. All objects are immutable after construction.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapExceeded, DomainMismatch, ValidationError

TOL = 1e-12
DEFAULT_ENUM_CAP = 2**24
ENUM_CAP_ENV = "MAXINFO_ENUM_CAP"
# Exact (rational) masses are only supported on small supports.
RATIONAL_CAP = 2**12


def enumeration_cap() -> int:
    """Current enumeration cap, overridable through ``MAXINFO_ENUM_CAP``."""
    raw = os.environ.get(ENUM_CAP_ENV)
    if raw:
        return int(raw)
    return DEFAULT_ENUM_CAP


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def is_exact(mass: np.ndarray) -> bool:
    return mass.dtype == object


def _check_total(total, what: str) -> None:
    if isinstance(total, Fraction):
        if total != 1:
            raise ValidationError(f"{what} sums to {total}, deficit {1 - total}")
        return
    if abs(float(total) - 1.0) > TOL:
        raise ValidationError(
            f"{what} sums to {float(total)!r}, deficit {1.0 - float(total):.3g}"
        )


def _check_nonnegative(mass: np.ndarray, what: str) -> None:
    if is_exact(mass):
        bad = [m for m in mass.ravel() if m < 0]
    else:
        if not np.all(np.isfinite(mass)):
            raise ValidationError(f"{what} has non-finite entries")
        bad = mass[mass < 0]
    if len(bad):
        raise ValidationError(f"{what} has negative entries")


@dataclass(frozen=True, eq=False)
class Domain:
    """Ordered finite set of distinct labels."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValidationError("a domain needs at least one label")
        if len(set(labels)) != len(labels):
            raise ValidationError("domain labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, Domain) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    @cached_property
    def _positions(self) -> dict:
        return {label: i for i, label in enumerate(self.labels)}

    def index(self, label: Hashable) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise KeyError(f"label {label!r} not in domain") from None


@dataclass(frozen=True, eq=False)
class DatasetDomain(Domain):
    """All length-``n`` tuples over a marginal domain, in lexicographic order.

    Labels are tuples of marginal labels. Index ``i`` corresponds to the
    mixed-radix expansion of ``i`` with the first record most significant.
    """

    marginal: Domain
    n: int

    @property
    def radix(self) -> int:
        return self.marginal.size

    def tuple_at(self, index: int) -> tuple:
        if not 0 <= index < self.size:
            raise IndexError(index)
        digits = []
        for _ in range(self.n):
            index, d = divmod(index, self.radix)
            digits.append(d)
        return tuple(self.marginal.labels[d] for d in reversed(digits))

    def index_of(self, dataset: Sequence) -> int:
        if len(dataset) != self.n:
            raise KeyError(f"dataset {dataset!r} has wrong length")
        index = 0
        for label in dataset:
            index = index * self.radix + self.marginal.index(label)
        return index

    @cached_property
    def digits(self) -> np.ndarray:
        """(size, n) array of marginal indices for every dataset."""
        idx = np.arange(self.size, dtype=np.int64)
        out = np.empty((self.size, self.n), dtype=np.int64)
        for j in range(self.n - 1, -1, -1):
            idx, out[:, j] = np.divmod(idx, self.radix)
        out.setflags(write=False)
        return out

    def neighbor_index(self, index: np.ndarray, position: int, value: int) -> np.ndarray:
        """Indices of the datasets with record ``position`` replaced by ``value``."""
        weight = self.radix ** (self.n - 1 - position)
        current = self.digits[index, position]
        return index + (value - current) * weight


def enumerate_datasets(marginal_domain: Domain, n: int, cap: int | None = None) -> DatasetDomain:
    """Materialize the dataset space ``marginal_domain ** n``.

    Raises:
        CapExceeded: if ``|marginal_domain| ** n`` exceeds the cap.
    """
    if n < 1:
        raise ValidationError("dataset length must be at least 1")
    cap = enumeration_cap() if cap is None else cap
    size = marginal_domain.size**n
    if size > cap:
        raise CapExceeded(f"{marginal_domain.size}^{n} = {size} datasets exceeds cap {cap}")
    labels = tuple(itertools.product(marginal_domain.labels, repeat=n))
    return DatasetDomain(labels=labels, marginal=marginal_domain, n=n)


def _as_mass(values, exact: bool | None = None) -> np.ndarray:
    arr = np.asarray(values)
    if exact is None:
        exact = arr.dtype == object
    if exact:
        return np.array([Fraction(v) for v in arr.ravel()], dtype=object).reshape(arr.shape)
    return arr.astype(np.float64)


@dataclass(frozen=True, eq=False)
class PMF:
    domain: Domain
    mass: np.ndarray

    def __post_init__(self):
        mass = _as_mass(self.mass)
        if mass.shape != (self.domain.size,):
            raise ValidationError(
                f"mass has shape {mass.shape}, expected ({self.domain.size},)"
            )
        _check_nonnegative(mass, "PMF")
        _check_total(mass.sum(), "PMF")
        object.__setattr__(self, "mass", _readonly(mass))

    @classmethod
    def from_mapping(cls, domain: Domain, mapping: Mapping) -> "PMF":
        values = [mapping.get(label, 0) for label in domain.labels]
        exact = any(isinstance(v, Fraction) for v in values)
        return cls(domain, _as_mass(values, exact))

    @classmethod
    def uniform(cls, domain: Domain, exact: bool = False) -> "PMF":
        if exact:
            return cls(domain, np.array([Fraction(1, domain.size)] * domain.size, dtype=object))
        return cls(domain, np.full(domain.size, 1.0 / domain.size))

    @classmethod
    def bernoulli(cls, p, exact: bool | None = None) -> "PMF":
        """PMF on the bit domain ``(0, 1)`` with ``P[1] = p``."""
        if exact is None:
            exact = isinstance(p, Fraction)
        mass = [1 - p, p] if exact else [1.0 - float(p), float(p)]
        return cls(Domain((0, 1)), _as_mass(mass, exact))

    @property
    def exact(self) -> bool:
        return is_exact(self.mass)

    def __getitem__(self, label):
        return self.mass[self.domain.index(label)]


@dataclass(frozen=True, eq=False)
class JointPMF:
    """Joint law of (dataset, outcome); rows index ``left``, columns ``right``."""

    left: Domain
    right: Domain
    mass: np.ndarray

    def __post_init__(self):
        mass = _as_mass(self.mass)
        if mass.shape != (self.left.size, self.right.size):
            raise ValidationError(
                f"mass has shape {mass.shape}, expected {(self.left.size, self.right.size)}"
            )
        _check_nonnegative(mass, "joint")
        _check_total(mass.sum(), "joint")
        object.__setattr__(self, "mass", _readonly(mass))

    @property
    def exact(self) -> bool:
        return is_exact(self.mass)

    @cached_property
    def left_marginal(self) -> np.ndarray:
        return _readonly(self.mass.sum(axis=1))

    @cached_property
    def right_marginal(self) -> np.ndarray:
        return _readonly(self.mass.sum(axis=0))

    @cached_property
    def product_mass(self) -> np.ndarray:
        """Mass of the independent copy, ``left_marginal ⊗ right_marginal``."""
        return _readonly(np.outer(self.left_marginal, self.right_marginal))

    def left_pmf(self) -> PMF:
        return PMF(self.left, self.left_marginal)

    def right_pmf(self) -> PMF:
        return PMF(self.right, self.right_marginal)

    def __getitem__(self, key):
        x, z = key
        return self.mass[self.left.index(x), self.right.index(z)]

    def support(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.mass != 0)
        return list(zip(rows.tolist(), cols.tolist()))

    def to_float(self) -> "JointPMF":
        if not self.exact:
            return self
        return JointPMF(self.left, self.right, self.mass.astype(np.float64))

    def relabel_right(self, mapping, right: Domain) -> "JointPMF":
        """Push the outcome through a deterministic map ``mapping(label) -> label``."""
        mass = np.zeros((self.left.size, right.size), dtype=self.mass.dtype)
        if self.exact:
            mass[...] = Fraction(0)
        for j, label in enumerate(self.right.labels):
            mass[:, right.index(mapping(label))] += self.mass[:, j]
        return JointPMF(self.left, right, mass)


@dataclass(frozen=True, eq=False)
class MechanismKernel:
    """Exact conditional output law: ``rows[i]`` is the PMF of the output on input ``i``."""

    input_domain: Domain
    output_domain: Domain
    rows: np.ndarray

    def __post_init__(self):
        rows = _as_mass(self.rows)
        if rows.shape != (self.input_domain.size, self.output_domain.size):
            raise ValidationError(
                f"rows have shape {rows.shape}, expected "
                f"{(self.input_domain.size, self.output_domain.size)}"
            )
        _check_nonnegative(rows, "kernel")
        totals = rows.sum(axis=1)
        for i, total in enumerate(totals):
            _check_total(total, f"kernel row {i}")
        object.__setattr__(self, "rows", _readonly(rows))

    @property
    def exact(self) -> bool:
        return is_exact(self.rows)

    def row(self, label) -> PMF:
        return PMF(self.output_domain, self.rows[self.input_domain.index(label)])

    def relabel(self, mapping, output_domain: Domain) -> "MechanismKernel":
        """Post-compose with the deterministic map ``mapping(label) -> label``."""
        rows = np.zeros((self.input_domain.size, output_domain.size), dtype=self.rows.dtype)
        if self.exact:
            rows[...] = Fraction(0)
        for j, label in enumerate(self.output_domain.labels):
            rows[:, output_domain.index(mapping(label))] += self.rows[:, j]
        return MechanismKernel(self.input_domain, output_domain, rows)


def product_prior_pmf(marginal: PMF, n: int, cap: int | None = None) -> PMF:
    """The i.i.d. prior ``marginal ** n`` over :func:`enumerate_datasets` order."""
    domain = enumerate_datasets(marginal.domain, n, cap)
    if marginal.exact and domain.size > RATIONAL_CAP:
        raise CapExceeded(f"exact backend supports at most {RATIONAL_CAP} datasets")
    mass = marginal.mass[domain.digits].prod(axis=1)
    return PMF(domain, mass)


def joint_from_kernel(prior: PMF, kernel: MechanismKernel) -> JointPMF:
    """Joint law of ``(X, M(X))`` for ``X ~ prior``."""
    if prior.domain != kernel.input_domain:
        raise DomainMismatch("prior domain differs from the kernel input domain")
    mass = prior.mass[:, None] * kernel.rows
    return JointPMF(prior.domain, kernel.output_domain, mass)


def independent_copy(joint: JointPMF) -> JointPMF:
    """Product of the two marginals of ``joint``."""
    return JointPMF(joint.left, joint.right, joint.product_mass)


def point_mass(domain: Domain, label, exact: bool = False) -> PMF:
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return PMF(domain, np.array([one if l == label else zero for l in domain.labels],
                                dtype=object if exact else np.float64))


def label_text(label) -> str:
    """Text form of a label for CSV output; tuples of 1-char labels are concatenated."""
    if isinstance(label, tuple):
        parts = [str(p) for p in label]
        if all(len(p) == 1 for p in parts):
            return "".join(parts)
        return "|".join(parts)
    return str(label)


def joint_from_table(rows: Iterable[tuple], exact: bool = False) -> JointPMF:
    """Build a joint from ``(x, z, prob)`` triples; label order is first appearance."""
    left, right, entries = {}, {}, []
    for x, z, p in rows:
        left.setdefault(x, len(left))
        right.setdefault(z, len(right))
        entries.append((left[x], right[z], p))
    if exact:
        mass = np.full((len(left), len(right)), Fraction(0), dtype=object)
    else:
        mass = np.zeros((len(left), len(right)))
    for i, j, p in entries:
        mass[i, j] = Fraction(p) if exact else float(p)
    return JointPMF(Domain(tuple(left)), Domain(tuple(right)), mass)
