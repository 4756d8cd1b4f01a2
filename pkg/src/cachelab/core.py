"""Problem instances and the bit-level data model for cache-aided delivery.

A problem instance is a library of N files of B bits each, K users with a
cache of M files each, and L distinct file requests per user per transmission
interval. Content is delivered either by a central server (centralized mode)
or by the devices themselves out of their own caches (D2D mode, which needs
the caches to collectively hold the library: K*M >= N).

All memory and rate values are exact rationals (`fractions.Fraction`);
nothing in this package ever rounds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Union


class CacheLabError(Exception):
    """Base class for all errors raised by this package."""


class OutOfRangeError(CacheLabError):
    """A configuration value violates a model invariant."""


class InsufficientCollectiveStorageError(OutOfRangeError):
    """D2D caches cannot collectively hold the library (K*M < N)."""


class ModeMismatchError(CacheLabError):
    """An operation was applied to a config with the wrong delivery mode."""


class DomainError(CacheLabError):
    """A bound parameter (s, ell) or query point lies outside its domain."""


class DivisibilityError(CacheLabError):
    """File size does not divide evenly into the required pieces."""


class NotCornerError(CacheLabError):
    """Cache size is not of the simulable corner form M = N*t/K, t integer."""


class PlacementMismatchError(CacheLabError):
    """Cache contents are inconsistent with the requested delivery."""


class DecodeFailureError(CacheLabError):
    """A user could not reconstruct a requested file (scheme bug)."""


class DeliveryMode(Enum):
    CENTRALIZED = "cen"
    D2D = "d2d"


RationalLike = Union[Fraction, int, str]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an exact rational from "p/q" or an integer string.

    Decimal notation is rejected on purpose: every value in this package is
    exact, and "0.1" is not the rational 1/10 to a float-minded caller.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    text = str(value).strip()
    if "." in text or "e" in text.lower():
        raise OutOfRangeError(
            f"rational values must be given as 'p/q' or an integer, got {text!r}"
        )
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise OutOfRangeError(f"cannot parse rational from {text!r}: {exc}") from exc


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p/q", or plain "p" when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class SystemConfig:
    """A validated problem instance.

    Fields mirror the model: `n_files` (N), `n_users` (K), `demands_per_user`
    (L), `cache_size` (M, in file units), the delivery mode, and optionally a
    file size in bits (left None to let the simulator pick the minimal evenly
    divisible size for a given placement parameter).
    """

    n_files: int
    n_users: int
    demands_per_user: int
    cache_size: Fraction
    mode: DeliveryMode
    file_bits: int | None = None

    def __post_init__(self) -> None:
        n, k, l, m = self.n_files, self.n_users, self.demands_per_user, self.cache_size
        if not (isinstance(n, int) and n >= 1):
            raise OutOfRangeError("n_files must be a positive integer")
        if not (isinstance(k, int) and k >= 1):
            raise OutOfRangeError("n_users must be a positive integer")
        if not (isinstance(l, int) and 1 <= l <= n):
            raise OutOfRangeError(
                f"demands_per_user must satisfy 1 <= L <= N "
                f"(each user requests L distinct files); got L={l}, N={n}"
            )
        if not isinstance(m, Fraction):
            raise OutOfRangeError("cache_size must be a Fraction")
        if self.mode is DeliveryMode.CENTRALIZED:
            if not (0 <= m <= n):
                raise OutOfRangeError(
                    f"centralized cache size must satisfy 0 <= M <= N; got M={m}, N={n}"
                )
        elif self.mode is DeliveryMode.D2D:
            if k * m < n:
                raise InsufficientCollectiveStorageError(
                    f"D2D caches must collectively store the library: "
                    f"K*M >= N required, got K*M={format_rational(k * m)} < N={n}"
                )
            if m > n:
                raise OutOfRangeError(
                    f"cache size cannot exceed the library: M={m} > N={n}"
                )
        else:
            raise OutOfRangeError(f"unknown delivery mode: {self.mode!r}")
        if self.file_bits is not None and not (
            isinstance(self.file_bits, int) and self.file_bits >= 1
        ):
            raise OutOfRangeError("file_bits must be a positive integer or None")

    @property
    def is_centralized(self) -> bool:
        return self.mode is DeliveryMode.CENTRALIZED


def make_config(
    n_files: int,
    n_users: int,
    demands_per_user: int,
    cache_size: RationalLike,
    mode: DeliveryMode | str,
    file_bits: int | None = None,
) -> SystemConfig:
    """Build and validate a SystemConfig; accepts "p/q" strings for M."""
    if isinstance(mode, str):
        try:
            mode = DeliveryMode(mode)
        except ValueError as exc:
            raise OutOfRangeError(f"unknown delivery mode {mode!r}") from exc
    return SystemConfig(
        n_files=n_files,
        n_users=n_users,
        demands_per_user=demands_per_user,
        cache_size=parse_rational(cache_size),
        mode=mode,
        file_bits=file_bits,
    )


@dataclass(frozen=True)
class DemandMatrix:
    """K rows of L file indices, each row pairwise distinct."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for i, row in enumerate(self.rows):
            if len(set(row)) != len(row):
                raise OutOfRangeError(
                    f"demand row {i + 1} repeats a file: {row} "
                    f"(each user requests distinct files)"
                )
            if any(d < 1 for d in row):
                raise OutOfRangeError(f"demand row {i + 1} has a non-positive index")

    def distinct_files(self) -> tuple[int, ...]:
        seen: dict[int, None] = {}
        for row in self.rows:
            for d in row:
                seen.setdefault(d, None)
        return tuple(sorted(seen))


def _check_demands(config: SystemConfig, demands: DemandMatrix) -> None:
    if len(demands.rows) != config.n_users:
        raise OutOfRangeError(
            f"demand matrix has {len(demands.rows)} rows for K={config.n_users} users"
        )
    for i, row in enumerate(demands.rows):
        if len(row) != config.demands_per_user:
            raise OutOfRangeError(
                f"demand row {i + 1} has {len(row)} entries for L={config.demands_per_user}"
            )
        if any(d > config.n_files for d in row):
            raise OutOfRangeError(f"demand row {i + 1} requests a file beyond N")


def worst_case_demands(config: SystemConfig) -> DemandMatrix:
    """Deterministic demand matrix maximizing the number of distinct files.

    File indices are assigned 1, 2, 3, ... row-major, wrapping modulo N;
    within a row, an index already used by that row is skipped in favour of
    the next unused one (always possible since L <= N).
    """
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    rows = []
    counter = 0
    for _ in range(k):
        row: list[int] = []
        for _ in range(l):
            candidate = counter % n + 1
            while candidate in row:
                counter += 1
                candidate = counter % n + 1
            row.append(candidate)
            counter += 1
        rows.append(tuple(row))
    return DemandMatrix(rows=tuple(rows))


def random_demands(config: SystemConfig, seed: int) -> DemandMatrix:
    """Each row a uniformly random ordered L-subset of [1:N]; seeded."""
    rng = random.Random(seed)
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    rows = tuple(tuple(rng.sample(range(1, n + 1), l)) for _ in range(k))
    return DemandMatrix(rows=rows)


def subsets(ground: int, size: int) -> tuple[tuple[int, ...], ...]:
    """All `size`-element subsets of [1:ground] in lexicographic order."""
    if not 0 <= size <= ground:
        raise DomainError(f"subset size must satisfy 0 <= t <= K; got t={size}, K={ground}")
    return tuple(combinations(range(1, ground + 1), size))


@dataclass(frozen=True)
class Library:
    """N files of exactly `file_bits` bits each, reproducible from `seed`.

    Files are stored as nonnegative ints; bit i (0 = most significant) of a
    file is ``(f >> (file_bits - 1 - i)) & 1``.
    """

    files: tuple[int, ...]
    file_bits: int
    seed: int

    @classmethod
    def generate(cls, n_files: int, file_bits: int, seed: int) -> "Library":
        if file_bits < 1:
            raise OutOfRangeError("file_bits must be positive")
        rng = random.Random(seed)
        files = tuple(rng.getrandbits(file_bits) for _ in range(n_files))
        return cls(files=files, file_bits=file_bits, seed=seed)
