"""Minimal GF(2^8) arithmetic for the library-completion broadcast.

Field: GF(2)[x] / (x^8 + x^4 + x^3 + x + 1), generator 0x03. Payloads are
treated as byte strings of field symbols; scaling a payload by a constant
uses a 256-byte translation table per constant (C-speed ``bytes.translate``).
"""

from __future__ import annotations

_POLY = 0x11B

EXP = [0] * 512
LOG = [0] * 256
_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    _x ^= (_x >> 8) * _POLY
for _i in range(255, 512):
    EXP[_i] = EXP[_i - 255]


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in GF(256)")
    return EXP[255 - LOG[a]]


def power(a: int, e: int) -> int:
    if a == 0:
        return 0 if e else 1
    return EXP[(LOG[a] * e) % 255]


_SCALE_TABLES: dict[int, bytes] = {}


def scale_table(c: int) -> bytes:
    table = _SCALE_TABLES.get(c)
    if table is None:
        table = bytes(mul(c, b) for b in range(256))
        _SCALE_TABLES[c] = table
    return table


def scale_bytes(payload: bytes, c: int) -> bytes:
    if c == 0:
        return bytes(len(payload))
    if c == 1:
        return payload
    return payload.translate(scale_table(c))


def xor_bytes(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def solve(matrix: list[list[int]], rhs: list[bytes]) -> list[bytes]:
    """Solve A x = rhs over GF(256); rhs entries are equal-length payloads.

    A must be square and invertible (guaranteed for distinct-node Vandermonde
    systems). Plain Gaussian elimination; sizes here are tiny.
    """
    m = len(matrix)
    a = [row[:] for row in matrix]
    v = list(rhs)
    for col in range(m):
        pivot = next((r for r in range(col, m) if a[r][col]), None)
        if pivot is None:
            raise ValueError("singular system in GF(256) solve")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            v[col], v[pivot] = v[pivot], v[col]
        pinv = inv(a[col][col])
        a[col] = [mul(pinv, x) for x in a[col]]
        v[col] = scale_bytes(v[col], pinv)
        for r in range(m):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [x ^ mul(factor, y) for x, y in zip(a[r], a[col])]
                v[r] = xor_bytes(v[r], scale_bytes(v[col], factor))
    return v
