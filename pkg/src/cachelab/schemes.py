"""Bit-exact placement, delivery, and decoding for the repetition schemes.

Placement splits every file into C(K,t) equal subfiles, one per t-subset of
users; user k caches exactly the subfiles whose subset contains k, which is
M*B bits at a corner point M = N*t/K. D2D placement additionally splits each
subfile into t owner-indexed pieces so that every cache byte has a designated
transmitting device.

Delivery emits the cheaper of two exact-cost strategies per mode:

  centralized
    coded      one XOR multicast per demand round and (t+1)-subset S:
               XOR over k in S of subfile(d_k[round], S\\{k});
               L * C(K,t+1) * B / C(K,t) bits total.
    broadcast  demand-independent library completion: per file, C(K-1,t)
               Vandermonde-coded packets over GF(256) from which every user
               solves for its missing subfiles; N * (1 - t/K) * B bits total.

  D2D
    coded      per round, (t+1)-subset S and sender u in S: u multicasts the
               XOR over k in S\\{u} of its own piece of subfile
               (d_k[round], S\\{k}); L * (K-t)/t * B bits total.
    broadcast  every piece of every file sent once by its owner; N*B bits.

Both broadcasts use round = 0 on their transmissions (they are demand-
independent); demand-driven multicasts use rounds 1..L. When both strategies
cost the same the coded one is emitted, keeping outputs deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd

from . import gf256
from .core import (
    DecodeFailureError,
    DeliveryMode,
    DemandMatrix,
    DivisibilityError,
    DomainError,
    InsufficientCollectiveStorageError,
    Library,
    NotCornerError,
    PlacementMismatchError,
    SystemConfig,
    _check_demands,
    subsets,
)

SERVER = 0  # sender id for the central server; devices are 1..K

KIND_XOR = "xor_multicast"
KIND_COMPLETION = "completion_packet"
KIND_D2D_XOR = "d2d_xor_multicast"
KIND_PIECE = "piece_broadcast"


@dataclass(frozen=True, slots=True)
class Transmission:
    """One multicast payload.

    `sender` is SERVER (0) or a device index in [1:K]. `round` is the demand
    round in [1:L] for demand-driven multicasts and 0 for demand-independent
    library broadcasts. `subset` is the (t+1)-subset addressed by an XOR
    multicast, the subfile's t-subset for a broadcast piece, and None for
    completion packets. `file`, `index` and `owner` identify broadcast
    payload content.
    """

    sender: int
    round: int
    subset: tuple[int, ...] | None
    payload: int
    bit_count: int
    kind: str
    file: int | None = None
    index: int | None = None
    owner: int | None = None


@dataclass(frozen=True)
class TransmissionLog:
    transmissions: tuple[Transmission, ...]
    total_bits: int
    mode: DeliveryMode
    t: int
    strategy: str  # "coded" or "broadcast"
    file_bits: int

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "t": self.t,
            "strategy": self.strategy,
            "file_bits": self.file_bits,
            "total_bits": self.total_bits,
            "transmissions": [
                {
                    "sender": tr.sender,
                    "round": tr.round,
                    "subset": list(tr.subset) if tr.subset is not None else None,
                    "kind": tr.kind,
                    "file": tr.file,
                    "index": tr.index,
                    "owner": tr.owner,
                    "bit_count": tr.bit_count,
                    "payload": _payload_hex(tr.payload, tr.bit_count),
                }
                for tr in self.transmissions
            ],
        }


def _payload_hex(payload: int, bit_count: int) -> str:
    nbytes = (bit_count + 7) // 8
    return payload.to_bytes(nbytes, "big").hex() if nbytes else ""


@dataclass(frozen=True)
class CacheContents:
    """Per-user cache maps from piece id to bit payload.

    Centralized keys are (file, subset); D2D keys are (file, subset, owner).
    """

    per_user: tuple[dict, ...]
    mode: DeliveryMode
    t: int
    file_bits: int
    unit_bits: int  # bits per stored entry (subfile or piece)

    def storage_bits(self, user: int) -> int:
        return len(self.per_user[user - 1]) * self.unit_bits


@dataclass(frozen=True)
class SimReport:
    measured_rate: Fraction
    formula_rate: Fraction
    decode_ok: tuple[bool, ...]
    rate_match: bool
    strategy: str
    uniform_device_rate: bool | None  # D2D soft check; None for centralized

    def to_json_dict(self) -> dict:
        from .core import format_rational

        return {
            "measured_rate": format_rational(self.measured_rate),
            "formula_rate": format_rational(self.formula_rate),
            "decode_ok": list(self.decode_ok),
            "rate_match": self.rate_match,
            "strategy": self.strategy,
            "uniform_device_rate": self.uniform_device_rate,
        }


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def default_file_bits(k: int, t: int) -> int:
    """Smallest byte-multiple file size both schemes divide evenly at t."""
    c = comb(k, t)
    pieces = t * c if t >= 1 else c
    return _lcm(c, pieces) * 8


def _check_corner(config: SystemConfig, t: int) -> None:
    n, k = config.n_files, config.n_users
    if not isinstance(t, int):
        raise NotCornerError(f"placement parameter t must be an integer, got {t!r}")
    if config.cache_size != Fraction(n * t, k):
        raise NotCornerError(
            f"M={config.cache_size} is not the corner N*t/K={Fraction(n * t, k)} for t={t}"
        )


def _resolve_file_bits(config: SystemConfig, k: int, t: int) -> int:
    b = config.file_bits if config.file_bits is not None else default_file_bits(k, t)
    c = comb(k, t)
    if b % c:
        raise DivisibilityError(f"file_bits={b} is not divisible by C(K,t)={c}")
    return b


def _split(value: int, total_bits: int, parts: int) -> list[int]:
    """Split `value` (big-endian, total_bits wide) into equal bit slices."""
    width = total_bits // parts
    mask = (1 << width) - 1
    return [(value >> (total_bits - (i + 1) * width)) & mask for i in range(parts)]


def _join(parts: list[int], width: int) -> int:
    out = 0
    for p in parts:
        out = (out << width) | p
    return out


# ---------------------------------------------------------------------------
# Placement
# ---------------------------------------------------------------------------


def place_centralized(config: SystemConfig, t: int, library: Library) -> CacheContents:
    """Store subfile (n, T) at every user in T; exactly M*B bits per user."""
    if config.mode is not DeliveryMode.CENTRALIZED:
        raise PlacementMismatchError("centralized placement needs a centralized config")
    k, n = config.n_users, config.n_files
    if not 0 <= t <= k:
        raise NotCornerError(f"t must lie in [0:K]; got {t}")
    _check_corner(config, t)
    b = library.file_bits
    c = comb(k, t)
    if b % c:
        raise DivisibilityError(f"file_bits={b} is not divisible by C(K,t)={c}")
    sub_bits = b // c
    groups = subsets(k, t)
    per_user: list[dict] = [dict() for _ in range(k)]
    for fi, content in enumerate(library.files, start=1):
        slices = _split(content, b, c)
        for gi, group in enumerate(groups):
            for member in group:
                per_user[member - 1][(fi, group)] = slices[gi]
    return CacheContents(
        per_user=tuple(per_user),
        mode=DeliveryMode.CENTRALIZED,
        t=t,
        file_bits=b,
        unit_bits=sub_bits if t >= 1 else b,
    )


def place_d2d(config: SystemConfig, t: int, library: Library) -> CacheContents:
    """As centralized, but each subfile carries t owner-indexed pieces."""
    if config.mode is not DeliveryMode.D2D:
        raise PlacementMismatchError("D2D placement needs a D2D config")
    k, n = config.n_users, config.n_files
    if t < 1:
        raise InsufficientCollectiveStorageError(
            f"D2D placement needs t >= 1 (K*M >= N); got t={t}"
        )
    if t > k:
        raise NotCornerError(f"t must lie in [1:K]; got {t}")
    _check_corner(config, t)
    b = library.file_bits
    c = comb(k, t)
    if b % (t * c):
        raise DivisibilityError(f"file_bits={b} is not divisible by t*C(K,t)={t * c}")
    piece_bits = b // (t * c)
    groups = subsets(k, t)
    per_user: list[dict] = [dict() for _ in range(k)]
    for fi, content in enumerate(library.files, start=1):
        slices = _split(content, b, c)
        for gi, group in enumerate(groups):
            pieces = _split(slices[gi], b // c, t)
            for pi, owner in enumerate(group):
                for member in group:
                    per_user[member - 1][(fi, group, owner)] = pieces[pi]
    return CacheContents(
        per_user=tuple(per_user),
        mode=DeliveryMode.D2D,
        t=t,
        file_bits=b,
        unit_bits=piece_bits,
    )


def _check_placement(config: SystemConfig, t: int, caches: CacheContents) -> None:
    if caches.mode is not config.mode:
        raise PlacementMismatchError(
            f"caches were placed for {caches.mode.value}, config is {config.mode.value}"
        )
    if caches.t != t:
        raise PlacementMismatchError(f"caches were placed with t={caches.t}, not t={t}")
    if len(caches.per_user) != config.n_users:
        raise PlacementMismatchError("cache user count does not match config")


# ---------------------------------------------------------------------------
# Centralized delivery
# ---------------------------------------------------------------------------


def _completion_nodes(n_subfiles: int) -> list[int]:
    if n_subfiles > 255:
        raise DivisibilityError(
            f"completion broadcast supports at most 255 subfiles per file; "
            f"got C(K,t)={n_subfiles}"
        )
    return list(range(1, n_subfiles + 1))


def _completion_packets(
    library: Library, k: int, t: int
) -> tuple[list[Transmission], int]:
    """Per file, C(K-1,t) Vandermonde packets over the subfile symbols."""
    b = library.file_bits
    c = comb(k, t)
    m = comb(k - 1, t)
    sub_bits = b // c
    if m and sub_bits % 8:
        raise DivisibilityError(
            f"completion broadcast needs byte-aligned subfiles; "
            f"subfile size is {sub_bits} bits"
        )
    nodes = _completion_nodes(c)
    sub_bytes = sub_bits // 8
    txs: list[Transmission] = []
    for fi, content in enumerate(library.files, start=1):
        slices = _split(content, b, c)
        payload_bytes = [s.to_bytes(sub_bytes, "big") for s in slices]
        for i in range(m):
            acc = 0
            for node, pb in zip(nodes, payload_bytes):
                coeff = gf256.power(node, i)
                acc ^= int.from_bytes(gf256.scale_bytes(pb, coeff), "big")
            txs.append(
                Transmission(
                    sender=SERVER,
                    round=0,
                    subset=None,
                    payload=acc,
                    bit_count=sub_bits,
                    kind=KIND_COMPLETION,
                    file=fi,
                    index=i,
                )
            )
    return txs, len(txs) * sub_bits


def deliver_centralized(
    config: SystemConfig,
    t: int,
    caches: CacheContents,
    demands: DemandMatrix,
    library: Library,
) -> TransmissionLog:
    """Emit the cheaper of the XOR multicast and the completion broadcast."""
    if config.mode is not DeliveryMode.CENTRALIZED:
        raise PlacementMismatchError("centralized delivery needs a centralized config")
    _check_placement(config, t, caches)
    _check_demands(config, demands)
    if caches.file_bits != library.file_bits:
        raise PlacementMismatchError("cache and library file sizes differ")
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    b = library.file_bits
    c = comb(k, t)
    sub_bits = b // c
    coded_bits = l * comb(k, t + 1) * sub_bits
    broadcast_bits = n * comb(k - 1, t) * sub_bits
    if coded_bits <= broadcast_bits:
        # server-side subfile view of the library
        groups = subsets(k, t)
        sub: dict[tuple[int, tuple[int, ...]], int] = {}
        for fi, content in enumerate(library.files, start=1):
            for group, piece in zip(groups, _split(content, b, c)):
                sub[(fi, group)] = piece
        txs: list[Transmission] = []
        for rnd in range(1, l + 1):
            for group in subsets(k, t + 1):
                acc = 0
                for member in group:
                    rest = tuple(u for u in group if u != member)
                    wanted = demands.rows[member - 1][rnd - 1]
                    acc ^= sub[(wanted, rest)]
                txs.append(
                    Transmission(
                        sender=SERVER,
                        round=rnd,
                        subset=group,
                        payload=acc,
                        bit_count=sub_bits,
                        kind=KIND_XOR,
                    )
                )
        return TransmissionLog(
            transmissions=tuple(txs),
            total_bits=coded_bits,
            mode=config.mode,
            t=t,
            strategy="coded",
            file_bits=b,
        )
    txs, total = _completion_packets(library, k, t)
    return TransmissionLog(
        transmissions=tuple(txs),
        total_bits=total,
        mode=config.mode,
        t=t,
        strategy="broadcast",
        file_bits=b,
    )


# ---------------------------------------------------------------------------
# D2D delivery
# ---------------------------------------------------------------------------


def deliver_d2d(
    config: SystemConfig,
    t: int,
    caches: CacheContents,
    demands: DemandMatrix,
) -> TransmissionLog:
    """Emit the cheaper of the per-sender XOR multicast and the piece broadcast.

    Every payload is a function of the sender's own cache only.
    """
    if config.mode is not DeliveryMode.D2D:
        raise PlacementMismatchError("D2D delivery needs a D2D config")
    _check_placement(config, t, caches)
    _check_demands(config, demands)
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    b = caches.file_bits
    c = comb(k, t)
    piece_bits = b // (t * c)
    coded_bits = l * (t + 1) * comb(k, t + 1) * piece_bits
    broadcast_bits = n * b
    if coded_bits <= broadcast_bits:
        txs: list[Transmission] = []
        for rnd in range(1, l + 1):
            for group in subsets(k, t + 1):
                for sender in group:
                    acc = 0
                    for member in group:
                        if member == sender:
                            continue
                        rest = tuple(u for u in group if u != member)
                        wanted = demands.rows[member - 1][rnd - 1]
                        acc ^= caches.per_user[sender - 1][(wanted, rest, sender)]
                    txs.append(
                        Transmission(
                            sender=sender,
                            round=rnd,
                            subset=group,
                            payload=acc,
                            bit_count=piece_bits,
                            kind=KIND_D2D_XOR,
                        )
                    )
        return TransmissionLog(
            transmissions=tuple(txs),
            total_bits=coded_bits,
            mode=config.mode,
            t=t,
            strategy="coded",
            file_bits=b,
        )
    txs = []
    for fi in range(1, n + 1):
        for group in subsets(k, t):
            for owner in group:
                # broadcast pieces carry the subfile's t-subset in `subset`
                txs.append(
                    Transmission(
                        sender=owner,
                        round=0,
                        subset=group,
                        payload=caches.per_user[owner - 1][(fi, group, owner)],
                        bit_count=piece_bits,
                        kind=KIND_PIECE,
                        file=fi,
                        owner=owner,
                    )
                )
    return TransmissionLog(
        transmissions=tuple(txs),
        total_bits=broadcast_bits,
        mode=config.mode,
        t=t,
        strategy="broadcast",
        file_bits=b,
    )


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


def decode(
    config: SystemConfig,
    user_k: int,
    cache: dict,
    log: TransmissionLog,
    demands: DemandMatrix,
) -> tuple[int, ...]:
    """Reconstruct user `user_k`'s L requested files bit-exactly.

    `cache` is that user's own map from `CacheContents.per_user`. Raises
    DecodeFailureError naming the first unrecoverable piece.
    """
    if not 1 <= user_k <= config.n_users:
        raise DomainError(f"user index {user_k} outside [1:{config.n_users}]")
    _check_demands(config, demands)
    if log.mode is not config.mode:
        raise PlacementMismatchError("log mode does not match config")
    if config.mode is DeliveryMode.CENTRALIZED:
        return _decode_centralized(config, user_k, cache, log, demands)
    return _decode_d2d(config, user_k, cache, log, demands)


def _decode_centralized(config, user_k, cache, log, demands):
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    t, b = log.t, log.file_bits
    c = comb(k, t)
    sub_bits = b // c
    groups = subsets(k, t)
    recovered: dict = {}

    if log.strategy == "coded":
        for tx in log.transmissions:
            if tx.kind != KIND_XOR or user_k not in tx.subset:
                continue
            acc = tx.payload
            for member in tx.subset:
                if member == user_k:
                    continue
                rest = tuple(u for u in tx.subset if u != member)
                wanted = demands.rows[member - 1][tx.round - 1]
                acc ^= cache[(wanted, rest)]
            mine = tuple(u for u in tx.subset if u != user_k)
            recovered[(demands.rows[user_k - 1][tx.round - 1], mine)] = acc
    else:
        recovered = _decode_completion(
            cache, log, user_k, k, t, c, sub_bits, groups,
            wanted_files=set(demands.rows[user_k - 1]),
        )

    files = []
    for wanted in demands.rows[user_k - 1]:
        parts = []
        for group in groups:
            key = (wanted, group)
            if key in cache:
                parts.append(cache[key])
            elif key in recovered:
                parts.append(recovered[key])
            else:
                raise DecodeFailureError(
                    f"user {user_k} cannot recover subfile {key}"
                )
        files.append(_join(parts, sub_bits))
    return tuple(files)


def _decode_completion(cache, log, user_k, k, t, c, sub_bits, groups, wanted_files):
    """Solve each demanded file's Vandermonde system for the missing subfiles."""
    m = comb(k - 1, t)
    recovered: dict = {}
    if m == 0:
        return recovered
    sub_bytes = sub_bits // 8
    nodes = _completion_nodes(c)
    packets: dict[int, list[int]] = {}
    for tx in log.transmissions:
        if tx.kind == KIND_COMPLETION and tx.file in wanted_files:
            packets.setdefault(tx.file, [0] * m)[tx.index] = tx.payload
    for fi in sorted(wanted_files):
        rows = packets.get(fi)
        if rows is None or len(rows) != m:
            raise DecodeFailureError(
                f"user {user_k} is missing completion packets for file {fi}"
            )
        unknown_idx = [gi for gi, g in enumerate(groups) if user_k not in g]
        rhs = []
        for i in range(m):
            acc = rows[i]
            for gi, group in enumerate(groups):
                if user_k in group:
                    coeff = gf256.power(nodes[gi], i)
                    known = cache[(fi, group)].to_bytes(sub_bytes, "big")
                    acc ^= int.from_bytes(gf256.scale_bytes(known, coeff), "big")
            rhs.append(acc.to_bytes(sub_bytes, "big"))
        matrix = [
            [gf256.power(nodes[gi], i) for gi in unknown_idx] for i in range(m)
        ]
        solution = gf256.solve(matrix, rhs)
        for gi, value in zip(unknown_idx, solution):
            recovered[(fi, groups[gi])] = int.from_bytes(value, "big")
    return recovered


def _decode_d2d(config, user_k, cache, log, demands):
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    t, b = log.t, log.file_bits
    c = comb(k, t)
    sub_bits = b // c
    piece_bits = b // (t * c)
    groups = subsets(k, t)
    recovered: dict = {}

    if log.strategy == "coded":
        for tx in log.transmissions:
            if tx.kind != KIND_D2D_XOR or user_k not in tx.subset or tx.sender == user_k:
                continue
            acc = tx.payload
            for member in tx.subset:
                if member in (tx.sender, user_k):
                    continue
                rest = tuple(u for u in tx.subset if u != member)
                wanted = demands.rows[member - 1][tx.round - 1]
                acc ^= cache[(wanted, rest, tx.sender)]
            mine = tuple(u for u in tx.subset if u != user_k)
            wanted = demands.rows[user_k - 1][tx.round - 1]
            recovered[(wanted, mine, tx.sender)] = acc
    else:
        for tx in log.transmissions:
            if tx.kind == KIND_PIECE:
                recovered[(tx.file, tx.subset, tx.owner)] = tx.payload

    files = []
    for wanted in demands.rows[user_k - 1]:
        parts = []
        for group in groups:
            piece_vals = []
            for owner in group:
                key = (wanted, group, owner)
                if key in cache:
                    piece_vals.append(cache[key])
                elif key in recovered:
                    piece_vals.append(recovered[key])
                else:
                    raise DecodeFailureError(
                        f"user {user_k} cannot recover piece {key}"
                    )
            parts.append(_join(piece_vals, piece_bits))
        files.append(_join(parts, sub_bits))
    return tuple(files)


# ---------------------------------------------------------------------------
# End-to-end harness
# ---------------------------------------------------------------------------


def simulate(
    config: SystemConfig,
    t: int,
    demands: DemandMatrix | None = None,
    seed: int = 0,
) -> SimReport:
    """Place, deliver, and decode; verify rates and reconstruction."""
    from .bounds import EvalMode, rate_ach_centralized, rate_ach_d2d

    if demands is None:
        from .core import worst_case_demands

        demands = worst_case_demands(config)
    k = config.n_users
    b = _resolve_file_bits(config, k, t)
    if config.mode is DeliveryMode.D2D and t >= 1 and b % (t * comb(k, t)):
        raise DivisibilityError(
            f"file_bits={b} is not divisible by t*C(K,t)={t * comb(k, t)}"
        )
    library = Library.generate(config.n_files, b, seed)
    if config.mode is DeliveryMode.CENTRALIZED:
        caches = place_centralized(config, t, library)
        log = deliver_centralized(config, t, caches, demands, library)
        formula = rate_ach_centralized(config, EvalMode.FORMULA_AT_M)
    else:
        caches = place_d2d(config, t, library)
        log = deliver_d2d(config, t, caches, demands)
        formula = rate_ach_d2d(config, EvalMode.FORMULA_AT_M)
    decode_ok = []
    for user in range(1, k + 1):
        try:
            got = decode(config, user, caches.per_user[user - 1], log, demands)
            expect = tuple(library.files[d - 1] for d in demands.rows[user - 1])
            decode_ok.append(got == expect)
        except DecodeFailureError:
            decode_ok.append(False)
    measured = Fraction(log.total_bits, b)
    uniform = None
    if config.mode is DeliveryMode.D2D:
        per_device = [0] * (k + 1)
        for tx in log.transmissions:
            per_device[tx.sender] += tx.bit_count
        active = [bits for bits in per_device[1:] if bits]
        uniform = len(set(active)) <= 1
    return SimReport(
        measured_rate=measured,
        formula_rate=formula,
        decode_ok=tuple(decode_ok),
        rate_match=measured <= formula,
        strategy=log.strategy,
        uniform_device_rate=uniform,
    )
