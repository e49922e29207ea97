"""Exhaustive and randomized scans over spaces of forms.

A scan is split into work units: contiguous index ranges (exhaustive mode) or
fixed-size sample batches with their own seeded generator (random mode).
Units are merged strictly in index order, so summaries do not depend on the
number of worker threads or on where a run was interrupted and resumed.

The plane-quartic census over F_4 has a dedicated bit-sliced kernel: 64
candidates per uint64 word, GF(4) values as two bitplanes.  The table-lookup
kernel and the generic F_p-matmul engine in :mod:`linefree.analysis` serve as
independent reference paths.
"""
from __future__ import annotations

import enum
import json
import struct
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from . import analysis, bounds
from .form import HomogeneousForm, evaluate_codes, gradient, monomials, restrict_to_line
from .gf import GF, FieldSpec, f4_mul_const, f4_to_planes, field_of_order
from .projgeom import _space

UNIT_SIZE = 2**20
EXHAUSTIVE_GUARD = 2**40
VERIFY_EVERY = 10**4
CHECKPOINT_MAGIC = b"LFSCAN\r\n"
CHECKPOINT_VERSION = 1


class ScanError(RuntimeError):
    pass


class CheckpointError(ScanError):
    pass


class SelfCheckError(AssertionError):
    """A streamed record disagreed with its re-derivation from scratch."""


class Mode(str, enum.Enum):
    EXHAUSTIVE = "EXHAUSTIVE"
    RANDOM = "RANDOM"


@dataclass(frozen=True)
class ScanTask:
    n: int
    d: int
    q: int
    mode: Mode = Mode.EXHAUSTIVE
    normalized: bool = True
    seed: int = 0
    start: int = 0
    end: int | None = None
    sample_count: int = 0
    unit_size: int = UNIT_SIZE

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.n < 2 or self.d < 1:
            raise ScanError("scans need n >= 2 and d >= 1")
        if self.unit_size < 1:
            raise ScanError("unit_size must be positive")
        if not 0 <= self.seed < 2**64:
            raise ScanError("seed must fit in 64 bits")
        if self.mode is Mode.EXHAUSTIVE:
            size = self.space_size
            if size > EXHAUSTIVE_GUARD:
                raise ScanError(f"space of {size} candidates exceeds the guard 2^40")
            end = size if self.end is None else self.end
            if not 0 <= self.start <= end <= size:
                raise ScanError(f"range [{self.start}, {end}) outside [0, {size})")
            object.__setattr__(self, "end", end)
        else:
            if self.sample_count < 0:
                raise ScanError("sample_count must be >= 0")
            object.__setattr__(self, "start", 0)
            object.__setattr__(self, "end", self.sample_count)

    @property
    def spec(self) -> FieldSpec:
        return field_of_order(self.q)

    @property
    def num_monomials(self) -> int:
        return len(monomials(self.n + 1, self.d))

    @property
    def space_size(self) -> int:
        """Nonzero coefficient vectors, divided by scalars when normalised."""
        total = self.q**self.num_monomials - 1
        return total // (self.q - 1) if self.normalized else total

    @property
    def num_units(self) -> int:
        return -(-(self.end - self.start) // self.unit_size)

    def unit_range(self, u: int) -> tuple[int, int]:
        lo = self.start + u * self.unit_size
        return lo, min(lo + self.unit_size, self.end)

    def echo(self) -> dict:
        return {
            "space": {"n": self.n, "d": self.d, "q": self.q},
            "mode": self.mode.value,
            "normalized": self.normalized,
            "seed": self.seed,
            "range": [self.start, self.end],
            "sample_count": self.sample_count,
            "unit_size": self.unit_size,
        }


@dataclass
class ScanRecord:
    coeffs: tuple
    N: int
    line_free: bool
    status: str | None
    k_equivalent: bool = False
    singular: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class Summary:
    histogram: dict = field(default_factory=dict)  # N -> count over line-free candidates
    total: int = 0
    line_free: int = 0
    attains: int = 0
    exceeds_unflagged: int = 0
    k_equivalent: int = 0
    singular: int | None = 0  # None: not computed (bit-sliced census kernel)
    max_N: int | None = None
    self_checks: int = 0
    discrepancies: list = field(default_factory=list)

    def merge(self, other: "Summary") -> "Summary":
        hist = dict(self.histogram)
        for k, v in other.histogram.items():
            hist[k] = hist.get(k, 0) + v
        mx = [m for m in (self.max_N, other.max_N) if m is not None]
        return Summary(
            histogram=hist,
            total=self.total + other.total,
            line_free=self.line_free + other.line_free,
            attains=self.attains + other.attains,
            exceeds_unflagged=self.exceeds_unflagged + other.exceeds_unflagged,
            k_equivalent=self.k_equivalent + other.k_equivalent,
            singular=None if None in (self.singular, other.singular) else self.singular + other.singular,
            max_N=max(mx) if mx else None,
            self_checks=self.self_checks + other.self_checks,
            discrepancies=sorted(self.discrepancies + other.discrepancies),
        )

    def to_dict(self) -> dict:
        return {
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "counts": {
                "total": self.total,
                "line_free": self.line_free,
                "attains": self.attains,
                "exceeds_unflagged": self.exceeds_unflagged,
                "k_equivalent": self.k_equivalent,
                "singular": self.singular,
            },
            "max_N_line_free": self.max_N,
            "self_checks": self.self_checks,
            "discrepancies": self.discrepancies,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Summary":
        c = d["counts"]
        return cls(
            histogram={int(k): v for k, v in d["histogram"].items()},
            total=c["total"],
            line_free=c["line_free"],
            attains=c["attains"],
            exceeds_unflagged=c["exceeds_unflagged"],
            k_equivalent=c["k_equivalent"],
            singular=c["singular"],
            max_N=d["max_N_line_free"],
            self_checks=d["self_checks"],
            discrepancies=list(d["discrepancies"]),
        )

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()


@dataclass
class ScanState:
    task: ScanTask
    watermark: int = 0  # number of completed units, always a prefix
    summary: Summary = field(default_factory=Summary)
    elapsed: float = 0.0

    @property
    def done(self) -> bool:
        return self.watermark >= self.task.num_units

    def summary_json(self, include_throughput: bool = True) -> dict:
        out = {"task": self.task.echo(), "units_done": self.watermark, **self.summary.to_dict()}
        if include_throughput:
            done = self.summary.total
            out["throughput"] = {
                "candidates": done,
                "seconds": round(self.elapsed, 3),
                "per_second": round(done / self.elapsed, 1) if self.elapsed > 0 else None,
            }
        return out


# --- candidate enumeration -------------------------------------------------------

def _block_offsets(q: int, M: int) -> np.ndarray:
    """Start index of each block of normalised vectors with tail length t = 0..M-1."""
    return np.array([(q**t - 1) // (q - 1) for t in range(M + 1)], dtype=np.int64)


def candidate_values(task: ScanTask, idx: np.ndarray) -> np.ndarray:
    """Base-q integer of the candidate vectors at the given lex positions.

    Normalised vectors with ``t`` entries after the leading 1 form a block of
    ``q**t`` consecutive values starting at ``q**t``; blocks come in order of
    increasing ``t``, which is increasing value.
    """
    idx = np.asarray(idx, dtype=np.int64)
    q, M = task.q, task.num_monomials
    if not task.normalized:
        return idx + 1
    offsets = _block_offsets(q, M)
    t = np.searchsorted(offsets, idx, side="right") - 1
    return q**t + (idx - offsets[t])


def values_to_vectors(q: int, M: int, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = q ** np.arange(M - 1, -1, -1, dtype=np.int64)
    return (values[:, None] // shifts[None, :]) % q


def candidate_vectors(task: ScanTask, lo: int, hi: int) -> np.ndarray:
    return values_to_vectors(task.q, task.num_monomials, candidate_values(task, np.arange(lo, hi)))


def vector_value(q: int, vec) -> int:
    value = 0
    for c in vec:
        value = value * q + int(c)
    return value


# --- census kernels (plane quartics over F_4) ----------------------------------------

CENSUS_SPACE = (2, 4, 4)


class QuarticKernels:
    """Point tables for plane quartics over F_4 shared by the census kernels."""

    def __init__(self):
        self.spec = GF(2, 2)
        self.fs = analysis.form_space(2, 4, self.spec)
        self.geometry = self.fs.geometry
        self.V = self.fs.point_values  # (21, 15)
        self.line_points = self.geometry.line_points  # (21, 5)
        self.terms = [[(m, int(c)) for m, c in enumerate(row) if c] for row in self.V]

    def bitsliced(self, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """N and line-freeness per candidate via bitplanes (64 lanes per word).

        q = d = 4, so a line lies on the curve iff its 5 points do.
        """
        C = np.asarray(C)
        B = C.shape[0]
        lo, hi = f4_to_planes(C.T)
        zero = []
        for terms in self.terms:
            vlo = np.zeros(lo.shape[1], dtype=np.uint64)
            vhi = np.zeros_like(vlo)
            for m, c in terms:
                a, b = f4_mul_const(c, lo[m], hi[m])
                vlo ^= a
                vhi ^= b
            zero.append(~(vlo | vhi))
        # 5-bit ripple counter of zeros per lane
        counter = [np.zeros_like(zero[0]) for _ in range(5)]
        for z in zero:
            carry = z
            for k in range(5):
                counter[k], carry = counter[k] ^ carry, counter[k] & carry
        on_line = np.zeros_like(zero[0])
        for pts in self.line_points:
            acc = zero[pts[0]].copy()
            for p in pts[1:]:
                acc &= zero[p]
            on_line |= acc
        bits = np.unpackbits(np.stack(counter + [~on_line]).view(np.uint8), axis=1, bitorder="little")[:, :B]
        N = (bits[:5].astype(np.int64) << np.arange(5)[:, None]).sum(axis=0)
        return N, bits[5].astype(bool)

    def table(self, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Same quantities through element-wise GF(4) table lookups."""
        spec = self.spec
        mt, at = spec.mul_table, spec.add_table
        C = np.asarray(C, dtype=np.int64)
        acc = np.zeros((len(C), len(self.V)), dtype=np.int64)
        for m in range(self.V.shape[1]):
            acc = at[acc, mt[C[:, m][:, None], self.V[None, :, m]]]
        zero = acc == 0
        on_line = zero[:, self.line_points].all(axis=2).any(axis=1)
        return zero.sum(axis=1), ~on_line


@lru_cache(maxsize=1)
def quartic_kernels() -> QuarticKernels:
    return QuarticKernels()


# --- from-scratch re-derivation --------------------------------------------------------

def rederive(f: HomogeneousForm) -> dict:
    """N, line-freeness and singularity by scalar evaluation and sparse substitution."""
    geo = _space(f.n, f.spec)
    on = [P for P in geo.points.tolist() if evaluate_codes(f, P) == 0]
    line_free = all(not restrict_to_line(f, geo.line(k)).is_zero for k in range(len(geo.lines)))
    singular = any(not any(gradient(f, P)) for P in on)
    return {"N": len(on), "line_free": line_free, "singular": singular}


def record_for(task: ScanTask, vec, N: int, line_free: bool, singular: bool, k_eq: bool) -> ScanRecord:
    status = None
    if line_free:
        bound = bounds.main_bound(task.n, task.d, task.q)
        status = analysis.verdict_status(N, bound).value
    return ScanRecord(tuple(int(c) for c in vec), int(N), bool(line_free), status, bool(k_eq), bool(singular))


def verify_record(task: ScanTask, record: ScanRecord) -> bool:
    """Re-evaluate a record's coefficient vector from scratch and compare every field."""
    f = HomogeneousForm.from_vector(task.spec, task.n + 1, task.d, record.coeffs)
    got = rederive(f)
    k_eq = analysis.is_k_space(f) and got["N"] == 14 and got["line_free"] and analysis.is_equivalent_to_K(f)
    expect = record_for(task, record.coeffs, got["N"], got["line_free"], got["singular"], k_eq)
    return expect == record


# --- unit execution -----------------------------------------------------------------------

def _is_census(task: ScanTask) -> bool:
    return (task.n, task.d, task.q) == CENSUS_SPACE


def _unit_vectors(task: ScanTask, u: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient vectors of unit ``u`` and their global indices."""
    lo, hi = task.unit_range(u)
    if task.mode is Mode.EXHAUSTIVE:
        return candidate_vectors(task, lo, hi), np.arange(lo, hi)
    M = task.num_monomials
    rng = np.random.default_rng(np.random.SeedSequence(entropy=task.seed, spawn_key=(u,)))
    C = rng.integers(0, task.q, size=(hi - lo, M))
    while True:
        bad = ~C.any(axis=1)
        if not bad.any():
            break
        C[bad] = rng.integers(0, task.q, size=(int(bad.sum()), M))
    if task.normalized:
        spec = task.spec
        first = np.argmax(C != 0, axis=1)
        lead = C[np.arange(len(C)), first]
        C = spec.mul_table[spec.inv_table[lead][:, None], C]
    return C, np.arange(lo, hi)


def run_unit(task: ScanTask, u: int, record_threshold=None) -> tuple[Summary, list]:
    """Evaluate one work unit; returns its summary and its interesting records."""
    C, gidx = _unit_vectors(task, u)
    spec = task.spec
    if _is_census(task) and task.mode is Mode.EXHAUSTIVE:
        N, line_free = quartic_kernels().bitsliced(C)
        singular = None
    else:
        stats = analysis.form_space(task.n, task.d, spec).batch_stats(C)
        N, line_free, singular = stats["N"], stats["line_free"], stats["singular"]

    bound = bounds.main_bound(task.n, task.d, task.q)
    lf_N = N[line_free]
    s = Summary()
    s.total = len(C)
    s.line_free = int(line_free.sum())
    s.histogram = {int(k): int(v) for k, v in zip(*np.unique(lf_N, return_counts=True))}
    s.attains = int((lf_N == bound).sum())
    s.max_N = int(lf_N.max()) if len(lf_N) else None
    s.singular = None if singular is None else int(singular.sum())

    exceeds = line_free & (N > bound)
    k_eq = np.zeros(len(C), dtype=bool)
    if _is_census(task) and exceeds.any():
        cand = exceeds & (N == 14)
        codes = analysis.normalized_codes(spec, C[cand])
        k_eq[cand] = np.isin(codes, analysis.k_orbit())
    s.k_equivalent = int(k_eq.sum())
    unflagged = exceeds & ~k_eq
    s.exceeds_unflagged = int(unflagged.sum())
    s.discrepancies = sorted(vector_value(task.q, v) for v in C[unflagged])

    if record_threshold is None:
        record_threshold = 12 if _is_census(task) else bound
    interesting = (line_free & (N >= record_threshold)) | exceeds
    picked = np.flatnonzero(interesting)
    audited = np.flatnonzero(gidx % VERIFY_EVERY == 0)
    if singular is None:
        # the bit-sliced kernel does not look at gradients
        singular = np.zeros(len(C), dtype=bool)
        needed = np.union1d(picked, audited)
        if len(needed):
            singular[needed] = analysis.form_space(task.n, task.d, spec).batch_stats(C[needed])["singular"]
    records = [record_for(task, C[i], N[i], line_free[i], singular[i], k_eq[i]) for i in picked]

    # self-verification on a deterministic 1-in-VERIFY_EVERY sample
    for i in audited:
        rec = record_for(task, C[i], N[i], line_free[i], singular[i], k_eq[i])
        if not verify_record(task, rec):
            raise SelfCheckError(f"record {rec} does not re-derive")
        s.self_checks += 1
    return s, records


def run_scan(
    task: ScanTask,
    state: ScanState | None = None,
    *,
    threads: int = 1,
    checkpoint_path=None,
    max_units: int | None = None,
    record_sink=None,
    progress=None,
) -> ScanState:
    """Run (or continue) a scan, merging units in order.

    ``record_sink`` is called with each interesting :class:`ScanRecord`;
    ``max_units`` stops early (the state is then resumable).
    """
    state = state or ScanState(task)
    if state.task != task:
        raise CheckpointError("state belongs to a different task")
    if checkpoint_path is not None and state.watermark == 0:
        write_checkpoint(state, checkpoint_path)
    stop = task.num_units if max_units is None else min(task.num_units, state.watermark + max_units)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        while state.watermark < stop:
            wave = range(state.watermark, min(stop, state.watermark + max(1, threads)))
            t0 = time.perf_counter()
            results = list(pool.map(lambda u: run_unit(task, u), wave))
            for s, records in results:
                state.summary = state.summary.merge(s)
                if record_sink is not None:
                    for r in records:
                        record_sink(r)
            state.watermark = wave.stop
            state.elapsed += time.perf_counter() - t0
            if checkpoint_path is not None:
                write_checkpoint(state, checkpoint_path)
            if progress is not None:
                progress(state)
    return state


@dataclass
class ScanResult:
    records: list
    state: ScanState

    @property
    def summary(self) -> Summary:
        return self.state.summary


def exhaustive_quartic_census(start: int = 0, end: int | None = None, **kwargs) -> ScanResult:
    """Census of normalised plane quartics over F_4 in the index range ``[start, end)``."""
    task = ScanTask(2, 4, 4, Mode.EXHAUSTIVE, True, start=start, end=end,
                    unit_size=kwargs.pop("unit_size", UNIT_SIZE))
    records = []
    state = run_scan(task, record_sink=records.append, **kwargs)
    return ScanResult(records, state)


def random_sweep(task: ScanTask, **kwargs) -> ScanResult:
    if task.mode is not Mode.RANDOM:
        raise ScanError("random_sweep needs a RANDOM task")
    records = []
    state = run_scan(task, record_sink=records.append, **kwargs)
    return ScanResult(records, state)


# --- checkpoint files ------------------------------------------------------------------------

_HEADER = struct.Struct("<8sIBBBHBBQQQQQQ")


def _encode(state: ScanState) -> bytes:
    t = state.task
    spec = t.spec
    head = _HEADER.pack(
        CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
        0 if t.mode is Mode.EXHAUSTIVE else 1, t.n, t.d, spec.p, spec.e, int(t.normalized),
        t.seed, t.start, t.end, t.sample_count, t.unit_size, state.watermark,
    )
    payload = state.summary.canonical_bytes()
    body = head + struct.pack("<dI", state.elapsed, len(payload)) + payload
    return body + struct.pack("<I", zlib.crc32(body))


def write_checkpoint(state: ScanState, path) -> None:
    """Atomically write the versioned binary checkpoint (see docs/checkpoint.md)."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(_encode(state))
    tmp.replace(path)


checkpoint = write_checkpoint


def resume(path, task: ScanTask | None = None) -> ScanState:
    """Load a checkpoint; if ``task`` is given it must match the stored task exactly."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 16:
        raise CheckpointError("checkpoint truncated")
    if data[:8] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a scan checkpoint")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise CheckpointError("checkpoint checksum mismatch")
    (_, version, mode, n, d, p, e, normalized, seed, start, end, count, unit, watermark) = _HEADER.unpack_from(body)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    elapsed, plen = struct.unpack_from("<dI", body, _HEADER.size)
    payload = body[_HEADER.size + 12 :]
    if len(payload) != plen:
        raise CheckpointError("checkpoint payload length mismatch")
    stored = ScanTask(
        n, d, p**e, Mode.EXHAUSTIVE if mode == 0 else Mode.RANDOM, bool(normalized),
        seed=seed, start=start, end=end if mode == 0 else None, sample_count=count, unit_size=unit,
    )
    if watermark > stored.num_units:
        raise CheckpointError(f"watermark {watermark} beyond {stored.num_units} units")
    if task is not None and task != stored:
        raise CheckpointError(f"checkpoint task {stored.echo()} does not match {task.echo()}")
    summary = Summary.from_dict(json.loads(payload))
    return ScanState(stored, watermark, summary, elapsed)


def sample_forms(n: int, d: int, q: int, count: int, seed: int, *, line_free=None, singular=None,
                 vanish=(), batch: int = 512, max_draws: int = 10**7) -> list[HomogeneousForm]:
    """Draw uniform random forms until ``count`` pass the filters.

    ``line_free`` / ``singular`` select on those flags when not None;
    ``vanish`` lists exponent tuples whose coefficients are forced to zero.
    """
    spec = field_of_order(q)
    fs = analysis.form_space(n, d, spec)
    rng = np.random.default_rng(seed)
    zero_cols = [fs.monomials.index(tuple(m)) for m in vanish]
    out: list[HomogeneousForm] = []
    draws = 0
    while len(out) < count:
        if draws >= max_draws:
            raise ScanError(f"only {len(out)} of {count} samples after {draws} draws")
        C = rng.integers(0, q, size=(batch, fs.M))
        C[:, zero_cols] = 0
        C = C[C.any(axis=1)]
        draws += batch
        st = fs.batch_stats(C)
        keep = np.ones(len(C), dtype=bool)
        if line_free is not None:
            keep &= st["line_free"] == line_free
        if singular is not None:
            keep &= st["singular"] == singular
        for row in C[keep][: count - len(out)]:
            out.append(HomogeneousForm.from_vector(spec, n + 1, d, row))
    return out
