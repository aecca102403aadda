"""Seeded Monte Carlo BER sweeps over SNR grids.

Every sweep point gets its own random stream derived from the master seed
and the point index through numpy's SeedSequence spawn mechanism, so the
results are independent of worker count and schedule: a sweep rerun with
the same config and seed is byte-identical, whether it runs on 1 worker
or 8.  A point simulates fresh-channel blocks until it has seen
min_bit_errors errors or max_bits bits, counting index bits and symbol
bits together.
"""

import csv
import multiprocessing
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from smlink.channel import noise_variance_from_snr
from smlink.constellation import Constellation, build_constellation
from smlink.sm import SmSimulator
from smlink.stbc_sm import (
    StbcsmSimulator,
    build_codebooks,
    default_rotation_angle,
    spectral_efficiency as stbcsm_spectral_efficiency,
)
from smlink.vblast import MAX_HYPOTHESES, VblastSimulator

SCHEMES = ("sm", "stbc-sm", "vblast")
VARIANTS = ("plain", "precoded-zf", "precoded-mmse", "abf", "hbf-zf", "hbf-mmse")

CSV_HEADER = "scheme,variant,n_t,n_r,mod,L,theta,snr_db,bits,errors,ber,seed"

_START_BLOCKS = 2048


class ConfigurationError(ValueError):
    """Invalid experiment description; maps to CLI exit code 2."""


class TargetNotBracketedError(ValueError):
    """A BER curve never crosses the requested target level."""


@dataclass(frozen=True)
class SimConfig:
    """Full description of one BER-vs-SNR sweep."""

    scheme: str
    n_t: int
    n_r: int
    modulation: str = "psk2"
    variant: str = "plain"
    L: int = 1
    snr_grid: tuple[float, ...] = (0.0,)
    min_bit_errors: int = 100
    max_bits: int = 10_000_000
    master_seed: int = 0
    theta_override: Optional[float] = None

    _FIELDS = ("scheme", "n_t", "n_r", "modulation", "variant", "L", "snr_grid",
               "min_bit_errors", "max_bits", "master_seed", "theta_override")

    def constellation(self) -> Constellation:
        kind, order = parse_modulation(self.modulation)
        return build_constellation(kind, order)

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if self.n_t < 1 or self.n_r < 1:
            raise ConfigurationError("antenna counts must be >= 1")
        try:
            c = self.constellation()
        except ValueError as exc:
            raise ConfigurationError(f"invalid modulation {self.modulation!r}: {exc}")
        if self.scheme == "sm" and (self.n_t & (self.n_t - 1)) != 0:
            raise ConfigurationError("SM needs a power-of-2 transmit antenna count")
        if self.scheme == "stbc-sm" and self.n_t < 2:
            raise ConfigurationError("STBC-SM needs at least 2 transmit antennas")
        if self.scheme == "vblast":
            if self.variant != "plain":
                raise ConfigurationError("vblast supports only the plain variant")
            if c.M ** self.n_t > MAX_HYPOTHESES:
                raise ConfigurationError(
                    f"vblast hypothesis space M^N_T = {c.M ** self.n_t} exceeds 2^20"
                )
        if self.variant in ("abf", "hbf-zf", "hbf-mmse"):
            if self.L < 1:
                raise ConfigurationError("array variants need L >= 1")
        elif self.L != 1:
            raise ConfigurationError(f"variant {self.variant!r} does not use L")
        if len(self.snr_grid) == 0:
            raise ConfigurationError("snr_grid must not be empty")
        if any(b <= a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise ConfigurationError("snr_grid must be strictly increasing")
        if self.min_bit_errors < 1:
            raise ConfigurationError("min_bit_errors must be >= 1")
        if self.max_bits < 10_000:
            raise ConfigurationError("max_bits must be >= 10000")

    def theta_used(self) -> Optional[float]:
        if self.scheme != "stbc-sm":
            return None
        if self.theta_override is not None:
            return float(self.theta_override)
        return default_rotation_angle(self.n_t, self.constellation())

    def bits_per_channel_use(self) -> float:
        c = self.constellation()
        if self.scheme == "sm":
            return np.log2(self.n_t) + c.bits_per_symbol
        if self.scheme == "stbc-sm":
            book = build_codebooks(self.n_t, 0.0)
            return float(stbcsm_spectral_efficiency(book.c, c.M))
        return self.n_t * c.bits_per_symbol


@dataclass
class BerRecord:
    """One measured (SNR, BER) point with counts and identity metadata."""

    scheme: str
    variant: str
    n_t: int
    n_r: int
    modulation: str
    L: int
    theta: Optional[float]
    snr_db: float
    bits: int
    errors: int
    ber: float
    seed: int
    wall_seconds: float = 0.0
    channel_redraws: int = 0

    def ci95_halfwidth(self) -> float:
        """Normal-approximation 95% confidence half-width on the BER."""
        if self.bits == 0:
            return 0.0
        p = self.ber
        return 1.96 * np.sqrt(max(p * (1.0 - p), 0.0) / self.bits)

    def csv_row(self) -> str:
        theta = "" if self.theta is None else f"{self.theta:.6f}"
        return (f"{self.scheme},{self.variant},{self.n_t},{self.n_r},"
                f"{self.modulation},{self.L},{theta},{self.snr_db:g},"
                f"{self.bits},{self.errors},{self.ber:.5e},{self.seed}")


def parse_modulation(text: str) -> tuple[str, int]:
    """Split a modulation tag like 'psk2' or 'qam16' into (kind, order)."""
    text = text.strip().lower()
    for kind in ("psk", "qam"):
        if text.startswith(kind):
            try:
                return kind, int(text[len(kind):])
            except ValueError:
                break
    raise ValueError(f"cannot parse modulation {text!r} (expected e.g. psk2, qam16)")


def _variant_parts(variant: str) -> tuple[str, Optional[str]]:
    if variant in ("plain", "abf"):
        return variant, None
    base, _, precoding = variant.partition("-")
    return ("precoded" if base == "precoded" else "hbf"), precoding


def build_simulator(cfg: SimConfig):
    c = cfg.constellation()
    variant, precoding = _variant_parts(cfg.variant)
    if cfg.scheme == "sm":
        return SmSimulator(cfg.n_t, cfg.n_r, c, variant, precoding, cfg.L)
    if cfg.scheme == "stbc-sm":
        book = build_codebooks(cfg.n_t, cfg.theta_used())
        return StbcsmSimulator(cfg.n_t, cfg.n_r, c, variant, book, precoding, cfg.L)
    return VblastSimulator(cfg.n_t, cfg.n_r, c)


def point_stream_seed(master_seed: int, point_index: int) -> int:
    """Stream seed for one sweep point: master seed with the index spawned in."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(point_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_point(cfg: SimConfig, snr_db: float, stream_seed: int) -> BerRecord:
    """Simulate one SNR point until the stopping rule fires."""
    cfg.validate()
    sim = build_simulator(cfg)
    rng = np.random.Generator(np.random.PCG64(stream_seed))
    n0 = noise_variance_from_snr(snr_db)
    bpb = sim.bits_per_block

    start = time.perf_counter()
    bits = 0
    errors = 0
    batch = _START_BLOCKS
    while errors < cfg.min_bit_errors and bits < cfg.max_bits:
        blocks = min(batch, -(-(cfg.max_bits - bits) // bpb), sim.max_batch_blocks)
        errors += sim.simulate(blocks, n0, rng)
        bits += blocks * bpb
        batch = min(batch * 2, sim.max_batch_blocks)
    wall = time.perf_counter() - start

    return BerRecord(
        scheme=cfg.scheme, variant=cfg.variant, n_t=cfg.n_t, n_r=cfg.n_r,
        modulation=cfg.modulation, L=cfg.L, theta=cfg.theta_used(),
        snr_db=snr_db, bits=bits, errors=errors,
        ber=errors / bits if bits else 0.0, seed=cfg.master_seed,
        wall_seconds=wall, channel_redraws=getattr(sim, "redraws", 0),
    )


def _run_point_task(args) -> BerRecord:
    cfg, snr_db, stream_seed = args
    return run_point(cfg, snr_db, stream_seed)


def run_sweep(cfg: SimConfig, workers: int = 1) -> list[BerRecord]:
    """One BerRecord per grid point, independent of the worker count."""
    cfg.validate()
    tasks = [(cfg, snr, point_stream_seed(cfg.master_seed, i))
             for i, snr in enumerate(cfg.snr_grid)]
    if workers <= 1 or len(tasks) == 1:
        return [_run_point_task(t) for t in tasks]
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(_run_point_task, tasks)


def records_to_csv(records: Sequence[BerRecord]) -> str:
    """Exact CSV wire format: fixed header, LF endings, 6-digit BER."""
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"


def write_csv(records: Sequence[BerRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(records_to_csv(records))


def read_csv(path: str) -> list[dict]:
    """Rows of an engine CSV as dicts with numeric fields converted."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append({
                "scheme": row["scheme"], "variant": row["variant"],
                "n_t": int(row["n_t"]), "n_r": int(row["n_r"]),
                "mod": row["mod"], "L": int(row["L"]),
                "theta": float(row["theta"]) if row["theta"] else None,
                "snr_db": float(row["snr_db"]), "bits": int(row["bits"]),
                "errors": int(row["errors"]), "ber": float(row["ber"]),
                "seed": int(row["seed"]),
            })
        return rows


def snr_at_ber(records: Sequence[BerRecord], target_ber: float) -> float:
    """SNR where the curve crosses target_ber, log-linear interpolated.

    Zero-BER points are floored at half an error for the interpolation.
    """
    pts = sorted(((r.snr_db, r.ber, r.bits) for r in records))
    if len(pts) < 2:
        raise TargetNotBracketedError("need at least two points to interpolate")
    for (s0, b0, _), (s1, b1, n1) in zip(pts, pts[1:]):
        if b0 >= target_ber >= b1:
            if b0 == target_ber:
                return s0
            if b1 == 0.0:
                b1 = 0.5 / n1  # half-an-error floor keeps the log finite
                if b1 >= target_ber:
                    continue
            return s0 + (s1 - s0) * (np.log10(target_ber) - np.log10(b0)) \
                / (np.log10(b1) - np.log10(b0))
    raise TargetNotBracketedError(
        f"curve never crosses BER {target_ber:g} on its grid"
    )


def snr_gap_at_ber(records_a: Sequence[BerRecord], records_b: Sequence[BerRecord],
                   target_ber: float) -> float:
    """SNR_a(target) - SNR_b(target): positive when curve a needs more SNR."""
    return snr_at_ber(records_a, target_ber) - snr_at_ber(records_b, target_ber)


# -- flat key-value config files ----------------------------------------------

def config_from_mapping(data: dict) -> SimConfig:
    known = set(SimConfig._FIELDS)
    cfg_kwargs = {}
    for key, raw in data.items():
        if key not in known:
            raise ConfigurationError(f"unknown config key {key!r}")
        try:
            cfg_kwargs[key] = _convert_field(key, raw)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid value for {key!r}: {exc}")
    if "scheme" not in cfg_kwargs:
        raise ConfigurationError("config must set 'scheme'")
    for required in ("n_t", "n_r"):
        if required not in cfg_kwargs:
            raise ConfigurationError(f"config must set {required!r}")
    cfg = SimConfig(**cfg_kwargs)
    cfg.validate()
    return cfg


def _convert_field(key: str, raw):
    if key in ("scheme", "variant", "modulation"):
        return str(raw).strip()
    if key in ("n_t", "n_r", "L", "min_bit_errors", "max_bits", "master_seed"):
        return int(raw)
    if key == "theta_override":
        if raw is None or str(raw).strip() == "":
            return None
        return float(raw)
    if key == "snr_grid":
        if isinstance(raw, (list, tuple)):
            return tuple(float(v) for v in raw)
        parts = [p for p in str(raw).replace(",", " ").split() if p]
        if not parts:
            raise ValueError("empty SNR grid")
        return tuple(float(p) for p in parts)
    raise KeyError(key)


def load_config(path: str, overrides: dict | None = None) -> SimConfig:
    """Parse a flat `key = value` config file; overrides win over the file."""
    data = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(
                        f"{path}:{lineno}: expected 'key = value', got {line!r}"
                    )
                key, _, value = line.partition("=")
                data[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path!r}: {exc}")
    if overrides:
        data.update(overrides)
    return config_from_mapping(data)
