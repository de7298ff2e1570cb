"""Benchmark sweeps: one CSV row per (size, trial), rows in a fixed order."""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .graph import generate
from .registry import run_algorithm
from .seeds import derive_seed

SCHEMA_VERSION = 1
COLUMNS = ["family", "n", "delta", "alg", "seed", "rounds", "colors_or_metric", "valid", "max_component",
           "wall_ms"]


@dataclass
class ExperimentConfig:
    alg: str
    family: str
    sizes: list
    trials: int = 1
    seed: int = 0
    delta: int | None = None
    params: dict = field(default_factory=dict)
    timing: bool = False

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(d["alg"], d["family"], list(d["sizes"]), int(d.get("trials", 1)), int(d.get("seed", 0)),
                   d.get("delta"), dict(d.get("params", {})), bool(d.get("timing", False)))


def trial_seed(master: int, n: int, trial: int) -> int:
    """Per-trial seed: blake2b over (master, n, trial), first 8 bytes."""
    return derive_seed(master, n, trial)


def _metric(res):
    ex = res.extra
    for key in ("colors", "c"):
        if key in ex:
            return ex[key]
    if res.labels and all(x in (0, 1) for x in res.labels):
        return sum(res.labels)
    return ""


def _one(job):
    cfg, n, trial = job
    seed = trial_seed(cfg.seed, n, trial)
    gp = {"n": n}
    if cfg.delta is not None:
        gp["delta"] = cfg.delta
    g = generate(cfg.family, seed=seed, **gp)
    start = time.perf_counter()
    res = run_algorithm(cfg.alg, g, seed, cfg.params)
    wall = (time.perf_counter() - start) * 1000
    comps = res.extra.get("components")
    return {"family": cfg.family, "n": g.n, "delta": g.max_degree, "alg": cfg.alg, "seed": seed,
            "rounds": res.rounds, "colors_or_metric": _metric(res), "valid": str(bool(res.valid)).lower(),
            "max_component": max(comps, default=0) if comps is not None else "",
            "wall_ms": f"{wall:.1f}" if cfg.timing else ""}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("LOCALSIM_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    jobs = [(cfg, n, t) for n in cfg.sizes for t in range(cfg.trials)]
    k = threads()
    if k == 1 or len(jobs) == 1:
        return [_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=k) as ex:
        return list(ex.map(_one, jobs))


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# localsim-bench schema v{SCHEMA_VERSION}\n")
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
