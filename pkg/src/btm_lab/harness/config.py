"""Experiment configuration, its canonical serialization, and seed derivation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

from ..errors import InvalidParameter

SUITES = ("events", "bounds", "pmf", "hitting", "asymptotics")
BOUND_SUITES = ("lemma3", "corollary4", "nearbound", "confinement", "laplace")

# n beyond these needs --allow-huge
SOLVER_N_MAX = 4
STATS_N_MAX = 6


def derive_seed(global_seed: int, *labels) -> int:
    """64-bit sub-seed: first 8 bytes (little endian) of BLAKE2b over
    ``"<global_seed>/<label1>/<label2>..."``."""
    key = "/".join([str(int(global_seed))] + [str(x) for x in labels])
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


@dataclass
class Thresholds:
    """Finite-n proxies for the liminf / limsup statements."""

    maxsum_high: float = 0.9
    maxsum_low: float = 0.1
    maxsum_burn_in: int = 100
    maxsum_tail_fraction: float = 0.1
    finite_mean_high: float = 0.05
    seed_fraction: float = 0.95
    decay_ratio: tuple = (0.35, 0.65)


@dataclass
class ExperimentConfig:
    alpha: float = 0.5
    epsilon: float = 0.3
    K: int = 2
    n_min: int = 1
    n_max: int = 3
    seeds: int = 100
    global_seed: int = 2024
    suites: tuple = SUITES
    bound_suites: tuple = BOUND_SUITES
    pmf_tol: float = 1e-10
    window_sites: int = 20001
    spectral_sites: int = 20001
    mc_paths: int = 100_000
    lemma3_instances: int = 200
    corollary_instances: int = 8
    deloc_instances: int = 4
    hitting_instances: int = 50
    maxsum_n_max: int = 100_000
    scaling_n: tuple = (100, 400, 1600)
    scaling_replicates: int = 2000
    sup_times: tuple = (1e2, 1e3, 1e4, 1e5, 1e6)
    finite_mean_times: tuple = (1e2, 4e2, 1.6e3, 6.4e3)
    output_dir: str = "btm_out"
    allow_huge: bool = False
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        if isinstance(self.thresholds, dict):
            th = dict(self.thresholds)
            if "decay_ratio" in th:
                th["decay_ratio"] = tuple(th["decay_ratio"])
            self.thresholds = Thresholds(**th)
        for name in ("suites", "bound_suites", "scaling_n", "sup_times", "finite_mean_times"):
            setattr(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if not self.alpha > 0:
            raise InvalidParameter("alpha must be positive")
        if not 0 < self.epsilon < 1:
            raise InvalidParameter("epsilon must lie in (0, 1)")
        if self.K < 1:
            raise InvalidParameter("K must be a positive integer")
        if not 1 <= self.n_min <= self.n_max:
            raise InvalidParameter("need 1 <= n_min <= n_max")
        if self.seeds < 1:
            raise InvalidParameter("need at least one seed")
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise InvalidParameter(f"unknown suites {sorted(unknown)}")
        unknown = set(self.bound_suites) - set(BOUND_SUITES)
        if unknown:
            raise InvalidParameter(f"unknown bound suites {sorted(unknown)}")
        if not self.allow_huge and self.n_max > STATS_N_MAX:
            raise InvalidParameter(f"n_max={self.n_max} exceeds the desk-scale envelope (n <= {STATS_N_MAX}); "
                                   "set allow_huge to override")

    @property
    def finite_mean_only(self) -> bool:
        return self.alpha > 1

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        d["thresholds"]["decay_ratio"] = list(d["thresholds"]["decay_ratio"])
        return d

    def to_json(self) -> str:
        """Canonical form: sorted keys, no whitespace variation, floats as repr."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidParameter(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def hash(self) -> str:
        """Identity of the run parameters; the output directory does not count."""
        d = self.to_dict()
        d.pop("output_dir")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.blake2b(text.encode(), digest_size=16).hexdigest()

    def seed_for(self, *labels) -> int:
        return derive_seed(self.global_seed, *labels)
