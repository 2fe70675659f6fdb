"""Pipeline configuration and the run manifest.

The configuration is one JSON document of parameter blocks. Every default
is the value the curation protocol prescribes; a user file only needs the
keys it overrides. The manifest records the resolved configuration's hash,
the seed, per-stage counts and warnings, and nothing time-dependent, so
re-running a stage with the same inputs rewrites it byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

from .errors import InputError
from .io import read_json, write_json

TASK_TYPES = ("classification", "regression", "ppi")
PEPTIDE_TYPES = ("canonical", "non-canonical")


@dataclass
class CleanConfig:
    min_seq_id: float = 0.9
    min_cov: float = 0.9
    cov_mode: str = "both"
    linkage: str = "single"
    policy: str = "drop_record"
    max_len: int | None = None


@dataclass
class NegSampConfig:
    ratio: float = 1.0
    filter_identity: float = 0.6
    overlap_threshold: float = 0.05
    bins: int = 30
    scalar_threshold: float = 0.2
    mer1_threshold: float = 0.05
    mer2_threshold: float = 0.15
    strategies: list[str] = field(default_factory=lambda: [
        "bin_matched", "kde_importance", "mmd_herding", "moment_matched", "nearest_neighbor", "sinkhorn_ot"])
    diversity_weight: float = 0.1
    expert_groups: str | None = None
    external_coverage: int = 10
    ppi_ratio: int = 5


@dataclass
class EnrichConfig:
    k: int | None = None
    alpha: float = 0.05
    min_score: float = 4.0
    min_support: int = 5
    min_pos: int = 3
    min_jaccard: float = 0.6
    fdr: bool = True


@dataclass
class SplitConfig:
    strategy: str = "hybrid"
    frac_train: float = 0.8
    frac_valid: float = 0.1
    frac_test: float = 0.1
    identity_threshold: float = 0.3
    tau: float = 0.95
    repeats: int = 5


@dataclass
class FingerprintConfig:
    radius: int = 2
    width: int = 1024


@dataclass
class PipelineConfig:
    task_type: str = "classification"
    peptide_type: str = "canonical"
    seed: int = 42
    clean: CleanConfig = field(default_factory=CleanConfig)
    negsamp: NegSampConfig = field(default_factory=NegSampConfig)
    enrich: EnrichConfig = field(default_factory=EnrichConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    fingerprint: FingerprintConfig = field(default_factory=FingerprintConfig)

    def __post_init__(self):
        if self.task_type not in TASK_TYPES:
            raise InputError(f"task_type must be one of {TASK_TYPES}, got {self.task_type!r}")
        if self.peptide_type not in PEPTIDE_TYPES:
            raise InputError(f"peptide_type must be one of {PEPTIDE_TYPES}, got {self.peptide_type!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        return _build(cls, data, "config")

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> "PipelineConfig":
        data = read_json(path) if path else {}
        if not isinstance(data, dict):
            raise InputError(f"{path}: configuration must be a JSON object")
        for key, value in (overrides or {}).items():
            data[key] = value
        return cls.from_dict(data)


def _build(cls, data: dict, where: str):
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise InputError(f"{where}: unknown key(s) {sorted(unknown)}")
    kwargs = {}
    default = cls()
    for name, value in data.items():
        sub = getattr(default, name)
        if is_dataclass(sub):
            if not isinstance(value, dict):
                raise InputError(f"{where}.{name} must be an object")
            kwargs[name] = _build(type(sub), value, f"{where}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


class RunManifest:
    """``manifest.json`` inside an output directory, one entry per stage."""

    FILENAME = "manifest.json"

    def __init__(self, out_dir, config: PipelineConfig):
        self.path = Path(out_dir) / self.FILENAME
        self.config = config
        self.data = {"config_hash": config.digest(), "seed": config.seed, "stages": {}}
        if self.path.exists():
            old = read_json(self.path)
            if old.get("config_hash") == self.data["config_hash"] and old.get("seed") == config.seed:
                self.data["stages"] = old.get("stages", {})

    def record(self, stage: str, inputs: dict, outputs: dict, warnings: list[str], extra: dict | None = None):
        entry = {"inputs": inputs, "outputs": outputs, "warnings": list(warnings)}
        if extra:
            entry.update(extra)
        self.data["stages"][stage] = entry
        self.data["config"] = self.config.to_dict()
        write_json(self.path, self.data)
