"""Experiment configuration: flat key = value files, validation, ladder trimming.

Schema (all keys optional; defaults below):

    kind         = norms | mult-decay | cauchy-selftest | cgo | rate-fit |
                   reconstruct | alessandrini | dn
    L            = 8.0            side length of Q
    N            = 1024           samples per axis (power of two)
    s            = 0.5            Sobolev order of the contraction space
    tau_ladder   = 16,32,64,128,256,512,1024   (auto-trimmed to admissibility)
    seed         = 7
    threads      = 1
    xs_n         = 17             side of the localization sub-grid
    cgo_tol      = 1e-10          fixed-point stopping tolerance
    recon_tol    = 1e-8           tolerance for bulk reconstruction builds
    max_iter     = 200
    energy       = 0.0            fixed energy k^2 (Dirichlet solver shift)
    cgo_x        = 1.2,0.9        probe point for cgo experiments
    v1_center    = 0.1,-0.2       v1_radius = 0.8   v1_amplitude = 1.0
    v2_center    = -0.25,0.2      v2_radius = 0.6   v2_amplitude = 0.0
    a1_center    = -0.35,0.3      a1_center2 = 0.4,-0.35
    a1_radius    = 0.5            a1_amplitude = 0.0
    a2_center    = 0.35,0.3       a2_center2 = -0.4,-0.3
    a2_radius    = 0.5            a2_amplitude = 0.0

Potential geometry is expressed in units of the default L = 8 support box
and rescaled by L/8, so the same file works at any side length.  Vector
potential components are built as exactly mean-zero bump pairs whenever a
``center2`` is given.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .grid import Grid2D, make_grid
from .harness import BumpSpec
from .phase import tau_cap

__all__ = ["ExperimentConfig", "parse_config_file", "config_from_mapping", "DEFAULTS"]

KINDS = (
    "norms",
    "mult-decay",
    "cauchy-selftest",
    "cgo",
    "rate-fit",
    "reconstruct",
    "alessandrini",
    "dn",
)

DEFAULTS: dict[str, str] = {
    "kind": "norms",
    "L": "8.0",
    "N": "1024",
    "s": "0.5",
    "tau_ladder": "16,32,64,128,256,512,1024",
    "seed": "7",
    "threads": "1",
    "xs_n": "17",
    "cgo_tol": "1e-10",
    "recon_tol": "1e-8",
    "max_iter": "200",
    "energy": "0.0",
    "cgo_x": "1.2,0.9",
    "v1_center": "0.1,-0.2",
    "v1_radius": "0.8",
    "v1_amplitude": "1.0",
    "v2_center": "-0.25,0.2",
    "v2_radius": "0.6",
    "v2_amplitude": "0.0",
    "a1_center": "-0.35,0.3",
    "a1_center2": "0.4,-0.35",
    "a1_radius": "0.5",
    "a1_amplitude": "0.0",
    "a2_center": "0.35,0.3",
    "a2_center2": "-0.4,-0.3",
    "a2_radius": "0.5",
    "a2_amplitude": "0.0",
    "rate_input": "",
}


def _pair(text: str) -> tuple[float, float]:
    a, b = (float(t) for t in text.split(","))
    return a, b


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters (see module docstring for the schema)."""

    kind: str
    L: float
    N: int
    s: float
    tau_ladder: tuple[float, ...]
    seed: int
    threads: int
    xs_n: int
    cgo_tol: float
    recon_tol: float
    max_iter: int
    energy: float
    cgo_x: tuple[float, float]
    v1: BumpSpec
    v2: BumpSpec
    a1: BumpSpec
    a2: BumpSpec
    rate_input: str = ""
    trimmed_taus: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.xs_n < 2:
            raise ValueError("xs_n must be at least 2")
        if self.cgo_tol <= 0 or self.recon_tol <= 0:
            raise ValueError("tolerances must be positive")

    # Lebesgue exponents entering the contraction estimates (diagnostics)
    @property
    def lebesgue_p(self) -> float:
        return 1.0 / (1.0 - self.s)

    @property
    def lebesgue_q(self) -> float:
        return 4.0 / (3.0 - self.s)

    @property
    def lebesgue_p_star(self) -> float:
        return 2.0 / (self.s + 1.0)

    def grid(self) -> Grid2D:
        return make_grid(self.L, self.N)

    def admissible_taus(self) -> tuple[float, ...]:
        """Ladder after the admissibility auto-trim (warns via the manifest)."""
        cap = tau_cap(self.grid())
        trimmed = tuple(t for t in self.tau_ladder if t <= cap * (1 + 1e-12))
        if not trimmed:
            raise ValueError(f"no admissible tau in the ladder (cap {cap:.1f})")
        return trimmed

    def as_mapping(self) -> dict[str, str]:
        """Round-trippable mapping: geometry written back in default-box units."""
        scale = self.L / 8.0

        def pair(p):
            return "" if p is None else f"{p[0] / scale:g},{p[1] / scale:g}"

        return {
            "kind": self.kind,
            "L": f"{self.L:g}",
            "N": str(self.N),
            "s": f"{self.s:g}",
            "tau_ladder": ",".join(f"{t:g}" for t in self.tau_ladder),
            "seed": str(self.seed),
            "threads": str(self.threads),
            "xs_n": str(self.xs_n),
            "cgo_tol": f"{self.cgo_tol:g}",
            "recon_tol": f"{self.recon_tol:g}",
            "max_iter": str(self.max_iter),
            "energy": f"{self.energy:g}",
            "cgo_x": pair(self.cgo_x),
            "v1_center": pair(self.v1.center),
            "v1_radius": f"{self.v1.radius / scale:g}",
            "v1_amplitude": f"{self.v1.amplitude:g}",
            "v2_center": pair(self.v2.center),
            "v2_radius": f"{self.v2.radius / scale:g}",
            "v2_amplitude": f"{self.v2.amplitude:g}",
            "a1_center": pair(self.a1.center),
            "a1_center2": pair(self.a1.center2),
            "a1_radius": f"{self.a1.radius / scale:g}",
            "a1_amplitude": f"{self.a1.amplitude:g}",
            "a2_center": pair(self.a2.center),
            "a2_center2": pair(self.a2.center2),
            "a2_radius": f"{self.a2.radius / scale:g}",
            "a2_amplitude": f"{self.a2.amplitude:g}",
            "rate_input": self.rate_input,
        }

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def config_from_mapping(raw: dict[str, str]) -> ExperimentConfig:
    """Build and validate a config from string key-value pairs."""
    m = dict(DEFAULTS)
    unknown = set(raw) - set(m)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    m.update({k: v for k, v in raw.items() if v != ""})

    scale = float(m["L"]) / 8.0  # geometry keys are in default-box units

    def spair(key: str) -> tuple[float, float]:
        a, b = _pair(m[key])
        return a * scale, b * scale

    def bump(prefix: str) -> BumpSpec:
        center2 = None
        if f"{prefix}_center2" in m and m.get(f"{prefix}_center2"):
            center2 = spair(f"{prefix}_center2")
        return BumpSpec(
            center=spair(f"{prefix}_center"),
            radius=float(m[f"{prefix}_radius"]) * scale,
            amplitude=float(m[f"{prefix}_amplitude"]),
            center2=center2,
        )

    return ExperimentConfig(
        kind=m["kind"],
        L=float(m["L"]),
        N=int(m["N"]),
        s=float(m["s"]),
        tau_ladder=tuple(float(t) for t in m["tau_ladder"].split(",") if t),
        seed=int(m["seed"]),
        threads=int(m["threads"]),
        xs_n=int(m["xs_n"]),
        cgo_tol=float(m["cgo_tol"]),
        recon_tol=float(m["recon_tol"]),
        max_iter=int(m["max_iter"]),
        energy=float(m["energy"]),
        cgo_x=spair("cgo_x"),
        v1=bump("v1"),
        v2=bump("v2"),
        a1=bump("a1"),
        a2=bump("a2"),
        rate_input=m["rate_input"],
    )


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (t.strip() for t in text.split("=", 1))
        out[key] = value
    return out
