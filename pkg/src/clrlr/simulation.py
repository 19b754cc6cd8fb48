"""Synthetic CLR matrices and Poisson-multinomial count draws."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .compositional import CountMatrix, softmax_inv
from .errors import ConfigError, ParseError


class Regime(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


#: Standard deviation of the additive loading noise, by regime.
DEFAULT_NOISE_SD = {Regime.EXACT: math.sqrt(1e-2), Regime.APPROX: math.sqrt(5e-2)}
#: Off-diagonal (value, probability) of the structured loadings, by regime.
DEFAULT_VQ = {Regime.EXACT: (-2.0, 0.5), Regime.APPROX: (-1.0, 0.5)}


@dataclass(frozen=True)
class SimScenario:
    """Parameters of one simulation cell.

    ``u_var`` is the variance (not the standard deviation) of the score
    entries. ``noise_sd`` defaults to the regime's value when ``None``.
    """

    n: int = 100
    p: int = 50
    r: int = 20
    v: float = -2.0
    q: float = 0.5
    gamma: int = 1
    regime: Regime = Regime.EXACT
    noise_sd: Optional[float] = None
    u_var: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if self.n < 1 or self.p < 2:
            raise ConfigError(f"need n >= 1 and p >= 2, got n={self.n}, p={self.p}")
        if not 1 <= self.r <= min(self.n, self.p):
            raise ConfigError(f"rank r must lie in [1, {min(self.n, self.p)}], got {self.r}")
        if not 0 <= self.q <= 1:
            raise ConfigError(f"q must lie in [0, 1], got {self.q}")
        if self.gamma < 1:
            raise ConfigError(f"gamma must be >= 1, got {self.gamma}")
        if self.noise_sd is not None and self.noise_sd < 0:
            raise ConfigError("noise_sd must be >= 0")
        if not self.u_var >= 0:
            raise ConfigError("u_var must be >= 0")

    @classmethod
    def for_regime(cls, regime, **kwargs) -> "SimScenario":
        regime = Regime(regime)
        v, q = DEFAULT_VQ[regime]
        kwargs.setdefault("v", v)
        kwargs.setdefault("q", q)
        return cls(regime=regime, **kwargs)

    @property
    def loading_sd(self) -> float:
        return DEFAULT_NOISE_SD[self.regime] if self.noise_sd is None else self.noise_sd

    def with_(self, **changes) -> "SimScenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class SimInstance:
    z_star: np.ndarray
    x_star: np.ndarray
    counts: CountMatrix
    read_props: np.ndarray


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(replicate)]))


def _center_rows(z):
    return z - z.mean(axis=1, keepdims=True)


def _loadings(s: SimScenario, cols: int, rng) -> np.ndarray:
    structured = np.where(rng.random((s.p, cols)) < s.q, s.v, 1.0)
    diag = min(s.p, cols)
    structured[np.arange(diag), np.arange(diag)] = 1.0
    return 0.2 * structured + rng.normal(0.0, s.loading_sd, size=(s.p, cols))


def gen_z_exact(s: SimScenario, rng: np.random.Generator) -> np.ndarray:
    """Rank-``r`` CLR matrix ``center(U V^T)``."""
    if s.regime is not Regime.EXACT:
        raise ConfigError("gen_z_exact requires the exact low-rank regime")
    u = rng.normal(0.0, math.sqrt(s.u_var), size=(s.n, s.r))
    v = _loadings(s, s.r, rng)
    return _center_rows(u @ v.T)


def gen_z_approx(s: SimScenario, rng: np.random.Generator, *, center: bool = True) -> np.ndarray:
    """CLR matrix with singular values ``1, 1/4, 1/9, ...`` before centring.

    The singular vectors are orthonormal bases of the column spaces of
    random scores ``U`` and structured loadings ``V``, both with
    ``min(n, p)`` columns.
    """
    if s.regime is not Regime.APPROX:
        raise ConfigError("gen_z_approx requires the approximate low-rank regime")
    m = min(s.n, s.p)
    u = rng.normal(0.0, math.sqrt(s.u_var), size=(s.n, m))
    v = _loadings(s, m, rng)
    u_basis = np.linalg.svd(u, full_matrices=False)[0]
    v_basis = np.linalg.svd(v, full_matrices=False)[0]
    d = 1.0 / np.arange(1, m + 1) ** 2
    z = (u_basis * d) @ v_basis.T
    return _center_rows(z) if center else z


def gen_counts(z_star, gamma: float, rng: np.random.Generator):
    """Draw read depths and multinomial counts.

    ``P_i ~ Uniform[1, 10]``, ``R_i = P_i / sum(P)``, and
    ``N_i = max(1, round(gamma * n * p * R_i))``; row ``i`` of the counts is
    ``Multinomial(N_i, softmax(z_star_i))``.

    Returns
    -------
    counts : CountMatrix
    read_props : ndarray
        The ``R_i``, summing to one.
    """
    if gamma < 1:
        raise ConfigError(f"gamma must be >= 1, got {gamma}")
    z_star = np.asarray(z_star, dtype=float)
    n, p = z_star.shape
    weights = rng.uniform(1.0, 10.0, size=n)
    props = weights / weights.sum()
    depths = np.maximum(np.rint(gamma * n * p * props), 1).astype(np.int64)
    x = softmax_inv(z_star)
    w = np.stack([rng.multinomial(depths[i], x[i]) for i in range(n)])
    return CountMatrix(w), props


def simulate(s: SimScenario, replicate: int = 0) -> SimInstance:
    """Generate one replicate; a pure function of ``(s, replicate)``."""
    rng = replicate_rng(s.seed, replicate)
    z = gen_z_exact(s, rng) if s.regime is Regime.EXACT else gen_z_approx(s, rng)
    counts, props = gen_counts(z, s.gamma, rng)
    return SimInstance(z, softmax_inv(z), counts, props)


# scenario files --------------------------------------------------------------

_FIELD_TYPES = {
    "n": int, "p": int, "r": int, "v": float, "q": float, "gamma": int,
    "regime": Regime, "noise_sd": float, "u_var": float, "seed": int,
}


def _parse_value(key, token, lineno):
    if key == "noise_sd" and token.lower() in ("none", "default", ""):
        return None
    try:
        if _FIELD_TYPES[key] is int:
            return int(token, 10)
        return _FIELD_TYPES[key](token)
    except ValueError:
        raise ParseError(f"invalid value for {key}", line=lineno, token=token) from None


def parse_scenario(text: str) -> SimScenario:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    assert set(_FIELD_TYPES) == {f.name for f in fields(SimScenario)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno, token=raw.strip())
        key, token = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ParseError("unknown scenario key", line=lineno, token=key)
        if key in values:
            raise ParseError("duplicate scenario key", line=lineno, token=key)
        values[key] = _parse_value(key, token, lineno)
    regime = values.pop("regime", Regime.EXACT)
    return SimScenario.for_regime(regime, **values)


def load_scenario(path) -> SimScenario:
    return parse_scenario(Path(path).read_text())


def format_scenario(s: SimScenario) -> str:
    lines = []
    for f in fields(SimScenario):
        value = getattr(s, f.name)
        if isinstance(value, Regime):
            value = value.value
        elif value is None:
            value = "none"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
