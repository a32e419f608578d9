"""Duration distributions in simulation-vendor parameter conventions.

Expressions such as ``LOGN(2.02, 2.12)`` or ``0.01 + 4.81 * BETA(2.85, 4.03)``
are parsed into distribution objects.  Conventions:

* ``LOGN(m, s)``: ``m`` and ``s`` are the mean and standard deviation of the
  lognormal variate itself, not of the underlying normal.
* ``ERLA(beta, k)``: sum of ``k`` exponentials, each with mean ``beta``.
* ``GAMM(beta, alpha)``: scale ``beta``, shape ``alpha`` (mean ``alpha*beta``).
* ``BETA(a, b)``: on ``[0, 1]`` with mean ``a/(a+b)``.
* ``TRIA(min, mode, max)``, ``EXPO(mean)``, ``UNIF(min, max)`` and plain
  numeric constants.

Any family may carry an additive shift and a multiplicative scale:
``shift + scale * FAMILY(...)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .kernel.rng import RngStream


class DistributionError(ValueError):
    """Invalid distribution parameters or unparseable expression."""


def lognormal_underlying(m: float, s: float) -> tuple[float, float]:
    """Return ``(mu, sigma)`` of the normal underlying a lognormal with mean
    ``m`` and standard deviation ``s``."""
    if not (m > 0 and s > 0):
        raise DistributionError(f"lognormal mean and sd must be positive, got ({m}, {s})")
    sigma2 = math.log1p((s / m) ** 2)
    return math.log(m) - sigma2 / 2.0, math.sqrt(sigma2)


@dataclass(frozen=True)
class Distribution:
    """Base: ``shift + scale * X`` where ``X`` is the family variate."""

    shift: float = 0.0
    scale: float = 1.0

    def _check_affine(self) -> None:
        if not self.scale > 0:
            raise DistributionError(f"scale must be positive, got {self.scale}")
        if self.shift < 0:
            raise DistributionError(f"shift must be non-negative, got {self.shift}")

    # family moments, before shift/scale
    def _base_mean(self) -> float:
        raise NotImplementedError

    def _base_var(self) -> float:
        raise NotImplementedError

    def _base_draw(self, rng: RngStream) -> float:
        raise NotImplementedError

    def _base_support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    @property
    def mean(self) -> float:
        return self.shift + self.scale * self._base_mean()

    @property
    def variance(self) -> float:
        return self.scale**2 * self._base_var()

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self._base_support()
        return (self.shift + self.scale * lo, self.shift + self.scale * hi)

    def sample(self, rng: RngStream) -> float:
        return self.shift + self.scale * self._base_draw(rng)

    def expression(self) -> str:
        body = self._body()
        if self.scale != 1.0:
            body = f"{_fmt(self.scale)}*{body}"
        if self.shift != 0.0:
            body = f"{_fmt(self.shift)}+{body}"
        return body

    def _body(self) -> str:
        raise NotImplementedError


def _fmt(x: float) -> str:
    return repr(float(x)).removesuffix(".0") if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class Constant(Distribution):
    value: float = 0.0

    def __post_init__(self):
        self._check_affine()
        if self.value < 0:
            raise DistributionError("constant must be non-negative")

    def _base_mean(self):
        return self.value

    def _base_var(self):
        return 0.0

    def _base_support(self):
        return (self.value, self.value)

    def _base_draw(self, rng):
        return self.value

    def _body(self):
        return _fmt(self.value)


@dataclass(frozen=True)
class Lognormal(Distribution):
    m: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        self._check_affine()
        lognormal_underlying(self.m, self.s)

    def _base_mean(self):
        return self.m

    def _base_var(self):
        return self.s**2

    def _base_draw(self, rng):
        mu, sigma = lognormal_underlying(self.m, self.s)
        return rng.lognormal(mu, sigma)

    def _body(self):
        return f"LOGN({_fmt(self.m)},{_fmt(self.s)})"


@dataclass(frozen=True)
class Beta(Distribution):
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        self._check_affine()
        if not (self.a > 0 and self.b > 0):
            raise DistributionError(f"beta shapes must be positive, got ({self.a}, {self.b})")

    def _base_mean(self):
        return self.a / (self.a + self.b)

    def _base_var(self):
        ab = self.a + self.b
        return self.a * self.b / (ab * ab * (ab + 1.0))

    def _base_support(self):
        return (0.0, 1.0)

    def _base_draw(self, rng):
        return rng.beta(self.a, self.b)

    def _body(self):
        return f"BETA({_fmt(self.a)},{_fmt(self.b)})"


@dataclass(frozen=True)
class Gamma(Distribution):
    beta: float = 1.0  # scale
    alpha: float = 1.0  # shape

    def __post_init__(self):
        self._check_affine()
        if not (self.beta > 0 and self.alpha > 0):
            raise DistributionError(f"gamma parameters must be positive, got ({self.beta}, {self.alpha})")

    def _base_mean(self):
        return self.alpha * self.beta

    def _base_var(self):
        return self.alpha * self.beta**2

    def _base_draw(self, rng):
        return rng.gamma(self.alpha, self.beta)

    def _body(self):
        return f"GAMM({_fmt(self.beta)},{_fmt(self.alpha)})"


@dataclass(frozen=True)
class Erlang(Distribution):
    beta: float = 1.0  # mean of each phase
    k: int = 1

    def __post_init__(self):
        self._check_affine()
        if not self.beta > 0 or int(self.k) != self.k or self.k < 1:
            raise DistributionError(f"Erlang needs beta > 0 and integer k >= 1, got ({self.beta}, {self.k})")

    def _base_mean(self):
        return self.k * self.beta

    def _base_var(self):
        return self.k * self.beta**2

    def _base_draw(self, rng):
        # the sum of k iid exponentials is exactly Gamma(shape=k, scale=beta)
        return rng.gamma(float(self.k), self.beta)

    def _body(self):
        return f"ERLA({_fmt(self.beta)},{int(self.k)})"


@dataclass(frozen=True)
class Triangular(Distribution):
    low: float = 0.0
    mode: float = 0.5
    high: float = 1.0

    def __post_init__(self):
        self._check_affine()
        if not (0 <= self.low <= self.mode <= self.high):
            raise DistributionError(
                f"triangular needs 0 <= min <= mode <= max, got ({self.low}, {self.mode}, {self.high})"
            )

    def _base_mean(self):
        return (self.low + self.mode + self.high) / 3.0

    def _base_var(self):
        a, c, b = self.low, self.mode, self.high
        return (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0

    def _base_support(self):
        return (self.low, self.high)

    def _base_draw(self, rng):
        if self.low == self.high:
            return self.low
        return rng.triangular(self.low, self.mode, self.high)

    def _body(self):
        return f"TRIA({_fmt(self.low)},{_fmt(self.mode)},{_fmt(self.high)})"


@dataclass(frozen=True)
class Exponential(Distribution):
    mu: float = 1.0

    def __post_init__(self):
        self._check_affine()
        if not self.mu > 0:
            raise DistributionError("exponential mean must be positive")

    def _base_mean(self):
        return self.mu

    def _base_var(self):
        return self.mu**2

    def _base_draw(self, rng):
        return rng.exponential(self.mu)

    def _body(self):
        return f"EXPO({_fmt(self.mu)})"


@dataclass(frozen=True)
class Uniform(Distribution):
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        self._check_affine()
        if not 0 <= self.low < self.high:
            raise DistributionError("uniform needs 0 <= min < max")

    def _base_mean(self):
        return (self.low + self.high) / 2.0

    def _base_var(self):
        return (self.high - self.low) ** 2 / 12.0

    def _base_support(self):
        return (self.low, self.high)

    def _base_draw(self, rng):
        return rng.uniform(self.low, self.high)

    def _body(self):
        return f"UNIF({_fmt(self.low)},{_fmt(self.high)})"


_FAMILIES = {
    "LOGN": (Lognormal, 2),
    "BETA": (Beta, 2),
    "GAMM": (Gamma, 2),
    "ERLA": (Erlang, 2),
    "TRIA": (Triangular, 3),
    "EXPO": (Exponential, 1),
    "UNIF": (Uniform, 2),
}

_NUM = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_EXPR = re.compile(
    rf"^(?:(?P<shift>{_NUM})\+)?(?:(?P<scale>{_NUM})\*)?(?P<fam>[A-Z]{{4}})\((?P<args>[^()]*)\)$"
)
_CONST = re.compile(rf"^{_NUM}$")


def parse_distribution(text: str) -> Distribution:
    """Parse an expression like ``"0.27 + LOGN(0.965, 0.511)"``."""
    compact = re.sub(r"\s+", "", str(text)).upper()
    if _CONST.match(compact):
        return Constant(value=float(compact))
    m = _EXPR.match(compact)
    if not m:
        raise DistributionError(f"cannot parse distribution expression {text!r}")
    fam = m.group("fam")
    if fam not in _FAMILIES:
        raise DistributionError(f"unknown distribution family {fam!r} in {text!r}")
    cls, nargs = _FAMILIES[fam]
    try:
        args = [float(a) for a in m.group("args").split(",")]
    except ValueError:
        raise DistributionError(f"non-numeric argument in {text!r}") from None
    if len(args) != nargs:
        raise DistributionError(f"{fam} takes {nargs} arguments, got {len(args)} in {text!r}")
    if cls is Erlang:
        if not float(args[1]).is_integer():
            raise DistributionError(f"Erlang phase count must be an integer in {text!r}")
        args[1] = int(args[1])
    shift = float(m.group("shift")) if m.group("shift") else 0.0
    scale = float(m.group("scale")) if m.group("scale") else 1.0
    return cls(shift, scale, *args)


def sample(dist: Distribution, rng: RngStream) -> float:
    return dist.sample(rng)
