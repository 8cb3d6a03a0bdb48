"""Parameter regimes for the base ``q``: fixed, power-law and logarithmic approach to 1."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Regime:
    """How ``q`` depends on the index ``n``.

    ``kind`` is ``"fixed"`` (``value`` is q), ``"power"`` (uses ``a`` and
    ``gamma``) or ``"log"`` (uses ``gamma``).
    """

    kind: str
    a: float = 0.5
    gamma: float = 1.0
    value: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "power", "log"):
            raise DomainError(f"unknown regime kind {self.kind!r}")
        if self.kind == "fixed" and not 0 < self.value < 1:
            raise DomainError("fixed q must lie in (0, 1)")
        if self.kind == "power" and not 0 < self.a < 1:
            raise DomainError("power regime needs 0 < a < 1")
        if self.kind != "fixed" and not self.gamma > 0:
            raise DomainError("gamma must be positive")

    @classmethod
    def power(cls, a: float, gamma: float = 1.0) -> Regime:
        return cls("power", a=a, gamma=gamma)

    @classmethod
    def log(cls, gamma: float = 1.0) -> Regime:
        return cls("log", gamma=gamma)

    @classmethod
    def fixed(cls, q: float) -> Regime:
        return cls("fixed", value=q)

    @classmethod
    def parse(cls, text: str) -> Regime:
        """Parse ``fixed:0.5``, ``power:a=0.25,gamma=1`` or ``log:gamma=1``."""
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().lower()
        if kind == "fixed":
            try:
                return cls.fixed(float(rest))
            except ValueError as exc:
                raise DomainError(f"bad fixed regime {text!r}") from exc
        params: dict[str, float] = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq or key.strip() not in ("a", "gamma"):
                raise DomainError(f"bad regime parameter {item!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError as exc:
                raise DomainError(f"bad regime parameter {item!r}") from exc
        return cls(kind, **params)

    def describe(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.value!r}"
        if self.kind == "power":
            return f"power:a={self.a!r},gamma={self.gamma!r}"
        return f"log:gamma={self.gamma!r}"

    def check_n(self, n: int) -> None:
        if self.kind == "log" and n < 2:
            raise DomainError("log regime needs n >= 2")
        if n < 1:
            raise DomainError("n must be positive")

    def scale(self, n: int) -> float:
        """``gamma * n^a`` (power) or ``gamma * log n`` (log); the modular height."""
        self.check_n(n)
        if self.kind == "power":
            return self.gamma * n**self.a
        if self.kind == "log":
            return self.gamma * math.log(n)
        raise DomainError("fixed regime has no modular height")
