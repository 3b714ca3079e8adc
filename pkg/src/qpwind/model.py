"""Potentials given as finite Fourier series, and the almost-Mathieu oracle.

A potential is v(theta) = sum_k vhat_k exp(i k theta) on the phase torus
R / 2 pi Z.  Complexified phases theta = x + i y are allowed everywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
#: golden-mean frequency in radians
GOLDEN_ALPHA = TWO_PI * (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FourierPotential:
    """Trigonometric polynomial ``v(theta) = sum_k coeffs[k] e^{i k theta}``.

    Zero amplitudes are dropped on construction, so ``degree`` is the largest
    ``|k|`` actually present.  ``is_real`` records whether ``v`` is real on the
    real axis, i.e. ``coeffs[-k] == conj(coeffs[k])`` up to 1e-14 relative.
    """

    coeffs: dict = field(default_factory=dict)
    degree: int = field(init=False)
    is_real: bool = field(init=False)

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            if int(k) != k:
                raise ValueError(f"Fourier index must be an integer, got {k!r}")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"non-finite amplitude for k={k}")
            if c != 0:
                clean[int(k)] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))
        object.__setattr__(self, "degree", max((abs(k) for k in clean), default=0))
        scale = sum(abs(c) for c in clean.values())
        real = all(
            abs(clean.get(-k, 0.0) - c.conjugate()) <= 1e-14 * scale
            for k, c in clean.items()
        )
        object.__setattr__(self, "is_real", real)

    @property
    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices and amplitudes ordered from large ``|k|`` to small."""
        order = sorted(self.coeffs, key=lambda k: (-abs(k), k))
        ks = np.array(order, dtype=int)
        amps = np.array([self.coeffs[k] for k in order], dtype=complex)
        return ks, amps

    def __call__(self, theta):
        return eval_potential(self, theta)

    @classmethod
    def from_json(cls, text: str) -> "FourierPotential":
        """Parse ``{"coeffs": [[k, re, im], ...]}``."""
        doc = json.loads(text)
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "FourierPotential":
        if "coeffs" not in doc:
            raise ValueError("potential document needs a 'coeffs' list")
        coeffs: dict[int, complex] = {}
        for i, entry in enumerate(doc["coeffs"]):
            if len(entry) != 3:
                raise ValueError(f"coeffs[{i}] must be [k, re, im]")
            k, re, im = entry
            if int(k) != k:
                raise ValueError(f"coeffs[{i}]: index {k!r} is not an integer")
            c = complex(float(re), float(im))
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"coeffs[{i}]: non-finite amplitude")
            coeffs[int(k)] = coeffs.get(int(k), 0.0) + c
        return cls(coeffs)

    def to_dict(self) -> dict:
        return {"coeffs": [[k, c.real, c.imag] for k, c in self.coeffs.items()]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class CocycleParams:
    """Frequency (radians), energy, imaginary phase offset and length."""

    alpha: float
    E: complex
    y: float = 0.0
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("truncation length n must be >= 1")
        object.__setattr__(self, "alpha", float(self.alpha) % TWO_PI)
        object.__setattr__(self, "E", complex(self.E))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "n", int(self.n))

    def with_(self, **changes) -> "CocycleParams":
        d = dict(alpha=self.alpha, E=self.E, y=self.y, n=self.n)
        d.update(changes)
        return CocycleParams(**d)


def eval_potential(pot: FourierPotential, theta):
    """Evaluate ``v`` at (possibly complex, possibly array) phase ``theta``.

    Terms are summed from large ``|k|`` to small so the result does not depend
    on dictionary order.
    """
    theta = np.asarray(theta, dtype=complex)
    out = np.zeros(theta.shape, dtype=complex)
    ks, amps = pot.modes
    for k, c in zip(ks, amps):
        out = out + c * np.exp(1j * k * theta)
    if out.ndim == 0:
        return complex(out)
    return out


def amo_potential(lam: float) -> FourierPotential:
    """The almost-Mathieu potential ``2 lam cos(theta)``."""
    if not lam > 0:
        raise ValueError("coupling lambda must be positive")
    return FourierPotential({-1: lam, 1: lam})


def amo_le_oracle(lam: float, y: float, L0: float) -> float:
    """Closed-form almost-Mathieu exponent ``max(log lam + y, L0)`` for y >= 0."""
    if y < 0:
        raise ValueError("the almost-Mathieu formula is stated for y >= 0")
    return max(math.log(lam) + y, L0)


def energy_bound(pot: FourierPotential, y: float) -> float:
    """Row-sum bound ``2 + sum |vhat_k| e^{|k||y|}`` on the truncated spectra."""
    return 2.0 + sum(abs(c) * math.exp(abs(k) * abs(y)) for k, c in pot.coeffs.items())


def free_le(E: complex) -> float:
    """Exponent of the free Laplacian: ``log|t|`` with ``t + 1/t = E``, ``|t| >= 1``."""
    E = complex(E)
    r = (E * E - 4) ** 0.5
    t = max(abs((E + r) / 2), abs((E - r) / 2))
    return math.log(t)
