"""Real-valued Gabor kernels and the 8-filter orientation/phase banks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

BANK_THETAS = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
BANK_PHIS = (0.0, math.pi / 2)

# Envelope exponent numerators, selectable for fidelity experiments:
#   "standard"      x'^2 + gamma^2 y'^2   (Petkov form, default)
#   "gamma-linear"  x'^2 + gamma y'^2
#   "printed"       x'   + gamma y'^2     (literal typeset form; not an envelope)
ENVELOPES = ("standard", "gamma-linear", "printed")


@dataclass(frozen=True)
class GaborParams:
    """Wavelength, orientation, phase, aspect ratio and envelope width.

    ``theta`` is folded into [0, pi). Folding by pi negates ``phi`` so that the
    sampled kernel is unchanged: g(theta + pi, phi) == g(theta, -phi).
    """

    lam: float
    theta: float
    phi: float
    gamma: float
    sigma: float

    def __post_init__(self):
        for name in ("lam", "gamma", "sigma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("theta and phi must be finite")
        theta = math.fmod(self.theta, 2 * math.pi)
        if theta < 0:
            theta += 2 * math.pi
        phi = self.phi
        if theta >= math.pi:
            theta -= math.pi
            phi = -phi
        if theta >= math.pi:  # rounding at the upper edge
            theta = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def replace(self, **kw) -> "GaborParams":
        d = dict(lam=self.lam, theta=self.theta, phi=self.phi, gamma=self.gamma, sigma=self.sigma)
        d.update(kw)
        return GaborParams(**d)


@dataclass(frozen=True)
class Kernel:
    size: int
    values: np.ndarray = field(repr=False)
    params: GaborParams | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.size, self.size):
            raise ValueError(f"kernel values shape {v.shape} != ({self.size}, {self.size})")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class FilterBank:
    kernels: tuple[Kernel, ...]
    params: tuple[GaborParams, ...]

    def __len__(self):
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    @property
    def size(self) -> int:
        return self.kernels[0].size

    def stacked(self) -> np.ndarray:
        """Kernels as a (n, size, size) array in bank order."""
        return np.stack([k.values for k in self.kernels])


class Preset(enum.Enum):
    """Per-task (sigma, lambda, gamma, kernel size)."""

    AGE_GENDER = (2.0, 2.5, 0.3, 5)
    DETECTION = (0.75, 2.0, 0.05, 3)
    FER = (1.4, 2.5, 0.1, 5)

    @property
    def sigma(self) -> float:
        return self.value[0]

    @property
    def lam(self) -> float:
        return self.value[1]

    @property
    def gamma(self) -> float:
        return self.value[2]

    @property
    def size(self) -> int:
        return self.value[3]

    def base_params(self) -> GaborParams:
        return GaborParams(lam=self.lam, theta=0.0, phi=0.0, gamma=self.gamma, sigma=self.sigma)

    @classmethod
    def from_name(cls, name: str) -> "Preset":
        aliases = {"age": cls.AGE_GENDER, "gender": cls.AGE_GENDER, "age_gender": cls.AGE_GENDER,
                   "detect": cls.DETECTION, "detection": cls.DETECTION, "fer": cls.FER}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; expected one of age, detect, fer") from None


def _check_size(size) -> int:
    if isinstance(size, bool) or int(size) != size:
        raise ValueError(f"kernel size must be an integer, got {size!r}")
    size = int(size)
    if size < 3 or size % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 3, got {size}")
    return size


def make_kernel(params: GaborParams, size: int, envelope: str = "standard") -> Kernel:
    """Sample the real Gabor function on the integer grid centred in a size x size matrix.

    ``values[r, c]`` holds the value at offset x = c - h, y = r - h, h = (size - 1) // 2.
    """
    size = _check_size(size)
    if envelope not in ENVELOPES:
        raise ValueError(f"envelope must be one of {ENVELOPES}, got {envelope!r}")
    h = size // 2
    y, x = np.mgrid[-h:h + 1, -h:h + 1].astype(np.float64)
    ct, st = math.cos(params.theta), math.sin(params.theta)
    xr = x * ct + y * st
    yr = -x * st + y * ct
    g = params.gamma
    if envelope == "standard":
        num = xr**2 + g * g * yr**2
    elif envelope == "gamma-linear":
        num = xr**2 + g * yr**2
    else:
        num = xr + g * yr**2
    values = np.exp(-num / (2.0 * params.sigma**2)) * np.cos(2.0 * math.pi * xr / params.lam + params.phi)
    return Kernel(size=size, values=values, params=params)


def make_bank(source: Preset | GaborParams, thetas=BANK_THETAS, phis=BANK_PHIS,
              size: int | None = None, envelope: str = "standard") -> FilterBank:
    """Build a bank ordered theta-major, phi-minor.

    ``source`` is either a preset (its sigma, lambda, gamma and kernel size) or
    explicit base parameters, whose theta and phi are overridden by the lists.
    """
    if isinstance(source, Preset):
        base = source.base_params()
        size = source.size if size is None else size
    elif isinstance(source, GaborParams):
        base = source
        if size is None:
            raise ValueError("size is required with explicit GaborParams")
    else:
        raise TypeError(f"expected Preset or GaborParams, got {type(source).__name__}")
    thetas, phis = list(thetas), list(phis)
    if not thetas or not phis:
        raise ValueError("theta and phi lists must be non-empty")
    params = tuple(base.replace(theta=t, phi=p) for t in thetas for p in phis)
    kernels = tuple(make_kernel(p, size, envelope) for p in params)
    return FilterBank(kernels=kernels, params=params)


def format_kernel(kernel: Kernel) -> str:
    """Text block: header ``size lam theta phi gamma sigma`` then one row per line."""
    p = kernel.params
    head = [str(kernel.size)]
    if p is not None:
        head += [repr(float(v)) for v in (p.lam, p.theta, p.phi, p.gamma, p.sigma)]
    rows = [" ".join(f"{v:.17g}" for v in row) for row in kernel.values]
    return "\n".join([" ".join(head), *rows]) + "\n"


def dump_bank(bank: FilterBank) -> str:
    return "".join(format_kernel(k) for k in bank.kernels)


def parse_kernels(text: str) -> list[Kernel]:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    out, i = [], 0
    while i < len(lines):
        head = lines[i]
        size = int(head[0])
        params = None
        if len(head) == 6:
            lam, theta, phi, gamma, sigma = map(float, head[1:])
            params = GaborParams(lam=lam, theta=theta, phi=phi, gamma=gamma, sigma=sigma)
        rows = lines[i + 1:i + 1 + size]
        if len(rows) != size:
            raise ValueError("truncated kernel block")
        out.append(Kernel(size=size, values=np.array(rows, dtype=np.float64), params=params))
        i += 1 + size
    return out
