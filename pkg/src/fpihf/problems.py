"""Constrained TV least-squares instances (fused LASSO with box bounds).

The problem is::

    minimize   alpha1/2 ||A x - z||^2 + alpha2 ||D x||_1
    subject to lower <= x <= upper

with ``A`` of shape ``(K, N)``, ``z`` in R^K and ``D`` the forward-difference
operator R^N -> R^(N-1).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .opcore import discrete_gradient, operator_norm, project_box

__all__ = [
    "FEASIBILITY_TOL",
    "ProblemInstance",
    "generate_instance",
    "objective",
    "read_instance",
    "write_instance",
]

FEASIBILITY_TOL = 1e-8
FORMAT_TAG = "fpihf-instance 1"


@dataclass
class ProblemInstance:
    A: np.ndarray
    z: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha1: float = 5.0
    alpha2: float = 0.5
    kappa: float = float("nan")
    seed: int | None = None
    _norm_A: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.float64)
        self.z = np.asarray(self.z, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        K, N = self.A.shape
        if N < 2 or K < 1:
            raise ValueError(f"invalid dimensions N={N}, K={K}")
        if self.z.shape != (K,):
            raise ValueError(f"z must have shape ({K},), got {self.z.shape}")
        if self.lower.shape != (N,) or self.upper.shape != (N,):
            raise ValueError(f"bounds must have shape ({N},)")
        if np.any(self.lower > self.upper):
            raise ValueError("lower > upper for some component")
        if not (self.alpha1 > 0 and self.alpha2 >= 0):
            raise ValueError("alpha1 must be positive and alpha2 nonnegative")

    @property
    def N(self):
        return self.A.shape[1]

    @property
    def K(self):
        return self.A.shape[0]

    @property
    def norm_A(self):
        """Spectral norm of ``A`` (cached)."""
        if self._norm_A is None:
            self._norm_A = operator_norm(self.A, tol=1e-12)
        return self._norm_A

    def project(self, x):
        return project_box(x, self.lower, self.upper)


def generate_instance(N, K, kappa, alpha1=5.0, alpha2=0.5, seed=0):
    """Draw a random instance.

    Uses numpy's PCG64 generator seeded with `seed`; draws, in order,
    ``A = kappa * U(0,1)^{K x N}``, ``lower = -1.5 U(0,1)^N``,
    ``upper = 1.5 U(0,1)^N`` and ``z = N(0,1)^K``. Instances sharing a seed
    share the uniform draw, so ``A`` scales exactly linearly in `kappa`.
    """
    N, K = int(N), int(K)
    if N < 2 or K < 1:
        raise ValueError(f"invalid dimensions N={N}, K={K}")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    rng = np.random.default_rng(seed)
    A = kappa * rng.random((K, N))
    lower = -1.5 * rng.random(N)
    upper = 1.5 * rng.random(N)
    z = rng.standard_normal(K)
    return ProblemInstance(A, z, lower, upper, alpha1, alpha2, kappa, seed)


def objective(instance, x):
    """Objective value at `x`; ``inf`` if `x` leaves the box by more than 1e-8."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (instance.N,):
        raise ValueError(f"x must have shape ({instance.N},), got {x.shape}")
    viol = max(
        float(np.max(instance.lower - x, initial=0.0)),
        float(np.max(x - instance.upper, initial=0.0)),
    )
    if viol > FEASIBILITY_TOL:
        return math.inf
    res = instance.A @ x - instance.z
    tv = np.sum(np.abs(discrete_gradient(x)))
    return 0.5 * instance.alpha1 * float(res @ res) + instance.alpha2 * float(tv)


def _fmt(values):
    return " ".join(repr(float(v)) for v in values)


def write_instance(instance, path, explicit=True):
    """Write `instance` to a text file.

    The header holds ``key value`` lines. With ``explicit=True`` the data
    follow as ``[name] rows cols`` blocks of whitespace-separated numbers;
    otherwise only the seed is stored and readers regenerate the data.
    """
    buf = io.StringIO()
    buf.write(f"# {FORMAT_TAG}\n")
    buf.write(f"N {instance.N}\nK {instance.K}\n")
    buf.write(f"alpha1 {instance.alpha1!r}\nalpha2 {instance.alpha2!r}\n")
    buf.write(f"kappa {float(instance.kappa)!r}\n")
    buf.write(f"seed {'none' if instance.seed is None else instance.seed}\n")
    if explicit:
        buf.write(f"[A] {instance.K} {instance.N}\n")
        for row in instance.A:
            buf.write(_fmt(row) + "\n")
        for name in ("z", "lower", "upper"):
            vec = getattr(instance, name)
            buf.write(f"[{name}] {vec.size} 1\n{_fmt(vec)}\n")
    elif instance.seed is None:
        raise ValueError("an instance without a seed must be written explicitly")
    path = Path(path)
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write instance to {path}: {exc}") from exc
    return path


def read_instance(path):
    """Parse a file written by :func:`write_instance`."""
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    header = {}
    blocks = {}
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("["):
            name, rows, cols = line.split()
            name = name.strip("[]")
            rows, cols = int(rows), int(cols)
            nlines = rows if cols > 1 else 1
            data = " ".join(lines[i + 1 : i + 1 + nlines]).split()
            arr = np.array([float(t) for t in data])
            if arr.size != rows * cols:
                raise ValueError(f"{path}: block [{name}] has {arr.size} values, expected {rows * cols}")
            blocks[name] = arr.reshape(rows, cols) if cols > 1 else arr
            i += 1 + nlines
        else:
            key, value = line.split(maxsplit=1)
            header[key] = value
            i += 1
    try:
        N, K = int(header["N"]), int(header["K"])
        alpha1, alpha2 = float(header["alpha1"]), float(header["alpha2"])
        kappa = float(header["kappa"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing header field {exc}") from None
    seed = header.get("seed", "none")
    seed = None if seed == "none" else int(seed)
    if "A" in blocks:
        inst = ProblemInstance(
            blocks["A"], blocks["z"], blocks["lower"], blocks["upper"], alpha1, alpha2, kappa, seed
        )
    elif seed is not None:
        inst = generate_instance(N, K, kappa, alpha1, alpha2, seed)
    else:
        raise ValueError(f"{path}: neither explicit data nor a seed")
    if (inst.N, inst.K) != (N, K):
        raise ValueError(f"{path}: header dims ({N}, {K}) disagree with data")
    return inst
