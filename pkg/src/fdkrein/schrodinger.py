"""Point interaction on the circle: continuous resolvent versus its
difference approximation.

Continuous side: ``-d^2/dx^2`` on ``[0, 2*pi)`` with periodic conditions has
resolvent ``(1/2pi) sum_m phi_m e^{imx} / (m^2 - lam)`` where
``phi_m = int phi e^{-imx} dx``.  A delta potential of strength ``mu`` at
``x = 0`` adds a rank-one correction

    - mu * S * G(x) / (1 + mu * G(0)),
    S = (1/2pi) sum_m phi_m / (m^2 - lam),   G(x) = (1/2pi) sum_m e^{imx} / (m^2 - lam).

All series are truncated at ``|m| <= truncation``.

Discrete side: ``2M`` grid points, ``h = pi / M``, operator
``-(1/h^2)(f_{j-1} - 2 f_j + f_{j+1})`` with periodic wrap, plus
``mu * (1/h) f_0 delta_{0j}``.  Its resolvent has the same three-term shape
with symbols ``(4/h^2) sin^2(h m / 2)`` over ``m = -M+1 .. M`` and the grid
transform ``phi_hat_m = h sum_j phi_j e^{-i h m j}``.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dft import dft_forward
from .errors import LambdaOnSpectrum, ResonantDenominator
from .krein import krein_solve, rank1_solve
from .laplace import PeriodicResolvent1D
from .lowrank import LowRankPerturbation

__all__ = [
    "DEFAULT_TRUNCATION",
    "DEFAULT_QUADRATURE",
    "ContinuousResolventParams",
    "DiscreteResolventParams",
    "KreinTerms",
    "fourier_coefficients",
    "evaluate_series",
    "continuous_free_resolvent",
    "continuous_krein_terms",
    "continuous_krein_resolvent",
    "discrete_symbol",
    "discrete_krein_terms",
    "discrete_krein_resolvent",
    "project_T_h",
    "h_norm",
    "tail_bound",
    "ConvergenceRow",
    "ConvergenceReport",
    "convergence_study",
    "exp_cos",
    "fourier_mode",
]

DEFAULT_TRUNCATION = 4096
DEFAULT_QUADRATURE = 8192


def exp_cos(x):
    return np.exp(np.cos(x))


def fourier_mode(m: int) -> Callable:
    def phi(x):
        return np.exp(1j * m * np.asarray(x))

    return phi


@dataclass(frozen=True)
class ContinuousResolventParams:
    lam: complex
    mu: float = 1.0
    truncation: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be at least 1")
        m = self.modes
        if np.abs(m.astype(float) ** 2 - self.lam).min() < 1e-12:
            raise LambdaOnSpectrum(f"lambda={self.lam} is an integer square")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)

    @property
    def weights(self) -> np.ndarray:
        """``1 / (m^2 - lam)`` over the truncated modes."""
        m = self.modes.astype(float)
        return 1.0 / (m * m - self.lam)


@dataclass(frozen=True)
class DiscreteResolventParams:
    M: int
    lam: complex
    mu: float = 1.0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")

    @property
    def h(self) -> float:
        return np.pi / self.M

    @property
    def size(self) -> int:
        return 2 * self.M

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(self.size)

    def base(self) -> PeriodicResolvent1D:
        return PeriodicResolvent1D(self.size, self.lam, scale=-1.0 / self.h**2)


def tail_bound(truncation: int, lam: complex) -> float:
    """Bound on ``|sum_{|m| > truncation} 1 / (m^2 - lam)|``."""
    return 2.0 / (truncation - abs(lam))


def fourier_coefficients(phi: Callable, truncation: int, quad_points: int = DEFAULT_QUADRATURE) -> np.ndarray:
    """``phi_m = int_0^{2pi} phi(x) e^{-imx} dx`` for ``|m| <= truncation``
    by the trapezoidal rule on ``quad_points`` nodes (``m`` ascending).

    Modes beyond the quadrature's Nyquist index are aliased; callers keep
    ``truncation <= quad_points / 2``.
    """
    x = 2 * np.pi * np.arange(quad_points) / quad_points
    samples = np.asarray(phi(x), dtype=complex) * np.ones(quad_points)
    raw = dft_forward(samples) * (2 * np.pi / np.sqrt(quad_points))
    return raw[np.arange(-truncation, truncation + 1) % quad_points]


def evaluate_series(coeffs, x, chunk: int = 256) -> np.ndarray:
    """``(1/2pi) sum_m coeffs_m e^{imx}`` with ``m`` centred on zero."""
    coeffs = np.asarray(coeffs, dtype=complex)
    t = (coeffs.size - 1) // 2
    m = np.arange(-t, t + 1)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.size, dtype=complex)
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * np.outer(xs, m)) @ coeffs
    return out / (2 * np.pi)


def _coefficients_of(params: ContinuousResolventParams, phi, quad_points):
    if callable(phi):
        return fourier_coefficients(phi, params.truncation, quad_points)
    c = np.asarray(phi, dtype=complex)
    if c.shape != (2 * params.truncation + 1,):
        raise ValueError(f"expected {2 * params.truncation + 1} coefficients, got {c.shape}")
    return c


def continuous_free_resolvent(params: ContinuousResolventParams, phi, quad_points: int = DEFAULT_QUADRATURE) -> np.ndarray:
    """Fourier coefficients of the free resolvent applied to ``phi``.

    ``phi`` is a callable on ``[0, 2pi)`` or its coefficient array.
    """
    return _coefficients_of(params, phi, quad_points) * params.weights


@dataclass(frozen=True)
class KreinTerms:
    """The pieces of a rank-one resolvent formula on a set of points."""

    free: np.ndarray
    scalar: complex
    kernel: np.ndarray
    denominator: complex
    mu: float

    @property
    def numerator(self) -> np.ndarray:
        return self.scalar * self.kernel

    @property
    def value(self) -> np.ndarray:
        return self.free - self.mu * self.numerator / self.denominator


def continuous_krein_terms(params: ContinuousResolventParams, phi, x,
                           quad_points: int = DEFAULT_QUADRATURE) -> KreinTerms:
    free_coeffs = continuous_free_resolvent(params, phi, quad_points)
    w = params.weights
    denominator = complex(1.0 + params.mu / (2 * np.pi) * w.sum())
    if abs(denominator) < 1e-12:
        raise ResonantDenominator(f"1 + mu * G(0) = {denominator:.3e} vanishes")
    return KreinTerms(
        free=evaluate_series(free_coeffs, x),
        scalar=complex(free_coeffs.sum() / (2 * np.pi)),
        kernel=evaluate_series(w, x),
        denominator=denominator,
        mu=params.mu,
    )


def continuous_krein_resolvent(params: ContinuousResolventParams, phi, x,
                               quad_points: int = DEFAULT_QUADRATURE) -> np.ndarray:
    """Samples at ``x`` of the delta-potential resolvent applied to ``phi``."""
    return continuous_krein_terms(params, phi, x, quad_points).value


def discrete_symbol(M: int) -> np.ndarray:
    """``(4/h^2) sin^2(h m / 2)`` in DFT index order ``m = 0 .. 2M-1``."""
    h = np.pi / M
    return 4.0 / h**2 * np.sin(h * np.arange(2 * M) / 2) ** 2


def discrete_krein_terms(params: DiscreteResolventParams, phi_samples) -> KreinTerms:
    """Three-term evaluation of the discrete resolvent.

    The free part and the kernel column come from the periodic resolvent:
    with ``h * 2M = 2 pi`` the series normalisation collapses to
    ``R phi`` and ``R delta_0 / h``.
    """
    phi = np.asarray(phi_samples, dtype=complex)
    if phi.shape != (params.size,):
        raise ValueError(f"expected {params.size} samples, got {phi.shape}")
    base = params.base()
    free = base.apply(phi)
    e0 = np.zeros(params.size, dtype=complex)
    e0[0] = 1.0
    kernel = base.apply(e0) / params.h
    denominator = complex(1.0 + params.mu * kernel[0])
    if abs(denominator) < 1e-12:
        raise ResonantDenominator(f"discrete denominator {denominator:.3e} vanishes")
    return KreinTerms(free, complex(free[0]), kernel, denominator, params.mu)


def _delta_perturbation(params: DiscreteResolventParams) -> LowRankPerturbation:
    n = params.size
    row = np.zeros((1, n), dtype=complex)
    row[0, 0] = params.mu / params.h
    return LowRankPerturbation.from_rows(n, [0], row)


def discrete_krein_resolvent(params: DiscreteResolventParams, phi_samples, method: str = "general") -> np.ndarray:
    """Resolvent of ``A_M + mu * delta_0`` applied to grid samples.

    ``method="general"`` runs the boundary-system solver on the one-row
    perturbation; ``method="rank1"`` uses the rank-one closed form.
    """
    phi = np.asarray(phi_samples, dtype=complex)
    base = params.base()
    if method == "general":
        return krein_solve(base, _delta_perturbation(params), phi)
    if method == "rank1":
        e = np.zeros(params.size, dtype=complex)
        e[0] = params.mu / params.h
        functional = np.zeros(params.size, dtype=complex)
        functional[0] = 1.0
        return rank1_solve(base, e, functional, phi)
    raise ValueError(f"unknown method {method!r}")


def project_T_h(f: Callable, M: int) -> np.ndarray:
    """Samples ``f(h j)``, ``j = 0 .. 2M-1``."""
    h = np.pi / M
    x = h * np.arange(2 * M)
    return np.asarray(f(x), dtype=complex) * np.ones(2 * M)


def h_norm(g, h: float) -> float:
    g = np.asarray(g)
    return float(np.sqrt(h * np.sum(np.abs(g) ** 2)))


@dataclass(frozen=True)
class ConvergenceRow:
    M: int
    h: float
    e_M: float
    free_term_err: float
    kernel_term_err: float
    denom_err: float
    runtime_ms: float
    scalar_err: float = 0.0


CSV_COLUMNS = ("M", "h", "e_M", "free_term_err", "kernel_term_err", "denom_err", "runtime_ms")


@dataclass
class ConvergenceReport:
    mu: float
    lam: complex
    truncation: int
    tail_bound: float
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def ratios(self, name: str = "e_M") -> np.ndarray:
        c = self.column(name)
        return c[:-1] / c[1:]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.M, repr(r.h)] + [repr(float(getattr(r, c))) for c in CSV_COLUMNS[2:-1]]
                       + [f"{r.runtime_ms:.3f}"])
        return buf.getvalue()


def convergence_study(mu: float = 1.0, lam: complex = 0.5 + 0.5j, phi: Callable = exp_cos,
                      M_list: Sequence[int] = (16, 32, 64, 128),
                      truncation: int = DEFAULT_TRUNCATION,
                      quad_points: int = DEFAULT_QUADRATURE) -> ConvergenceReport:
    """Compare the continuous and discrete point-interaction resolvents.

    For each ``M`` the row holds the h-norm distance between the sampled
    continuous result and the discrete result on sampled ``phi``, and the
    distance of each formula term: free part (h-norm), numerator
    ``S * G`` (h-norm) and denominator (absolute).
    """
    M_list = list(M_list)
    if any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ValueError("M_list must be strictly ascending")
    cparams = ContinuousResolventParams(complex(lam), mu, truncation)
    coeffs = fourier_coefficients(phi, truncation, quad_points)
    report = ConvergenceReport(mu, complex(lam), truncation, tail_bound(truncation, lam))
    for M in M_list:
        t0 = time.perf_counter()
        dparams = DiscreteResolventParams(M, complex(lam), mu)
        h = dparams.h
        samples = project_T_h(phi, M)
        cont = continuous_krein_terms(cparams, coeffs, dparams.grid)
        resolved = discrete_krein_resolvent(dparams, samples)
        disc = discrete_krein_terms(dparams, samples)
        runtime = (time.perf_counter() - t0) * 1e3
        report.rows.append(ConvergenceRow(
            M=M,
            h=h,
            e_M=h_norm(cont.value - resolved, h),
            free_term_err=h_norm(cont.free - disc.free, h),
            kernel_term_err=h_norm(cont.numerator - disc.numerator, h),
            denom_err=abs(cont.denominator - disc.denominator),
            runtime_ms=runtime,
            scalar_err=abs(cont.scalar - disc.scalar),
        ))
    return report
