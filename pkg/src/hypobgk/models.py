"""Collision-frequency families over an uncertainty interval, plus initial data.

The collision frequency sigma is a smooth, strictly positive function of
one uncertainty variable z ranging over a closed interval.  Four
families are supported:

    constant     sigma(z) = s0
    affine       sigma(z) = s0 + c1 z
    trig         sigma(z) = s0 + eps sin(omega z)
    polynomial   sigma(z) = sum_j a_j z^j

Each model knows its exact derivative of any order, its range
[sigma_min, sigma_max] over the domain, and (when one exists) a uniform
Taylor-coefficient bound C with |sigma^(n)(z)/n!| < C for all n and z.
For the trig family such a bound exists only when omega <= 1; larger
frequencies make the derivative magnitudes eps*omega^n/n! unbounded in
n, and requesting the bound raises NotCertifiableError.

The module also turns initial-data descriptions into StateStack objects:
explicit coefficient lists, separable profiles (finite Fourier sum in x
times a polynomial-times-Gaussian velocity shape, projected by
Gauss-Hermite quadrature that is exact for such data), or seeded random
stacks for property sweeps.  Projection enforces the k = 0
normalization: depending on the chosen mode, offending conserved
components are either cleared or reported as an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DomainError,
    InvalidModelError,
    NotCertifiableError,
    UsageError,
)
from .spectral import ModeLattice, gauss_hermite_halfweight, hermite_polynomials
from .state import StateStack, random_stack

__all__ = [
    "CollisionFrequencyModel",
    "constant_model",
    "affine_model",
    "trig_model",
    "polynomial_model",
    "sigma_eval",
    "sigma_bounds",
    "taylor_bound",
    "InitialDataSpec",
    "project_initial",
]

_VARIANTS = ("constant", "affine", "trig", "polynomial")

# Relative head-room added to suprema so the certified bounds are strict.
_MARGIN = 1e-9

# Residual conserved components below this are cleared; larger ones are
# an error in "reject" mode.
_NORMALIZATION_TOL = 1e-10

_MOMENT_NAMES = ("density", "momentum", "energy")


def _poly_extremes(coeffs: np.ndarray, z_lo: float, z_hi: float,
                   resolution: int = 4097) -> tuple[float, float]:
    """Range of a polynomial on [z_lo, z_hi] by dense grid plus refinement."""
    if z_lo == z_hi:
        v = float(np.polynomial.polynomial.polyval(z_lo, coeffs))
        return v, v
    zs = np.linspace(z_lo, z_hi, resolution)
    vals = np.polynomial.polynomial.polyval(zs, coeffs)
    lo_i, hi_i = int(np.argmin(vals)), int(np.argmax(vals))
    out = []
    for idx, sign in ((lo_i, 1.0), (hi_i, -1.0)):
        a = zs[max(idx - 1, 0)]
        b = zs[min(idx + 1, resolution - 1)]
        # golden-section refinement of the local extreme
        g = (math.sqrt(5.0) - 1.0) / 2.0
        x1, x2 = b - g * (b - a), a + g * (b - a)
        f = lambda x: sign * float(np.polynomial.polynomial.polyval(x, coeffs))
        f1, f2 = f(x1), f(x2)
        while b - a > 1e-12:
            if f1 <= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - g * (b - a)
                f1 = f(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + g * (b - a)
                f2 = f(x2)
        best = sign * f(0.5 * (a + b))
        grid_best = float(vals[idx])
        out.append(min(best, grid_best) if sign > 0 else max(best, grid_best))
    return out[0], out[1]


def _compute_bounds(variant: str, params: tuple[float, ...],
                    z_lo: float, z_hi: float) -> tuple[float, float]:
    if variant == "constant":
        return params[0], params[0]
    if variant == "affine":
        s0, c1 = params
        ends = (s0 + c1 * z_lo, s0 + c1 * z_hi)
        return min(ends), max(ends)
    if variant == "trig":
        s0, eps, omega = params
        # endpoints plus interior critical points of sin(omega z)
        candidates = [z_lo, z_hi]
        j_lo = math.floor((omega * z_lo - math.pi / 2.0) / math.pi)
        j_hi = math.ceil((omega * z_hi - math.pi / 2.0) / math.pi)
        for j in range(j_lo, j_hi + 1):
            zc = (math.pi / 2.0 + j * math.pi) / omega
            if z_lo <= zc <= z_hi:
                candidates.append(zc)
        vals = [s0 + eps * math.sin(omega * zc) for zc in candidates]
        return min(vals), max(vals)
    coeffs = np.asarray(params, dtype=float)
    return _poly_extremes(coeffs, z_lo, z_hi)


@dataclass(frozen=True)
class CollisionFrequencyModel:
    """One collision-frequency family over a closed uncertainty interval."""

    variant: str
    params: tuple[float, ...]
    z_lo: float
    z_hi: float
    sigma_min: float = field(init=False)
    sigma_max: float = field(init=False)

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise InvalidModelError(
                f"unknown model variant {self.variant!r}; expected one of {_VARIANTS}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        expected = {"constant": 1, "affine": 2, "trig": 3}
        if self.variant in expected and len(params) != expected[self.variant]:
            raise InvalidModelError(
                f"{self.variant} model takes {expected[self.variant]} parameters, "
                f"got {len(params)}")
        if self.variant == "polynomial" and len(params) < 1:
            raise InvalidModelError("polynomial model needs at least one coefficient")
        if not all(math.isfinite(p) for p in params):
            raise InvalidModelError("model parameters must be finite")
        if self.variant == "trig" and params[2] <= 0.0:
            raise InvalidModelError(
                f"trig model needs omega > 0, got omega={params[2]}")
        if not (math.isfinite(self.z_lo) and math.isfinite(self.z_hi)
                and self.z_lo <= self.z_hi):
            raise InvalidModelError(
                f"invalid z domain [{self.z_lo}, {self.z_hi}]")
        lo, hi = _compute_bounds(self.variant, params, self.z_lo, self.z_hi)
        if not lo > 0.0:
            raise InvalidModelError(
                f"{self.variant} model with parameters {params}: collision "
                f"frequency must stay positive on the domain; "
                f"found minimum {lo:.6g}")
        object.__setattr__(self, "sigma_min", lo)
        object.__setattr__(self, "sigma_max", hi)

    @property
    def z_domain(self) -> tuple[float, float]:
        return self.z_lo, self.z_hi


def constant_model(sigma0: float, z_domain=(-1.0, 1.0)) -> CollisionFrequencyModel:
    return CollisionFrequencyModel("constant", (sigma0,), z_domain[0], z_domain[1])


def affine_model(sigma0: float, c1: float,
                 z_domain=(-1.0, 1.0)) -> CollisionFrequencyModel:
    return CollisionFrequencyModel("affine", (sigma0, c1), z_domain[0], z_domain[1])


def trig_model(sigma0: float, eps: float, omega: float,
               z_domain=(-math.pi, math.pi)) -> CollisionFrequencyModel:
    return CollisionFrequencyModel("trig", (sigma0, eps, omega),
                                   z_domain[0], z_domain[1])


def polynomial_model(coeffs, z_domain=(-1.0, 1.0)) -> CollisionFrequencyModel:
    return CollisionFrequencyModel("polynomial", tuple(coeffs),
                                   z_domain[0], z_domain[1])


def sigma_eval(model: CollisionFrequencyModel, z: float, n: int = 0) -> float:
    """n-th z-derivative of the collision frequency at z (exact formulas)."""
    if n < 0:
        raise UsageError(f"derivative order must be >= 0, got n={n}")
    if not model.z_lo <= z <= model.z_hi:
        raise DomainError(
            f"z={z} outside the model domain [{model.z_lo}, {model.z_hi}]")
    if model.variant == "constant":
        return model.params[0] if n == 0 else 0.0
    if model.variant == "affine":
        s0, c1 = model.params
        if n == 0:
            return s0 + c1 * z
        return c1 if n == 1 else 0.0
    if model.variant == "trig":
        s0, eps, omega = model.params
        val = eps * omega**n * math.sin(omega * z + n * math.pi / 2.0)
        return s0 + val if n == 0 else val
    if n > len(model.params) - 1:
        return 0.0
    deriv = np.polynomial.polynomial.polyder(np.asarray(model.params), n) \
        if n > 0 else np.asarray(model.params)
    return float(np.polynomial.polynomial.polyval(z, deriv))


def sigma_bounds(model: CollisionFrequencyModel) -> tuple[float, float]:
    """Range of sigma over the model's z domain (computed at construction)."""
    return model.sigma_min, model.sigma_max


def taylor_bound(model: CollisionFrequencyModel) -> float:
    """Uniform bound C with |sigma^(n)(z)/n!| < C for all n >= 0 and z.

    constant/affine: the zeroth and first coefficients are the only
    nonzero ones.  trig with omega <= 1: coefficient magnitudes
    |eps| omega^n / n! peak at n <= 1.  polynomial: bound each scaled
    derivative by its absolute-coefficient sum at the domain radius.
    A 1e-9 relative margin keeps the inequality strict.
    """
    if model.variant == "constant":
        return model.params[0] * (1.0 + _MARGIN)
    if model.variant == "affine":
        return max(model.sigma_max, abs(model.params[1])) * (1.0 + _MARGIN)
    if model.variant == "trig":
        _, eps, omega = model.params
        if omega > 1.0:
            raise NotCertifiableError(
                f"the certified Taylor bound covers trig models with "
                f"omega <= 1 only, got omega={omega}; rescale z or lower omega")
        return max(model.sigma_max, abs(eps) * omega) * (1.0 + _MARGIN)
    radius = max(abs(model.z_lo), abs(model.z_hi))
    coeffs = np.asarray(model.params, dtype=float)
    deg = coeffs.shape[0] - 1
    best = 0.0
    for n in range(deg + 1):
        total = sum(abs(coeffs[j]) * math.comb(j, n) * radius ** (j - n)
                    for j in range(n, deg + 1))
        best = max(best, total)
    return best * (1.0 + _MARGIN)


@dataclass(frozen=True)
class InitialDataSpec:
    """Description of initial data, turned into a stack by project_initial.

    kind "coefficients": entries is a tuple of (level, k, m, value).
    kind "separable": fourier is a tuple of (k, value) coefficients of
        e^{i k l x}, velocity_poly the ascending coefficients of p(v) in
        the profile p(v) exp(-v^2/2); fills level 0 only.
    kind "random": seeded Gaussian stack, fill "all" or "level0".
    normalization: "enforce" clears the conserved k = 0 components,
        "reject" raises if any exceeds 1e-10 (smaller residues are
        cleared in both modes).
    """

    kind: str
    entries: tuple = ()
    fourier: tuple = ()
    velocity_poly: tuple = ()
    seed: int = 0
    scale: float = 1.0
    fill: str = "all"
    normalization: str = "enforce"

    def __post_init__(self) -> None:
        if self.kind not in ("coefficients", "separable", "random"):
            raise UsageError(f"unknown initial-data kind {self.kind!r}")
        if self.normalization not in ("enforce", "reject"):
            raise UsageError(
                f"normalization must be 'enforce' or 'reject', "
                f"got {self.normalization!r}")
        if self.kind == "separable" and len(self.velocity_poly) == 0:
            raise UsageError("separable initial data needs velocity_poly")
        if self.kind == "random" and self.fill not in ("all", "level0"):
            raise UsageError(f"unknown random fill mode {self.fill!r}")


def _apply_normalization(data: np.ndarray, mode: str) -> None:
    bad = np.abs(data[0, :, :3])
    if mode == "reject" and bad.max(initial=0.0) > _NORMALIZATION_TOL:
        n, m = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise DataError(
            f"initial data violates normalization: k=0 {_MOMENT_NAMES[m]} "
            f"component at derivative level {n} is {bad[n, m]:.3e} "
            f"(tolerance {_NORMALIZATION_TOL:g})")
    data[0, :, :3] = 0.0


def project_initial(spec: InitialDataSpec, lattice: ModeLattice,
                    levels: int = 0, z: float = 0.0) -> StateStack:
    """Build the t = 0 StateStack described by an InitialDataSpec.

    levels sets the number of stored derivative orders; data the spec
    does not determine starts at zero.
    """
    if levels < 0:
        raise UsageError(f"need levels >= 0, got {levels}")
    K, M = lattice.K, lattice.M
    if spec.kind == "random":
        rng = np.random.default_rng(spec.seed)
        data = random_stack(lattice, levels, rng, spec.scale, spec.fill)
    else:
        data = np.zeros((K + 1, levels + 1, M), dtype=complex)
        if spec.kind == "coefficients":
            for entry in spec.entries:
                n, k, m, value = entry
                if not (0 <= n <= levels and 0 <= k <= K and 0 <= m < M):
                    raise UsageError(
                        f"coefficient entry (level={n}, k={k}, m={m}) outside "
                        f"the stack (levels<={levels}, K={K}, M={M})")
                data[k, n, m] = complex(value)
        else:
            poly = np.asarray(spec.velocity_poly, dtype=complex)
            # Quadrature exact for p(v) * basis polynomial of any stored order.
            nodes_needed = max(2 * M, (poly.shape[0] - 1 + M) // 2 + 1)
            v, w = gauss_hermite_halfweight(nodes_needed)
            basis = hermite_polynomials(M, v)
            pvals = np.polynomial.polynomial.polyval(v, poly)
            vel_coeffs = basis @ (w * pvals)
            for k, value in spec.fourier:
                k = int(k)
                if not 0 <= k <= K:
                    raise UsageError(
                        f"Fourier index k={k} outside the stored range 0..{K}")
                data[k, 0, :] += complex(value) * vel_coeffs
    _apply_normalization(data, spec.normalization)
    return StateStack(lattice=lattice, z=z, t=0.0, data=data)
