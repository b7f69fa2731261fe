"""Lyapunov transforms and certified decay rates for the mode generators.

The plain L2 norm of a mode coefficient vector is not monotone under
d/dt hhat_k = -C_k hhat_k: the relaxation part of C_k only damps the
coefficients beyond the conserved triple, and the streaming part is
skew.  Monotonicity is restored in a twisted inner product <x, P_k x>,
where P_k differs from the identity only in its leading 4 x 4 block

    [ 1        -i a/k    0         0      ]
    [ i a/k     1        -i b/k    0      ]
    [ 0         i b/k    1         -i c/k ]
    [ 0         0        i c/k     1      ],

with a = alpha, b = sqrt(2) alpha, c = sqrt(3) alpha.  The twist feeds
a little of the streaming coupling into the conserved directions, which
is exactly what makes them decay.  P_k is Hermitian with eigenvalues
1 and 1 +/- alpha*sqrt(3 +/- sqrt(6))/|k|, hence positive definite and
uniformly equivalent to the identity whenever alpha*sqrt(3+sqrt(6)) < 1.

For each mode the dissipation matrix C_k^* P_k + P_k C_k splits into a
5 x 5 corner block plus 2*sigma times the identity on the rest.  Sylvester
minors of that corner give a closed-form criterion: all of them are
positive exactly when alpha stays below an explicit threshold
alpha_limit(l, sigma), and the smallest certified dissipation-to-energy
ratio over one sigma interval yields the rate constants

    lambda_min = min_sigma  minor_det3(1, alpha, sigma, l) / (4 (sigma - alpha l)^2),
    mu         = lambda_min / (2 (1 + alpha sqrt(3+sqrt(6)))),
    rate       = min(mu, sigma_min),

packaged in a Certificate.  The certified matrix inequality

    C_k^* P_k + P_k C_k  >=  2 mu P_k      for every k != 0, M >= 5

can be re-checked numerically with verify_inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificateError, DomainError, UsageError
from .spectral import MIN_HERMITE, build_operators, assemble_generator

__all__ = [
    "TWIST_GAIN",
    "ALPHA_CAP",
    "TransformMatrix",
    "Certificate",
    "build_transform",
    "transform_eigenvalues",
    "transform_bounds",
    "alpha_limit",
    "alpha_max",
    "minor_det3",
    "minor_det4",
    "minor_det5",
    "rate_block",
    "build_reduced_block",
    "certify",
    "verify_inequality",
    "verify_grid",
]

# Largest twist eigenvalue offset: spec(P_k) = 1 +/- alpha*sqrt(3+-sqrt(6))/|k|.
TWIST_GAIN = math.sqrt(3.0 + math.sqrt(6.0))

# Hard admissibility cap: keep 1 - alpha*TWIST_GAIN >= 0.01 so the twisted
# and plain norms never degenerate, whatever the sigma interval allows.
ALPHA_CAP = 0.99 / TWIST_GAIN

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TransformMatrix:
    """Twisted-metric matrix P_k for one spatial mode."""

    k: int
    alpha: float
    M: int
    matrix: np.ndarray


@dataclass(frozen=True)
class Certificate:
    """Decay-rate certificate for one period and collision-frequency range.

    lambda_min already includes a multiplicative safety factor 1 - 1e-6
    absorbing the grid minimization error; mu and decay_rate derive from
    the safeguarded value, so the certified inequality holds with margin.
    """

    L: float
    l: float
    sigma_min: float
    sigma_max: float
    alpha: float
    alpha_max: float
    lambda_min: float
    mu: float
    decay_rate: float
    ctilde: float
    sigma_grid_resolution: int

    @property
    def beta(self) -> float:
        return math.sqrt(2.0) * self.alpha

    @property
    def gamma(self) -> float:
        return math.sqrt(3.0) * self.alpha


def _check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha and alpha * TWIST_GAIN < 1.0):
        raise CertificateError(
            f"twist parameter must satisfy 0 <= alpha < {1.0 / TWIST_GAIN:.6g}, "
            f"got alpha={alpha}"
        )


def build_transform(k: int, alpha: float, M: int) -> TransformMatrix:
    """Build P_k at truncation size M.  k must be a nonzero integer."""
    if k == 0:
        raise DomainError("the twisted metric is defined for modes k != 0 only")
    if M < MIN_HERMITE:
        raise UsageError(f"need at least {MIN_HERMITE} Hermite terms, got M={M}")
    _check_alpha(alpha)
    P = np.eye(M, dtype=complex)
    for row, c in enumerate((alpha, math.sqrt(2.0) * alpha, math.sqrt(3.0) * alpha)):
        P[row, row + 1] = -1j * c / k
        P[row + 1, row] = 1j * c / k
    return TransformMatrix(k=k, alpha=alpha, M=M, matrix=P)


def transform_eigenvalues(k: int, alpha: float, M: int) -> np.ndarray:
    """Closed-form spectrum of P_k, sorted ascending."""
    if k == 0:
        raise DomainError("the twisted metric is defined for modes k != 0 only")
    _check_alpha(alpha)
    shift_out = alpha * math.sqrt(3.0 + math.sqrt(6.0)) / abs(k)
    shift_in = alpha * math.sqrt(3.0 - math.sqrt(6.0)) / abs(k)
    eigs = np.ones(M)
    eigs[0] = 1.0 - shift_out
    eigs[1] = 1.0 - shift_in
    eigs[-2] = 1.0 + shift_in
    eigs[-1] = 1.0 + shift_out
    return np.sort(eigs)


def transform_bounds(alpha: float) -> tuple[float, float]:
    """Uniform sandwich (lo, hi) with lo*I <= P_k <= hi*I over all k != 0."""
    _check_alpha(alpha)
    return 1.0 - alpha * TWIST_GAIN, 1.0 + alpha * TWIST_GAIN


def alpha_limit(l, sigma):
    """Admissibility threshold for the twist at wavenumber spacing l.

    All Sylvester minors of the corner dissipation block are positive for
    0 < alpha < alpha_limit(l, sigma).  Evaluated in the rationalized form

        8 l sigma / (3 (sqrt(64 l^4 + 16 l^2 s^2 + s^4) + sqrt(16 l^2 s^2 + s^4)))

    which is free of the subtractive cancellation the naive expression
    suffers for small l.  Accepts scalar or array sigma.
    """
    sigma = np.asarray(sigma, dtype=float)
    if not (np.asarray(l) > 0).all() or not (sigma > 0).all():
        raise UsageError("alpha_limit needs l > 0 and sigma > 0")
    big = np.sqrt(64.0 * l**4 + 16.0 * l**2 * sigma**2 + sigma**4)
    small = np.sqrt(16.0 * l**2 * sigma**2 + sigma**4)
    out = 8.0 * l * sigma / (3.0 * (big + small))
    return float(out) if out.ndim == 0 else out


def _golden_section_min(f, a: float, b: float, xatol: float = 1e-10):
    """Plain golden-section minimization on [a, b]; returns (x, f(x))."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xatol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def _grid_refine_min(f, lo: float, hi: float, num: int, xatol: float = 1e-10):
    """Dense-grid scan followed by local golden-section refinement.

    f must accept array input.  Returns (argmin, min); the refinement can
    only improve on the best grid point, never lose it.
    """
    if hi < lo:
        raise UsageError(f"empty search interval [{lo}, {hi}]")
    if hi == lo:
        return lo, float(f(np.asarray(lo)))
    xs = np.linspace(lo, hi, num)
    ys = np.asarray(f(xs), dtype=float)
    i = int(np.argmin(ys))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, num - 1)]
    x_ref, y_ref = _golden_section_min(lambda x: float(f(np.asarray(x))), a, b, xatol)
    if ys[i] <= y_ref:
        return float(xs[i]), float(ys[i])
    return x_ref, y_ref


def minor_det3(k, alpha, sigma, l):
    """Determinant of the lower-right 3x3 of the corner dissipation block.

        alpha (72 l^3 alpha^2 - (48 l^2 sigma + 6 sigma^3/k^2) alpha + 8 l sigma^2)

    Positive on 0 < alpha < alpha_limit(l, sigma) for every k >= 1; k may
    be math.inf to probe the high-frequency limit.
    """
    if np.any(np.asarray(k) == 0):
        raise DomainError("corner minors are defined for modes k != 0 only")
    k2 = np.asarray(k, dtype=float) ** 2
    out = alpha * (
        72.0 * l**3 * alpha**2
        - (48.0 * l**2 * sigma + 6.0 * sigma**3 / k2) * alpha
        + 8.0 * l * sigma**2
    )
    return float(out) if np.ndim(out) == 0 else out


def minor_det4(k, alpha, sigma, l):
    """Lower-right 4x4 minor: 2 alpha l times minor_det3."""
    return 2.0 * alpha * l * minor_det3(k, alpha, sigma, l)


def minor_det5(k, alpha, sigma, l):
    """Full 5x5 determinant: 4 alpha^2 l^2 times minor_det3."""
    return 4.0 * alpha**2 * l**2 * minor_det3(k, alpha, sigma, l)


def rate_block(l, alpha, sigma):
    """Certified dissipation rate of the k = 1 corner block.

        minor_det3(1, alpha, sigma, l) / (4 (sigma - alpha l)^2)

    The k = 1 block is the binding one: the only k-dependence of the
    minors is the -6 sigma^3 alpha / k^2 term, which hurts most at k = 1.
    """
    sigma = np.asarray(sigma, dtype=float)
    if not np.all(alpha > 0.0) or not np.all(alpha < alpha_limit(l, sigma)):
        raise CertificateError(
            f"twist alpha={alpha} outside the admissible range (0, alpha_limit) "
            f"for l={l}"
        )
    if not np.all(sigma > alpha * l):
        raise CertificateError("rate_block needs sigma > alpha * l")
    out = minor_det3(1.0, alpha, sigma, l) / (4.0 * (sigma - alpha * l) ** 2)
    return float(out) if out.ndim == 0 else out


def build_reduced_block(k, alpha: float, sigma: float, l: float) -> np.ndarray:
    """Corner 5x5 block of C_k^* P_k + P_k C_k.

    Beyond this block the dissipation matrix is exactly 2*sigma times the
    identity.  k may be math.inf for the high-frequency limit, where the
    sigma/k coupling disappears.
    """
    if k == 0:
        raise DomainError("the corner block is defined for modes k != 0 only")
    s3 = math.sqrt(3.0)
    D = np.zeros((5, 5), dtype=complex)
    D[0, 0] = D[1, 1] = D[2, 2] = 2.0 * l * alpha
    D[3, 3] = 2.0 * sigma - 6.0 * l * alpha
    D[4, 4] = 2.0 * sigma
    D[2, 3] = -1j * s3 * alpha * sigma / k
    D[3, 2] = 1j * s3 * alpha * sigma / k
    D[2, 4] = D[4, 2] = 2.0 * s3 * l * alpha
    return D


def _lambda_min_raw(l: float, alpha: float, sigma_min: float, sigma_max: float,
                    resolution: int) -> float:
    _, val = _grid_refine_min(
        lambda s: rate_block(l, alpha, s), sigma_min, sigma_max, resolution
    )
    return val


def _resolve_alpha(strategy, l: float, amax: float, sigma_min: float,
                   sigma_max: float, resolution: int) -> float:
    """Turn an alpha strategy into a concrete admissible value."""

    def mu_of(a: float) -> float:
        lam = _lambda_min_raw(l, a, sigma_min, sigma_max, resolution)
        return 0.5 * lam / (1.0 + a * TWIST_GAIN)

    if isinstance(strategy, str):
        text = strategy.strip()
        if text == "optimize":
            # Coarse scan (including the exact midpoint) seeds a local
            # golden-section refinement; keep whichever is better.
            grid = amax * np.arange(1, 64) / 64.0
            vals = [mu_of(a) for a in grid]
            i = int(np.argmax(vals))
            a_lo = grid[max(i - 1, 0)]
            a_hi = grid[min(i + 1, len(grid) - 1)]
            a_ref, neg = _golden_section_min(lambda a: -mu_of(a), a_lo, a_hi, 1e-10)
            return float(a_ref) if -neg >= vals[i] else float(grid[i])
        if text.startswith("fixed:"):
            return _resolve_alpha(float(text[len("fixed:"):]), l, amax,
                                  sigma_min, sigma_max, resolution)
        if text.startswith("fraction:"):
            frac = float(text[len("fraction:"):])
            if not 0.0 < frac < 1.0:
                raise CertificateError(
                    f"alpha fraction must lie in (0, 1), got {frac}")
            return frac * amax
        raise CertificateError(f"unknown alpha strategy {strategy!r}")
    alpha = float(strategy)
    if not 0.0 < alpha < amax:
        raise CertificateError(
            f"fixed alpha={alpha} outside the admissible range (0, {amax:.6g})")
    return alpha


def alpha_max(l: float, sigma_min: float, sigma_max: float,
              resolution: int = 10_000) -> float:
    """Largest twist admissible across a whole collision-frequency range.

    Minimizes alpha_limit(l, .) over [sigma_min, sigma_max] on a dense
    grid with golden-section refinement, then applies the hard cap
    ALPHA_CAP that keeps the twisted metric safely positive definite.
    """
    if not (0.0 < sigma_min <= sigma_max):
        raise UsageError(
            f"need 0 < sigma_min <= sigma_max, got [{sigma_min}, {sigma_max}]")
    if not (l > 0.0 and math.isfinite(l)):
        raise UsageError(f"wavenumber spacing must be positive, got l={l}")
    if resolution < 2:
        raise UsageError(f"grid resolution must be >= 2, got {resolution}")
    if sigma_min == sigma_max:
        sup = alpha_limit(l, sigma_min)
    else:
        _, sup = _grid_refine_min(lambda s: alpha_limit(l, s),
                                  sigma_min, sigma_max, resolution)
    return min(sup, ALPHA_CAP)


def certify(L: float, sigma_min: float, sigma_max: float,
            alpha_strategy="optimize",
            sigma_grid_resolution: int = 10_000) -> Certificate:
    """Construct the decay certificate for period L and a sigma interval.

    alpha_strategy is either a number (use that alpha, which must lie
    strictly inside (0, alpha_max)), the string "fixed:<value>" or
    "fraction:<f>" (alpha = f * alpha_max), or "optimize" (default),
    which maximizes mu over the admissible interval by a coarse scan
    plus golden-section refinement.
    """
    if not (L > 0.0 and math.isfinite(L)):
        raise CertificateError(f"period L must be positive and finite, got {L}")
    if not (0.0 < sigma_min <= sigma_max and math.isfinite(sigma_max)):
        raise CertificateError(
            f"need 0 < sigma_min <= sigma_max < inf, got [{sigma_min}, {sigma_max}]")
    if sigma_grid_resolution < 2:
        raise CertificateError(
            f"sigma grid resolution must be >= 2, got {sigma_grid_resolution}")
    l = 2.0 * math.pi / L
    amax = alpha_max(l, sigma_min, sigma_max, sigma_grid_resolution)
    alpha = _resolve_alpha(alpha_strategy, l, amax, sigma_min, sigma_max,
                           sigma_grid_resolution)
    if not 0.0 < alpha < amax:
        raise CertificateError(
            f"resolved alpha={alpha} outside the admissible range (0, {amax:.6g})")
    lam_min = _lambda_min_raw(l, alpha, sigma_min, sigma_max,
                              sigma_grid_resolution) * (1.0 - 1e-6)
    if not lam_min > 0.0:
        raise CertificateError(
            f"certified block rate is not positive (lambda_min={lam_min})")
    mu = 0.5 * lam_min / (1.0 + alpha * TWIST_GAIN)
    return Certificate(
        L=L,
        l=l,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        alpha=alpha,
        alpha_max=amax,
        lambda_min=lam_min,
        mu=mu,
        decay_rate=min(mu, sigma_min),
        ctilde=math.sqrt((1.0 + alpha * TWIST_GAIN) / (1.0 - alpha * TWIST_GAIN)),
        sigma_grid_resolution=sigma_grid_resolution,
    )


def _inequality_pieces(k: int, l: float, alpha: float, mu: float,
                       M: int) -> tuple[np.ndarray, np.ndarray]:
    """Split C_k^* P_k + P_k C_k - 2 mu P_k as A + sigma * B."""
    ops = build_operators(M)
    P = build_transform(k, alpha, M).matrix
    L1, L2 = ops.stream, ops.relax
    A = 1j * k * l * (P @ L1 - L1 @ P) - 2.0 * mu * P
    B = L2 @ P + P @ L2
    return A, B


def verify_inequality(k: int, l: float, sigma: float, cert: Certificate,
                      M: int) -> float:
    """Smallest eigenvalue of C_k^* P_k + P_k C_k - 2 mu P_k at size M.

    Nonnegative (up to a tolerance of 1e-10 times the matrix max-norm)
    exactly when the certificate holds for this (k, sigma, M).  The mode
    -k gives the complex conjugate matrix, hence the same spectrum.
    """
    if k == 0:
        raise DomainError("the certified inequality concerns modes k != 0 only")
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise UsageError(f"collision frequency must be positive, got {sigma}")
    A, B = _inequality_pieces(k, l, cert.alpha, cert.mu, M)
    S = A + sigma * B
    return float(np.linalg.eigvalsh(S)[0])


def verify_grid(cert: Certificate, k_values, sigma_values, M: int,
                return_norms: bool = False):
    """Minimum inequality eigenvalues on a (k, sigma) grid, shape (len(k), len(sigma)).

    Exploits that the matrix is affine in sigma: one assembly per k, one
    batched Hermitian eigensolve per k over all sigma values.  With
    return_norms=True also returns the per-point max-norm of the matrix,
    the natural scale for an eigenvalue tolerance.
    """
    k_values = [int(k) for k in k_values]
    sigmas = np.asarray(sigma_values, dtype=float)
    if np.any(sigmas <= 0.0):
        raise UsageError("collision frequencies must be positive")
    out = np.empty((len(k_values), sigmas.shape[0]))
    norms = np.empty_like(out)
    for row, k in enumerate(k_values):
        A, B = _inequality_pieces(k, cert.l, cert.alpha, cert.mu, M)
        stack = A[None, :, :] + sigmas[:, None, None] * B[None, :, :]
        out[row] = np.linalg.eigvalsh(stack)[:, 0]
        norms[row] = np.abs(stack).max(axis=(1, 2))
    if return_norms:
        return out, norms
    return out
