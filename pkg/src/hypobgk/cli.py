"""Command-line front end: certify, verify, simulate, derivatives, sweep.

All commands read a single JSON configuration file and write CSV files
into an output directory.  Exit codes: 0 on success, 1 when a certified
envelope or inequality check fails (a proven bound was violated, so
this is a correctness alarm), 2 for invalid input of any kind, 3 for
numerical failure.

Result rows share one fixed schema

    run_id,z,t,level,entropy,envelope,ratio,verdict

with floats printed to 17 significant digits so they round-trip exactly.
For the base system (simulate, sweep) the entropy column holds the
twisted entropy and the envelope column exp(-2 rate t) E(0); for
derivative levels both columns hold the square-root entropy scale the
certified bounds live on.  Runs are deterministic: the same
configuration produces byte-identical CSV files, and random initial
data comes from a seeded generator whose seed is recorded in a header
comment of each CSV it influenced.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    affine_derivative_envelope,
    affine_uniform_envelope,
    check_envelope,
    entropy_envelope,
    entropy_series,
    taylor_derivative_envelope,
)
from .errors import (
    CertificateError,
    ConfigError,
    DataError,
    DomainError,
    HypoBGKError,
    InvalidModelError,
    NotCertifiableError,
    NumericError,
    UsageError,
)
from .lyapunov import Certificate, certify, verify_grid
from .models import (
    CollisionFrequencyModel,
    InitialDataSpec,
    project_initial,
    taylor_bound,
)
from .propagation import ExactPropagator
from .spectral import ModeLattice

__all__ = ["RunConfig", "ResultRow", "load_config", "dump_config", "main",
           "cmd_certify", "cmd_verify", "cmd_simulate", "cmd_derivatives",
           "cmd_sweep"]

RESULT_HEADER = ("run_id", "z", "t", "level", "entropy", "envelope",
                 "ratio", "verdict")
SUMMARY_HEADER = ("run_id", "L", "sigma0", "z", "alpha", "alpha_max",
                  "lambda_min", "mu", "lambda", "ctilde", "worst_ratio",
                  "verdict")
VERIFY_HEADER = ("k", "sigma", "min_eigenvalue", "threshold", "verdict")

EXIT_OK = 0
EXIT_ALARM = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3


def _fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double exactly."""
    return format(float(x), ".17g")


@dataclasses.dataclass(frozen=True)
class ResultRow:
    """One line of the fixed result schema."""

    run_id: str
    z: float
    t: float
    level: int
    entropy: float
    envelope: float
    ratio: float
    verdict: str

    def as_csv(self) -> list[str]:
        return [self.run_id, _fmt(self.z), _fmt(self.t), str(self.level),
                _fmt(self.entropy), _fmt(self.envelope), _fmt(self.ratio),
                self.verdict]


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated run configuration shared by all commands."""

    run_id: str
    lattice: ModeLattice
    levels: int
    model: CollisionFrequencyModel
    times: tuple[float, ...]
    z_points: tuple[float, ...]
    alpha_strategy: object
    sigma_grid_resolution: int
    initial: InitialDataSpec
    out_dir: Path
    envelope_tol: float
    eig_tol_factor: float
    verify_k_max: int
    verify_sigma_points: int
    sweep_L_values: tuple[float, ...]
    sweep_sigma0_values: tuple[float, ...]
    threads: int
    seed_used: int | None


def load_config(path: str | Path, out_override: str | None = None,
                seed_override: int | None = None,
                threads: int = 1) -> RunConfig:
    """Read and validate a JSON config; aggregate all problems into one error."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    problems: list[str] = []

    def fail(msg: str) -> None:
        problems.append(msg)

    run_id = raw.get("run_id", "run")
    if not isinstance(run_id, str) or not run_id:
        fail("run_id must be a nonempty string")
        run_id = "run"

    domain = raw.get("domain", {})
    lattice = None
    L = domain.get("L", 2.0 * math.pi)
    K = domain.get("K", 4)
    M = domain.get("M", 20)
    N = domain.get("N", 0)
    try:
        lattice = ModeLattice(K=int(K), L=float(L), M=int(M))
    except (HypoBGKError, ValueError, TypeError) as exc:
        fail(f"domain: {exc}")
    if not isinstance(N, int) or N < 0:
        fail(f"domain: derivative order N must be an integer >= 0, got {N}")
        N = 0

    model = None
    mspec = raw.get("sigma", {})
    try:
        model = _parse_model(mspec)
    except (HypoBGKError, ValueError, TypeError, KeyError) as exc:
        fail(f"sigma: {exc}")

    times: tuple[float, ...] = ()
    tspec = raw.get("time_grid", {"start": 0.0, "stop": 10.0, "num": 21})
    try:
        times = _parse_time_grid(tspec)
    except (HypoBGKError, ValueError, TypeError) as exc:
        fail(f"time_grid: {exc}")

    z_points: tuple[float, ...] = ()
    if model is not None:
        try:
            z_points = _parse_z_grid(raw.get("z_grid", {"num": 1}), model)
        except (HypoBGKError, ValueError, TypeError) as exc:
            fail(f"z_grid: {exc}")

    alpha_strategy = raw.get("alpha_strategy", "optimize")
    if not isinstance(alpha_strategy, (str, int, float)):
        fail(f"alpha_strategy must be a number or strategy string, "
             f"got {alpha_strategy!r}")
        alpha_strategy = "optimize"

    resolution = raw.get("sigma_grid_resolution", 10_000)
    if not isinstance(resolution, int) or resolution < 2:
        fail(f"sigma_grid_resolution must be an integer >= 2, got {resolution}")
        resolution = 10_000

    initial = None
    seed_used: int | None = None
    try:
        initial, seed_used = _parse_initial(raw.get("initial_data",
                                                    {"type": "random", "seed": 0}),
                                            seed_override)
    except (HypoBGKError, ValueError, TypeError, KeyError) as exc:
        fail(f"initial_data: {exc}")

    tol = raw.get("tolerances", {})
    envelope_tol = tol.get("envelope", 1e-8)
    eig_tol_factor = tol.get("eig", 1e-10)
    if not (isinstance(envelope_tol, (int, float)) and envelope_tol > 0.0):
        fail(f"tolerances.envelope must be positive, got {envelope_tol}")
        envelope_tol = 1e-8
    if not (isinstance(eig_tol_factor, (int, float)) and eig_tol_factor > 0.0):
        fail(f"tolerances.eig must be positive, got {eig_tol_factor}")
        eig_tol_factor = 1e-10

    ver = raw.get("verify", {})
    verify_k_max = ver.get("k_max",
                           max(int(K), 1) if isinstance(K, int) else 4)
    verify_sigma_points = ver.get("sigma_points", 33)
    if not isinstance(verify_k_max, int) or verify_k_max < 1:
        fail(f"verify.k_max must be an integer >= 1, got {verify_k_max}")
        verify_k_max = 1
    if not isinstance(verify_sigma_points, int) or verify_sigma_points < 1:
        fail(f"verify.sigma_points must be an integer >= 1, "
             f"got {verify_sigma_points}")
        verify_sigma_points = 33

    sweep = raw.get("sweep", {})
    sweep_L = tuple(float(x) for x in sweep.get("L_values", [float(L)])) \
        if isinstance(sweep.get("L_values", [float(L)]), list) else ()
    sweep_s0 = sweep.get("sigma0_values")
    if sweep_s0 is None:
        sweep_s0_t = (model.params[0],) if model is not None else ()
    elif isinstance(sweep_s0, list):
        sweep_s0_t = tuple(float(x) for x in sweep_s0)
    else:
        fail("sweep.sigma0_values must be a list of numbers")
        sweep_s0_t = ()
    if not sweep_L:
        fail("sweep.L_values must be a nonempty list of numbers")
        sweep_L = (float(L),)
    # pre-validate every sweep combination so failures surface before any run
    if model is not None:
        for s0 in sweep_s0_t:
            try:
                _with_offset(model, s0)
            except HypoBGKError as exc:
                fail(f"sweep: sigma0={s0} gives an invalid model: {exc}")
        for Lv in sweep_L:
            if not (Lv > 0.0 and math.isfinite(Lv)):
                fail(f"sweep: period L={Lv} must be positive and finite")

    out_dir = Path(out_override if out_override is not None
                   else raw.get("output", {}).get("dir", "out"))
    if not isinstance(threads, int) or threads < 1:
        fail(f"threads must be an integer >= 1, got {threads}")
        threads = 1

    if problems:
        raise ConfigError("invalid configuration:\n" +
                          "\n".join(f"  - {p}" for p in problems))
    assert lattice is not None and model is not None and initial is not None
    return RunConfig(
        run_id=run_id,
        lattice=lattice,
        levels=N,
        model=model,
        times=times,
        z_points=z_points,
        alpha_strategy=alpha_strategy,
        sigma_grid_resolution=resolution,
        initial=initial,
        out_dir=out_dir,
        envelope_tol=float(envelope_tol),
        eig_tol_factor=float(eig_tol_factor),
        verify_k_max=verify_k_max,
        verify_sigma_points=verify_sigma_points,
        sweep_L_values=sweep_L,
        sweep_sigma0_values=sweep_s0_t,
        threads=threads,
        seed_used=seed_used,
    )


def dump_config(cfg: RunConfig) -> dict:
    """Inverse of load_config: a JSON-ready dict that reparses to cfg."""
    model = cfg.model
    mspec: dict = {"variant": model.variant,
                   "z_domain": [model.z_lo, model.z_hi]}
    if model.variant == "constant":
        mspec["sigma0"] = model.params[0]
    elif model.variant == "affine":
        mspec["sigma0"], mspec["c1"] = model.params
    elif model.variant == "trig":
        mspec["sigma0"], mspec["eps"], mspec["omega"] = model.params
    else:
        mspec["coeffs"] = list(model.params)
    init = cfg.initial
    ispec: dict = {"type": init.kind, "normalization": init.normalization}
    if init.kind == "coefficients":
        ispec["entries"] = [{"level": n, "k": k, "m": m, "re": c.real,
                             "im": c.imag} for n, k, m, c in init.entries]
    elif init.kind == "separable":
        ispec["fourier"] = [{"k": k, "re": c.real, "im": c.imag}
                            for k, c in init.fourier]
        ispec["velocity_poly"] = list(init.velocity_poly)
    else:
        ispec.update(seed=init.seed, scale=init.scale, fill=init.fill)
    return {
        "run_id": cfg.run_id,
        "domain": {"L": cfg.lattice.L, "K": cfg.lattice.K, "M": cfg.lattice.M,
                   "N": cfg.levels},
        "sigma": mspec,
        "time_grid": {"times": list(cfg.times)},
        "z_grid": {"points": list(cfg.z_points)},
        "alpha_strategy": cfg.alpha_strategy,
        "sigma_grid_resolution": cfg.sigma_grid_resolution,
        "initial_data": ispec,
        "tolerances": {"envelope": cfg.envelope_tol, "eig": cfg.eig_tol_factor},
        "verify": {"k_max": cfg.verify_k_max,
                   "sigma_points": cfg.verify_sigma_points},
        "sweep": {"L_values": list(cfg.sweep_L_values),
                  "sigma0_values": list(cfg.sweep_sigma0_values)},
        "output": {"dir": str(cfg.out_dir)},
    }


def _parse_model(mspec: dict) -> CollisionFrequencyModel:
    if not isinstance(mspec, dict):
        raise ConfigError("sigma section must be an object")
    variant = mspec.get("variant", "constant")
    dom = mspec.get("z_domain", [-1.0, 1.0])
    if (not isinstance(dom, list)) or len(dom) != 2:
        raise ConfigError(f"z_domain must be [lo, hi], got {dom!r}")
    z_lo, z_hi = float(dom[0]), float(dom[1])
    if variant == "constant":
        params = (float(mspec.get("sigma0", 1.0)),)
    elif variant == "affine":
        params = (float(mspec.get("sigma0", 1.0)), float(mspec.get("c1", 0.0)))
    elif variant == "trig":
        params = (float(mspec.get("sigma0", 1.0)), float(mspec.get("eps", 0.0)),
                  float(mspec.get("omega", 1.0)))
    elif variant == "polynomial":
        params = tuple(float(c) for c in mspec.get("coeffs", [1.0]))
    else:
        raise ConfigError(f"unknown sigma variant {variant!r}")
    return CollisionFrequencyModel(variant, params, z_lo, z_hi)


def _with_offset(model: CollisionFrequencyModel,
                 sigma0: float) -> CollisionFrequencyModel:
    """Copy of the model with its constant offset replaced."""
    params = (float(sigma0),) + model.params[1:]
    return CollisionFrequencyModel(model.variant, params, model.z_lo, model.z_hi)


def _parse_time_grid(tspec) -> tuple[float, ...]:
    if isinstance(tspec, dict) and "times" in tspec:
        times = [float(t) for t in tspec["times"]]
    elif isinstance(tspec, dict):
        start = float(tspec.get("start", 0.0))
        stop = float(tspec.get("stop", 10.0))
        num = int(tspec.get("num", 21))
        if num < 1:
            raise ConfigError(f"time grid needs num >= 1, got {num}")
        if stop < start:
            raise ConfigError(f"time grid needs stop >= start, got [{start}, {stop}]")
        times = list(np.linspace(start, stop, num))
    else:
        raise ConfigError("time_grid must be an object")
    if not times:
        raise ConfigError("time grid is empty")
    if any(t < 0.0 or not math.isfinite(t) for t in times):
        raise ConfigError("sample times must be finite and >= 0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ConfigError("sample times must be nondecreasing")
    return tuple(times)


def _parse_z_grid(zspec, model: CollisionFrequencyModel) -> tuple[float, ...]:
    if isinstance(zspec, dict) and "points" in zspec:
        pts = [float(z) for z in zspec["points"]]
    elif isinstance(zspec, dict):
        num = int(zspec.get("num", 1))
        if num < 1:
            raise ConfigError(f"z grid needs num >= 1, got {num}")
        if num == 1:
            pts = [0.5 * (model.z_lo + model.z_hi)]
        else:
            pts = list(np.linspace(model.z_lo, model.z_hi, num))
    else:
        raise ConfigError("z_grid must be an object")
    for z in pts:
        if not model.z_lo <= z <= model.z_hi:
            raise DomainError(
                f"z={z} outside the model domain [{model.z_lo}, {model.z_hi}]")
    return tuple(pts)


def _parse_initial(ispec: dict, seed_override: int | None
                   ) -> tuple[InitialDataSpec, int | None]:
    if not isinstance(ispec, dict):
        raise ConfigError("initial_data section must be an object")
    kind = ispec.get("type", "random")
    normalization = ispec.get("normalization", "enforce")
    seed_used: int | None = None
    if kind == "coefficients":
        entries = []
        for e in ispec.get("entries", []):
            entries.append((int(e.get("level", 0)), int(e["k"]), int(e["m"]),
                            complex(float(e.get("re", 0.0)),
                                    float(e.get("im", 0.0)))))
        spec = InitialDataSpec(kind="coefficients", entries=tuple(entries),
                               normalization=normalization)
    elif kind == "separable":
        fourier = tuple((int(f["k"]),
                         complex(float(f.get("re", 0.0)), float(f.get("im", 0.0))))
                        for f in ispec.get("fourier", []))
        poly = tuple(float(c) for c in ispec.get("velocity_poly", []))
        spec = InitialDataSpec(kind="separable", fourier=fourier,
                               velocity_poly=poly, normalization=normalization)
    elif kind == "random":
        seed = int(ispec.get("seed", 0)) if seed_override is None else seed_override
        if seed < 0:
            raise ConfigError(f"seed must be >= 0, got {seed}")
        spec = InitialDataSpec(kind="random", seed=seed,
                               scale=float(ispec.get("scale", 1.0)),
                               fill=ispec.get("fill", "all"),
                               normalization=normalization)
        seed_used = seed
    else:
        raise ConfigError(f"unknown initial_data type {kind!r}")
    return spec, seed_used


def _write_csv(path: Path, header, rows, seed: int | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if seed is not None:
            fh.write(f"# seed={seed}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _certificate_rows(cert: Certificate) -> list[list[str]]:
    rows = [
        ["L", _fmt(cert.L)],
        ["l", _fmt(cert.l)],
        ["sigma_min", _fmt(cert.sigma_min)],
        ["sigma_max", _fmt(cert.sigma_max)],
        ["alpha", _fmt(cert.alpha)],
        ["alpha_max", _fmt(cert.alpha_max)],
        ["lambda_min", _fmt(cert.lambda_min)],
        ["mu", _fmt(cert.mu)],
        ["lambda", _fmt(cert.decay_rate)],
        ["ctilde", _fmt(cert.ctilde)],
        ["sigma_grid_resolution", str(cert.sigma_grid_resolution)],
    ]
    return rows


def _certify_config(cfg: RunConfig, L: float | None = None,
                    model: CollisionFrequencyModel | None = None) -> Certificate:
    model = cfg.model if model is None else model
    return certify(cfg.lattice.L if L is None else L,
                   model.sigma_min, model.sigma_max,
                   alpha_strategy=cfg.alpha_strategy,
                   sigma_grid_resolution=cfg.sigma_grid_resolution)


def cmd_certify(cfg: RunConfig) -> int:
    """Print the certificate table and write certificate.csv."""
    cert = _certify_config(cfg)
    lines = [
        ("alpha_max", cert.alpha_max),
        ("alpha", cert.alpha),
        ("lambda_min", cert.lambda_min),
        ("mu", cert.mu),
        ("lambda", cert.decay_rate),
        ("ctilde", cert.ctilde),
    ]
    try:
        chat = cert.ctilde * taylor_bound(cfg.model)
        lines.append(("chat", chat))
    except NotCertifiableError:
        chat = None
    width = max(len(name) for name, _ in lines)
    for name, value in lines:
        print(f"{name:<{width}} = {value:.12g}")
    rows = _certificate_rows(cert)
    if chat is not None:
        rows.append(["chat", _fmt(chat)])
    _write_csv(cfg.out_dir / "certificate.csv", ("name", "value"), rows)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, inflate_mu: float = 1.0) -> int:
    """Re-check the certified matrix inequality on a (k, sigma) grid."""
    cert = _certify_config(cfg)
    if inflate_mu != 1.0:
        cert = dataclasses.replace(cert, mu=cert.mu * inflate_mu)
    ks = list(range(1, cfg.verify_k_max + 1))
    if cfg.verify_sigma_points == 1:
        sigmas = np.array([cert.sigma_min])
    else:
        sigmas = np.linspace(cert.sigma_min, cert.sigma_max,
                             cfg.verify_sigma_points)
    mins, norms = verify_grid(cert, ks, sigmas, cfg.lattice.M,
                              return_norms=True)
    thresholds = -cfg.eig_tol_factor * norms
    ok = mins >= thresholds
    rows = []
    for i, k in enumerate(ks):
        for j, s in enumerate(sigmas):
            rows.append([str(k), _fmt(s), _fmt(mins[i, j]),
                         _fmt(thresholds[i, j]),
                         "pass" if ok[i, j] else "fail"])
    _write_csv(cfg.out_dir / "verify.csv", VERIFY_HEADER, rows)
    n_fail = int(np.size(ok) - np.count_nonzero(ok))
    if n_fail:
        bad = np.argwhere(~ok)
        k_bad, s_bad = bad[0]
        print(f"FAIL: {n_fail}/{ok.size} grid points violate the inequality; "
              f"first at k={ks[k_bad]}, sigma={sigmas[s_bad]:.12g} "
              f"(min eig {mins[k_bad, s_bad]:.6g})")
        return EXIT_ALARM
    print(f"pass: {ok.size} grid points "
          f"(k up to {cfg.verify_k_max}, {len(sigmas)} sigma values, "
          f"M={cfg.lattice.M}), worst margin {float(mins.min()):.6g}")
    return EXIT_OK


def _simulate_one(cfg: RunConfig, cert: Certificate,
                  model: CollisionFrequencyModel, lattice: ModeLattice,
                  z: float) -> tuple[list[ResultRow], float]:
    """Level-0 envelope check along one z trajectory."""
    state = project_initial(cfg.initial, lattice, levels=cfg.levels, z=z)
    prop = ExactPropagator(lattice, model, z, cfg.levels)
    snaps = prop.trajectory(state, cfg.times)
    E = entropy_series(snaps, 0, cert)
    env = entropy_envelope(float(E[0]), cert.decay_rate, cfg.times)
    report = check_envelope(cfg.times, E, env, level=0, tol=cfg.envelope_tol)
    rows = [
        ResultRow(cfg.run_id, z, t, 0, float(E[i]), float(env[i]),
                  float(report.ratio[i]),
                  "pass" if report.ratio[i] <= 1.0 + cfg.envelope_tol else "fail")
        for i, t in enumerate(cfg.times)
    ]
    return rows, report.max_ratio


def _summary_row(run_id: str, L: float, sigma0: float, z: float,
                 cert: Certificate, worst: float, tol: float) -> list[str]:
    return [run_id, _fmt(L), _fmt(sigma0), _fmt(z), _fmt(cert.alpha),
            _fmt(cert.alpha_max), _fmt(cert.lambda_min), _fmt(cert.mu),
            _fmt(cert.decay_rate), _fmt(cert.ctilde), _fmt(worst),
            "pass" if worst <= 1.0 + tol else "fail"]


def cmd_simulate(cfg: RunConfig) -> int:
    """Exact trajectories with the base decay envelope, one CSV per z."""
    cert = _certify_config(cfg)
    summary = []
    all_pass = True
    for i, z in enumerate(cfg.z_points):
        rows, worst = _simulate_one(cfg, cert, cfg.model, cfg.lattice, z)
        _write_csv(cfg.out_dir / f"{cfg.run_id}_z{i:03d}.csv", RESULT_HEADER,
                   (r.as_csv() for r in rows), seed=cfg.seed_used)
        summary.append(_summary_row(cfg.run_id, cfg.lattice.L,
                                    cfg.model.params[0], z, cert, worst,
                                    cfg.envelope_tol))
        all_pass &= worst <= 1.0 + cfg.envelope_tol
    _write_csv(cfg.out_dir / "summary.csv", SUMMARY_HEADER, summary,
               seed=cfg.seed_used)
    n = len(cfg.z_points)
    if not all_pass:
        print(f"FAIL: envelope violated on {n} z-sample run; see summary.csv")
        return EXIT_ALARM
    print(f"pass: {n} z-samples, {len(cfg.times)} times, "
          f"rate {cert.decay_rate:.12g}")
    return EXIT_OK


def _derivative_envelopes(cfg: RunConfig, cert: Certificate,
                          sqrt0: np.ndarray, H: float, e0_ok: bool):
    """Envelope series per level and family for one z run.

    Returns a list of (family, level, envelope array).  The affine family
    uses the chain bound (and, when the uniform hypothesis holds, the
    uniform form); other variants use the Taylor-bound family.
    """
    times = np.asarray(cfg.times)
    out = []
    if cfg.model.variant in ("constant", "affine"):
        c1 = cfg.model.params[1] if cfg.model.variant == "affine" else 0.0
        coupling = abs(c1) * cert.ctilde
        for n in range(cfg.levels + 1):
            out.append(("chain", n,
                        affine_derivative_envelope(n, times, cert, coupling,
                                                   sqrt0)))
        if e0_ok:
            for n in range(cfg.levels + 1):
                out.append(("uniform", n,
                            affine_uniform_envelope(n, times, cert, coupling,
                                                    H)))
    else:
        C = taylor_bound(cfg.model)
        chat = cert.ctilde * C
        if not e0_ok:
            raise DataError(
                "the Taylor-bound envelope needs initial entropy E_0(0) <= 1; "
                "scale the initial data down")
        for n in range(cfg.levels + 1):
            out.append(("taylor", n,
                        taylor_derivative_envelope(n, times, cert, chat, H)))
    return out


def cmd_derivatives(cfg: RunConfig) -> int:
    """Check certified sensitivity envelopes for derivative levels 1..N."""
    if cfg.levels < 1:
        raise UsageError(
            "derivatives needs N >= 1 stored derivative levels; "
            "set domain.N in the config")
    cert = _certify_config(cfg)
    summary = []
    all_pass = True
    for i, z in enumerate(cfg.z_points):
        state = project_initial(cfg.initial, cfg.lattice, levels=cfg.levels, z=z)
        prop = ExactPropagator(cfg.lattice, cfg.model, z, cfg.levels)
        snaps = prop.trajectory(state, cfg.times)
        sqrt_series = np.stack([
            np.sqrt(entropy_series(snaps, n, cert))
            for n in range(cfg.levels + 1)
        ])
        sqrt0 = sqrt_series[:, 0]
        H = 0.0
        for n in range(1, cfg.levels + 1):
            if sqrt0[n] > 0.0:
                H = max(H, float(sqrt0[n]) ** (1.0 / n))
        H *= 1.0 + 1e-9
        e0_ok = sqrt0[0] <= 1.0 + 1e-9
        families = _derivative_envelopes(cfg, cert, sqrt0, H, e0_ok)
        worst = 0.0
        primary_rows, uniform_rows = [], []
        for family, n, env in families:
            report = check_envelope(cfg.times, sqrt_series[n], env, level=n,
                                    tol=cfg.envelope_tol)
            worst = max(worst, report.max_ratio)
            rows = uniform_rows if family == "uniform" else primary_rows
            rows.extend(
                ResultRow(cfg.run_id, z, t, n, float(sqrt_series[n, j]),
                          float(env[j]), float(report.ratio[j]),
                          "pass" if report.ratio[j] <= 1.0 + cfg.envelope_tol
                          else "fail")
                for j, t in enumerate(cfg.times))
        _write_csv(cfg.out_dir / f"{cfg.run_id}_z{i:03d}.csv", RESULT_HEADER,
                   (r.as_csv() for r in primary_rows), seed=cfg.seed_used)
        if uniform_rows:
            _write_csv(cfg.out_dir / f"{cfg.run_id}_z{i:03d}_uniform.csv",
                       RESULT_HEADER, (r.as_csv() for r in uniform_rows),
                       seed=cfg.seed_used)
        summary.append(_summary_row(cfg.run_id, cfg.lattice.L,
                                    cfg.model.params[0], z, cert, worst,
                                    cfg.envelope_tol))
        all_pass &= worst <= 1.0 + cfg.envelope_tol
    _write_csv(cfg.out_dir / "summary.csv", SUMMARY_HEADER, summary,
               seed=cfg.seed_used)
    if not all_pass:
        print("FAIL: derivative envelope violated; see summary.csv")
        return EXIT_ALARM
    print(f"pass: {len(cfg.z_points)} z-samples, levels 0..{cfg.levels}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    """Level-0 envelope runs over the (L, sigma0) grid, one file per point."""
    points = [(i, j, Lv, s0)
              for i, Lv in enumerate(cfg.sweep_L_values)
              for j, s0 in enumerate(cfg.sweep_sigma0_values)]

    def run_point(point):
        i, j, Lv, s0 = point
        model = _with_offset(cfg.model, s0)
        lattice = ModeLattice(K=cfg.lattice.K, L=Lv, M=cfg.lattice.M)
        cert = _certify_config(cfg, L=Lv, model=model)
        rows = []
        zworsts = []
        for z in cfg.z_points:
            z_rows, worst = _simulate_one(cfg, cert, model, lattice, z)
            rows.extend(z_rows)
            zworsts.append((z, worst))
        _write_csv(cfg.out_dir / f"sweep_L{i:03d}_s{j:03d}.csv", RESULT_HEADER,
                   (r.as_csv() for r in rows), seed=cfg.seed_used)
        return [(i, j, Lv, s0, z, cert, worst) for z, worst in zworsts]

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run_point, points))
    else:
        results = [run_point(p) for p in points]
    flat = [item for chunk in results for item in chunk]
    flat.sort(key=lambda item: (item[0], item[1], item[4]))
    summary = [_summary_row(cfg.run_id, Lv, s0, z, cert, worst,
                            cfg.envelope_tol)
               for _, _, Lv, s0, z, cert, worst in flat]
    _write_csv(cfg.out_dir / "summary.csv", SUMMARY_HEADER, summary,
               seed=cfg.seed_used)
    worst_all = max((item[6] for item in flat), default=0.0)
    if worst_all > 1.0 + cfg.envelope_tol:
        print("FAIL: envelope violated inside the sweep; see summary.csv")
        return EXIT_ALARM
    print(f"pass: {len(points)} sweep points x {len(cfg.z_points)} z-samples")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypobgk",
        description="certified decay and sensitivity envelopes for a linear "
                    "BGK model with uncertain collision frequency")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("certify", "compute and print the decay certificate"),
        ("verify", "re-check the certified matrix inequality on a grid"),
        ("simulate", "exact trajectories with the base decay envelope"),
        ("derivatives", "certified envelopes for z-derivative levels"),
        ("sweep", "envelope runs over an (L, sigma0) grid"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweep grids")
        p.add_argument("--seed", type=int, default=None,
                       help="override the random initial-data seed")
        if name == "verify":
            p.add_argument("--inflate-mu", type=float, default=1.0,
                           help="debug: scale mu before checking (values > 1 "
                                "should make the check fail)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, out_override=args.out,
                          seed_override=args.seed, threads=args.threads)
        if args.command == "certify":
            return cmd_certify(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, inflate_mu=args.inflate_mu)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "derivatives":
            return cmd_derivatives(cfg)
        return cmd_sweep(cfg)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UsageError, DomainError, InvalidModelError,
            NotCertifiableError, CertificateError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
