"""Iteration loop: direction, Wolfe line search, retraction update, memory.

Every accepted step satisfies both transported Wolfe predicates, every
iterate stays on the manifold (the retraction is the only update path), and
the run is bit-deterministic for a fixed (instance, x0, config) triple.
Failures never raise out of ``solve``; they terminate the run with a recorded
reason.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .directions import (
    DEFAULT_NU_HAT,
    CgScalars,
    DirectionKind,
    PhiMode,
    StepMemory,
    ZMode,
    broyden_direction,
    cg_beta,
    cg_direction,
    compute_z,
    schedule_params,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    DegenerateStepError,
    DegenerateTransportError,
    DegenerateZError,
    LineSearchFailedError,
)
from .linesearch import LineSearchConfig, search_step
from .manifolds import (
    Point,
    Tangent,
    TransportKind,
    inner,
    norm,
    scaling_sigma,
    transport_step,
    transport_vector,
)
from .problems import ProblemInstance

_DESCENT_GUARD = 1e-14


def check_stop(g: Tangent, tol: float) -> bool:
    """Gradient-norm stopping rule, strict inequality."""
    return norm(g) < tol


class FailureReason(Enum):
    LINE_SEARCH_FAILED = "line_search_failed"
    MAX_ITERS = "max_iters"
    DEGENERATE_STEP = "degenerate_step"


_TRANSPORT_CODES = {
    TransportKind.DIFFERENTIATED_RETRACTION: "dr",
    TransportKind.PROJECTION: "proj",
    TransportKind.INVERSE_RETRACTION: "invret",
}
_TRANSPORT_FROM_CODE = {v: k for k, v in _TRANSPORT_CODES.items()}
_Z_CODES = {ZMode.LI_FUKUSHIMA: "lf", ZMode.POWELL: "powell"}
_Z_FROM_CODE = {v: k for k, v in _Z_CODES.items()}


@dataclass(frozen=True)
class SolverConfig:
    """All algorithmic choices for one run."""

    direction: DirectionKind = DirectionKind.BROYDEN
    transport: TransportKind = TransportKind.DIFFERENTIATED_RETRACTION
    phi_mode: PhiMode = PhiMode.BFGS
    z_mode: ZMode = ZMode.LI_FUKUSHIMA
    xi: float = 1.0
    nu_hat: Optional[float] = None
    hz_mu: float = 2.0
    preconvex_mu_reciprocal: bool = False
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    tol: float = 1e-6
    max_iters: int = 10000
    record_trace: bool = False

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ConfigError("tol must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if not 0.0 <= self.xi <= 1.0:
            raise ConfigError("xi must lie in [0, 1]")
        if not self.hz_mu > 0.25:
            raise ConfigError("hz_mu must exceed 1/4")

    def resolved_nu_hat(self) -> float:
        return self.nu_hat if self.nu_hat is not None else DEFAULT_NU_HAT[self.z_mode]

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "transport": self.transport.value,
            "phi_mode": self.phi_mode.value,
            "z_mode": self.z_mode.value,
            "xi": self.xi,
            "nu_hat": self.nu_hat,
            "hz_mu": self.hz_mu,
            "preconvex_mu_reciprocal": self.preconvex_mu_reciprocal,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "line_search": {
                "c1": self.line_search.c1,
                "c2": self.line_search.c2,
                "alpha_init": self.line_search.alpha_init,
                "alpha_max": self.line_search.alpha_max,
                "max_ls_evals": self.line_search.max_evals,
            },
        }

    @classmethod
    def from_dict(cls, data: dict, base: "SolverConfig | None" = None) -> "SolverConfig":
        base = base if base is not None else cls()
        known = {
            "direction",
            "transport",
            "phi_mode",
            "z_mode",
            "xi",
            "nu_hat",
            "hz_mu",
            "preconvex_mu_reciprocal",
            "tol",
            "max_iters",
            "record_trace",
            "line_search",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown solver config keys: {sorted(unknown)}")
        kwargs = {}
        try:
            if "direction" in data:
                kwargs["direction"] = DirectionKind(data["direction"])
            if "transport" in data:
                code = data["transport"]
                kwargs["transport"] = (
                    _TRANSPORT_FROM_CODE[code]
                    if code in _TRANSPORT_FROM_CODE
                    else TransportKind(code)
                )
            if "phi_mode" in data:
                kwargs["phi_mode"] = PhiMode(data["phi_mode"])
            if "z_mode" in data:
                code = data["z_mode"]
                kwargs["z_mode"] = _Z_FROM_CODE[code] if code in _Z_FROM_CODE else ZMode(code)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for key in ("xi", "nu_hat", "hz_mu", "tol"):
            if key in data and data[key] is not None:
                kwargs[key] = float(data[key])
        if "nu_hat" in data and data["nu_hat"] is None:
            kwargs["nu_hat"] = None
        if "preconvex_mu_reciprocal" in data:
            kwargs["preconvex_mu_reciprocal"] = bool(data["preconvex_mu_reciprocal"])
        if "max_iters" in data:
            kwargs["max_iters"] = int(data["max_iters"])
        if "record_trace" in data:
            kwargs["record_trace"] = bool(data["record_trace"])
        if "line_search" in data:
            ls = dict(data["line_search"])
            if "max_ls_evals" in ls:
                ls["max_evals"] = int(ls.pop("max_ls_evals"))
            ls_known = {"c1", "c2", "alpha_init", "alpha_max", "max_evals"}
            bad = set(ls) - ls_known
            if bad:
                raise ConfigError(f"unknown line_search keys: {sorted(bad)}")
            merged = dataclasses.asdict(base.line_search)
            merged.update(ls)
            kwargs["line_search"] = LineSearchConfig(**merged)
        return dataclasses.replace(base, **kwargs)


def solver_id(cfg: SolverConfig) -> str:
    """Stable string naming the algorithmic choices, e.g. broyden_bfgs_lf_xi0.1_dr."""
    t = _TRANSPORT_CODES[cfg.transport]
    if cfg.direction is DirectionKind.BROYDEN:
        return f"broyden_{cfg.phi_mode.value}_{_Z_CODES[cfg.z_mode]}_xi{cfg.xi:g}_{t}"
    return f"{cfg.direction.value}_{t}"


def config_from_id(sid: str, base: SolverConfig | None = None) -> SolverConfig:
    """Parse a solver id back into a config (other fields taken from ``base``)."""
    base = base if base is not None else SolverConfig()
    parts = sid.split("_")
    try:
        if parts[0] == "broyden":
            if len(parts) != 5:
                raise ConfigError(f"malformed broyden solver id: {sid!r}")
            phi_mode = PhiMode(parts[1])
            z_mode = _Z_FROM_CODE[parts[2]]
            if not parts[3].startswith("xi"):
                raise ConfigError(f"missing xi field in solver id: {sid!r}")
            xi = float(parts[3][2:])
            transport = _TRANSPORT_FROM_CODE[parts[4]]
            return dataclasses.replace(
                base,
                direction=DirectionKind.BROYDEN,
                phi_mode=phi_mode,
                z_mode=z_mode,
                xi=xi,
                transport=transport,
            )
        direction = DirectionKind(parts[0])
        if len(parts) == 1:
            transport = TransportKind.DIFFERENTIATED_RETRACTION
        elif len(parts) == 2:
            transport = _TRANSPORT_FROM_CODE[parts[1]]
        else:
            raise ConfigError(f"malformed solver id: {sid!r}")
        return dataclasses.replace(base, direction=direction, transport=transport)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot parse solver id {sid!r}: {exc}") from exc


@dataclass
class IterationTrace:
    """One trace row; the terminal row carries nan step fields."""

    iteration: int
    f: float
    gnorm: float
    alpha: float
    g_dot_eta: float
    time_ms: float
    point: Optional[Point] = None
    direction: Optional[Tangent] = None

    CSV_HEADER = "iter,f,gnorm,alpha,g_dot_eta,time_ms"

    def csv_row(self) -> str:
        return (
            f"{self.iteration},{self.f:.17g},{self.gnorm:.17g},"
            f"{self.alpha:.17g},{self.g_dot_eta:.17g},{self.time_ms:.3f}"
        )

    def scalars(self) -> dict:
        return {
            "iter": self.iteration,
            "f": self.f,
            "gnorm": self.gnorm,
            "alpha": self.alpha,
            "g_dot_eta": self.g_dot_eta,
            "time_ms": self.time_ms,
        }


@dataclass
class RunDiagnostics:
    """Cheap per-iteration scalars recorded on every run.

    gnorm/g_dot_eta/eta_norm/alpha have one entry per accepted step;
    z_margin/z_ratio one entry per memory build; gamma/tau/phi one entry per
    Broyden direction actually computed from memory.
    """

    gnorm: list[float] = field(default_factory=list)
    g_dot_eta: list[float] = field(default_factory=list)
    eta_norm: list[float] = field(default_factory=list)
    alpha: list[float] = field(default_factory=list)
    gamma: list[float] = field(default_factory=list)
    tau: list[float] = field(default_factory=list)
    phi: list[float] = field(default_factory=list)
    z_margin: list[float] = field(default_factory=list)
    z_ratio: list[float] = field(default_factory=list)
    restarts: int = 0


@dataclass
class RunResult:
    converged: bool
    iters: int
    final_f: float
    final_gnorm: float
    elapsed: float
    trace: list[IterationTrace]
    failure_reason: Optional[FailureReason]
    diagnostics: RunDiagnostics

    def to_dict(self, include_trace: bool = True) -> dict:
        out = {
            "converged": self.converged,
            "iters": self.iters,
            "final_f": self.final_f,
            "final_gnorm": self.final_gnorm,
            "elapsed": self.elapsed,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
        }
        if include_trace and self.trace:
            out["trace"] = [row.scalars() for row in self.trace]
        return out

    def to_json(self, include_trace: bool = True) -> str:
        return json.dumps(self.to_dict(include_trace=include_trace))


def _direction(g: Tangent, memory: Optional[StepMemory], cfg: SolverConfig,
               diag: RunDiagnostics) -> Tangent:
    if memory is None:
        return -g
    if cfg.direction is DirectionKind.BROYDEN:
        params = schedule_params(
            memory.s,
            memory.z,
            cfg.phi_mode,
            cfg.xi,
            preconvex_mu_reciprocal=cfg.preconvex_mu_reciprocal,
        )
        diag.gamma.append(params.gamma)
        diag.tau.append(params.tau)
        diag.phi.append(params.phi)
        return broyden_direction(g, memory.s, memory.z, params)
    x = g.point
    scalars = CgScalars(
        g_norm2=inner(x, g, g),
        g_prev_norm2=memory.g_prev_norm * memory.g_prev_norm,
        g_dot_t_eta=inner(x, g, memory.t_eta),
        g_dot_t_g=inner(x, g, memory.t_g),
        y_norm2=inner(x, memory.y, memory.y),
        g_prev_dot_eta=memory.g_prev_dot_eta,
        sigma=memory.sigma,
        hz_mu=cfg.hz_mu,
    )
    beta = cg_beta(cfg.direction, scalars)
    if beta is None:
        return -g
    return cg_direction(g, beta, memory.sigma, memory.t_eta)


def _build_memory(x, g, gnorm, gde, eta, ev, cfg, nu_hat, diag) -> StepMemory:
    kind = cfg.transport
    s = transport_step(kind, x, eta, ev.alpha, destination=ev.x_new)
    t_g = transport_vector(kind, x, eta, ev.alpha, g, destination=ev.x_new)
    y = ev.g_new - t_g
    z = compute_z(cfg.z_mode, s, y, nu_hat)
    ss = inner(s.point, s, s)
    sz = inner(s.point, s, z)
    zz = inner(z.point, z, z)
    if sz <= 0.0:
        raise DegenerateZError("curvature pair <s, z> is not positive")
    if zz == 0.0:
        raise DegenerateZError("z has zero norm")
    diag.z_margin.append(sz - nu_hat * ss)
    diag.z_ratio.append(math.sqrt(zz / ss))
    eta_norm = norm(eta)
    sigma = scaling_sigma(ev.x_new, eta_norm, ev.t_eta)
    return StepMemory(
        s=s,
        y=y,
        z=z,
        t_eta=ev.t_eta,
        t_g=t_g,
        sigma=sigma,
        g_prev_norm=gnorm,
        g_prev_dot_eta=gde,
        eta_prev_norm=eta_norm,
    )


def solve(
    problem: ProblemInstance,
    x0: Point,
    cfg: SolverConfig,
    callback: Optional[Callable[[IterationTrace], None]] = None,
) -> RunResult:
    """Run the iteration loop from x0 until the stopping rule or a failure."""
    if x0.manifold != problem.manifold:
        raise ContractViolationError(
            f"x0 on {x0.manifold} but the problem lives on {problem.manifold}"
        )
    nu_hat = cfg.resolved_nu_hat()
    t_start = time.perf_counter()

    def now_ms() -> float:
        return (time.perf_counter() - t_start) * 1e3

    diag = RunDiagnostics()
    trace: list[IterationTrace] = []
    x = x0
    f = problem.cost(x)
    g = problem.grad(x)
    memory: Optional[StepMemory] = None
    k = 0
    converged = False
    failure: Optional[FailureReason] = None

    while True:
        gnorm = norm(g)
        if check_stop(g, cfg.tol):
            converged = True
            break
        if k >= cfg.max_iters:
            failure = FailureReason.MAX_ITERS
            break
        eta = _direction(g, memory, cfg, diag)
        gde = inner(x, g, eta)
        if gde >= -_DESCENT_GUARD * gnorm * gnorm:
            # safeguard: fall back to steepest descent, drop stale memory
            eta = -g
            gde = inner(x, g, eta)
            memory = None
            diag.restarts += 1
        diag.gnorm.append(gnorm)
        diag.g_dot_eta.append(gde)
        diag.eta_norm.append(norm(eta))
        try:
            ev = search_step(
                problem, x, eta, cfg.line_search, cfg.transport, f0=f, g0=g
            )
        except LineSearchFailedError:
            failure = FailureReason.LINE_SEARCH_FAILED
            break
        diag.alpha.append(ev.alpha)
        row = IterationTrace(
            iteration=k,
            f=f,
            gnorm=gnorm,
            alpha=ev.alpha,
            g_dot_eta=gde,
            time_ms=now_ms(),
            point=x if cfg.record_trace else None,
            direction=eta if cfg.record_trace else None,
        )
        if cfg.record_trace:
            trace.append(row)
        if callback is not None:
            callback(row)
        try:
            memory = _build_memory(x, g, gnorm, gde, eta, ev, cfg, nu_hat, diag)
        except (DegenerateStepError, DegenerateTransportError, DegenerateZError):
            x, f, g = ev.x_new, ev.f_new, ev.g_new
            k += 1
            failure = FailureReason.DEGENERATE_STEP
            break
        x, f, g = ev.x_new, ev.f_new, ev.g_new
        k += 1

    final_gnorm = norm(g)
    terminal = IterationTrace(
        iteration=k,
        f=f,
        gnorm=final_gnorm,
        alpha=math.nan,
        g_dot_eta=math.nan,
        time_ms=now_ms(),
        point=x if cfg.record_trace else None,
        direction=None,
    )
    if cfg.record_trace:
        trace.append(terminal)
    if callback is not None:
        callback(terminal)
    return RunResult(
        converged=converged,
        iters=k,
        final_f=f,
        final_gnorm=final_gnorm,
        elapsed=time.perf_counter() - t_start,
        trace=trace,
        failure_reason=failure,
        diagnostics=diag,
    )
