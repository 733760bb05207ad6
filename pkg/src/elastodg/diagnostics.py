"""Energy norms, errors against exact solutions and convergence rates."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .fem import DGSpace
from .ip import IpOperator, penalty_value
from .material import apply_compliance, apply_stiffness
from .mesh import FaceKind
from .mixed import MixedOperator, flux_parameters
from .traces import FaceTraceData, callable_traces, group_traces, jump_tensor, jump_vector, weighted_average

CSV_VERSION = "elastodg-csv/1"

IP_NORMS = ("energy", "augmented")


# -- discrete norms from assembled matrices ------------------------------------
def energy_norm_ip(op: IpOperator, u, u_t) -> float:
    """``sqrt(||rho^1/2 u_t||^2 + ||D^1/2 eps(u)||^2 + ||S_F^1/2 [[u]]||^2)``."""
    return math.sqrt(max(float(u_t @ (op.mass @ u_t)) + op.energy_seminorm_sq(u), 0.0))


def norm_A(op: IpOperator, u) -> float:
    """``sqrt(||D^1/2 eps(u)||^2 + sum_F {D}/h_F ||[[u]]||^2)``."""
    return math.sqrt(max(float(u @ (op.volume @ u) + u @ (op.jumps @ u)), 0.0))


def energy_norm_mdg(op: MixedOperator, u, u_t, sigma) -> float:
    return math.sqrt(max(sum(op.energy_terms(u, u_t, sigma).values()), 0.0))


# -- pointwise errors -----------------------------------------------------------
def _exact_traces(space, func, group, n1):
    return callable_traces(space, lambda x, _e: func(x), group, n1)


def _diff(a: FaceTraceData, b: FaceTraceData) -> FaceTraceData:
    return FaceTraceData(a.plus - b.plus, None if a.minus is None else a.minus - b.minus, a.normal)


def _face_sum(space, group, n1, coef, vals):
    w = space.face_tables(group, n1)[0].weights
    return float(np.einsum("f,fq,q->", np.broadcast_to(coef, vals.shape[:1]), vals, w))


def _volume_quantities(space, n1):
    tab = space.volume_table(n1)
    x = space.physical_points(np.arange(space.n_el), tab.points)
    return tab, x


def _field_or_zero(func, x, t, shape):
    return np.zeros(shape) if func is None else np.asarray(func(x, t))


def error_ip(op: IpOperator, u_h, u_t_h, exact=None, t: float = 0.0, norm: str = "energy",
             extra_points: int = 1) -> float:
    """Energy-norm error of an IP solution against an exact solution evaluated pointwise.

    ``norm="augmented"`` adds ``||h_F^1/2 {D eps(e)}_delta||`` over interior
    and Dirichlet faces.  With ``exact=None`` this is the norm of ``u_h``.
    """
    if norm not in IP_NORMS:
        raise ValueError(f"norm must be one of {IP_NORMS}")
    space, mat, cfg = op.space, op.material, op.cfg
    k, d = space.degree, space.dim
    n1 = k + 1 + extra_points
    tab, x = _volume_quantities(space, n1)
    ex_u = None if exact is None else exact.u
    ex_ut = None if exact is None else exact.u_t
    ex_eps = None if exact is None else exact.strain

    vt = space.eval_vector(u_t_h, tab) - _field_or_zero(ex_ut, x, t, x.shape)
    eps = space.eval_strain(u_h, tab) - _field_or_zero(ex_eps, x, t, x.shape + (d,))
    rho, lam, mu = (c[:, None] for c in (mat.rho, mat.lam, mat.mu))
    kin = np.einsum("eq,eqc,eqc,q->", rho, vt, vt, tab.weights)
    sig = apply_stiffness(eps, lam, mu)
    vol = np.einsum("eqij,eqij,q->", sig, eps, tab.weights)
    total = kin + vol

    for grp in space.mesh.groups(FaceKind.INTERIOR, FaceKind.DIRICHLET):
        utr = group_traces(space, u_h, grp, "vector", n1)
        if exact is not None:
            utr = _diff(utr, _exact_traces(space, lambda y: ex_u(y, t), grp, n1))
        J = jump_vector(utr)
        S = penalty_value(space.mesh.h_F[grp.ids], k, mat.group_scale(grp), cfg.c0)
        total += _face_sum(space, grp, n1, S, np.einsum("fqij,fqij->fq", J, J))
        if norm == "augmented":
            etr = group_traces(space, u_h, grp, "strain", n1)
            if exact is not None:
                etr = _diff(etr, _exact_traces(space, lambda y: ex_eps(y, t), grp, n1))
            sides = [etr.plus] + ([] if etr.minus is None else [etr.minus])
            elems = grp.elements
            Ds = [apply_stiffness(s, mat.lam[e][:, None], mat.mu[e][:, None])
                  for s, e in zip(sides, elems)]
            avg = weighted_average(FaceTraceData(Ds[0], Ds[1] if len(Ds) > 1 else None, etr.normal), cfg.delta)
            total += _face_sum(space, grp, n1, space.mesh.h_F[grp.ids], np.einsum("fqij,fqij->fq", avg, avg))
    return math.sqrt(max(total, 0.0))


def error_mixed(op: MixedOperator, u_h, u_t_h, sigma_h, exact=None, t: float = 0.0,
                augmented: bool = True, extra_points: int = 1) -> float:
    """MDG energy-norm error; the augmented term ``||c22^1/2 {e_sigma}_delta||`` over F^o u F^D."""
    space, mat, cfg = op.space, op.material, op.cfg
    k, d = space.degree, space.dim
    n1 = k + 1 + extra_points
    tab, x = _volume_quantities(space, n1)
    ex_u = None if exact is None else exact.u
    ex_s = None if exact is None else exact.stress

    vt = space.eval_vector(u_t_h, tab) - _field_or_zero(None if exact is None else exact.u_t, x, t, x.shape)
    es = space.eval_tensor(sigma_h, tab) - _field_or_zero(ex_s, x, t, x.shape + (d,))
    lam, mu = mat.lam[:, None], mat.mu[:, None]
    kin = np.einsum("e,eqc,eqc,q->", mat.rho, vt, vt, tab.weights)
    comp = np.einsum("eqij,eqij,q->", apply_compliance(es, lam, mu, d), es, tab.weights)
    total = kin + comp

    mesh = space.mesh
    for grp in mesh.face_groups:
        c11, c22 = flux_parameters(mesh.h_F[grp.ids], k, mat.group_scale(grp), cfg)
        if grp.kind in (FaceKind.INTERIOR, FaceKind.DIRICHLET) and cfg.c1_eff > 0:
            utr = group_traces(space, u_h, grp, "vector", n1)
            if exact is not None:
                utr = _diff(utr, _exact_traces(space, lambda y: ex_u(y, t), grp, n1))
            J = jump_vector(utr)
            total += _face_sum(space, grp, n1, c11, np.einsum("fqij,fqij->fq", J, J))
        if cfg.c2_eff == 0:
            continue
        str_ = group_traces(space, sigma_h, grp, "tensor", n1)
        if exact is not None:
            str_ = _diff(str_, _exact_traces(space, lambda y: ex_s(y, t), grp, n1))
        if grp.kind is FaceKind.INTERIOR:
            js = jump_tensor(str_)
            total += _face_sum(space, grp, n1, c22, np.einsum("fqi,fqi->fq", js, js))
        elif grp.kind is FaceKind.NEUMANN:
            sn = str_.plus @ str_.normal
            total += _face_sum(space, grp, n1, c22, np.einsum("fqi,fqi->fq", sn, sn))
        if augmented and grp.kind is not FaceKind.NEUMANN:
            avg = weighted_average(str_, cfg.delta)
            total += _face_sum(space, grp, n1, c22, np.einsum("fqij,fqij->fq", avg, avg))
    return math.sqrt(max(total, 0.0))


def error_vs_exact(op, u_h, u_t_h, exact=None, t: float = 0.0, sigma_h=None, norm: str = "energy") -> float:
    """Dispatch on the operator type; ``norm`` is ``energy`` or ``augmented``."""
    if isinstance(op, MixedOperator):
        if sigma_h is None:
            raise ValueError("mixed errors need the stress field")
        return error_mixed(op, u_h, u_t_h, sigma_h, exact, t, augmented=(norm == "augmented"))
    return error_ip(op, u_h, u_t_h, exact, t, norm)


# -- convergence rates ---------------------------------------------------------
@dataclass
class RateTable:
    k: int
    method: str
    h: list
    errors: list
    rates: list = field(default_factory=list)
    slope: float | None = None
    flags: list = field(default_factory=list)  # per-level note, e.g. "blow-up at step 12"

    def rows(self):
        for i, (h, e) in enumerate(zip(self.h, self.errors)):
            rate = self.rates[i - 1] if i > 0 and i - 1 < len(self.rates) else None
            yield dict(k=self.k, method=self.method, h=h, error=e, rate=rate)


def pairwise_rates(h, e) -> list:
    return [math.log(e[i] / e[i + 1]) / math.log(h[i] / h[i + 1]) for i in range(len(h) - 1)]


def check_halving(h, rtol: float = 1e-9) -> None:
    for a, b in zip(h, h[1:]):
        if not abs(a / b - 2.0) <= 2.0 * rtol:
            raise ValueError(f"mesh sizes must halve from level to level, got {a} -> {b}")


def regression_slope(h, e) -> float:
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def convergence_rates(levels, k: int = 0, method: str = "") -> RateTable:
    """Pairwise ``log2(e_i / e_{i+1})`` and least-squares slope from ``[(h, e), ...]``."""
    if len(levels) < 1:
        raise ValueError("need at least one level")
    h = [float(a) for a, _ in levels]
    e = [float(b) for _, b in levels]
    check_halving(h)
    table = RateTable(k, method, h, e, flags=[""] * len(h))
    if len(h) >= 2:
        table.rates = pairwise_rates(h, e)
        table.slope = regression_slope(h, e)
    return table


# -- energy series -------------------------------------------------------------
@dataclass
class EnergyReport:
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)

    def add(self, step: int, t: float, energy: float) -> None:
        self.steps.append(int(step))
        self.times.append(float(t))
        self.energies.append(float(energy))

    @property
    def ratios(self) -> list:
        e0 = self.energies[0] if self.energies else 0.0
        if e0 <= 0.0:
            return [0.0] * len(self.energies)
        return [e / e0 for e in self.energies]

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    def relative_drift(self, squared: bool = True) -> float:
        """``max_n |E_n - E_0| / E_0`` with ``E = norm^2`` (or the norm itself)."""
        p = 2 if squared else 1
        r = np.asarray(self.ratios) ** p
        return float(np.max(np.abs(r - 1.0))) if r.size and self.energies[0] > 0 else 0.0


# -- CSV ------------------------------------------------------------------------
def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path_or_buf, kind: str, columns, rows) -> str:
    """Write rows under a versioned header comment; returns the text."""
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} {kind}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c) if isinstance(r, dict) else r[i]) for i, c in enumerate(columns)])
    text = buf.getvalue()
    if path_or_buf is not None:
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
    return text


def read_csv(path) -> tuple[str, list[dict]]:
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        rows = list(csv.DictReader(fh))
    return header, rows


RATE_COLUMNS = ("k", "method", "h", "error", "rate", "flag")
ENERGY_COLUMNS = ("step", "t", "energy", "ratio")


def rate_rows(tables):
    for tb in tables:
        for i, r in enumerate(tb.rows()):
            r["flag"] = tb.flags[i] if i < len(tb.flags) else ""
            yield r


def energy_rows(report: EnergyReport):
    for s, t, e, r in zip(report.steps, report.times, report.energies, report.ratios):
        yield dict(step=s, t=t, energy=e, ratio=r)


def format_rate_table(tables) -> str:
    lines = [f"{'k':>2} {'method':>8} {'h':>10} {'error':>12} {'rate':>7}"]
    for tb in tables:
        for i, r in enumerate(tb.rows()):
            rate = "" if r["rate"] is None else f"{r['rate']:.4f}"
            flag = tb.flags[i] if i < len(tb.flags) else ""
            err = "-" if not np.isfinite(r["error"]) else f"{r['error']:.4e}"
            lines.append(f"{r['k']:>2} {r['method']:>8} {r['h']:>10.5g} {err:>12} {rate:>7} {flag}".rstrip())
        if tb.slope is not None:
            lines.append(f"{'':>2} {'':>8} {'slope':>10} {'':>12} {tb.slope:>7.4f}")
    return "\n".join(lines)
