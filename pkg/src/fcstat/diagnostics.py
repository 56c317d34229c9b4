"""Trace-norm diagnostics and scaling scans.

These routines turn the regularisation story into numbers: the monitored
Schatten norms behind the trace-class hypotheses, lead-length and
sea-depth scans of the cumulants (the two independence tenets), the
non-compactness demonstration for the chiral scatterer, the linear growth
of the static charge variance in thermal leads, and the Hilbert-Schmidt
bound on the first-order driven response.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import fcs, linalg
from .errors import AccuracyError, ContractError, DemoNotApplicableError
from .models import (ChiralModel, PropagatorSpec, Scenario, StateSpec,
                     TwoLeadLattice, build_chiral, build_lattice_scenario,
                     build_two_lead, bump, deepen_chiral, thermal_occupation)

DEFAULT_LAMBDA_REF = np.pi / 3.0
NORM_LABELS = (
    "comm_NU_1",        # ||[N, U]||_1
    "comm_NU_2",        # ||[N, U]||_2
    "Q_sqrtNNp_1",      # ||Q sqrt(N N')||_1
    "dQ_sqrtNNp_1",     # ||(Q_U - Q) sqrt(N N')||_1
    "dQ_N_1",           # ||(Q_U - Q) N||_1
    "QU_NmNU_1",        # ||Q_U (N - N_U)||_1
    "Dreg_minus_id_1",  # ||D~(lambda_ref) - 1||_1
    "Dnaive_minus_id_1",  # ||D(lambda_ref) - 1||_1
)


@dataclass(frozen=True)
class NormReport:
    """Monitored Schatten norms of one scenario at a reference phase."""

    lambda_ref: float
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if len(self.labels) != len(v):
            raise ContractError("labels and values disagree in length")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ContractError("norm values must be finite and non-negative")

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in zip(self.labels, self.values)}


def norm_report(scenario: Scenario, lambda_ref: float = DEFAULT_LAMBDA_REF) -> NormReport:
    """Evaluate the monitored norms; sqrt(N N') is a spectral square root."""
    n = scenario.occupation.matrix
    u = scenario.evolution
    q = scenario.charge.matrix
    q_u = scenario.q_heisenberg
    n_u = scenario.n_heisenberg
    comm = n @ u - u @ n
    nnp = n @ (np.eye(scenario.dim) - n)
    root = linalg.hermitian_sqrt((nnp + nnp.conj().T) / 2.0)
    reg = fcs.regularized_kernel(scenario.occupation, scenario.charge, u, lambda_ref)
    naive = fcs.levitov_kernel(scenario.occupation, scenario.charge, u, lambda_ref)
    values = np.array([
        linalg.trace_norm(comm),
        linalg.schatten_norm(comm, 2),
        linalg.trace_norm(q @ root),
        linalg.trace_norm((q_u - q) @ root),
        linalg.trace_norm((q_u - q) @ n),
        linalg.trace_norm(q_u @ (n - n_u)),
        reg.trace_norm_minus_identity,
        naive.trace_norm_minus_identity,
    ])
    return NormReport(lambda_ref=lambda_ref, labels=NORM_LABELS, values=values)


@dataclass(frozen=True)
class ScanResult:
    """One row per parameter value: cumulants plus a norm report."""

    parameter: str
    values: np.ndarray
    cumulants: tuple[fcs.CumulantVector, ...]
    norms: tuple[NormReport, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not (len(v) == len(self.cumulants) == len(self.norms)):
            raise ContractError("scan rows are incomplete")
        if len(v) >= 2 and not np.all(np.diff(v) > 0):
            raise ContractError("scan parameter values must be strictly increasing")

    def kappa(self, order: int) -> np.ndarray:
        return np.array([c[order] for c in self.cumulants])

    def norm(self, label: str) -> np.ndarray:
        return np.array([r[label] for r in self.norms])


def relative_change(seq: np.ndarray) -> np.ndarray:
    """|x_{i+1} - x_i| / (|x_i| + 1e-12) between consecutive scan rows."""
    seq = np.asarray(seq, dtype=float)
    return np.abs(np.diff(seq)) / (np.abs(seq[:-1]) + 1e-12)


def _scan_row(scenario: Scenario, variant: str, order: int,
              lambda_ref: float) -> tuple[fcs.CumulantVector, NormReport]:
    samples = fcs.generating_function(scenario, variant, 2 * scenario.dim + 1)
    dist = fcs.charge_distribution(samples)
    return fcs.cumulants(dist, order), norm_report(scenario, lambda_ref)


def tenet_scan_length(lattice: TwoLeadLattice, state: StateSpec,
                      total_time: float, lengths: Sequence[int],
                      variant: str = "regularized", order: int = 2,
                      lambda_ref: float = DEFAULT_LAMBDA_REF) -> ScanResult:
    """Cumulants and norms as both leads grow, at fixed evolution time.

    The evolution time must keep the causal cone inside every lattice
    (band velocity bound 2*hopping), otherwise boundary reflections
    contaminate the scan.
    """
    lengths = list(lengths)
    if 2.0 * abs(lattice.hopping) * total_time >= min(lengths):
        raise ContractError(
            f"boundary contamination: causal cone 2*hopping*T = "
            f"{2.0 * abs(lattice.hopping) * total_time:.6g} reaches the lead "
            f"end at length {min(lengths)}; shorten T or grow the leads")
    rows = []
    for length in lengths:
        lat = replace(lattice, sites_left=int(length), sites_right=int(length))
        scenario = build_lattice_scenario(
            lat, state, PropagatorSpec(mode="static", total_time=total_time))
        rows.append(_scan_row(scenario, variant, order, lambda_ref))
    return ScanResult(parameter="lead_sites", values=np.asarray(lengths, float),
                      cumulants=tuple(r[0] for r in rows),
                      norms=tuple(r[1] for r in rows))


def tenet_scan_depth(subject: ChiralModel | TwoLeadLattice,
                     values: Sequence[float], *,
                     state: StateSpec | None = None,
                     total_time: float | None = None,
                     variant: str = "regularized", order: int = 2,
                     lambda_ref: float = DEFAULT_LAMBDA_REF) -> ScanResult:
    """Deepen the Fermi sea and track cumulants alongside the norms.

    For a chiral model ``values`` are integer depth factors applied to the
    cutoff (and grid, keeping the window fixed).  For a lattice, ``values``
    are chemical potentials swept downward through the band, with a static
    quench evolution of ``total_time``.
    """
    rows = []
    if isinstance(subject, ChiralModel):
        params = []
        for factor in values:
            model = deepen_chiral(subject, int(factor))
            params.append(model.energy_cutoff)
            scenario = build_chiral(model)
            rows.append(_scan_row(scenario, variant, order, lambda_ref))
        return ScanResult(parameter="energy_cutoff", values=np.asarray(params),
                          cumulants=tuple(r[0] for r in rows),
                          norms=tuple(r[1] for r in rows))
    if isinstance(subject, TwoLeadLattice):
        if total_time is None:
            raise ContractError("lattice depth scan needs total_time")
        spec = PropagatorSpec(mode="static", total_time=total_time)
        for mu in values:
            scenario = build_lattice_scenario(subject, StateSpec("pure", mu=mu), spec)
            rows.append(_scan_row(scenario, variant, order, lambda_ref))
        return ScanResult(parameter="mu", values=np.asarray(values, float),
                          cumulants=tuple(r[0] for r in rows),
                          norms=tuple(r[1] for r in rows))
    raise ContractError(f"no depth scan for subject of type {type(subject).__name__}")


@dataclass(frozen=True)
class WeakLimitDemo:
    """Norms ||(Q_U - Q) N psi_n|| for the sea-sinking sequence psi_n."""

    norms: np.ndarray
    reference: float  # ||(Q_U - Q) psi||


def noncompact_demo(model: ChiralModel, n_max: int) -> WeakLimitDemo:
    """Push a wavepacket down into the sea and watch (Q_U - Q) N not let go.

    psi_n multiplies a fixed packet by n dual-grid phase steps; it tends
    to zero weakly while ||(Q_U - Q) N psi_n|| plateaus near the reference,
    so (Q_U - Q) N cannot be compact in the deep-sea limit.  Returns the
    norms for n = 0..n_max (n = 0 is the definition entry).
    """
    g = model.grid_points
    if not 1 <= n_max <= g // 2:
        raise ContractError(f"n_max must lie in 1..{g // 2} for this grid")
    scenario = build_chiral(model)
    m = scenario.q_heisenberg - scenario.charge.matrix
    if linalg.max_abs(m) < 1e-12:
        raise DemoNotApplicableError(
            "scatterer commutes with the charge; (Q_U - Q) vanishes and "
            "there is nothing to demonstrate")
    times = model.times
    lo, hi = model.support
    env = bump(times, (lo + hi) / 2.0, (hi - lo) / 2.0)
    psi = None
    for chan in ((1.0, 1.0), (1.0, 0.0), (0.0, 1.0)):
        cand = np.concatenate([chan[0] * env, chan[1] * env])
        cand = cand / np.linalg.norm(cand)
        if np.linalg.norm(m @ cand) > 1e-12:
            psi = cand.astype(complex)
            break
    if psi is None:
        raise DemoNotApplicableError("no packet with (Q_U - Q) psi != 0 found")
    reference = float(np.linalg.norm(m @ psi))
    step = np.exp(-1j * (2.0 * np.pi / model.window) * times)
    step = np.concatenate([step, step])
    n_mat = scenario.occupation.matrix
    norms = np.empty(n_max + 1)
    cur = psi
    for j in range(n_max + 1):
        norms[j] = float(np.linalg.norm(m @ (n_mat @ cur)))
        cur = step * cur
    return WeakLimitDemo(norms=norms, reference=reference)


@dataclass(frozen=True)
class VarianceScan:
    """Static charge variance tr(Q N N') per lead length, with linear fit."""

    lengths: np.ndarray
    variances: np.ndarray
    slope: float
    intercept: float
    r_squared: float


def variance_vs_length(lattice: TwoLeadLattice, beta: float,
                       lengths: Sequence[int], mu: float = 0.0) -> VarianceScan:
    """Equilibrium charge variance of thermal leads, fitted linearly in L.

    Pure seas give exactly zero; thermal occupations fluctuate and the
    variance grows linearly with the lead length.
    """
    lengths = np.asarray(list(lengths), dtype=int)
    variances = []
    for length in lengths:
        lat = replace(lattice, sites_left=int(length), sites_right=int(length))
        h0, _, q = build_two_lead(lat)
        occ = thermal_occupation(h0, beta, mu + lat.bias / 2.0,
                                 mu - lat.bias / 2.0, q)
        n = occ.matrix
        nnp = n @ (np.eye(n.shape[0]) - n)
        variances.append(float(np.trace(q.matrix @ nnp).real))
    variances = np.asarray(variances)
    slope, intercept = np.polyfit(lengths.astype(float), variances, 1)
    fitted = slope * lengths + intercept
    ss_res = float(np.sum((variances - fitted) ** 2))
    ss_tot = float(np.sum((variances - variances.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return VarianceScan(lengths=lengths, variances=variances,
                        slope=float(slope), intercept=float(intercept),
                        r_squared=r2)


@dataclass(frozen=True)
class DysonBound:
    """Quadrature of the boundary-kernel HS norm against its closed bound."""

    lhs: float
    rhs: float
    self_convergence: float

    @property
    def margin(self) -> float:
        return (self.rhs - self.lhs) / self.rhs if self.rhs > 0 else 0.0


def _boundary_kernel_quadrature(xs: np.ndarray, profile: np.ndarray,
                                s: float, n_u: int) -> float:
    """Integral over same-sign momenta of |vhat(p-p') (e^{i(p+p')s}-1)/(p+p')|^2.

    In u = p + p', v = p - p' variables this is
    int_0^inf du 4 sin^2(u s / 2) / u^2 * int_{-u}^{u} |vhat(v)|^2 dv,
    with vhat the unitary Fourier transform of the profile.
    """
    dx = xs[1] - xs[0]
    width = (xs[-1] - xs[0]) / 2.0
    k_cap = 60.0 / max(width, 1e-12)
    n_k = max(n_u, 512)
    ks = np.linspace(0.0, k_cap, n_k, endpoint=False)
    ks = np.concatenate([-ks[:0:-1], ks])
    dk = ks[1] - ks[0]
    vhat = (profile[None, :] * np.exp(-1j * np.outer(ks, xs))).sum(axis=1)
    vhat *= dx / np.sqrt(2.0 * np.pi)
    w2 = np.abs(vhat) ** 2
    mid = len(ks) // 2
    # cumulative W(u) = int_{-u}^{u} |vhat|^2 dv, saturating beyond k_cap
    pos = np.concatenate([[0.0], np.cumsum(w2[mid:-1] + w2[mid + 1:]) * dk / 2.0])
    neg = np.concatenate([[0.0], np.cumsum(w2[mid:0:-1] + w2[mid - 1::-1]) * dk / 2.0])
    w_cum = pos + neg
    u_max = max(2.0 * k_cap, 60.0 / abs(s))
    du = u_max / n_u
    us = (np.arange(n_u) + 0.5) * du
    w_at = np.interp(np.minimum(us, ks[-1]), np.arange(len(w_cum)) * dk, w_cum)
    integrand = 4.0 * np.sin(us * s / 2.0) ** 2 / us ** 2 * w_at
    # analytic tail: beyond u_max the sin^2 averages to 1/2 and W saturates
    tail = 2.0 * float(w_cum[-1]) / u_max
    return float(np.sum(integrand) * du) + tail


def dyson_hs_check(profile: Callable[[np.ndarray], np.ndarray], s_boundary: float,
                   x_support: tuple[float, float], grid: int = 1024) -> DysonBound:
    """Hilbert-Schmidt bound for the first-order driven-response boundary term.

    ``profile`` maps positions to the off-diagonal (channel-mixing) drive
    amplitude at the boundary time ``s_boundary``.  The left side is the
    squared HS norm of the boundary kernel, computed by quadrature; the
    right side is the closed bound pi * |s| * ||profile||_2^2.  Doubling
    the quadrature grid must move the left side by less than 1%.
    """
    if s_boundary == 0.0:
        raise ContractError("boundary time must be nonzero")
    if grid < 64:
        raise ContractError("need at least 64 quadrature points")
    lo, hi = x_support
    if not lo < hi:
        raise ContractError("empty drive support interval")

    def lhs_at(n: int) -> tuple[float, float]:
        xs = lo + (np.arange(n) + 0.5) * ((hi - lo) / n)
        vals = np.asarray(profile(xs), dtype=complex)
        l2 = float(np.sum(np.abs(vals) ** 2) * (xs[1] - xs[0]))
        if l2 == 0.0:
            return 0.0, 0.0
        return _boundary_kernel_quadrature(xs, vals, s_boundary, n), l2

    coarse, _ = lhs_at(grid)
    fine, l2 = lhs_at(2 * grid)
    rhs = np.pi * abs(s_boundary) * l2
    if fine == 0.0 and coarse == 0.0:
        return DysonBound(lhs=0.0, rhs=rhs, self_convergence=0.0)
    conv = abs(fine - coarse) / max(abs(fine), 1e-300)
    if conv > 1e-2:
        raise AccuracyError(
            f"boundary-kernel quadrature moved by {conv:.2%} on doubling; "
            "raise the grid")
    return DysonBound(lhs=fine, rhs=rhs, self_convergence=conv)
