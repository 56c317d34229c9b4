"""Physical scenario builders.

Two families are covered: finite two-lead tight-binding lattices whose
leads start decoupled (so the initial occupation commutes with the lead
charge), and a pair of chiral channels on a periodic time-of-passage grid
with a compactly supported scatterer.  Occupations are always built from
the decoupled Hamiltonian; the evolution may use the coupled or driven
one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.special import expit

from . import linalg
from .errors import (AccuracyError, ContractError, DegeneracyError,
                     NumericalIntegrityError, StructureError, TruncationError)

MU_DEGENERACY_GATE = 1e-8
COMMUTATOR_GATE = 1e-10
DRIVE_ERROR_GATE = 1e-6


@dataclass(frozen=True)
class TwoLeadLattice:
    """Two 1-d tight-binding leads joined by a single bond.

    ``coupling`` is the strength of the bond between the innermost sites;
    it is absent from the decoupled Hamiltonian.  ``bias`` is the
    chemical-potential offset between the leads, used only by thermal
    occupations (mu_left = mu + bias/2, mu_right = mu - bias/2).
    """

    sites_left: int
    sites_right: int
    hopping: float = 1.0
    onsite_left: float = 0.0
    onsite_right: float = 0.0
    coupling: float = 0.0
    bias: float = 0.0

    def __post_init__(self):
        if self.sites_left < 1 or self.sites_right < 1:
            raise ContractError("each lead needs at least one site")

    @property
    def dim(self) -> int:
        return self.sites_left + self.sites_right


@dataclass(frozen=True)
class ChargeProjection:
    """Projection onto the right-lead sites (site_mask True = right lead)."""

    matrix: np.ndarray
    site_mask: np.ndarray

    def __post_init__(self):
        linalg.check_projection(self.matrix, "charge projection")
        if int(np.round(np.trace(self.matrix).real)) != int(np.sum(self.site_mask)):
            raise ContractError("charge projection rank disagrees with site mask")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class OccupationOperator:
    """One-particle density matrix N with 0 <= N <= 1.

    ``kind`` is "pure" (N a projection, from a Fermi sea) or "thermal"
    (0 < N < 1, Fermi function of the decoupled Hamiltonian).  ``delta``
    reports the distance of the thermal spectrum from {0, 1}.
    """

    matrix: np.ndarray
    kind: str
    mu: float | None = None
    beta: float | None = None
    mu_left: float | None = None
    mu_right: float | None = None
    delta: float | None = None

    def __post_init__(self):
        m = linalg.check_hermitian(self.matrix, "occupation", rtol=1e-10)
        w = np.linalg.eigvalsh(m)
        if w.size and (w.min() < -1e-10 or w.max() > 1.0 + 1e-10):
            raise ContractError(
                f"occupation spectrum leaves [0,1]: [{w.min():.3e}, {w.max():.3e}]")
        if self.kind == "pure":
            defect = linalg.max_abs(m @ m - m)
            if defect > 1e-10:
                raise ContractError(
                    f"pure occupation is not a projection: defect {defect:.3e}")
        elif self.kind == "thermal":
            if self.delta is None or not self.delta > 0.0:
                raise ContractError(
                    "thermal occupation must report a positive spectral margin delta")
        else:
            raise ContractError(f"unknown occupation kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "OccupationOperator":
        """The hole occupation N' = 1 - N (same kind and margin)."""
        eye = np.eye(self.dim, dtype=complex)
        return OccupationOperator(matrix=eye - self.matrix, kind=self.kind,
                                  mu=self.mu, beta=self.beta,
                                  mu_left=self.mu_left, mu_right=self.mu_right,
                                  delta=self.delta)


@dataclass
class Scenario:
    """An assembled transport scenario: occupation N, charge Q, evolution U.

    The constructor gates the hypotheses every downstream formula uses:
    U unitary, Q a projection, [Q, N] = 0.
    """

    occupation: OccupationOperator
    charge: ChargeProjection
    evolution: np.ndarray
    label: str = "scenario"

    def __post_init__(self):
        self.evolution = linalg.check_unitary(self.evolution, "evolution")
        n, q = self.occupation.matrix, self.charge.matrix
        if not (n.shape == q.shape == self.evolution.shape):
            raise ContractError("scenario operators have mismatched dimensions")
        comm = linalg.max_abs(q @ n - n @ q)
        if comm > COMMUTATOR_GATE:
            raise ContractError(
                f"[Q, N] = {comm:.3e} exceeds {COMMUTATOR_GATE:.0e}; occupation "
                "must be built from the decoupled Hamiltonian")
        # Heisenberg conjugates are shared read-only by every kernel.
        self.q_heisenberg = linalg.conjugate_by(self.evolution, q)
        self.n_heisenberg = linalg.conjugate_by(self.evolution, n)

    @property
    def dim(self) -> int:
        return self.occupation.dim

    def with_holes(self) -> "Scenario":
        """Particle-hole partner: same Q and U, occupation replaced by 1 - N."""
        return Scenario(occupation=self.occupation.complement(),
                        charge=self.charge, evolution=self.evolution,
                        label=self.label + "+holes")


@dataclass(frozen=True)
class StateSpec:
    """Initial-state recipe: a Fermi sea at ``mu`` or a thermal state.

    Thermal states split the shared ``mu`` by the lattice bias:
    mu_left = mu + bias/2, mu_right = mu - bias/2.
    """

    kind: str
    mu: float = 0.0
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("pure", "thermal"):
            raise ContractError(f"unknown state kind {self.kind!r}")
        if self.kind == "thermal" and (self.beta is None or self.beta <= 0):
            raise ContractError("thermal state needs beta > 0")


def build_lattice_scenario(lattice: TwoLeadLattice, state: StateSpec,
                           spec: PropagatorSpec) -> Scenario:
    """Assemble a two-lead scenario: N from the decoupled H0, U from the
    coupled (possibly driven) H."""
    h0, h, q = build_two_lead(lattice)
    if state.kind == "pure":
        occ = fermi_occupation(h0, state.mu)
    else:
        occ = thermal_occupation(h0, state.beta,
                                 state.mu + lattice.bias / 2.0,
                                 state.mu - lattice.bias / 2.0, q)
    u = propagate(spec, h)
    return Scenario(occupation=occ, charge=q, evolution=u,
                    label=f"two_lead({lattice.sites_left}+{lattice.sites_right})")


def _lead_block(sites: int, hopping: float, onsite: float) -> np.ndarray:
    h = np.zeros((sites, sites), dtype=complex)
    np.fill_diagonal(h, onsite)
    for i in range(sites - 1):
        h[i, i + 1] = -hopping
        h[i + 1, i] = -hopping
    return h


def build_two_lead(lattice: TwoLeadLattice) -> tuple[np.ndarray, np.ndarray, ChargeProjection]:
    """Decoupled H0, coupled H, and the right-lead charge projection.

    H0 is block diagonal with respect to the lead split; H adds the single
    bond of strength ``coupling`` between the innermost sites, so that
    [Q, H0] = 0 holds exactly.
    """
    nl, nr = lattice.sites_left, lattice.sites_right
    h0 = scipy.linalg.block_diag(
        _lead_block(nl, lattice.hopping, lattice.onsite_left),
        _lead_block(nr, lattice.hopping, lattice.onsite_right),
    ).astype(complex)
    h = h0.copy()
    h[nl - 1, nl] = -lattice.coupling
    h[nl, nl - 1] = -lattice.coupling
    mask = np.zeros(nl + nr, dtype=bool)
    mask[nl:] = True
    q = np.diag(mask.astype(complex))
    return h0, h, ChargeProjection(matrix=q, site_mask=mask)


def fermi_occupation(h0: np.ndarray, mu: float) -> OccupationOperator:
    """Fermi-sea projection onto the eigenstates of ``h0`` below ``mu``."""
    w, v = linalg.hermitian_eig(h0)
    gap = np.abs(w - mu)
    if gap.size and float(gap.min()) < MU_DEGENERACY_GATE:
        k = int(np.argmin(gap))
        raise DegeneracyError(
            f"eigenvalue {w[k]:.12g} (index {k}) lies within "
            f"{MU_DEGENERACY_GATE:.0e} of mu={mu:.12g}; occupation undefined")
    occ = v[:, w < mu]
    n = occ @ occ.conj().T
    n = (n + n.conj().T) / 2.0
    return OccupationOperator(matrix=n, kind="pure", mu=mu)


def thermal_occupation(h0: np.ndarray, beta: float, mu_left: float,
                       mu_right: float, q: ChargeProjection) -> OccupationOperator:
    """Per-lead Fermi function of the decoupled Hamiltonian.

    On each lead block, N = [1 + exp(beta (H_block - mu_block))]^{-1};
    cross-lead blocks are exactly zero so [Q, N] = 0 by construction.
    """
    if beta <= 0:
        raise ContractError(f"beta must be positive, got {beta}")
    h0 = linalg.check_hermitian(h0, "decoupled Hamiltonian")
    mask = np.asarray(q.site_mask, dtype=bool)
    if h0.shape[0] != mask.size:
        raise ContractError("Hamiltonian and charge projection dimensions differ")
    off = linalg.max_abs(h0[np.ix_(~mask, mask)])
    if off > 1e-12:
        raise StructureError(
            f"H0 couples the leads (off-block norm {off:.3e}); thermal "
            "occupation needs a block-diagonal H0")
    n = np.zeros_like(h0)
    delta = np.inf
    for block_mask, mu in ((~mask, mu_left), (mask, mu_right)):
        idx = np.flatnonzero(block_mask)
        if idx.size == 0:
            continue
        wb, vb = linalg.hermitian_eig(h0[np.ix_(idx, idx)])
        x = beta * (wb - mu)
        f = expit(-x)
        g = expit(x)  # 1 - f, computed without cancellation
        margin = float(min(f.min(), g.min()))
        if margin <= 0.0:
            raise ContractError(
                "occupation underflows at this beta; use a pure Fermi sea instead")
        delta = min(delta, margin)
        n[np.ix_(idx, idx)] = (vb * f) @ vb.conj().T
    return OccupationOperator(matrix=n, kind="thermal", beta=beta,
                              mu_left=mu_left, mu_right=mu_right, delta=delta)


@dataclass(frozen=True)
class PropagatorSpec:
    """Evolution recipe: static exp(-iHT) or a midpoint-rule ordered product.

    ``drive`` maps a time to a Hermitian perturbation added to H; it is
    required in driven mode and ignored otherwise.
    """

    mode: str
    total_time: float
    steps: int = 1
    drive: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        if self.mode not in ("static", "driven"):
            raise ContractError(f"unknown propagator mode {self.mode!r}")
        if self.total_time < 0:
            raise ContractError("total_time must be non-negative")
        if self.mode == "driven":
            if self.steps < 1:
                raise ContractError("driven mode needs steps >= 1")
            if self.drive is None:
                raise ContractError("driven mode needs a drive")


def propagate(spec: PropagatorSpec, h: np.ndarray) -> np.ndarray:
    """Propagator for ``h`` (plus drive) over ``spec.total_time``."""
    h = linalg.check_hermitian(h, "Hamiltonian")
    if spec.total_time == 0.0:
        return np.eye(h.shape[0], dtype=complex)
    if spec.mode == "static":
        return linalg.unitary_exp(h, spec.total_time)

    dt = spec.total_time / spec.steps
    mids = [h + linalg.check_hermitian(np.asarray(spec.drive(t), dtype=complex),
                                       f"drive({t:.6g})")
            for t in (np.arange(spec.steps) + 0.5) * dt]
    # Leading midpoint-product error comes from non-commutativity of
    # successive step generators: per step ~ (dt^2/24) ||[H_i, H_{i+1}]||.
    est = 0.0
    for a, b in zip(mids[:-1], mids[1:]):
        est += dt * dt / 24.0 * float(np.linalg.norm(a @ b - b @ a))
    if est > DRIVE_ERROR_GATE:
        raise AccuracyError(
            f"midpoint propagator error estimate {est:.3e} exceeds "
            f"{DRIVE_ERROR_GATE:.0e}; increase steps")
    u = np.eye(h.shape[0], dtype=complex)
    for hm in mids:
        u = linalg.unitary_exp(hm, dt) @ u
    defect = linalg.max_abs(u.conj().T @ u - np.eye(h.shape[0]))
    if defect > 1e-9:
        raise AccuracyError(f"propagator unitarity defect {defect:.3e}")
    return u


@dataclass(frozen=True)
class ChiralModel:
    """Two counter-propagating channels on a periodic time-of-passage grid.

    The grid lives in the passage-time variable t; the dual grid carries
    the energies, cut off at ``energy_cutoff``.  The window length is
    pi * grid_points / energy_cutoff, so deepening the sea at a fixed
    window means scaling ``grid_points`` with ``energy_cutoff``.
    ``scatter`` maps t to a 2x2 unitary equal to the identity outside
    ``support``.
    """

    energy_cutoff: float
    grid_points: int
    scatter: Callable[[float], np.ndarray]
    support: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.energy_cutoff <= 0:
            raise ContractError("energy_cutoff must be positive")
        if self.grid_points < 4 or self.grid_points % 2:
            raise ContractError("grid_points must be an even count >= 4")
        if not self.support[0] < self.support[1]:
            raise ContractError("empty scatterer support interval")

    @property
    def window(self) -> float:
        return np.pi * self.grid_points / self.energy_cutoff

    @property
    def times(self) -> np.ndarray:
        g = self.grid_points
        return (np.arange(g) - g // 2) * (self.window / g)


def build_chiral(model: ChiralModel) -> Scenario:
    """Discretised chiral scenario.

    Q projects onto the first channel, U multiplies by scatter(t) pointwise,
    and N fills the negative half of the dual energy grid identically on
    both channels (the Fermi sea of the linear dispersion).  Operator
    indices are channel-major: index = channel * grid_points + grid index.
    """
    g = model.grid_points
    times = model.times
    half = model.window / 2.0
    lo, hi = model.support
    if lo < times[0] or hi > -times[0]:
        raise TruncationError(
            f"scatterer support [{lo:.6g}, {hi:.6g}] exceeds the grid window "
            f"[-{half:.6g}, {half:.6g}); raise grid_points or energy_cutoff")

    smats = np.empty((g, 2, 2), dtype=complex)
    for i, t in enumerate(times):
        s = np.asarray(model.scatter(t), dtype=complex)
        if s.shape != (2, 2):
            raise ContractError("scatter(t) must return a 2x2 matrix")
        defect = linalg.max_abs(s.conj().T @ s - np.eye(2))
        if defect > 1e-10:
            raise ContractError(
                f"scatter({t:.6g}) is not unitary: defect {defect:.3e}")
        if (t < lo or t > hi) and linalg.max_abs(s - np.eye(2)) > 1e-10:
            raise TruncationError(
                f"scatter({t:.6g}) deviates from identity outside the declared "
                "support")
        smats[i] = s

    u = np.zeros((2 * g, 2 * g), dtype=complex)
    for a in range(2):
        for b in range(2):
            u[a * g:(a + 1) * g, b * g:(b + 1) * g] = np.diag(smats[:, a, b])

    # Fermi step on the dual grid, identical on both channels.
    f = scipy.linalg.dft(g, scale="sqrtn")
    if linalg.max_abs(f.conj().T @ f - np.eye(g)) > 1e-10:
        raise NumericalIntegrityError("DFT matrix failed its Parseval gate")
    freqs = np.fft.fftfreq(g)  # cycles per sample; negative half is the sea
    occ = (freqs < 0).astype(complex)
    n_block = f.conj().T @ np.diag(occ) @ f
    n_block = (n_block + n_block.conj().T) / 2.0
    n = scipy.linalg.block_diag(n_block, n_block)

    mask = np.zeros(2 * g, dtype=bool)
    mask[:g] = True  # channel 0 is the counted (right-moving) channel
    q = np.diag(mask.astype(complex))

    return Scenario(
        occupation=OccupationOperator(matrix=n, kind="pure", mu=0.0),
        charge=ChargeProjection(matrix=q, site_mask=mask),
        evolution=u,
        label=f"chiral(g={g},cutoff={model.energy_cutoff:.6g})",
    )


def deepen_chiral(model: ChiralModel, factor: int) -> ChiralModel:
    """Scale cutoff and grid together, keeping the time window fixed."""
    if factor < 1 or int(factor) != factor:
        raise ContractError("depth factor must be a positive integer")
    return replace(model, energy_cutoff=model.energy_cutoff * factor,
                   grid_points=model.grid_points * factor)


def dyson_first_term(h0: np.ndarray, drive: Callable[[float], np.ndarray],
                     s1: float, s2: float, quad_points: int) -> np.ndarray:
    """First-order interaction-picture response, by composite midpoint rule.

    Computes -i * integral over [s1, s2] of exp(iH0 t) V(t) exp(-iH0 t) dt.
    The result feeds norm analysis; it is not unitary.
    """
    if not s1 < s2:
        raise ContractError("need s1 < s2")
    if quad_points < 8:
        raise ContractError("quad_points must be at least 8")
    w, v = linalg.hermitian_eig(h0)
    dt = (s2 - s1) / quad_points
    acc = np.zeros_like(np.asarray(h0, dtype=complex))
    for t in s1 + (np.arange(quad_points) + 0.5) * dt:
        vt = linalg.check_hermitian(np.asarray(drive(t), dtype=complex),
                                    f"drive({t:.6g})")
        phase = (v * np.exp(1j * w * t)) @ v.conj().T
        acc += phase @ vt @ phase.conj().T
    return -1j * dt * acc


def bump(t: np.ndarray | float, center: float, width: float) -> np.ndarray | float:
    """Smooth compactly supported bump, equal to 1 at the center."""
    x = (np.asarray(t, dtype=float) - center) / width
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    if np.ndim(t) == 0:
        return float(out)
    return out


def mixing_scatter(amplitude: float, center: float, width: float) -> Callable[[float], np.ndarray]:
    """Beam-splitter family exp(i theta(t) sigma_x) with a bump profile."""
    def scatter(t: float) -> np.ndarray:
        theta = amplitude * bump(t, center, width)
        c, s = np.cos(theta), 1j * np.sin(theta)
        return np.array([[c, s], [s, c]], dtype=complex)
    return scatter


def phase_scatter(amplitude: float, center: float, width: float) -> Callable[[float], np.ndarray]:
    """Pure transmission-phase family diag(e^{i phi(t)}, e^{-i phi(t)})."""
    def scatter(t: float) -> np.ndarray:
        phi = amplitude * bump(t, center, width)
        return np.diag([np.exp(1j * phi), np.exp(-1j * phi)]).astype(complex)
    return scatter


def bond_pulse_drive(lattice: TwoLeadLattice, amplitude: float, center: float,
                     width: float) -> Callable[[float], np.ndarray]:
    """Smooth pulse on the inter-lead bond, for driven propagation."""
    nl, dim = lattice.sites_left, lattice.dim
    bond = np.zeros((dim, dim), dtype=complex)
    bond[nl - 1, nl] = bond[nl, nl - 1] = 1.0

    def drive(t: float) -> np.ndarray:
        return amplitude * bump(t, center, width) * bond
    return drive


def site_pulse_drive(lattice: TwoLeadLattice, site: int, amplitude: float,
                     center: float, width: float) -> Callable[[float], np.ndarray]:
    """Smooth onsite-potential pulse on a single site."""
    if not 0 <= site < lattice.dim:
        raise ContractError(f"site {site} outside the lattice")
    proj = np.zeros((lattice.dim, lattice.dim), dtype=complex)
    proj[site, site] = 1.0

    def drive(t: float) -> np.ndarray:
        return amplitude * bump(t, center, width) * proj
    return drive
