"""Detector models on the conditional outputs: photon counting and homodyne.

Both detectors saturate the conditional-state QFI for probes with real
amplitudes (the conditional families are real and gain-covariant), which is
what makes the sequential scheme optimal; the self-check suite verifies the
saturation numerically.  This module computes the outcome distributions,
their exact gain derivatives, the resulting classical Fisher informations,
and the Fisher information of the full joint record (branch, outcome) --
the latter through its own code path so it can arbitrate the identity
``F_joint = p_s Q_s + p_f Q_f + F_c`` independently.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np

from .fock import FockVector, QuadratureGrid, adaptive_quadrature_grid, wavefunction_matrix
from .instrument import (
    BRANCHES,
    NlaParams,
    branch_probability_derivative,
    conditional_state,
    conditional_state_derivative,
    kraus_diagonal,
    kraus_diagonal_derivative,
)

PHOTON_COUNTING = "photon-counting"
HOMODYNE = "homodyne"
DETECTOR_KINDS = (PHOTON_COUNTING, HOMODYNE)

# A density/mass below this floor is an exact zero for likelihood purposes.
MASS_FLOOR = 1e-300

# Outermost-panel share of the Fisher integral above which the quadrature
# window is widened before trusting the result.
TAIL_SHARE = 1e-12

REAL_AMPLITUDE_TOL = 1e-12


class ComplexProbeUnsupported(ValueError):
    """Homodyne Fisher information requested for a complex-amplitude probe.

    The x-quadrature record is only guaranteed to saturate the conditional
    QFI for real amplitudes; pass ``allow_complex=True`` to compute the
    (generally sub-optimal) classical information anyway.
    """


@dataclasses.dataclass(frozen=True)
class OutcomeDistribution:
    """Outcome distribution of one detector on one branch.

    For photon counting, ``support`` holds the Fock levels and ``masses``
    their probabilities.  For homodyne, ``support`` holds quadrature nodes,
    ``masses`` the density there, and ``weights`` the quadrature weights that
    integrate it (sum(masses * weights) = 1).
    """

    kind: str
    branch: str
    support: np.ndarray
    masses: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        for name in ("support", "masses", "weights"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.array(val, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def probs(self) -> np.ndarray:
        """Alias: masses for photon counting, density values for homodyne."""
        return self.masses

    def total(self) -> float:
        if self.weights is None:
            return float(self.masses.sum())
        return float(np.dot(self.weights, self.masses))


# ---------------------------------------------------------------------------
# Photon counting
# ---------------------------------------------------------------------------

def photon_counting_dist(probe: FockVector, params: NlaParams, branch: str) -> OutcomeDistribution:
    """Photon-number distribution of the normalized conditional state."""
    cond = conditional_state(probe, params, branch)
    return OutcomeDistribution(
        kind=PHOTON_COUNTING,
        branch=branch,
        support=np.arange(probe.dim),
        masses=cond.state.weights(),
    )


def photon_counting_mass_derivative(
    probe: FockVector, params: NlaParams, branch: str
) -> np.ndarray:
    """Exact gain derivative of the conditional photon-number masses."""
    cond = conditional_state(probe, params, branch)
    damps = conditional_state_derivative(probe, params, branch)
    return 2.0 * (np.conj(cond.state.amps) * damps).real


def fi_photon_counting(probe: FockVector, params: NlaParams, branch: str) -> float:
    """Classical Fisher information of conditional photon counting.

    ``F = sum_n (dm_n)^2 / m_n`` over occupied levels, with the mass
    derivatives taken analytically through the conditional amplitudes.
    """
    dist = photon_counting_dist(probe, params, branch)
    dm = photon_counting_mass_derivative(probe, params, branch)
    keep = dist.masses > MASS_FLOOR
    return float(np.sum(dm[keep] ** 2 / dist.masses[keep]))


# ---------------------------------------------------------------------------
# Homodyne
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _grid_and_wavefunctions(dim: int, widen: int = 0) -> tuple[QuadratureGrid, np.ndarray]:
    """Quadrature grid sized for ``dim`` levels plus the matching <x|n> table.

    ``widen`` enlarges the window by 25% per step when a Fisher integral
    reports a non-negligible tail.
    """
    from .fock import default_half_width

    grid = adaptive_quadrature_grid(dim, half_width=default_half_width(dim) * 1.25 ** widen)
    return grid, wavefunction_matrix(dim, grid.nodes)


def homodyne_density(probe: FockVector, params: NlaParams, branch: str, x) -> np.ndarray | float:
    """Conditional x-quadrature density ``|sum_n a_n <x|n>|^2``."""
    cond = conditional_state(probe, params, branch)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    psi = wavefunction_matrix(probe.dim, xa)
    field = cond.state.amps @ psi
    dens = np.abs(field) ** 2
    return dens if isinstance(x, np.ndarray) else float(dens[0])


def homodyne_distribution(
    probe: FockVector, params: NlaParams, branch: str
) -> OutcomeDistribution:
    """Conditional homodyne density tabulated on the adaptive grid."""
    cond = conditional_state(probe, params, branch)
    grid, psi = _grid_and_wavefunctions(probe.dim, 0)
    field = cond.state.amps @ psi
    return OutcomeDistribution(
        kind=HOMODYNE,
        branch=branch,
        support=grid.nodes,
        masses=np.abs(field) ** 2,
        weights=grid.weights,
    )


def _fisher_integral(dim: int, amp_fn) -> float:
    """Integrate ``(d density)^2 / density`` for amplitude rows from amp_fn.

    ``amp_fn(psi)`` maps the wavefunction table to a list of
    ``(field, dfield)`` pairs (one per branch included in the integral).
    Widens the window until the outermost panels carry < TAIL_SHARE of the
    total, which they always should given the default margin.
    """
    for widen in range(6):
        grid, psi = _grid_and_wavefunctions(dim, widen)
        integrand = np.zeros(grid.nodes.size)
        for field, dfield in amp_fn(psi):
            dens = np.abs(field) ** 2
            ddens = 2.0 * (np.conj(field) * dfield).real
            keep = dens > MASS_FLOOR
            integrand[keep] += ddens[keep] ** 2 / dens[keep]
        total = grid.integrate(integrand)
        if total == 0.0:
            return 0.0
        shares = grid.panel_sums(integrand)
        tail = max(shares[0], shares[-1])
        if tail <= TAIL_SHARE * total:
            return float(total)
    raise RuntimeError("homodyne Fisher integral tail did not become negligible")


def fi_homodyne(
    probe: FockVector, params: NlaParams, branch: str, allow_complex: bool = False
) -> float:
    """Classical Fisher information of conditional homodyne detection.

    ``F = integral (d p(x))^2 / p(x) dx`` with the density derivative taken
    analytically through the conditional amplitudes.  Raises
    :class:`ComplexProbeUnsupported` for complex probes unless overridden.
    """
    if not allow_complex and not probe.is_real(REAL_AMPLITUDE_TOL):
        raise ComplexProbeUnsupported(
            "homodyne saturation only holds for real probe amplitudes; "
            "pass allow_complex=True to compute the classical value anyway"
        )
    cond = conditional_state(probe, params, branch)
    damps = conditional_state_derivative(probe, params, branch)

    def rows(psi):
        return [(cond.state.amps @ psi, damps @ psi)]

    return _fisher_integral(probe.dim, rows)


# ---------------------------------------------------------------------------
# Joint record of the full sequential scheme
# ---------------------------------------------------------------------------

def sequential_fi(probe: FockVector, params: NlaParams, detector: str = PHOTON_COUNTING) -> float:
    """Fisher information of the joint (branch, outcome) record.

    Works directly on the unnormalized joint masses
    ``q_{i,o} = prob_i * p(o|i)`` -- for photon counting these are simply
    ``E_{i,n}^2 |c_n|^2`` -- with analytic derivatives, and never touches the
    effective-QFI closed form, so it can serve as an independent witness of
    ``F_joint = p_s Q_s + p_f Q_f + F_c``.
    """
    probe.require_normalized()
    if detector == PHOTON_COUNTING:
        total = 0.0
        w = probe.weights()
        for branch in BRANCHES:
            e = kraus_diagonal(params, branch, probe.dim)
            de = kraus_diagonal_derivative(params, branch, probe.dim)
            q = e * e * w
            dq = 2.0 * e * de * w
            keep = q > MASS_FLOOR
            total += float(np.sum(dq[keep] ** 2 / q[keep]))
        return total
    if detector == HOMODYNE:
        if not probe.is_real(REAL_AMPLITUDE_TOL):
            raise ComplexProbeUnsupported(
                "joint homodyne record requires real probe amplitudes"
            )

        def rows(psi):
            out = []
            for branch in BRANCHES:
                e = kraus_diagonal(params, branch, probe.dim)
                de = kraus_diagonal_derivative(params, branch, probe.dim)
                out.append(((e * probe.amps) @ psi, (de * probe.amps) @ psi))
            return out

        return _fisher_integral(probe.dim, rows)
    raise ValueError(f"unknown detector {detector!r}")
