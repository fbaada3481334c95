"""Brute-force cross-checks for every analytic information quantity.

The oracles never call the closed forms they validate: quantum Fisher
informations come from fidelity finite differences, classical Fisher
informations from numeric derivatives of the outcome distributions
themselves.  Each pinned number shipped in the test fixtures carries a
report row from this module; rebuild the fixture with

    python -m nlametro.oracles --out tests/data/golden.json

Finite-difference hygiene: the pure-state overlap deficit is assembled in a
cancellation-free form (see :func:`overlap_deficit`), and the mixed-state
path delegates to the extended-precision root-fidelity deficit.  Deficits
below 100x unit roundoff are refused via :class:`StepTooSmall` rather than
amplified by 1/dg^2 into junk; :func:`resolution_floor` states the smallest
information value a given step can certify.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import pathlib
import sys

import numpy as np

from .fisher import (
    classical_fi,
    meter_coupling_term,
    qfi_branch,
    qfi_effective,
    qfi_effective_closed_form,
    qfi_joint_meter,
    qfi_unconditional,
)
from .fock import DensityOperator, FockVector, root_fidelity_deficit
from .instrument import (
    BranchImpossible,
    FAILURE,
    MeterState,
    NlaParams,
    SUCCESS,
    branch_probability,
    branch_probability_derivative,
    conditional_state,
    joint_state,
    kraus_diagonal,
    unconditional_state,
)
from .measurements import (
    HOMODYNE,
    MASS_FLOOR,
    PHOTON_COUNTING,
    _grid_and_wavefunctions,
    homodyne_density,
    photon_counting_dist,
)
from .probes import ProbeSpec, custom_probe, solve_amplitude_for_nbar

UNIT_ROUNDOFF = 2.0 ** -53
STEP_MIN = 1e-6
STEP_MAX = 1e-3
DEFAULT_QFI_STEP = 1e-4
PROB_STEP = 1e-5
# Deficits below this are indistinguishable from rounding noise.
DEFICIT_FLOOR = 100.0 * UNIT_ROUNDOFF
# Deficits below this band are treated as an exact zero (identical states up
# to extended-precision rounding) rather than as an unresolvable step.
ZERO_DEFICIT_BAND = 1e-15
# Absolute accuracy floor of the root-fidelity deficit when the density
# operators arrive in double precision.  Their numerical support carries
# O(eps) junk eigenvalue mass and the Bures deficit is first-order sensitive
# to it; the pure-state overlap path suppresses the same input rounding to
# eps * sqrt(deficit) through vector normalization, but mixed states have no
# such luxury.  Measured offsets across the standard grid reach 7.6e-17;
# this constant carries a 2.6x margin.
MIXED_DEFICIT_NOISE = 2e-16
# Richardson extrapolation from steps (dg, dg/2) amplifies the deficit noise
# by (4 * 4 + 1) / 3: the half-step deficit is 4x smaller, so its relative
# noise is 4x larger, and the combination weights are 4/3 and 1/3.
RICHARDSON_NOISE_FACTOR = 17.0 / 3.0

GOLDEN_SCHEMA_VERSION = 1


class StepTooSmall(ArithmeticError):
    """The overlap deficit drowned in roundoff at the requested step."""


def resolution_floor(dg: float) -> float:
    """Smallest information value resolvable at step ``dg``.

    A deficit at the refusal floor maps to ``8 * DEFICIT_FLOOR / dg**2``;
    analytic values below this cannot be confirmed or denied by the
    finite-difference oracle at that step.
    """
    return 8.0 * DEFICIT_FLOOR / (dg * dg)


@dataclasses.dataclass(frozen=True)
class OracleReport:
    """One analytic-vs-oracle comparison, as shipped in the golden fixture."""

    quantity: str
    analytic: float
    oracle: float
    rel_error: float
    step: float
    tol: float
    scale_floor: float = 0.0
    note: str = ""

    @classmethod
    def build(
        cls,
        quantity: str,
        analytic: float,
        oracle: float,
        step: float,
        tol: float,
        scale_floor: float = 0.0,
        note: str = "",
    ) -> "OracleReport":
        """Compare against the error scale max(|analytic|, |oracle|, scale_floor).

        A zero floor gives a plain relative error.  Hand-derived operating
        points whose tolerance is stated absolutely use ``scale_floor=1`` so
        that a physically-zero quantity returning 1e-33 instead of a literal
        0.0 is not scored as a 100% discrepancy.  The floor is recorded in
        the report, never applied silently.
        """
        scale = max(abs(analytic), abs(oracle), scale_floor)
        rel = abs(analytic - oracle) / scale if scale > 0.0 else 0.0
        return cls(
            quantity=quantity,
            analytic=float(analytic),
            oracle=float(oracle),
            rel_error=float(rel),
            step=float(step),
            tol=float(tol),
            scale_floor=float(scale_floor),
            note=note,
        )

    def passes(self) -> bool:
        return self.rel_error <= self.tol

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _validate_step(dg: float) -> None:
    if not (STEP_MIN <= dg <= STEP_MAX):
        raise ValueError(
            f"step {dg:g} outside [{STEP_MIN:g}, {STEP_MAX:g}]: larger steps "
            "lose the O(dg^2) truncation bound, smaller ones drown in roundoff"
        )


# ---------------------------------------------------------------------------
# Fidelity finite differences
# ---------------------------------------------------------------------------

def overlap_deficit(lo: FockVector, hi: FockVector) -> float:
    """``1 - |<lo|hi>|`` for unit vectors, assembled without cancellation.

    Writing a = |lo - hi|^2 / 2 and b = Im<lo|hi>, the deficit equals
    a - b^2/2 up to terms quartic in the separation, and every operand is
    small — no 1 - 0.99999... subtraction ever happens, so deficits down to
    ~1e-30 keep full relative accuracy.
    """
    u = lo.amps / np.linalg.norm(lo.amps)
    v = hi.amps / np.linalg.norm(hi.amps)
    if u.size != v.size:
        n = max(u.size, v.size)
        u = np.pad(u, (0, n - u.size))
        v = np.pad(v, (0, n - v.size))
    a = 0.5 * float(np.linalg.norm(v - u) ** 2)
    b = float(np.vdot(u, v).imag)
    return max(a - 0.5 * b * b, 0.0)


def qfi_fd_pure(state_at, g: float, dg: float = DEFAULT_QFI_STEP) -> float:
    """Finite-difference QFI ``8 (1 - |<psi(g-)|psi(g+)>|) / dg^2``.

    ``state_at(g)`` must return the (normalized) pure state at gain ``g``;
    the symmetric pair ``g +/- dg/2`` makes the estimate second-order
    accurate.  Exactly gain-independent families return 0; deficits inside
    the rounding band raise :class:`StepTooSmall`.
    """
    _validate_step(dg)
    deficit = overlap_deficit(state_at(g - 0.5 * dg), state_at(g + 0.5 * dg))
    if deficit < ZERO_DEFICIT_BAND:
        return 0.0
    if deficit < DEFICIT_FLOOR:
        raise StepTooSmall(
            f"overlap deficit {deficit:.3e} at step {dg:g} is below 100x unit "
            f"roundoff; values under {resolution_floor(dg):.3e} are unresolvable"
        )
    return 8.0 * deficit / (dg * dg)


def qfi_fd_mixed(rho_at, g: float, dg: float = DEFAULT_QFI_STEP) -> float:
    """Bures finite-difference QFI ``8 (1 - sqrt(F)) / dg^2`` for mixed states.

    ``rho_at(g)`` must return a :class:`DensityOperator`.  The root-fidelity
    deficit is evaluated in extended precision on the numerical supports, so
    rank-deficient families (the rank-2 unconditional state) do not leak
    kernel noise into the deficit.
    """
    _validate_step(dg)
    deficit = root_fidelity_deficit(rho_at(g - 0.5 * dg), rho_at(g + 0.5 * dg))
    if deficit < ZERO_DEFICIT_BAND:
        return 0.0
    if deficit < DEFICIT_FLOOR:
        raise StepTooSmall(
            f"root-fidelity deficit {deficit:.3e} at step {dg:g} is below 100x "
            f"unit roundoff; values under {resolution_floor(dg):.3e} are unresolvable"
        )
    return 8.0 * deficit / (dg * dg)


def qfi_fd_mixed_richardson(rho_at, g: float, dg: float = STEP_MAX) -> float:
    """Richardson-extrapolated Bures finite difference at steps (dg, dg/2).

    The combination ``(4 F(dg/2) - F(dg)) / 3`` cancels the O(dg^2)
    truncation term, so the largest legal step can be used everywhere.  That
    matters for the mixed path specifically: its deficit carries an absolute
    noise floor, so shrinking the step to tame truncation (the pure-path
    remedy) amplifies noise as 1/dg^2 instead.  Extrapolating from the two
    largest steps keeps both error terms small at once.
    """
    coarse = qfi_fd_mixed(rho_at, g, dg)
    fine = qfi_fd_mixed(rho_at, g, 0.5 * dg)
    return (4.0 * fine - coarse) / 3.0


def qfi_step_for(scale: float) -> float:
    """Step policy: small information values need the larger legal step.

    At ``dg = 1e-4`` the refusal floor sits near ``Q ~ 9e-6``; picking
    ``dg = 1e-3`` for |Q| < 1e-2 keeps every resolvable grid point clear of
    it while the larger truncation error (quadratic in dg) stays far below
    the comparison tolerances.
    """
    return DEFAULT_QFI_STEP if abs(scale) >= 1e-2 else STEP_MAX


def mixed_certifiable_tol(
    scale: float, dg: float, base_tol: float, richardson: bool = False
) -> float:
    """Tightest relative tolerance the mixed-state oracle can certify.

    The deficit carries an absolute noise floor (MIXED_DEFICIT_NOISE), so a
    QFI of magnitude ``scale`` probed at step ``dg`` cannot be checked more
    finely than ``noise / deficit = 8 noise / (dg^2 scale)``.  Comparisons of
    low-signal values must widen to this, and say so.
    """
    if scale <= 0.0:
        return base_tol
    noise = 8.0 * MIXED_DEFICIT_NOISE / (dg * dg * scale)
    if richardson:
        noise *= RICHARDSON_NOISE_FACTOR
    return max(base_tol, noise)


def probability_derivative_fd(
    probe: FockVector, params: NlaParams, branch: str, dg: float = PROB_STEP
) -> float:
    """Central-difference derivative of the branch probability."""
    _validate_step(dg)
    lo = branch_probability(probe, dataclasses.replace(params, g=params.g - 0.5 * dg), branch)
    hi = branch_probability(probe, dataclasses.replace(params, g=params.g + 0.5 * dg), branch)
    return (hi - lo) / dg


# ---------------------------------------------------------------------------
# Direct joint-record Fisher information
# ---------------------------------------------------------------------------

def _joint_photon_masses(probe: FockVector, params: NlaParams) -> np.ndarray:
    """Concatenated joint masses p_branch * p(n | branch), failures last."""
    blocks = []
    for branch in (SUCCESS, FAILURE):
        try:
            prob = branch_probability(probe, params, branch)
            masses = photon_counting_dist(probe, params, branch).masses
            blocks.append(prob * masses)
        except BranchImpossible:
            blocks.append(np.zeros(probe.dim))
    return np.concatenate(blocks)


def joint_fi_direct(
    probe: FockVector, params: NlaParams, detector: str, dg: float = PROB_STEP
) -> float:
    """Fisher information of the joint (branch, outcome) record, brute force.

    Evaluates sum over branches and outcomes of ``(d m)^2 / m`` where
    ``m = p_branch * p(outcome | branch)`` and the gain derivative is a
    central difference of the distributions themselves — no analytic
    derivative enters.  Homodyne outcomes are integrated on the same
    adaptive quadrature grid used by the measurement module.
    """
    _validate_step(dg)
    lo_params = dataclasses.replace(params, g=params.g - 0.5 * dg)
    hi_params = dataclasses.replace(params, g=params.g + 0.5 * dg)
    if detector == PHOTON_COUNTING:
        center = _joint_photon_masses(probe, params)
        slope = (
            _joint_photon_masses(probe, hi_params) - _joint_photon_masses(probe, lo_params)
        ) / dg
        keep = center > MASS_FLOOR
        return float(np.sum(slope[keep] ** 2 / center[keep]))
    if detector != HOMODYNE:
        raise ValueError(f"unknown detector {detector!r}")
    grid, _ = _grid_and_wavefunctions(probe.dim, 0)
    total = 0.0
    for branch in (SUCCESS, FAILURE):
        def joint_density(p: NlaParams) -> np.ndarray:
            try:
                prob = branch_probability(probe, p, branch)
                return prob * homodyne_density(probe, p, branch, grid.nodes)
            except BranchImpossible:
                return np.zeros(grid.nodes.size)

        center = joint_density(params)
        slope = (joint_density(hi_params) - joint_density(lo_params)) / dg
        keep = center > MASS_FLOOR
        integrand = np.zeros(grid.nodes.size)
        integrand[keep] = slope[keep] ** 2 / center[keep]
        total += grid.integrate(integrand)
    return float(total)


def _coupling_fd(probe: FockVector, params: NlaParams, dg: float = PROB_STEP) -> float:
    """Cross term <E_s dE_f> - <E_f dE_s> with central-difference derivatives."""
    dim = probe.dim
    lo = dataclasses.replace(params, g=params.g - 0.5 * dg)
    hi = dataclasses.replace(params, g=params.g + 0.5 * dg)
    es = kraus_diagonal(params, SUCCESS, dim)
    ef = kraus_diagonal(params, FAILURE, dim)
    des = (kraus_diagonal(hi, SUCCESS, dim) - kraus_diagonal(lo, SUCCESS, dim)) / dg
    def_ = (kraus_diagonal(hi, FAILURE, dim) - kraus_diagonal(lo, FAILURE, dim)) / dg
    return float(np.sum(probe.weights() * (es * def_ - ef * des)))


# ---------------------------------------------------------------------------
# Golden fixture generation
# ---------------------------------------------------------------------------

def _success_family(probe: FockVector, p: int):
    return lambda g: conditional_state(probe, NlaParams(g=g, p=p), SUCCESS).state


def _failure_family(probe: FockVector, p: int):
    return lambda g: conditional_state(probe, NlaParams(g=g, p=p), FAILURE).state


def _joint_family(probe: FockVector, p: int, meter: MeterState):
    return lambda g: FockVector(joint_state(probe, NlaParams(g=g, p=p), meter).as_vector())


def _unconditional_family(probe: FockVector, p: int):
    return lambda g: unconditional_state(probe, NlaParams(g=g, p=p))


def generate_golden_reports() -> list[OracleReport]:
    """Analytic-vs-oracle rows behind every number pinned in the test suite."""
    reports: list[OracleReport] = []
    add = reports.append

    vacuum, _ = custom_probe([1.0])
    two_level, _ = custom_probe([1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)])
    one_photon, _ = custom_probe([0.0, 1.0])
    coh1 = ProbeSpec.from_nbar("coherent", 1.0).build()
    sq1 = ProbeSpec.from_nbar("squeezed-vacuum", 1.0).build()
    g2p1 = NlaParams(g=2.0, p=1)
    g2p3 = NlaParams(g=2.0, p=3)
    g15p2 = NlaParams(g=1.5, p=2)

    # --- hand-derived operating points -------------------------------------
    vac = qfi_effective(vacuum, g2p1)
    add(OracleReport.build(
        "vacuum g=2 p=1: success probability",
        branch_probability(vacuum, g2p1, SUCCESS), 0.25, 0.0, 1e-9, scale_floor=1.0,
        note="hand value g^-2p",
    ))
    add(OracleReport.build(
        "vacuum g=2 p=1: herald information f_c",
        vac.f_c, 1.0 / 3.0, 0.0, 1e-9, note="hand value 4 g^-4 / (1 - g^-2)",
    ))
    add(OracleReport.build(
        "vacuum g=2 p=1: q_eff closed form",
        vac.q_eff, 1.0 / 3.0, 0.0, 1e-9, note="hand value; equals f_c here",
    ))
    add(OracleReport.build(
        "vacuum g=2 p=1: q_s", vac.q_s, 0.0, 0.0, 1e-9, scale_floor=1.0,
        note="success state is gain independent",
    ))
    add(OracleReport.build(
        "vacuum g=2 p=1: q_f", vac.q_f, 0.0, 0.0, 1e-9, scale_floor=1.0,
        note="failure state is |0>",
    ))
    add(OracleReport.build(
        "vacuum g=2 p=1: q_unc", vac.q_unc, 0.0, 0.0, 1e-9, scale_floor=1.0,
        note="unconditional state is |0><0| for every gain",
    ))
    add(OracleReport.build(
        "vacuum g=1.5 p=2: q_eff closed form",
        qfi_effective_closed_form(vacuum, g15p2),
        4.0 * 4.0 * 1.5 ** (-6.0) / (1.0 - 1.5 ** (-4.0)),
        0.0, 1e-12, note="single-term closed form evaluated inline",
    ))

    two = qfi_effective(two_level, g2p1)
    add(OracleReport.build(
        "two-level g=2 p=1: success probability",
        branch_probability(two_level, g2p1, SUCCESS), 0.625, 0.0, 1e-9, scale_floor=1.0,
        note="hand value (g^-2 + 1)/2",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: q_s", two.q_s, 0.16, 0.0, 1e-9, scale_floor=1.0,
        note="hand value 0.2 - 0.04",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: q_f", two.q_f, 0.0, 0.0, 1e-9, scale_floor=1.0,
        note="failure state is |0>",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: f_c", two.f_c, 1.0 / 15.0, 0.0, 1e-9, scale_floor=1.0,
        note="hand value 0.125^2 (1/0.625 + 1/0.375)",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: q_eff", two.q_eff, 1.0 / 6.0, 0.0, 1e-9, scale_floor=1.0,
        note="hand value 0.1 + 0 + 1/15",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: rescaled post-selected information ps_qs",
        two.ps_qs, 0.1, 0.0, 1e-9, note="hand value 0.625 * 0.16",
    ))

    # --- probe amplitude round trips ----------------------------------------
    for kind, nbar in (("coherent", 1.0), ("squeezed-vacuum", 1.5)):
        amp = solve_amplitude_for_nbar(kind, nbar)
        probe = ProbeSpec(kind=kind, amplitude=amp).build()
        add(OracleReport.build(
            f"{kind} amplitude for nbar={nbar:g}: mean-photon round trip",
            probe.mean_photon(), nbar, 0.0, 1e-9, scale_floor=1.0,
            note=f"amplitude {amp!r}",
        ))

    # --- finite-difference cross-checks -------------------------------------
    add(OracleReport.build(
        "two-level g=2 p=1: q_s vs pure-state fidelity FD",
        two.q_s, qfi_fd_pure(_success_family(two_level, 1), 2.0, DEFAULT_QFI_STEP),
        DEFAULT_QFI_STEP, 1e-5,
    ))
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: q_eff vs joint-state fidelity FD",
        qfi_effective_closed_form(coh1, g2p3),
        qfi_fd_pure(_joint_family(coh1, 3, MeterState.trivial()), 2.0, DEFAULT_QFI_STEP),
        DEFAULT_QFI_STEP, 1e-5,
    ))
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: q_s vs pure-state fidelity FD",
        qfi_branch(coh1, g2p3, SUCCESS),
        qfi_fd_pure(_success_family(coh1, 3), 2.0, DEFAULT_QFI_STEP),
        DEFAULT_QFI_STEP, 1e-5,
    ))
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: q_f vs pure-state fidelity FD",
        qfi_branch(coh1, g2p3, FAILURE),
        qfi_fd_pure(_failure_family(coh1, 3), 2.0, DEFAULT_QFI_STEP),
        DEFAULT_QFI_STEP, 1e-5,
    ))
    q_unc_coh = qfi_unconditional(coh1, g2p3)
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: q_unc vs Bures fidelity FD",
        q_unc_coh,
        qfi_fd_mixed_richardson(_unconditional_family(coh1, 3), 2.0, STEP_MAX),
        STEP_MAX, 1e-5,
        note="this oracle fixes the pinned q_unc value; Richardson pair "
        "(1e-3, 5e-4)",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: pure vs mixed fidelity FD on the success family",
        qfi_fd_pure(_success_family(two_level, 1), 2.0, DEFAULT_QFI_STEP),
        qfi_fd_mixed(
            lambda g: DensityOperator.from_pure(_success_family(two_level, 1)(g)),
            2.0,
            DEFAULT_QFI_STEP,
        ),
        DEFAULT_QFI_STEP, 1e-6, note="oracle self-consistency on a rank-1 family",
    ))

    # --- generic meter -------------------------------------------------------
    meter = MeterState(alpha=1.0 / math.sqrt(2.0), beta=1j / math.sqrt(2.0))
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: joint QFI with quarter-cycle meter vs FD",
        qfi_joint_meter(coh1, g2p3, meter),
        qfi_fd_pure(_joint_family(coh1, 3, meter), 2.0, DEFAULT_QFI_STEP),
        DEFAULT_QFI_STEP, 1e-5,
        note="fixes the pinned meter-gap value",
    ))
    x_vac = meter_coupling_term(vacuum, g2p1)
    add(OracleReport.build(
        "vacuum g=2 p=1: maximal meter erases exactly q_eff",
        4.0 * x_vac * x_vac,
        qfi_effective_closed_form(vacuum, g2p1), 0.0, 1e-12, scale_floor=1.0,
        note="the joint QFI gap 16 Im^2 X^2 at |Im| = 1/2 equals q_eff here, "
        "so a quarter-cycle meter leaves zero information",
    ))

    # --- direct joint-record Fisher information ------------------------------
    add(OracleReport.build(
        "one-photon g=2 p=1: photon-counting joint record FI",
        joint_fi_direct(one_photon, g2p1, PHOTON_COUNTING), 0.0, PROB_STEP, 1e-9,
        scale_floor=1.0,
        note="deterministic instrument: no information",
    ))
    add(OracleReport.build(
        "vacuum g=2 p=1: photon-counting joint record FI vs q_eff",
        qfi_effective_closed_form(vacuum, g2p1),
        joint_fi_direct(vacuum, g2p1, PHOTON_COUNTING),
        PROB_STEP, 1e-5,
    ))
    add(OracleReport.build(
        "squeezed nbar=1 g=1.5 p=2: homodyne joint record FI vs q_eff",
        qfi_effective_closed_form(sq1, g15p2),
        joint_fi_direct(sq1, g15p2, HOMODYNE),
        PROB_STEP, 1e-5,
    ))
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: photon-counting joint record FI vs q_eff",
        qfi_effective_closed_form(coh1, g2p3),
        joint_fi_direct(coh1, g2p3, PHOTON_COUNTING),
        PROB_STEP, 1e-5,
    ))

    # --- probability derivatives ---------------------------------------------
    for name, probe, params in (
        ("two-level g=2 p=1", two_level, g2p1),
        ("squeezed nbar=1 g=1.5 p=2", sq1, g15p2),
    ):
        for branch in (SUCCESS, FAILURE):
            add(OracleReport.build(
                f"{name}: d p_{branch}/dg vs central difference",
                branch_probability_derivative(probe, params, branch),
                probability_derivative_fd(probe, params, branch),
                PROB_STEP, 1e-7,
            ))

    # --- homodyne density spot values ----------------------------------------
    add(OracleReport.build(
        "vacuum g=2 p=1: success homodyne density at x=0",
        homodyne_density(vacuum, g2p1, SUCCESS, 0.0),
        1.0 / math.sqrt(math.pi), 0.0, 1e-12, scale_floor=1.0,
        note="ground-state density pi^-1/2 e^-x^2 at the origin",
    ))
    add(OracleReport.build(
        "two-level g=2 p=1: success homodyne density at x=0",
        homodyne_density(two_level, g2p1, SUCCESS, 0.0),
        0.2 / math.sqrt(math.pi), 0.0, 1e-12, scale_floor=1.0,
        note="only the n=0 amplitude contributes at the origin",
    ))
    add(OracleReport.build(
        "coherent nbar=1 g=2 p=3: meter coupling term X vs central difference",
        meter_coupling_term(coh1, g2p3),
        _coupling_fd(coh1, g2p3),
        PROB_STEP, 1e-7,
        note="provenance of the pinned meter-gap value",
    ))
    return reports


def reports_payload(reports: list[OracleReport]) -> dict:
    return {
        "schema_version": GOLDEN_SCHEMA_VERSION,
        "reports": [r.as_dict() for r in reports],
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m nlametro.oracles",
        description="Regenerate the golden oracle-report fixture.",
    )
    parser.add_argument("--out", type=pathlib.Path, default=None,
                        help="write JSON here instead of stdout")
    args = parser.parse_args(argv)
    reports = generate_golden_reports()
    text = json.dumps(reports_payload(reports), indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    failures = [r for r in reports if not r.passes()]
    for rep in failures:
        print(
            f"FAIL {rep.quantity}: analytic {rep.analytic!r} oracle {rep.oracle!r} "
            f"rel {rep.rel_error:.3e} > tol {rep.tol:g}",
            file=sys.stderr,
        )
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
