import json
import math
import pathlib

import numpy as np
import pytest

from nlametro.fock import DensityOperator, FockVector
from nlametro.instrument import (
    FAILURE,
    SUCCESS,
    NlaParams,
    branch_probability_derivative,
    conditional_state,
    unconditional_state,
)
from nlametro.fisher import qfi_branch, qfi_effective_closed_form, qfi_unconditional
from nlametro.oracles import (
    DEFICIT_FLOOR,
    OracleReport,
    StepTooSmall,
    ZERO_DEFICIT_BAND,
    generate_golden_reports,
    joint_fi_direct,
    mixed_certifiable_tol,
    overlap_deficit,
    probability_derivative_fd,
    qfi_fd_mixed,
    qfi_fd_mixed_richardson,
    qfi_fd_pure,
    qfi_step_for,
    resolution_floor,
)
from nlametro.probes import ProbeSpec

GOLDEN = pathlib.Path(__file__).parent / "data" / "golden.json"


def test_shipped_golden_fixture_regenerates_exactly():
    payload = json.loads(GOLDEN.read_text())
    regenerated = generate_golden_reports()
    assert len(payload["reports"]) == len(regenerated)
    for shipped, fresh in zip(payload["reports"], regenerated):
        assert shipped["quantity"] == fresh.quantity
        assert fresh.passes(), fresh.quantity
        for field in ("analytic", "oracle"):
            a, b = shipped[field], getattr(fresh, field)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-300), (
                f"{fresh.quantity}: {field} drifted {a} -> {b}"
            )


def test_fd_pure_zero_for_constant_family():
    family = lambda g: FockVector([0.6, 0.8])
    assert qfi_fd_pure(family, 2.0, 1e-4) == 0.0


def test_fd_pure_step_too_small_band():
    # family engineered so the overlap deficit lands inside the refusal band
    def family(g):
        c = 1e-4 * g
        return FockVector(np.array([1.0, c]) / math.hypot(1.0, c))

    # deficit ~ (1e-4)^2 (1e-3)^2 / 2 = 5e-15, inside [1e-15, 2.2e-14)
    with pytest.raises(StepTooSmall):
        qfi_fd_pure(family, 2.0, 1e-3)
    assert ZERO_DEFICIT_BAND < 5e-15 < DEFICIT_FLOOR


def test_fd_step_validation():
    family = lambda g: FockVector([1.0])
    for bad in (1e-7, 5e-3, 0.0):
        with pytest.raises(ValueError):
            qfi_fd_pure(family, 2.0, bad)


def test_overlap_deficit_cancellation_free():
    a = FockVector([1.0, 0.0])
    b = FockVector(np.array([math.sqrt(1 - 1e-20), 1e-10]))
    d = overlap_deficit(a, b)
    assert d == pytest.approx(5e-21, rel=1e-6)


def test_fd_matches_analytic_branch_qfi(two_level, g2p1):
    def family(g):
        return conditional_state(two_level, NlaParams(g=g, p=1), SUCCESS).state

    fd = qfi_fd_pure(family, 2.0, 1e-4)
    assert fd == pytest.approx(0.16, rel=1e-6)


def test_fd_mixed_consistent_on_rank_one(coherent_nbar1):
    def pure_family(g):
        return conditional_state(coherent_nbar1, NlaParams(g=g, p=3), SUCCESS).state

    def mixed_family(g):
        return DensityOperator.from_pure(pure_family(g))

    pure = qfi_fd_pure(pure_family, 2.0, 1e-4)
    mixed = qfi_fd_mixed(mixed_family, 2.0, 1e-4)
    assert mixed == pytest.approx(pure, rel=1e-6)


def test_richardson_beats_plain_mixed_fd(coherent_nbar1):
    params = NlaParams(g=2.0, p=3)
    analytic = qfi_unconditional(coherent_nbar1, params)

    def family(g):
        return unconditional_state(coherent_nbar1, NlaParams(g=g, p=3))

    rich = qfi_fd_mixed_richardson(family, 2.0, 1e-3)
    plain = qfi_fd_mixed(family, 2.0, 1e-3)
    assert abs(rich - analytic) < abs(plain - analytic)
    assert rich == pytest.approx(analytic, rel=1e-6)


def test_probability_derivative_fd(squeezed_nbar1):
    params = NlaParams(g=1.5, p=2)
    fd = probability_derivative_fd(squeezed_nbar1, params, SUCCESS)
    analytic = branch_probability_derivative(squeezed_nbar1, params, SUCCESS)
    assert fd == pytest.approx(analytic, rel=1e-8)


def test_joint_fi_direct_reference_points(vacuum, g2p1):
    # uninformative probe: zero joint information
    one = FockVector([0.0, 1.0])
    assert joint_fi_direct(one, g2p1, "photon-counting") == pytest.approx(0.0, abs=1e-12)
    # vacuum at g=2, p=1: q_eff = 1/3
    assert joint_fi_direct(vacuum, g2p1, "photon-counting") == pytest.approx(
        1.0 / 3.0, rel=1e-5
    )
    probe = ProbeSpec.from_nbar("squeezed-vacuum", 1.0).build()
    params = NlaParams(g=1.5, p=2)
    assert joint_fi_direct(probe, params, "homodyne") == pytest.approx(
        qfi_effective_closed_form(probe, params), rel=1e-5
    )


def test_oracle_report_scale_floor_semantics():
    rep = OracleReport.build("zeroish", analytic=1e-33, oracle=0.0, step=0.0, tol=1e-9)
    assert rep.rel_error == 1.0  # plain relative error explodes on zeros
    floored = OracleReport.build(
        "zeroish", analytic=1e-33, oracle=0.0, step=0.0, tol=1e-9, scale_floor=1.0
    )
    assert floored.rel_error == pytest.approx(1e-33)
    assert floored.scale_floor == 1.0
    assert floored.passes()


def test_step_policy_and_certifiable_tol():
    assert qfi_step_for(1.0) == 1e-4
    assert qfi_step_for(1e-3) == 1e-3
    assert resolution_floor(1e-3) == pytest.approx(8 * 100 * 2.0 ** -53 / 1e-6)
    base = mixed_certifiable_tol(1.0, 1e-3, 1e-5)
    assert base == 1e-5  # large signals keep the row tolerance
    widened = mixed_certifiable_tol(1e-6, 1e-3, 1e-5)
    assert widened > 1e-5
    assert mixed_certifiable_tol(1e-6, 1e-3, 1e-5, richardson=True) == pytest.approx(
        widened * 17.0 / 3.0
    )
