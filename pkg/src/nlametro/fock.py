"""Finite Fock-space states, operators, and quadrature utilities.

Everything downstream works in a truncated number basis: a pure state is a
1-D array of amplitudes ``c_n`` (n = 0 .. dim-1), a mixed state is a Hermitian
matrix in the same basis.  This module owns the two wrapper types plus the
numerical plumbing they need: normalized position wavefunctions <x|n>,
eigendecomposition, Uhlmann fidelity, and composite Gauss-Legendre quadrature
grids for integrals over the quadrature variable x.
"""

from __future__ import annotations

import dataclasses
import math

import mpmath
import numpy as np

# Tolerances used for type-level validation.  Hermiticity is enforced on
# construction; trace/positivity are only checked where physicality matters
# (fidelity), since the positivity check costs an eigendecomposition.
HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

# Eigenvalues below RANK_TOL * (largest eigenvalue) are treated as numerical
# zeros when a decomposition needs an effective rank.
RANK_TOL = 1e-12


class NonHermitianInput(ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class NonPhysicalState(ValueError):
    """A density operator fails trace or positivity validation."""


def _as_amplitudes(amps) -> np.ndarray:
    arr = np.array(amps, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("amplitudes must form a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("amplitudes must be finite")
    arr.setflags(write=False)
    return arr


@dataclasses.dataclass(frozen=True)
class FockVector:
    """Pure state in a truncated number basis.

    ``amps[n]`` is the amplitude on level ``n``.  The vector is not forced to
    be normalized at construction (derivative vectors reuse the type), but
    most consumers call :meth:`require_normalized` first.
    """

    amps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amps", _as_amplitudes(self.amps))

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def require_normalized(self, tol: float = NORM_TOL) -> "FockVector":
        if not self.is_normalized(tol):
            raise ValueError(
                f"state norm {self.norm():.12g} differs from 1 beyond {tol:g}"
            )
        return self

    def normalized(self) -> "FockVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.amps / nrm)

    def weights(self) -> np.ndarray:
        """Occupation probabilities |c_n|^2."""
        return np.abs(self.amps) ** 2

    def mean_photon(self) -> float:
        w = self.weights()
        return float(np.sum(np.arange(self.dim) * w) / np.sum(w))

    def overlap(self, other: "FockVector") -> complex:
        """<self|other>, padding the shorter vector with zeros."""
        n = min(self.dim, other.dim)
        return complex(np.vdot(self.amps[:n], other.amps[:n]))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.amps.imag)) <= tol)


@dataclasses.dataclass(frozen=True)
class DensityOperator:
    """Mixed state in a truncated number basis.

    Hermiticity is validated on construction (cheap); trace and positivity
    are validated by :meth:`require_physical` where a caller needs them.
    """

    mat: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mat, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValueError("density operator must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(arr))))
        defect = float(np.max(np.abs(arr - arr.conj().T)))
        if defect > HERMITICITY_TOL * scale:
            raise NonHermitianInput(
                f"hermiticity defect {defect:.3g} exceeds {HERMITICITY_TOL:g} * scale"
            )
        # Store the Hermitian part so downstream eigendecompositions see an
        # exactly Hermitian matrix.
        arr = 0.5 * (arr + arr.conj().T)
        arr.setflags(write=False)
        object.__setattr__(self, "mat", arr)

    @classmethod
    def from_pure(cls, state: FockVector) -> "DensityOperator":
        a = state.amps
        return cls(np.outer(a, a.conj()))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def require_physical(
        self, trace_tol: float = TRACE_TOL, psd_tol: float = PSD_TOL
    ) -> "DensityOperator":
        if abs(self.trace() - 1.0) > trace_tol:
            raise NonPhysicalState(f"trace {self.trace():.12g} differs from 1")
        w = np.linalg.eigvalsh(self.mat)
        if w[0] < -psd_tol:
            raise NonPhysicalState(f"most negative eigenvalue {w[0]:.3g}")
        return self


def eigh(rho: DensityOperator) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a density operator.

    Returns ``(values, vectors)`` with eigenvalues sorted in descending
    order and the matching orthonormal eigenvectors as the *columns* of
    ``vectors``.
    """
    vals, vecs = np.linalg.eigh(rho.mat)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def _support_decomposition(rho: DensityOperator, rank_tol: float):
    """Eigenpairs above the numerical-rank threshold, weights renormalized."""
    vals, vecs = eigh(rho)
    keep = vals > rank_tol * max(vals[0], 0.0) if vals[0] > 0 else vals > 0
    w = vals[keep]
    u = vecs[:, keep]
    if w.size == 0:
        raise NonPhysicalState("state has no positive eigenvalues")
    return w / w.sum(), u


def root_fidelity_deficit(
    rho: DensityOperator, sigma: DensityOperator, dps: int = 50
) -> float:
    """``1 - sqrt(F(rho, sigma))`` computed without catastrophic cancellation.

    For nearly identical states the deficit is quadratic in their separation
    and easily drowns in double-precision noise: the kernel of a low-rank
    state contributes O(sqrt(eps)) junk through the square roots of its
    numerically-zero eigenvalues.  This routine projects each state onto its
    numerical support, forms the small cross-Gram matrix

        M_kl = sqrt(w_k) <u_k|v_l> sqrt(w'_l)

    whose nuclear norm equals sqrt(F), and evaluates that nuclear norm in
    extended precision so the deficit survives.  Cost is a pair of ordinary
    eigendecompositions plus O(rank^2) extended-precision dot products.
    """
    w1, u1 = _support_decomposition(rho, RANK_TOL)
    w2, u2 = _support_decomposition(sigma, RANK_TOL)
    with mpmath.workdps(dps):
        cols1 = [[mpmath.mpc(z) for z in u1[:, k]] for k in range(u1.shape[1])]
        cols2 = [[mpmath.mpc(z) for z in u2[:, k]] for k in range(u2.shape[1])]
        for cols in (cols1, cols2):
            for k, col in enumerate(cols):
                nrm = mpmath.sqrt(mpmath.fsum(abs(z) ** 2 for z in col))
                cols[k] = [z / nrm for z in col]
        rw1 = [mpmath.sqrt(mpmath.mpf(x)) for x in w1]
        rw2 = [mpmath.sqrt(mpmath.mpf(x)) for x in w2]
        m = mpmath.matrix(len(cols2), len(cols1))
        for k, ck in enumerate(cols2):
            for l, cl in enumerate(cols1):
                ov = mpmath.fsum(
                    mpmath.conj(a) * b for a, b in zip(ck, cl)
                )
                m[k, l] = rw2[k] * ov * rw1[l]
        gram = m.H * m
        evals = mpmath.eighe(gram, eigvals_only=True)
        root_f = mpmath.fsum(
            mpmath.sqrt(e) for e in evals if e > 0
        )
        return float(1 - root_f)


def fidelity(rho: DensityOperator, sigma: DensityOperator, precise: bool = False) -> float:
    """Uhlmann fidelity ``F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    Both inputs are validated as physical states.  With ``precise=True`` the
    computation goes through :func:`root_fidelity_deficit`, which stays
    accurate when the states are nearly identical or rank deficient.
    """
    if rho.dim != sigma.dim:
        raise ValueError("fidelity requires states of equal dimension")
    rho.require_physical()
    sigma.require_physical()
    if precise:
        return float(min(1.0, max(0.0, (1.0 - root_fidelity_deficit(rho, sigma)) ** 2)))
    root = _sqrtm_psd(rho.mat)
    inner = root @ sigma.mat @ root
    vals = np.linalg.eigvalsh(inner)
    # Clip kernel junk: eigenvalues of magnitude ~eps would otherwise leak
    # O(sqrt(eps)) each through the square root.
    cut = max(vals[-1], 0.0) * 1e-14
    vals = np.clip(vals, 0.0, None)
    vals[vals < cut] = 0.0
    f = float(np.sum(np.sqrt(vals)) ** 2)
    return min(1.0, max(0.0, f))


# ---------------------------------------------------------------------------
# Hermite polynomials and position wavefunctions
# ---------------------------------------------------------------------------

def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by the three-term recurrence.

    ``x`` may be a scalar or an array.  Values grow like ``2^n n!`` so large
    ``n`` overflows; use :func:`position_wavefunction` for anything that needs
    the normalized product with the Gaussian envelope.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    xa = np.asarray(x, dtype=float)
    h_prev = np.ones_like(xa)
    if n == 0:
        return h_prev if isinstance(x, np.ndarray) else float(h_prev)
    h = 2.0 * xa
    for k in range(1, n):
        h, h_prev = 2.0 * xa * h - 2.0 * k * h_prev, h
    return h if isinstance(x, np.ndarray) else float(h)


def wavefunction_matrix(dim: int, x: np.ndarray) -> np.ndarray:
    """All normalized position wavefunctions ``<x|n>`` for n < dim.

    Uses the stable normalized recurrence

        psi_n(x) = x sqrt(2/n) psi_{n-1}(x) - sqrt((n-1)/n) psi_{n-2}(x)

    which keeps every row O(1), so arbitrary orders are safe.  Convention:
    ``<x|0> = pi^{-1/4} exp(-x^2/2)`` (unit-variance-free quadrature with
    ``[x, p] = i``, vacuum density variance 1/2).
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    xa = np.asarray(x, dtype=float)
    out = np.empty((dim, xa.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xa * xa)
    if dim > 1:
        out[1] = math.sqrt(2.0) * xa * out[0]
    for n in range(2, dim):
        out[n] = math.sqrt(2.0 / n) * xa * out[n - 1] - math.sqrt((n - 1.0) / n) * out[n - 2]
    return out


def position_wavefunction(n: int, x):
    """Normalized harmonic-oscillator wavefunction ``<x|n>``."""
    if n < 0:
        raise ValueError("order must be non-negative")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    val = wavefunction_matrix(n + 1, xa)[n]
    return val if isinstance(x, np.ndarray) else float(val[0])


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre grid on ``[-half_width, half_width]``.

    ``nodes``/``weights`` are ordered left to right; ``panels`` equal-width
    panels of ``order`` points each.  A grid built by
    :func:`adaptive_quadrature_grid` integrates products of the wavefunctions
    it was sized for to ~1e-9 or better.
    """

    half_width: float
    panels: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("nodes", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    def panel_sums(self, values: np.ndarray) -> np.ndarray:
        """Per-panel contributions to the integral, left to right."""
        prods = self.weights * values
        return prods.reshape(self.panels, self.order).sum(axis=1)


def build_quadrature_grid(half_width: float, panels: int, order: int = 16) -> QuadratureGrid:
    if half_width <= 0 or panels < 1 or order < 2:
        raise ValueError("invalid quadrature grid request")
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-half_width, half_width, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    centers = 0.5 * (edges[:-1] + edges[1:])
    nodes = (half * base_x[None, :] + centers[:, None]).ravel()
    weights = np.tile(half * base_w, panels)
    return QuadratureGrid(half_width, panels, order, nodes, weights)


def default_half_width(dim: int) -> float:
    """Integration half-width safely beyond the classical turning point."""
    return 6.0 + 2.0 * math.sqrt(dim)


def adaptive_quadrature_grid(
    dim: int,
    rel_tol: float = 1e-9,
    half_width: float | None = None,
    max_panels: int = 1 << 14,
) -> QuadratureGrid:
    """Refine a composite Gauss-Legendre grid until it resolves level ``dim-1``.

    The most oscillatory integrand any consumer produces is the density of
    the highest level, so the panel count is doubled until that density
    integrates to 1 within ``rel_tol`` and no longer changes between
    refinements.
    """
    if half_width is None:
        half_width = default_half_width(dim)
    panels = max(8, int(math.ceil(half_width)))
    previous = None
    while panels <= max_panels:
        grid = build_quadrature_grid(half_width, panels)
        top = wavefunction_matrix(dim, grid.nodes)[dim - 1]
        total = grid.integrate(top * top)
        if (
            previous is not None
            and abs(total - previous) <= rel_tol * abs(total)
            and abs(total - 1.0) <= rel_tol
        ):
            return grid
        previous = total
        panels *= 2
    raise RuntimeError(f"quadrature grid did not converge for dim={dim}")
