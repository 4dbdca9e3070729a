"""Newton solver that pins selected sector eigenvalues at a Landau level.

Given J sectors m_1 < ... < m_J, 2J annuli (one alternating-sign pair per
sector) and fixed odd couplings u_j != 0, the solver tunes the J even
couplings so that every selected sector keeps its tracked eigenvalue
exactly at 2bq:

    F_j(t) = E_q(v_t; m_j) - 2bq = 0,   j = 1..J.

The Jacobian is the matrix of first-order responses, refreshed at each
iterate from the current Galerkin eigenvector (at t = 0 this reduces
exactly to the closed-form annulus overlaps).  Steps are halved until the
sup norm stays below b and the residual decreases.

Eigenvalues are evaluated through the deterministic truncation policy, so
a certificate can be recomputed from scratch, bit for bit, from the
potential alone.  Residuals certify the recorded truncation; the
displacement contrast against unpinned sectors is what carries the
evidence.  Working sectors must be chosen so their responses are resolvable
in double precision; the dyadic construction's own sectors 2^(N j^2) - 1
fall below that floor for j >= 2 and live in the analytic Jacobian instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    StructureError,
    ValidationError,
)
from .landau_basis import m_minus, overlap
from .radial_potential import Annulus, StepPotential, construction_annuli
from .sector_solver import SectorRow, policy_eigenvalue, potential_matrix

_MAX_ITER = 50
_MAX_HALVINGS = 40
_RESPONSE_FLOOR = 1e-12


@dataclass(frozen=True)
class PinningProblem:
    """J sectors, their annulus pairs, fixed odd couplings, and a tolerance."""

    b: float
    q: int
    sectors: tuple
    annuli: tuple  # 2J (r_inner, r_outer) pairs; pair j = annuli[2j-2], annuli[2j-1]
    fixed_odd: tuple
    tol: float

    def __init__(self, b, q, sectors, annuli, fixed_odd, tol=None):
        if not (isinstance(b, (int, float)) and b > 0 and math.isfinite(b)):
            raise ValidationError(f"field strength b must be positive, got {b!r}")
        if not (isinstance(q, int) and q >= 0):
            raise ValidationError(f"q must be a nonnegative integer, got {q!r}")
        sectors = tuple(int(m) for m in sectors)
        if len(sectors) < 1:
            raise ValidationError("need at least one sector")
        if any(s2 <= s1 for s1, s2 in zip(sectors, sectors[1:])):
            raise ValidationError(f"sectors must be strictly increasing, got {sectors}")
        for m in sectors:
            if q < m_minus(m):
                raise ValidationError(f"level q={q} not admissible in sector m={m}")
        J = len(sectors)
        annuli = tuple((float(lo), float(hi)) for lo, hi in annuli)
        if len(annuli) != 2 * J:
            raise ValidationError(f"need 2J = {2 * J} annuli, got {len(annuli)}")
        for i, (lo, hi) in enumerate(annuli):
            if not (0.0 <= lo < hi < math.inf):
                raise ValidationError(f"annuli[{i}]: need 0 <= inner < outer, got ({lo}, {hi})")
        fixed_odd = tuple(float(u) for u in fixed_odd)
        if len(fixed_odd) != J:
            raise ValidationError(f"need J = {J} odd couplings, got {len(fixed_odd)}")
        if any(u == 0.0 or not math.isfinite(u) for u in fixed_odd):
            raise ValidationError(
                "every odd coupling must be nonzero (t = 0 pins nothing: the "
                "potential would vanish identically)"
            )
        if any(not abs(u) < b / 2.0 for u in fixed_odd):
            raise ValidationError("odd couplings must lie in (-b/2, b/2)")
        tol = 1e-10 * b if tol is None else float(tol)
        if not (tol > 0 and math.isfinite(tol)):
            raise ValidationError(f"tol must be positive, got {tol!r}")
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "sectors", sectors)
        object.__setattr__(self, "annuli", annuli)
        object.__setattr__(self, "fixed_odd", fixed_odd)
        object.__setattr__(self, "tol", tol)

    @property
    def J(self) -> int:
        return len(self.sectors)

    def potential(self, evens) -> StepPotential:
        annuli = []
        for j in range(self.J):
            lo, hi = self.annuli[2 * j]
            annuli.append(Annulus(lo, hi, -self.fixed_odd[j]))
            lo, hi = self.annuli[2 * j + 1]
            annuli.append(Annulus(lo, hi, float(evens[j])))
        return StepPotential(annuli)

    def couplings(self, evens) -> tuple:
        out = []
        for j in range(self.J):
            out.append(self.fixed_odd[j])
            out.append(float(evens[j]))
        return tuple(out)


def problem_from_construction(b, q, sectors, N, fixed_odd, tol=None) -> PinningProblem:
    """Problem whose 2J annuli come from the dyadic radii at scale N."""
    return PinningProblem(
        b, q, sectors, construction_annuli(N, len(tuple(sectors))), fixed_odd, tol
    )


@dataclass(frozen=True)
class PinningCertificate:
    """Machine-checkable evidence record, recomputable from the potential."""

    b: float
    q: int
    sectors: tuple
    t_solution: tuple
    residuals: tuple
    pinned_rows: tuple
    sup_norm: float
    sign_indefinite: bool
    pinned_count: int
    unpinned_scan: tuple
    tol: float
    potential: StepPotential

    def to_dict(self) -> dict:
        from .radial_potential import potential_to_dict

        def rows(rr):
            return [
                {
                    "m": r.m,
                    "E": r.E,
                    "displacement": r.displacement,
                    "Q_used": r.Q_used,
                    "residual": r.residual,
                }
                for r in rr
            ]

        return {
            "b": self.b,
            "q": self.q,
            "sectors": list(self.sectors),
            "t_solution": list(self.t_solution),
            "residuals": list(self.residuals),
            "pinned_rows": rows(self.pinned_rows),
            "sup_norm": self.sup_norm,
            "sign_indefinite": self.sign_indefinite,
            "pinned_count": self.pinned_count,
            "unpinned_scan": rows(self.unpinned_scan),
            "tol": self.tol,
            "potential": potential_to_dict(self.potential),
        }


def _couplings_from_potential(v: StepPotential) -> tuple:
    # the alternating-sign convention: odd annuli carry -t, even ones +t
    return tuple(
        -a.height if k % 2 == 0 else a.height for k, a in enumerate(v.annuli)
    )


def certify(
    v: StepPotential,
    b: float,
    q: int,
    pinned_sectors,
    scan_range,
    tol: float,
    t_solution=None,
) -> PinningCertificate:
    """Recompute every certificate field from the potential alone.

    pinned_count counts all admissible sectors in pinned_sectors or
    scan_range whose tracked eigenvalue sits at 2bq within tol.
    """
    pinned = tuple(int(m) for m in pinned_sectors)
    scan = sorted(set(int(m) for m in scan_range) - set(pinned))
    if t_solution is None:
        t_solution = _couplings_from_potential(v)

    def row(m: int) -> SectorRow:
        res, _, _ = policy_eigenvalue(b, q, m, v, tol)
        return SectorRow(
            m=m,
            E=res.E,
            displacement=res.E - 2.0 * b * q,
            Q_used=res.Q_used,
            residual=res.residual,
        )

    pinned_rows = tuple(row(m) for m in pinned)
    unpinned = tuple(row(m) for m in scan if q >= m_minus(m))
    lo, hi = v.ess_range()
    count = sum(
        1 for r in pinned_rows + unpinned if abs(r.displacement) <= tol
    )
    return PinningCertificate(
        b=b,
        q=q,
        sectors=pinned,
        t_solution=tuple(t_solution),
        residuals=tuple(abs(r.displacement) for r in pinned_rows),
        pinned_rows=pinned_rows,
        sup_norm=v.sup_norm(),
        sign_indefinite=lo < 0.0 < hi,
        pinned_count=count,
        unpinned_scan=unpinned,
        tol=tol,
    potential=v,
    )


def _responses(p: PinningProblem) -> np.ndarray:
    """First-order response of each sector to each of its problem's annuli."""
    J = p.J
    R = np.zeros((J, 2 * J))
    for j, m in enumerate(p.sectors):
        qp = p.q - m_minus(m)
        for k in range(2 * J):
            lo, hi = p.annuli[k]
            R[j, k] = overlap(qp, abs(m), p.b, lo, hi)
    return R


def solve_pinning(p: PinningProblem) -> tuple[tuple, PinningCertificate]:
    """Damped Newton on the even couplings; returns (couplings, certificate)."""
    R = _responses(p)
    for j, m in enumerate(p.sectors):
        for k in (2 * j, 2 * j + 1):
            if not R[j, k] >= _RESPONSE_FLOOR * p.b:
                raise ValidationError(
                    f"sector m={m} response {R[j, k]:.3e} to annulus {k + 1} is "
                    f"below the resolvable floor {_RESPONSE_FLOOR * p.b:.1e}; "
                    "choose smaller sectors or wider annuli"
                )

    b, q = p.b, p.q
    x = np.zeros(p.J)

    def evaluate(evens):
        v = p.potential(evens)
        if not v.sup_norm() < b:
            return v, None, None
        F = np.empty(p.J)
        jac = np.empty((p.J, p.J))
        for j, m in enumerate(p.sectors):
            res, vec, model = policy_eigenvalue(b, q, m, v, p.tol)
            F[j] = res.E - 2.0 * b * q
            for k in range(p.J):
                lo, hi = p.annuli[2 * k + 1]
                A = potential_matrix(model, lo, hi)
                jac[j, k] = vec @ (A @ vec)
        return v, F, jac

    v, F, jac = evaluate(x)
    if F is None:
        raise InfeasibleError("initial odd couplings already violate sup|v| < b")

    for _ in range(_MAX_ITER):
        if np.abs(F).max() <= p.tol:
            cert = certify(
                v,
                b,
                q,
                p.sectors,
                range(-q, max(p.sectors) + 4),
                p.tol,
                t_solution=p.couplings(x),
            )
            if not cert.sign_indefinite:
                raise InfeasibleError(
                    "converged potential is sign-definite; pinning evidence "
                    "requires both signs (check the odd couplings)"
                )
            return p.couplings(x), cert
        try:
            dx = np.linalg.solve(jac, -F)
        except np.linalg.LinAlgError as exc:
            raise StructureError(f"singular pinning Jacobian: {exc}") from None
        lam = 1.0
        best = np.abs(F).max()
        for _h in range(_MAX_HALVINGS):
            cand = x + lam * dx
            v2, F2, jac2 = evaluate(cand)
            if F2 is None:
                lam *= 0.5
                continue
            if np.abs(F2).max() < best or np.abs(F2).max() <= p.tol:
                x, v, F, jac = cand, v2, F2, jac2
                break
            lam *= 0.5
        else:
            if F2 is None:
                raise InfeasibleError(
                    "cannot keep sup|v| < b along the Newton direction"
                )
            raise ConvergenceError("Newton step stalled without residual decrease")
    raise ConvergenceError(f"no convergence to {p.tol} within {_MAX_ITER} iterations")
