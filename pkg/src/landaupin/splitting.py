"""Toeplitz eigenvalues of the disk compression and splitting evidence.

Compressing the indicator of a disk of radius r to the q-th Landau
eigenspace gives an operator that is diagonal in the angular-momentum
decomposition; its eigenvalue in sector m is the in-disk mass

    lambda_{q,m} = overlap(q - m_-, |m|, b, 0, r)  in (0, 1),

for q = 0 and m >= 0 simply the regularized incomplete gamma
P(m+1, b r^2 / 2).  Their sum over all sectors is the trace b r^2 / 2,
the same for every q.

A sign-definite perturbation +-t c chi_r therefore pushes every tracked
sector eigenvalue strictly off the Landau level, at first order by
+-t c lambda_{q,m}.  Exact kernels cannot be decided in floating point;
the scan asserts strict signed displacements only where the first-order
prediction exceeds a quantified floor and reports the rest as unresolved
(those eigenvalues accumulate to the level from one side).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, EvidenceError
from .landau_basis import m_minus, overlap
from .radial_potential import disk_potential
from .sector_solver import policy_eigenvalue

# Displacements whose first-order prediction falls below this multiple of b
# are reported, not asserted.
RESOLUTION_FLOOR = 1e-9


@dataclass(frozen=True)
class ToeplitzSpectrum:
    """Explicit eigenvalues of the disk compression, indexed by sector."""

    q: int
    b: float
    r: float
    lambdas: dict

    def partial_sum(self) -> float:
        return math.fsum(self.lambdas.values())


def toeplitz_eigs(b: float, q: int, r: float, m_lo: int, m_hi: int) -> ToeplitzSpectrum:
    """lambda_{q,m} for m in [m_lo, m_hi] (sectors below -q are inadmissible)."""
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"disk radius must be positive and finite, got {r!r}")
    if m_lo > m_hi:
        raise DomainError(f"empty sector range [{m_lo}, {m_hi}]")
    if m_lo < -q:
        raise DomainError(f"sector range must start at m >= -q = {-q}, got {m_lo}")
    lambdas = {}
    for m in range(m_lo, m_hi + 1):
        lambdas[m] = overlap(q - m_minus(m), abs(m), b, 0.0, r)
    return ToeplitzSpectrum(q=q, b=b, r=r, lambdas=lambdas)


@dataclass(frozen=True)
class TraceCheck:
    """Partial trace against the exact value b r^2 / 2, with a tail bound."""

    partial_sum: float
    target: float
    gap: float
    tail_bound: float


def trace_check(spectrum: ToeplitzSpectrum) -> TraceCheck:
    """Sum of scanned eigenvalues vs the trace b r^2 / 2.

    The unscanned tail (m above the scanned window) is bounded by
    binom(q+m, q) s^(m+1) / (m+1)! summed geometrically, which is rigorous
    since |L_q^(m)(x)| <= L_q^(m)(0) e^(x/2) on x >= 0.
    """
    if not spectrum.lambdas:
        raise DomainError("cannot trace-check an empty spectrum")
    q, b, r = spectrum.q, spectrum.b, spectrum.r
    s = 0.5 * b * r * r
    target = s
    partial = spectrum.partial_sum()
    m_top = max(spectrum.lambdas)
    mt = m_top + 1
    log_t = (
        math.lgamma(q + mt + 1)
        - math.lgamma(q + 1)
        - math.lgamma(mt + 1)
        + (mt + 1) * math.log(s)
        - math.lgamma(mt + 2)
    )
    rho = ((q + mt + 1) / (mt + 1)) * (s / (mt + 2))
    tail = math.exp(log_t) / (1.0 - rho) if rho < 1.0 else math.inf
    return TraceCheck(
        partial_sum=partial, target=target, gap=target - partial, tail_bound=tail
    )


@dataclass(frozen=True)
class ScanRow:
    """One cell of the splitting-evidence table."""

    t: float
    m: int
    E: float
    displacement: float
    first_order: float
    resolved: bool


def splitting_scan(
    b: float, q: int, sign: str, c: float, r: float, t_grid, m_range
) -> list[ScanRow]:
    """Displacement table for H0 +- t c chi_r over a (t, m) grid.

    Every resolved cell (first-order prediction above the floor) must show
    a strictly signed displacement matching the perturbation sign, else
    EvidenceError.  Cells below the floor are recorded as unresolved.
    """
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    if not (c > 0 and math.isfinite(c)):
        raise DomainError(f"disk height c must be positive, got {c!r}")
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"disk radius must be positive, got {r!r}")
    t_grid = [float(t) for t in t_grid]
    if any(t < 0 for t in t_grid):
        raise DomainError("scan couplings t must be nonnegative")
    if sign == "-" or q >= 1:
        if not c < 2.0 * b:
            raise DomainError(
                f"disk height c={c} violates the validation bound c < 2b = {2 * b}"
            )
    t_max = max(t_grid, default=0.0)
    if not c * t_max < b:
        raise DomainError(
            f"solver window requires c * max(t) < b, got {c * t_max} >= {b}"
        )

    sgn = 1.0 if sign == "+" else -1.0
    ms = [m for m in sorted(set(int(x) for x in m_range)) if q >= m_minus(m)]
    lam = {m: overlap(q - m_minus(m), abs(m), b, 0.0, r) for m in ms}

    rows: list[ScanRow] = []
    for t in t_grid:
        for m in ms:
            d1 = sgn * t * c * lam[m]
            resolved = abs(d1) > RESOLUTION_FLOOR * b
            if t == 0.0:
                rows.append(ScanRow(t, m, 2.0 * b * q, 0.0, 0.0, False))
                continue
            tol_row = min(1e-7 * b, max(1e-13 * b, 1e-5 * abs(d1)))
            res, _, _ = policy_eigenvalue(
                b, q, m, disk_potential(sgn * t * c, r), tol=tol_row
            )
            disp = res.E - 2.0 * b * q
            if resolved and (disp == 0.0 or math.copysign(1.0, disp) != sgn):
                raise EvidenceError(
                    f"resolved displacement has the wrong sign at t={t}, m={m}: "
                    f"d={disp}, first-order {d1}"
                )
            rows.append(ScanRow(t, m, res.E, disp, d1, resolved))
    return rows
