"""Landau-level structure of the unperturbed sector operators.

Sector m of the (shifted) Landau Hamiltonian at field b is the radial
operator

    H0^(m) = -(1/rho) d/drho (rho d/drho) + (m/rho - b rho/2)^2 - b

on L^2(R_+, rho drho), with spectrum {2 b q : q >= m_-}, m_- = max(0, -m),
every eigenvalue simple.  For m >= 0 the normalized eigenfunctions are

    phi_{q,m}(rho) = sqrt(q! / (pi (q+m)!) (b/2)^(m+1))
                     rho^m L_q^(m)(b rho^2 / 2) e^(-b rho^2 / 4),

normalized so that 2 pi Int phi^2 rho drho = 1.  Sectors with m < 0 share
these eigenfunctions: H0^(-|m|) = H0^(|m|) + 2 b |m|, so level q of sector
-|m| uses phi_{q - m_-, |m|}.

Overlap integrals of eigenfunction products against annuli reduce, via
s = b rho^2 / 2, to incomplete-gamma interval masses.  Three equivalent
closed forms are used depending on regime:

* full line [0, inf): exact rational orthonormality sums;
* small q (any m, including m ~ 2^(N j^2)): monomial expansion of the
  Laguerre product against log-space interval gamma masses;
* large q: a descent recurrence for diagonal partial integrals,
      q I(q, m; x) = I(q-1, m+1; x) + e^(-x) x^(m+1) L_q^(m) L_{q-1}^(m+1),
  and the Green/Wronskian identity for off-diagonal ones, which avoid the
  catastrophic coefficient cancellation of the monomial form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .specfun import (
    LogWeight,
    interval_gamma_log,
    laguerre_coeffs,
    laguerre_scaled,
    log_sum_weights,
    reg_lower_gamma,
)

# Largest Laguerre order handled by the monomial expansion; beyond this the
# alternating coefficients cancel too many digits and the recurrence-based
# forms take over.
_MONOMIAL_MAX_Q = 10


@dataclass(frozen=True)
class SectorIndex:
    """Angular momentum label m with its derived lowest admissible level."""

    m: int

    @property
    def m_minus(self) -> int:
        return max(0, -self.m)


@dataclass(frozen=True)
class FieldParams:
    """Magnetic field strength b and target Landau index q."""

    b: float
    q: int

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise DomainError(f"field strength b must be positive, got {self.b!r}")
        if not (isinstance(self.q, int) and self.q >= 0):
            raise DomainError(f"Landau index q must be a nonnegative integer, got {self.q!r}")

    @property
    def level(self) -> float:
        return 2.0 * self.b * self.q


def m_minus(m: int) -> int:
    return max(0, -m)


def sector_levels(m: int, b: float, count: int) -> list[float]:
    """First ``count`` eigenvalues of sector m: [2b m_-, 2b(m_- + 1), ...]."""
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"field strength b must be positive, got {b!r}")
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    lo = m_minus(m)
    return [2.0 * b * (lo + i) for i in range(count)]


# ---------------------------------------------------------------------------
# Eigenfunctions
# ---------------------------------------------------------------------------


def _phi_prefactor_log(q: int, m: int, b: float) -> float:
    return 0.5 * (
        math.lgamma(q + 1)
        - math.log(math.pi)
        - math.lgamma(q + m + 1)
        + (m + 1) * math.log(b / 2.0)
    )


def _check_phi_args(q: int, m: int, b: float) -> None:
    if not (isinstance(q, (int, np.integer)) and q >= 0):
        raise DomainError(f"q must be a nonnegative integer, got {q!r}")
    if not (isinstance(m, (int, np.integer)) and m >= 0):
        raise DomainError(f"m must be a nonnegative integer, got {m!r}")
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"field strength b must be positive, got {b!r}")


def phi(q: int, m: int, b: float, rho):
    """Radial eigenfunction phi_{q,m} at rho (scalar or array).

    Internally evaluated through log magnitudes, so any m for which the
    value itself is representable is fine.  rho = 0 returns the continuous
    limit (0 for m >= 1, sqrt(b/(2 pi)) for m = 0).
    """
    _check_phi_args(q, m, b)
    arr = isinstance(rho, np.ndarray)
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise DomainError("rho must be nonnegative")
    s = 0.5 * b * r * r
    mant, scale = laguerre_scaled(q, int(m), s)
    pref = _phi_prefactor_log(q, int(m), b)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = m * np.log(r) if m > 0 else np.zeros_like(r)
    total = pref + rad - 0.25 * b * r * r + scale
    out = np.asarray(mant) * np.exp(total)
    if m > 0:
        out = np.where(r == 0.0, 0.0, out)
    return out if arr else float(out)


def phi_log(q: int, m: int, b: float, rho: float) -> LogWeight:
    """phi_{q,m}(rho) as a LogWeight; survives m far beyond double range."""
    _check_phi_args(q, m, b)
    if rho < 0:
        raise DomainError("rho must be nonnegative")
    if rho == 0.0:
        if m > 0:
            return LogWeight.zero()
        mant, scale = laguerre_scaled(q, m, 0.0)
        return LogWeight(int(math.copysign(1, mant)),
                         _phi_prefactor_log(q, 0, b) + scale + math.log(abs(mant)))
    s = 0.5 * b * rho * rho
    mant, scale = laguerre_scaled(q, int(m), s)
    if mant == 0.0:
        return LogWeight.zero()
    total = (
        _phi_prefactor_log(q, int(m), b)
        + m * math.log(rho)
        - 0.25 * b * rho * rho
        + scale
        + math.log(abs(mant))
    )
    return LogWeight(1 if mant > 0 else -1, total)


# ---------------------------------------------------------------------------
# Annulus overlaps, three routes
# ---------------------------------------------------------------------------


def _s_of(b: float, r: float) -> float:
    return math.inf if math.isinf(r) else 0.5 * b * r * r


def _log_abs_fraction(x: Fraction) -> float:
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def _product_coeffs(q1: int, q2: int, m: int) -> list[Fraction]:
    a = laguerre_coeffs(q1, m)
    b = laguerre_coeffs(q2, m)
    out = [Fraction(0)] * (q1 + q2 + 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _cross_prefactor_log(q1: int, q2: int, m: int) -> float:
    return 0.5 * (
        math.lgamma(q1 + 1)
        + math.lgamma(q2 + 1)
        - math.lgamma(q1 + m + 1)
        - math.lgamma(q2 + m + 1)
    )


def _overlap_full_line(q1: int, q2: int, m: int) -> LogWeight:
    """Exact orthonormality: the rational coefficient sum collapses to
    binom(q+m, q) for q1 == q2 and to exactly zero otherwise."""
    coeffs = _product_coeffs(q1, q2, m)
    total = Fraction(0)
    rising = Fraction(1)  # prod_{i=1..k} (m + i)
    for k, c in enumerate(coeffs):
        if k > 0:
            rising *= m + k
        total += c * rising
    if total == 0:
        return LogWeight.zero()
    log_mag = (
        _cross_prefactor_log(q1, q2, m)
        + math.lgamma(float(m) + 1.0)
        + _log_abs_fraction(total)
    )
    return LogWeight(1 if total > 0 else -1, log_mag)


def _overlap_monomial(q1: int, q2: int, m: int, s_lo: float, s_hi: float) -> LogWeight:
    coeffs = _product_coeffs(q1, q2, m)
    pref = _cross_prefactor_log(q1, q2, m)
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        dp = interval_gamma_log(m + k + 1, s_lo, s_hi)
        if dp.sign == 0:
            continue
        log_mag = (
            _log_abs_fraction(c)
            + math.lgamma(float(m) + k + 1.0)
            + pref
            + dp.log_mag
        )
        terms.append(LogWeight((1 if c > 0 else -1) * dp.sign, log_mag))
    return log_sum_weights(terms)


def _overlap_recurrence(q1: int, q2: int, m: int, s_lo: float, s_hi: float) -> LogWeight:
    n = max(q1, q2) + 1
    hi = partial_overlap_matrix(n, m, 2.0, _sqrt_or_inf(s_hi))  # b=2 makes s = r^2
    lo = partial_overlap_matrix(n, m, 2.0, _sqrt_or_inf(s_lo))
    return LogWeight.of(float(hi[q1, q2] - lo[q1, q2]))


def _sqrt_or_inf(s: float) -> float:
    return math.inf if math.isinf(s) else math.sqrt(s)


def _overlap_weight(q1: int, q2: int, m: int, b: float, r_lo: float, r_hi: float) -> LogWeight:
    for q in (q1, q2):
        if not (isinstance(q, (int, np.integer)) and q >= 0):
            raise DomainError(f"radial index must be a nonnegative integer, got {q!r}")
    if not (isinstance(m, (int, np.integer)) and m >= 0):
        raise DomainError(f"m must be a nonnegative integer, got {m!r}")
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"field strength b must be positive, got {b!r}")
    if not (0.0 <= r_lo <= r_hi):
        raise DomainError(f"need 0 <= r_lo <= r_hi, got [{r_lo}, {r_hi}]")
    if r_lo == r_hi:
        return LogWeight.zero()
    s_lo, s_hi = _s_of(b, r_lo), _s_of(b, r_hi)
    if s_lo == 0.0 and math.isinf(s_hi):
        return _overlap_full_line(q1, q2, int(m))
    if max(q1, q2) <= _MONOMIAL_MAX_Q:
        return _overlap_monomial(q1, q2, int(m), s_lo, s_hi)
    return _overlap_recurrence(q1, q2, int(m), s_lo, s_hi)


def overlap(q: int, m: int, b: float, r_lo: float, r_hi: float) -> float:
    """2 pi Int_{r_lo}^{r_hi} phi_{q,m}(rho)^2 rho drho, in [0, 1]."""
    return overlap_log(q, m, b, r_lo, r_hi).value()


def overlap_log(q: int, m: int, b: float, r_lo: float, r_hi: float) -> LogWeight:
    """Log-space overlap; meaningful down to magnitudes like e^(-2^(N j^2))."""
    return _overlap_weight(q, q, m, b, r_lo, r_hi)


def cross_overlap(q1: int, q2: int, m: int, b: float, r_lo: float, r_hi: float) -> float:
    """2 pi Int phi_{q1,m} phi_{q2,m} rho drho over the annulus; symmetric."""
    return _overlap_weight(q1, q2, m, b, r_lo, r_hi).value()


# ---------------------------------------------------------------------------
# Partial-overlap matrices for the Galerkin solver
# ---------------------------------------------------------------------------


def _scaled_laguerre_table(nmax: int, m: int, s: float):
    """M, SC with L_n^(m+c)(s) = M[n, c] * exp(SC[n, c]), n <= nmax, c <= nmax.

    One upward recurrence per column, renormalized jointly so the working
    pair shares a scale.
    """
    ncols = nmax + 1
    alphas = float(m) + np.arange(ncols, dtype=float)
    M = np.empty((nmax + 1, ncols))
    SC = np.zeros((nmax + 1, ncols))
    prev = np.ones(ncols)
    M[0] = prev
    if nmax == 0:
        return M, SC
    scale = np.zeros(ncols)
    cur = (1.0 + alphas) - s
    M[1] = cur
    SC[1] = scale
    for n in range(1, nmax):
        nxt = ((2.0 * n + 1.0 + alphas - s) * cur - (n + alphas) * prev) / (n + 1.0)
        prev, cur = cur, nxt
        M[n + 1] = cur
        SC[n + 1] = scale
        mag = np.maximum(np.abs(cur), np.abs(prev))
        big = mag > 1e120
        if np.any(big):
            f = np.where(big, mag, 1.0)
            cur = cur / f
            prev = prev / f
            scale = scale + np.where(big, np.log(f), 0.0)
    return M, SC


def partial_overlap_matrix(Q: int, m: int, b: float, r: float) -> np.ndarray:
    """X[i, j] = cross_overlap(i, j, m, b, 0, r) for i, j < Q, exactly symmetric.

    Diagonal entries follow the descent recurrence, off-diagonal ones the
    Green/Wronskian identity; both stay conditioned at any Q.
    """
    if Q < 1:
        raise DomainError(f"Q must be >= 1, got {Q}")
    if not (isinstance(m, (int, np.integer)) and m >= 0):
        raise DomainError(f"m must be a nonnegative integer, got {m!r}")
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0.0:
        return np.zeros((Q, Q))
    s = _s_of(b, r)
    if math.isinf(s):
        return np.eye(Q)

    mf = int(m)
    M, SC = _scaled_laguerre_table(Q, mf, s)
    lg = np.array([math.lgamma(k) if k > 0 else 0.0 for k in range(Q + mf + 2)])
    ln_s = math.log(s)
    idx = np.arange(Q)

    X = np.zeros((Q, Q))

    # diagonal: P(i+m+1, s) + boundary descent terms
    diag = np.array([reg_lower_gamma(i + mf + 1, s) for i in range(Q)])
    if Q > 1:
        ii = idx[:, None]
        jj = idx[None, :]
        n = ii - jj  # descent depth index
        valid = (n >= 1) & (jj <= ii - 1)
        nn = np.where(valid, n, 1)
        jc = np.where(valid, jj, 0)
        log_t = (
            lg[nn]
            - lg[ii + mf + 1]
            + (mf + jj + 1) * ln_s
            - s
            + SC[nn, jc]
            + SC[np.maximum(nn - 1, 0), np.minimum(jc + 1, Q)]
        )
        mant = M[nn, jc] * M[np.maximum(nn - 1, 0), np.minimum(jc + 1, Q)]
        with np.errstate(over="ignore"):
            terms = np.where(valid, mant * np.exp(log_t), 0.0)
        diag = diag + terms.sum(axis=1)
    np.fill_diagonal(X, diag)

    if Q > 1:
        # off-diagonal Green form:
        # g_i g_j s^(m+1) e^(-s) [L_j^(m) B_i - L_i^(m) B_j] / (i - j),
        # with B_i = L_{i-1}^(m+1).
        g_log = 0.5 * (lg[idx + 1] - lg[idx + mf + 1])
        lm_mant, lm_sc = M[:Q, 0], SC[:Q, 0]
        bp_mant = np.zeros(Q)
        bp_sc = np.zeros(Q)
        bp_mant[1:] = M[: Q - 1, 1]
        bp_sc[1:] = SC[: Q - 1, 1]

        t1 = lm_sc[None, :] + bp_sc[:, None]  # L_j^(m) B_i
        t2 = lm_sc[:, None] + bp_sc[None, :]  # L_i^(m) B_j
        mx = np.maximum(t1, t2)
        bracket = lm_mant[None, :] * bp_mant[:, None] * np.exp(t1 - mx) - lm_mant[
            :, None
        ] * bp_mant[None, :] * np.exp(t2 - mx)
        base = g_log[:, None] + g_log[None, :] + (mf + 1) * ln_s - s + mx
        denom = ii - jj
        off = np.where(denom != 0, bracket, 0.0) * np.exp(base) / np.where(
            denom != 0, denom, 1
        )
        X = X + np.where(denom != 0, off, 0.0)

    # force bitwise symmetry
    upper = np.triu(X, 1)
    return np.diag(np.diag(X)) + upper + upper.T
