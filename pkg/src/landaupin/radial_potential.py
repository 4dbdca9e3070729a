"""Radially symmetric step potentials built from signed annular indicators.

A potential is a finite sum of annuli; overlapping annuli add.  The family
``v_t`` used by the pinning construction places, for each pair index j, one
negative-coupling annulus and one partially overlapping positive-coupling
annulus, with radii e^(-alpha/2), e^(-beta/2) driven by dyadic exponents

    alpha_{2j-1} = 2^(-N (j-1/2)^2 + 1),   beta_{2j-1} = 2^(-N j^2 + 1),
    alpha_{2j}   = 2^(-N (j-1/2)^2),       beta_{2j}   = 2^(-N j^2).

Pairs are disjoint from each other and all radii lie inside the unit disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class Annulus:
    """One annular indicator with a signed height (energy units)."""

    r_inner: float
    r_outer: float
    height: float

    def __post_init__(self):
        if not (0.0 <= self.r_inner < self.r_outer < math.inf):
            raise ValidationError(
                f"annulus needs 0 <= r_inner < r_outer < inf, got "
                f"[{self.r_inner}, {self.r_outer}]"
            )
        if not math.isfinite(self.height):
            raise ValidationError(f"annulus height must be finite, got {self.height}")

    def contains(self, rho: float) -> bool:
        # closed at both ends; boundary convention is measure-zero anyway
        return self.r_inner <= rho <= self.r_outer


@dataclass(frozen=True)
class StepPotential:
    """Ordered sum of annuli; the value at rho is the sum of covering heights."""

    annuli: tuple

    def __init__(self, annuli):
        object.__setattr__(self, "annuli", tuple(annuli))

    def evaluate(self, rho: float) -> float:
        if rho < 0:
            raise DomainError(f"radius must be nonnegative, got {rho}")
        return math.fsum(a.height for a in self.annuli if a.contains(rho))

    def breakpoints(self) -> list[float]:
        pts = set()
        for a in self.annuli:
            pts.add(a.r_inner)
            pts.add(a.r_outer)
        return sorted(pts)

    def ess_range(self) -> tuple[float, float]:
        """Essential (measure-theoretic) min and max over [0, inf)."""
        pts = self.breakpoints()
        lo = hi = 0.0  # value outside the support
        cells = [0.0] + pts + [pts[-1] + 1.0] if pts else [0.0, 1.0]
        for left, right in zip(cells[:-1], cells[1:]):
            if right <= left:
                continue
            val = self.evaluate(0.5 * (left + right))
            lo = min(lo, val)
            hi = max(hi, val)
        return lo, hi

    def sup_norm(self) -> float:
        lo, hi = self.ess_range()
        return max(-lo, hi)

    def support_radius(self) -> float:
        return max((a.r_outer for a in self.annuli), default=0.0)

    def is_zero(self) -> bool:
        return all(a.height == 0.0 for a in self.annuli)

    def scaled(self, factor: float) -> "StepPotential":
        return StepPotential(
            Annulus(a.r_inner, a.r_outer, factor * a.height) for a in self.annuli
        )

    def __add__(self, other: "StepPotential") -> "StepPotential":
        return StepPotential(self.annuli + other.annuli)


def evaluate(v: StepPotential, rho: float) -> float:
    return v.evaluate(rho)


def sup_norm(v: StepPotential) -> float:
    return v.sup_norm()


def disk_potential(c: float, r: float) -> StepPotential:
    """c times the indicator of the disk of radius r (a single annulus)."""
    return StepPotential([Annulus(0.0, r, c)])


# ---------------------------------------------------------------------------
# The dyadic-radii construction
# ---------------------------------------------------------------------------


def _exponents(N: int, k: int) -> tuple[float, float]:
    if k % 2 == 1:
        j = (k + 1) // 2
        return 2.0 ** (-N * (j - 0.5) ** 2 + 1), 2.0 ** (-N * j * j + 1)
    j = k // 2
    return 2.0 ** (-N * (j - 0.5) ** 2), 2.0 ** (-N * j * j)


def radii(N: int, k: int) -> tuple[float, float]:
    """Inner and outer radius of annulus k (1-based) for parameter N."""
    if not (isinstance(N, int) and N >= 2):
        raise DomainError(f"N must be an integer >= 2, got {N!r}")
    if not (isinstance(k, int) and k >= 1):
        raise DomainError(f"annulus index k must be >= 1, got {k!r}")
    alpha, beta = _exponents(N, k)
    return math.exp(-alpha / 2.0), math.exp(-beta / 2.0)


def ordering_check(N: int, j_max: int) -> bool:
    """Dyadic-exponent ordering for pairs 1..j_max.

    Checks, per pair j, the chain
    N(j-1)^2 <= N(j-1/2)^2 - 1 < N(j-1/2)^2 < N j^2 - 1 < N j^2 and the
    strict disjointness of consecutive pairs (outer edge of annulus 2j
    inside the inner edge of annulus 2j+1).  The first comparison tolerates
    equality: at j = 1 it pins the innermost annulus against the unit
    scale rather than against a real neighbor, and N = 4 sits exactly on
    that boundary while remaining a valid construction.
    """
    if not (isinstance(N, int) and N >= 2):
        raise DomainError(f"N must be an integer >= 2, got {N!r}")
    for j in range(1, j_max + 1):
        lo = N * (j - 1) ** 2
        a = N * (j - 0.5) ** 2 - 1
        b = N * (j - 0.5) ** 2
        c = N * j * j - 1
        d = N * j * j
        if not (lo <= a < b < c < d):
            return False
        if j < j_max:
            # x+ of annulus 2j strictly inside x- of annulus 2j+1
            beta_2j = 2.0 ** (-N * j * j)
            alpha_next = 2.0 ** (-N * (j + 0.5) ** 2 + 1)
            if not beta_2j > alpha_next:
                return False
    return True


@dataclass(frozen=True)
class ConstructionParams:
    """Parameters of the 2J-annulus family: dyadic scale N, J pairs, couplings t."""

    N: int
    J: int
    t: tuple

    def __init__(self, N: int, J: int, t):
        t = tuple(float(x) for x in t)
        if not (isinstance(N, int) and N >= 2):
            raise ValidationError(f"N must be an integer >= 2, got {N!r}")
        if not (isinstance(J, int) and J >= 1):
            raise ValidationError(f"J must be an integer >= 1, got {J!r}")
        if len(t) != 2 * J:
            raise ValidationError(f"coupling vector must have length 2J={2*J}, got {len(t)}")
        if not all(math.isfinite(x) for x in t):
            raise ValidationError("coupling vector entries must be finite")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "t", t)


def construction_annuli(N: int, J: int) -> list[tuple[float, float]]:
    """Radii (inner, outer) of annuli 1..2J for scale N."""
    return [radii(N, k) for k in range(1, 2 * J + 1)]


def build_vt(params: ConstructionParams) -> StepPotential:
    """The alternating-coupling potential: annulus 2j-1 gets -t_{2j-1}, 2j gets +t_{2j}."""
    if not ordering_check(params.N, params.J):
        raise ValidationError(
            f"dyadic ordering violated for N={params.N}, J={params.J}; "
            "the annulus pairs would not be disjoint"
        )
    annuli = []
    for k in range(1, 2 * params.J + 1):
        r_in, r_out = radii(params.N, k)
        tk = params.t[k - 1]
        annuli.append(Annulus(r_in, r_out, -tk if k % 2 == 1 else tk))
    return StepPotential(annuli)


# ---------------------------------------------------------------------------
# JSON schema: {"annuli": [{"r_inner": f, "r_outer": f, "height": f}, ...]}
# ---------------------------------------------------------------------------


def potential_to_dict(v: StepPotential) -> dict:
    return {
        "annuli": [
            {"r_inner": a.r_inner, "r_outer": a.r_outer, "height": a.height}
            for a in v.annuli
        ]
    }


def potential_from_dict(obj) -> StepPotential:
    if not isinstance(obj, dict):
        raise ValidationError(f"potential must be a JSON object, got {type(obj).__name__}")
    unknown = set(obj) - {"annuli"}
    if unknown:
        raise ValidationError(f"unknown potential fields: {sorted(unknown)}")
    if "annuli" not in obj:
        raise ValidationError("potential is missing the 'annuli' field")
    raw = obj["annuli"]
    if not isinstance(raw, list):
        raise ValidationError("'annuli' must be a list")
    annuli = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ValidationError(f"annuli[{i}]: must be an object")
        unknown = set(entry) - {"r_inner", "r_outer", "height"}
        if unknown:
            raise ValidationError(f"annuli[{i}]: unknown fields {sorted(unknown)}")
        missing = {"r_inner", "r_outer", "height"} - set(entry)
        if missing:
            raise ValidationError(f"annuli[{i}]: missing fields {sorted(missing)}")
        for f in ("r_inner", "r_outer", "height"):
            if not isinstance(entry[f], (int, float)) or isinstance(entry[f], bool):
                raise ValidationError(f"annuli[{i}].{f}: must be a number")
        try:
            annuli.append(Annulus(float(entry["r_inner"]), float(entry["r_outer"]),
                                  float(entry["height"])))
        except ValidationError as exc:
            raise ValidationError(f"annuli[{i}]: {exc}") from None
    return StepPotential(annuli)
