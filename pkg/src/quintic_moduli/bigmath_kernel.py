"""Arbitrary-precision kernel: AGM, complete elliptic integrals, the certified
singular-modulus solver, and the q-product eta function.

All values are radix-2 floats (mpmath ``mpf``) rounded to the precision of the
governing :class:`PrecisionContext`; intermediates carry ``guard_bits`` extra.

Quantities handled here:

    agm(a, b)        arithmetic-geometric mean iteration a,b <- (a+b)/2, sqrt(ab)
    K(x)             complete elliptic integral of the first kind,
                     K(x) = pi / (2 agm(1, sqrt(1 - x^2)))
    nome(p, q)       q-series variable e^(-pi sqrt(r)) for exact rational r = p/q
    k_r              singular modulus: the unique k in (0,1) with
                     K(k') / K(k) = sqrt(r),  k' = sqrt(1 - k^2)
    f(-q)            Euler-type product prod_{n>=1} (1 - q^n)

The solver never forms 1 - k'^2.  With k' = sqrt((1-k)(1+k)) one has

    K(k)  = pi / (2 agm(1, k')),     K(k') = pi / (2 agm(1, k)),

so the certified ratio F(k) = K(k')/K(k) = agm(1, k')/agm(1, k) is assembled
from the two AGM legs directly.  F is strictly decreasing on (0,1) and maps
onto (0, inf), hence sqrt(r) is hit exactly once; we bracket the root
(expanding the bracket adaptively, since k_r for large r sinks below any fixed
epsilon), bisect to roughly 50 relative bits, and finish with safeguarded
Newton steps using a centered finite-difference derivative.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from mpmath import mp, mpf, workprec

log = logging.getLogger(__name__)

#: Anything convertible to an mpf at context precision.
Real = Union[int, float, str, Fraction, mpf]

__all__ = [
    "Real",
    "DomainError",
    "ConvergenceError",
    "CertificationError",
    "PrecisionContext",
    "DEFAULT_CONTEXT",
    "SingularModulusRecord",
    "to_big",
    "complement",
    "agm",
    "elliptic_K",
    "nome",
    "solve_singular_modulus",
    "eta_f",
]


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iteration failed to reach its target within the iteration budget.

    ``bracket`` holds the best (lo, hi) enclosure known at failure, when the
    failing iteration was a root search; otherwise it is None.
    """

    def __init__(self, message: str, bracket: Optional[Tuple[mpf, mpf]] = None):
        super().__init__(message)
        self.bracket = bracket


class CertificationError(RuntimeError):
    """A computed value failed its independent certification check.

    Raised when two supposedly independent routes to the same quantity
    disagree above tolerance, or a ladder level misses its oracle.
    ``payload`` carries whatever partial evidence the failing operation
    collected (e.g. a LadderTrace up to and including the bad level).
    """

    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


@dataclass(frozen=True)
class PrecisionContext:
    """Immutable numeric policy threaded through every operation."""

    precision_bits: int = 512  # mantissa bits of every returned value
    tol_exp: int = 120         # certification threshold is 10**(-tol_exp)
    guard_bits: int = 64       # extra bits carried by intermediates
    max_iter: int = 10000      # iteration cap shared by all solvers

    def __post_init__(self) -> None:
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        if self.tol_exp <= 0:
            raise ValueError("tol_exp must be positive")
        if self.guard_bits < 0:
            raise ValueError("guard_bits must be non-negative")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")
        # the acceptance threshold must be representable with room to spare
        if self.tol_exp * math.log2(10) + self.guard_bits >= self.precision_bits:
            raise ValueError(
                "tol_exp*log2(10) + guard_bits must stay below precision_bits"
            )

    @property
    def work_bits(self) -> int:
        """Mantissa bits used for intermediate computation."""
        return self.precision_bits + self.guard_bits

    def tolerance(self) -> mpf:
        """10**(-tol_exp) as an mpf at working precision."""
        with workprec(self.work_bits):
            return mpf(10) ** (-self.tol_exp)


DEFAULT_CONTEXT = PrecisionContext()


def _ctx(ctx: Optional[PrecisionContext]) -> PrecisionContext:
    return DEFAULT_CONTEXT if ctx is None else ctx


def _round_to(ctx: PrecisionContext, x: mpf) -> mpf:
    """Round x to the context's output precision (the `+x` idiom)."""
    with workprec(ctx.precision_bits):
        return +x


def to_big(x: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Convert ``x`` to an mpf at the context's working precision.

    Accepts int, float, decimal string, Fraction, and mpf.  Fractions are
    divided at working precision rather than round-tripped through decimal.
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        if isinstance(x, Fraction):
            return mpf(x.numerator) / mpf(x.denominator)
        return mpf(x)


def _complement_raw(k: mpf) -> mpf:
    # sqrt((1-k)(1+k)): 1-k is exact for k in (1/2, 2) (Sterbenz), so no
    # cancellation for k near 1, and no 1 - k^2 rounding collapse for tiny k.
    return mp.sqrt((1 - k) * (1 + k))


def complement(x: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """sqrt(1 - x^2) for x in [0, 1], evaluated cancellation-free."""
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        xv = to_big(x, ctx)
        if xv < 0 or xv > 1:
            raise DomainError("complement requires 0 <= x <= 1, got %s" % xv)
        return _round_to(ctx, _complement_raw(xv))


def _agm_raw(a: mpf, b: mpf, ctx: PrecisionContext) -> mpf:
    """AGM limit; assumes ambient working precision and positive inputs."""
    stop = mpf(2) ** (-ctx.precision_bits + ctx.guard_bits // 2)
    for _ in range(ctx.max_iter):
        if abs(a - b) < stop * a:
            return (a + b) / 2
        a, b = (a + b) / 2, mp.sqrt(a * b)
    raise ConvergenceError("AGM did not stabilize within max_iter")


def agm(a: Real, b: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Arithmetic-geometric mean of two positive reals.

    The iteration a,b <- ((a+b)/2, sqrt(ab)) converges quadratically; it is
    stopped once |a_n - b_n| < 2^(-precision_bits + guard_bits/2) * a_n.
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        av, bv = to_big(a, ctx), to_big(b, ctx)
        if av <= 0 or bv <= 0:
            raise DomainError("agm requires positive operands")
        return _round_to(ctx, _agm_raw(av, bv, ctx))


def _K_from_complement_raw(comp: mpf, ctx: PrecisionContext) -> mpf:
    """K(x) given comp = sqrt(1-x^2); ambient working precision assumed."""
    return mp.pi / (2 * _agm_raw(mpf(1), comp, ctx))


def elliptic_K(x: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Complete elliptic integral of the first kind at modulus ``x``.

        K(x) = integral_0^{pi/2} dt / sqrt(1 - x^2 sin^2 t)
             = pi / (2 agm(1, sqrt(1 - x^2)))

    for 0 <= x < 1.  The AGM route is quadratically convergent and is the
    production path; direct quadrature of the integral is kept to the test
    suite as an independent oracle.
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        xv = to_big(x, ctx)
        if xv < 0 or xv >= 1:
            raise DomainError("elliptic_K requires 0 <= x < 1, got %s" % xv)
        return _round_to(ctx, _K_from_complement_raw(_complement_raw(xv), ctx))


def _validate_rational(r_num: int, r_den: int) -> None:
    if not isinstance(r_num, int) or not isinstance(r_den, int):
        raise DomainError("r must be given as exact integers r_num/r_den")
    if r_num <= 0 or r_den <= 0:
        raise DomainError("r must be positive: got %s/%s" % (r_num, r_den))


def nome(r_num: int, r_den: int = 1, ctx: Optional[PrecisionContext] = None) -> mpf:
    """q = exp(-pi sqrt(r)) in (0,1) for exact rational r = r_num/r_den > 0."""
    ctx = _ctx(ctx)
    _validate_rational(r_num, r_den)
    with workprec(ctx.work_bits):
        r = mpf(r_num) / mpf(r_den)
        return _round_to(ctx, mp.exp(-mp.pi * mp.sqrt(r)))


@dataclass(frozen=True)
class SingularModulusRecord:
    """A certified singular-modulus solve at exact rational r."""

    r_num: int
    r_den: int
    k: mpf          # the modulus in (0,1)
    k_comp: mpf     # complementary modulus sqrt(1 - k^2)
    q: mpf          # nome exp(-pi sqrt(r))
    K_k: mpf        # K(k)
    K_kcomp: mpf    # K(k_comp)
    residual: mpf   # |K(k_comp)/K(k) - sqrt(r)| evaluated at the stored k


def _kratio_raw(k: mpf, ctx: PrecisionContext) -> mpf:
    """F(k) = K(k')/K(k) = agm(1, k')/agm(1, k); ambient precision assumed."""
    return _agm_raw(mpf(1), _complement_raw(k), ctx) / _agm_raw(mpf(1), k, ctx)


def solve_singular_modulus(
    r_num: int, r_den: int = 1, ctx: Optional[PrecisionContext] = None
) -> SingularModulusRecord:
    """Solve K(k')/K(k) = sqrt(r) for k in (0,1) and certify the residual.

    Strategy (F below is the strictly decreasing K-ratio):

    1. Bracket.  Start from [eps, 1-eps] with eps = 2^(-precision_bits/2).
       If F(lo) < sqrt(r), the root lies below lo: substitute lo <- lo^2 until
       enclosed (F grows like (2/pi) log(4/k) as k -> 0, so squaring lo adds a
       constant to F(lo) per step).  Mirror with hi <- 1 - (1-hi)^2 above.
    2. Bisect to ~50 relative bits, using geometric midpoints sqrt(lo*hi)
       while the bracket spans more than a factor 2 (the root's magnitude is
       unknown a priori: k_r ranges over hundreds of orders of magnitude).
    3. Newton-polish with the centered finite-difference derivative at
       relative spacing 2^(-precision_bits/3), falling back to the bracket
       midpoint whenever a step would leave the enclosure.

    The returned record stores values rounded to ``precision_bits``; the
    residual field certifies the *rounded* modulus, so equal-precision solves
    are bit-identical and reproducible.
    """
    ctx = _ctx(ctx)
    _validate_rational(r_num, r_den)
    with workprec(ctx.work_bits):
        target = mp.sqrt(mpf(r_num) / mpf(r_den))

        def F(k: mpf) -> mpf:
            return _kratio_raw(k, ctx)

        # ---- phase 1: (adaptive) bracket -------------------------------
        eps = mpf(2) ** (-(ctx.precision_bits // 2))
        lo, hi = eps, 1 - eps
        f_lo, f_hi = F(lo), F(hi)
        spent = 0
        while f_lo < target:
            spent += 1
            lo = lo * lo
            if spent > ctx.max_iter or lo == 0:
                raise ConvergenceError(
                    "cannot enclose modulus from below for r=%s/%s" % (r_num, r_den),
                    bracket=(mpf(0), lo),
                )
            f_lo = F(lo)
        while f_hi > target:
            spent += 1
            gap = 1 - hi
            hi = 1 - gap * gap
            if spent > ctx.max_iter or hi == 1:
                raise ConvergenceError(
                    "cannot enclose modulus from above for r=%s/%s" % (r_num, r_den),
                    bracket=(hi, mpf(1)),
                )
            f_hi = F(hi)

        # ---- phase 2: bisection to ~50 relative bits --------------------
        rel_50 = mpf(2) ** -50
        while hi - lo > lo * rel_50:
            spent += 1
            if spent > ctx.max_iter:
                raise ConvergenceError(
                    "bisection exceeded max_iter for r=%s/%s" % (r_num, r_den),
                    bracket=(lo, hi),
                )
            mid = mp.sqrt(lo * hi) if hi > 2 * lo else (lo + hi) / 2
            if F(mid) > target:
                lo = mid
            else:
                hi = mid

        # ---- phase 3: safeguarded Newton --------------------------------
        k = (lo + hi) / 2
        fd_scale = mpf(2) ** (-(ctx.precision_bits // 3))
        stop_tight = mpf(2) ** (-(ctx.work_bits - 8))
        stop_noise = mpf(2) ** (-(ctx.precision_bits - 8))
        prev_step = None
        for _ in range(80):
            spent += 1
            if spent > ctx.max_iter:
                raise ConvergenceError(
                    "Newton polish exceeded max_iter for r=%s/%s" % (r_num, r_den),
                    bracket=(lo, hi),
                )
            f0 = F(k) - target
            if f0 == 0:
                break
            if f0 > 0:  # F decreasing: still left of the root
                lo = max(lo, k)
            else:
                hi = min(hi, k)
            h = k * fd_scale
            if k + h >= 1:  # keep the stencil inside (0,1)
                h = (1 - k) * fd_scale
            deriv = (F(k + h) - F(k - h)) / (2 * h)
            step = f0 / deriv
            k_next = k - step
            s = abs(step)
            if s <= k * stop_tight:
                # at the working-precision floor the update can round to k
                # itself (== a bracket edge); that is convergence, not escape
                if lo < k_next < hi:
                    k = k_next
                break
            if not (lo < k_next < hi):
                k_next = mp.sqrt(lo * hi) if hi > 2 * lo else (lo + hi) / 2
                s = abs(k_next - k)
            k = k_next
            if prev_step is not None and s >= prev_step / 2 and s < k * stop_noise:
                break  # dithering at the arithmetic noise floor
            prev_step = s

        # ---- certify the value that will actually be returned -----------
        k_out = _round_to(ctx, k)
        residual = abs(F(+k_out) - target)
        if not residual < ctx.tolerance():
            raise ConvergenceError(
                "solve at r=%s/%s left residual %s above tolerance"
                % (r_num, r_den, mp.nstr(residual, 8)),
                bracket=(lo, hi),
            )
        comp = _complement_raw(+k_out)
        record = SingularModulusRecord(
            r_num=r_num,
            r_den=r_den,
            k=k_out,
            k_comp=_round_to(ctx, comp),
            q=_round_to(ctx, mp.exp(-mp.pi * target)),
            K_k=_round_to(ctx, _K_from_complement_raw(comp, ctx)),
            K_kcomp=_round_to(ctx, _K_from_complement_raw(+k_out, ctx)),
            residual=_round_to(ctx, residual),
        )
    return record


#: hard cap on eta-product terms; reached only for q pathologically close to 1
_ETA_TERM_CAP = 10_000_000


def eta_f(q: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """The product f(-q) = prod_{n>=1} (1 - q^n) for 0 < q < 1.

    Terms are multiplied until q^n < 2^(-precision_bits - guard_bits); the
    neglected tail changes log f by less than q^(n+1)/(1-q), which the guard
    bits absorb for every q this artifact ever feeds in.
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        qv = to_big(q, ctx)
        if not (0 < qv < 1):
            raise DomainError("eta_f requires 0 < q < 1, got %s" % qv)
        cutoff = mpf(2) ** (-(ctx.precision_bits + ctx.guard_bits))
        acc = mpf(1)
        qn = qv
        n = 1
        while qn >= cutoff:
            acc *= 1 - qn
            qn *= qv
            n += 1
            if n > _ETA_TERM_CAP:
                raise ConvergenceError("eta product needs too many terms (q ~ 1?)")
        return _round_to(ctx, acc)
