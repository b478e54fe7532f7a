"""Degree-5 modular quantities built on the kernel: the eta-quotient a(r),
the multiplier m5(r) = K(k_25r)/K(k_r), the Rogers-Ramanujan continued
fraction by two independent routes, the log-sinh parametrization of a, and
the two level-lowering maps (r -> r/25) — one acting on continued-fraction
values, one acting on a itself.

Route map (everything is certified by cross-route residuals, never trusted):

    a(r)   = f(-q)^6 / (q f(-q^5)^6)                      [eta route]
           = (k'_r/k'_25r)^2 sqrt(k_r/k_25r) m5(r)^-3      [moduli route]
    R(q)   = q^(1/5)/(1 + q/(1 + q^2/(1 + ...)))           [truncated CF]
           = (-11/2 - a/2 + sqrt(125 + 22a + a^2)/2)^(1/5) [closed form]
           = exp(-y/5),  y = arcsinh((11 + a)/2)           [log-sinh form]
    m5(r)  is certified as a root of
           (5X - 1)^5 (1 - X) = 256 (k_r k'_r)^2 X.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from mpmath import mp, mpf, workprec

from .bigmath_kernel import (
    CertificationError,
    DomainError,
    PrecisionContext,
    Real,
    _ctx,
    _round_to,
    eta_f,
    nome,
    solve_singular_modulus,
    to_big,
)
from .report import IdentityEntry

__all__ = [
    "ARecord",
    "M5Record",
    "multiplier_M5",
    "a_value",
    "rrcf_truncated",
    "rrcf_converged",
    "closed_form_R",
    "rrcf_closed",
    "theta_form",
    "descend_v",
    "descend_a",
    "verify_thm22",
    "scale_rational",
]

#: refuse continued fractions deeper than this (memoryless recurrence, but a
#: runaway depth means the caller's q is far too close to 1)
_DEPTH_CAP = 1 << 20


def scale_rational(r_num: int, r_den: int, mul_num: int, mul_den: int) -> Tuple[int, int]:
    """Exact rational r*(mul_num/mul_den) in lowest terms."""
    f = Fraction(r_num, r_den) * Fraction(mul_num, mul_den)
    return f.numerator, f.denominator


@dataclass(frozen=True)
class M5Record:
    """The certified multiplier m5(r) = K(k_25r)/K(k_r)."""

    r_num: int
    r_den: int
    m5: mpf
    poly_residual: mpf  # degree-6 polynomial relation evaluated at m5


@dataclass(frozen=True)
class ARecord:
    """a(r) by two independent routes, with their disagreement."""

    r_num: int
    r_den: int
    a: mpf               # certified value (moduli route)
    via_eta: mpf         # f(-q)^6/(q f(-q^5)^6)
    via_moduli: mpf      # (k'_r/k'_25r)^2 sqrt(k_r/k_25r) m5^-3
    cross_residual: mpf  # |via_eta - via_moduli|


def multiplier_M5(
    r_num: int, r_den: int = 1, ctx: Optional[PrecisionContext] = None
) -> M5Record:
    """Multiplier of the degree-5 transformation at exact rational r.

    m5 is *defined* as the ratio K(k_25r)/K(k_r) of two certified solves and
    only certified against the degree-6 polynomial

        (5 m - 1)^5 (1 - m) - 256 (k_r k'_r)^2 m = 0,

    never obtained by solving that polynomial blind (it has six roots and no
    intrinsic selection rule).
    """
    ctx = _ctx(ctx)
    rec = solve_singular_modulus(r_num, r_den, ctx)
    n25, d25 = scale_rational(r_num, r_den, 25, 1)
    rec25 = solve_singular_modulus(n25, d25, ctx)
    with workprec(ctx.work_bits):
        m5 = rec25.K_k / rec.K_k
        kkp2 = (rec.k * rec.k_comp) ** 2
        poly = (5 * m5 - 1) ** 5 * (1 - m5) - 256 * kkp2 * m5
        return M5Record(
            r_num=r_num,
            r_den=r_den,
            m5=_round_to(ctx, m5),
            poly_residual=_round_to(ctx, abs(poly)),
        )


def a_value(
    r_num: int, r_den: int = 1, ctx: Optional[PrecisionContext] = None
) -> ARecord:
    """a(r) via the eta quotient and via the moduli/multiplier closed form.

    The two routes share nothing past the nome, so their agreement certifies
    both; a cross residual above tolerance raises CertificationError.
    """
    ctx = _ctx(ctx)
    rec = solve_singular_modulus(r_num, r_den, ctx)
    n25, d25 = scale_rational(r_num, r_den, 25, 1)
    rec25 = solve_singular_modulus(n25, d25, ctx)
    with workprec(ctx.work_bits):
        q = nome(r_num, r_den, ctx)
        via_eta = eta_f(q, ctx) ** 6 / (q * eta_f(q ** 5, ctx) ** 6)
        m5 = rec25.K_k / rec.K_k
        via_moduli = (
            (rec.k_comp / rec25.k_comp) ** 2
            * mp.sqrt(rec.k / rec25.k)
            * m5 ** -3
        )
        cross = abs(via_eta - via_moduli)
        if not cross < ctx.tolerance():
            raise CertificationError(
                "a(%s/%s): eta and moduli routes disagree by %s"
                % (r_num, r_den, mp.nstr(cross, 8))
            )
        return ARecord(
            r_num=r_num,
            r_den=r_den,
            a=_round_to(ctx, via_moduli),
            via_eta=_round_to(ctx, via_eta),
            via_moduli=_round_to(ctx, via_moduli),
            cross_residual=_round_to(ctx, cross),
        )


def rrcf_truncated(
    q: Real, depth: int, ctx: Optional[PrecisionContext] = None
) -> mpf:
    """Depth-limited Rogers-Ramanujan continued fraction

        q^(1/5) / (1 + q/(1 + q^2/(1 + ... q^depth)))

    evaluated by backward recurrence (numerically benign: every partial
    denominator is >= 1).  Powers descend from q^depth by division, which
    costs `depth` rounding errors — absorbed by the guard bits.
    """
    ctx = _ctx(ctx)
    if not isinstance(depth, int) or depth < 1:
        raise DomainError("depth must be a positive integer")
    if depth > _DEPTH_CAP:
        raise DomainError("depth %d exceeds the %d cap" % (depth, _DEPTH_CAP))
    with workprec(ctx.work_bits):
        qv = to_big(q, ctx)
        if not (0 < qv < 1):
            raise DomainError("rrcf_truncated requires 0 < q < 1")
        t = mpf(1)
        p = qv ** depth
        for _ in range(depth):
            t = 1 + p / t
            p /= qv
        # after the loop p == q^0; t is the full ascending tail
        return _round_to(ctx, qv ** (mpf(1) / 5) / t)


def rrcf_converged(
    q: Real, ctx: Optional[PrecisionContext] = None
) -> Tuple[mpf, int]:
    """(R(q), depth): double the truncation depth until two successive
    evaluations agree below tolerance, starting at depth = precision_bits."""
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        depth = ctx.precision_bits
        prev = rrcf_truncated(q, depth, ctx)
        while depth <= _DEPTH_CAP // 2:
            depth *= 2
            cur = rrcf_truncated(q, depth, ctx)
            if abs(cur - prev) < ctx.tolerance():
                return cur, depth
            prev = cur
    from .bigmath_kernel import ConvergenceError

    raise ConvergenceError("continued fraction did not stabilize (q too close to 1?)")


def closed_form_R(a: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """R from a given a-value: the real positive fifth root of
    -11/2 - a/2 + sqrt(125 + 22a + a^2)/2."""
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        av = to_big(a, ctx)
        disc = 125 + 22 * av + av * av
        if disc < 0:
            # impossible for a > 0: 125 + 22a + a^2 has no real roots
            raise RuntimeError("internal: negative discriminant at a=%s" % av)
        base = (-11 - av + mp.sqrt(disc)) / 2
        if base <= 0:
            raise RuntimeError("internal: non-positive fifth-power base at a=%s" % av)
        return _round_to(ctx, base ** (mpf(1) / 5))


def rrcf_closed(
    r_num: int, r_den: int = 1, ctx: Optional[PrecisionContext] = None
) -> mpf:
    """R(q) at q = nome(r) through the certified a(r) and the closed radical
    form; independent of the truncated-CF route."""
    ctx = _ctx(ctx)
    rec = a_value(r_num, r_den, ctx)
    return closed_form_R(rec.a, ctx)


def theta_form(a: Real, ctx: Optional[PrecisionContext] = None) -> Tuple[mpf, mpf]:
    """Log-sinh parametrization of the closed form.

    Returns (y, R) with y = arcsinh((11 + a)/2) and R = exp(-y/5).  This is
    the radical closed form in disguise: with t = (11+a)/2,
    exp(-y) = sqrt(t^2 + 1) - t equals the fifth power of R.
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        av = to_big(a, ctx)
        if not av > -11:
            raise DomainError("theta_form requires a > -11, got %s" % av)
        y = mp.asinh((11 + av) / 2)
        return _round_to(ctx, y), _round_to(ctx, mp.exp(-y / 5))


def descend_v(v: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Level-lowering map on continued-fraction values: given v = R at some r,
    returns R at r/25 as the real positive fifth root of

        v (1 - 2v + 4v^2 - 3v^3 + v^4) / (1 + 3v + 4v^2 + 2v^3 + v^4).
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        vv = to_big(v, ctx)
        if not (0 < vv < 1):
            raise DomainError("descend_v requires 0 < v < 1, got %s" % vv)
        num = 1 - 2 * vv + 4 * vv ** 2 - 3 * vv ** 3 + vv ** 4
        den = 1 + 3 * vv + 4 * vv ** 2 + 2 * vv ** 3 + vv ** 4
        if den == 0:  # unreachable for v in (0,1); defensive
            raise DomainError("descend_v denominator vanished")
        return _round_to(ctx, (vv * num / den) ** (mpf(1) / 5))


def descend_a(a: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Level-lowering map on a-values, kept in exactly this form:

        Q(a) = (-1 - E + E^2)^5 /
               (E - E^2 + 2E^3 - 3E^4 + 5E^5 + 3E^6 + 2E^7 + E^8 + E^9)

    with E = exp(y/5), y = arcsinh((11 + a)/2).  The unusual nine-term
    denominator (note the coefficient 5 on E^5) is intentional; it is
    validated against the continued-fraction descent route by the identity
    suite rather than re-derived.
    """
    ctx = _ctx(ctx)
    with workprec(ctx.work_bits):
        av = to_big(a, ctx)
        if not av > -11:
            raise DomainError("descend_a requires a > -11, got %s" % av)
        y = mp.asinh((11 + av) / 2)
        E = mp.exp(y / 5)
        num = (-1 - E + E ** 2) ** 5
        den = (
            E - E ** 2 + 2 * E ** 3 - 3 * E ** 4 + 5 * E ** 5
            + 3 * E ** 6 + 2 * E ** 7 + E ** 8 + E ** 9
        )
        return _round_to(ctx, num / den)


def _depressed_form(u: mpf, v: mpf) -> mpf:
    return u ** 6 - v ** 6 + 5 * u ** 2 * v ** 2 * (u ** 2 - v ** 2) + 4 * u * v * (
        1 - u ** 4 * v ** 4
    )


def verify_thm22(
    r_num: int, r_den: int = 1, ctx: Optional[PrecisionContext] = None
) -> List[IdentityEntry]:
    """Residuals of the three modulus-pair relations at (k_r, k_25r).

    With w = sqrt(k_r k_25r) and w' = sqrt(k'_r k'_25r):

      eq13-thm22      a(r) minus the w-form
                      k^3 (k^2-1)/(w^5 - k^2 w) * (w/k + w'/k' - ww'/(kk'))^3,
                      where the reference a(r) comes from the eta route so the
                      two sides share no machinery past the solves;
      eq14-w-poly     the degree-6 polynomial in w that determines k_25r
                      from k_r;
      eq15-depressed  the quartic-root ("depressed") relation between
                      u = k_r^(1/4) and v = k_25r^(1/4).  The source states
                      that orientation, but numerically it is the *swap* that
                      vanishes; both are evaluated and the vanishing one is
                      reported, with the probe details attached.
    """
    ctx = _ctx(ctx)
    rec = solve_singular_modulus(r_num, r_den, ctx)
    n25, d25 = scale_rational(r_num, r_den, 25, 1)
    rec25 = solve_singular_modulus(n25, d25, ctx)
    with workprec(ctx.work_bits):
        k, kp = rec.k, rec.k_comp
        k25, kp25 = rec25.k, rec25.k_comp
        w = mp.sqrt(k * k25)
        wp = mp.sqrt(kp * kp25)

        q = nome(r_num, r_den, ctx)
        a_ref = eta_f(q, ctx) ** 6 / (q * eta_f(q ** 5, ctx) ** 6)
        w_form = (
            k ** 3 * (k ** 2 - 1) / (w ** 5 - k ** 2 * w)
            * (w / k + wp / kp - w * wp / (k * kp)) ** 3
        )
        res13 = abs(w_form - a_ref)

        res14 = abs(
            k ** 6
            + k ** 3 * (-16 + 10 * k ** 2) * w
            + 15 * k ** 4 * w ** 2
            - 20 * k ** 3 * w ** 3
            + 15 * k ** 2 * w ** 4
            + k * (10 - 16 * k ** 2) * w ** 5
            + w ** 6
        )

        quarter = mpf(1) / 4
        stated = _depressed_form(k ** quarter, k25 ** quarter)
        swapped = _depressed_form(k25 ** quarter, k ** quarter)
        if abs(stated) <= abs(swapped):
            res15, orientation = abs(stated), "stated (u = k_r^(1/4))"
        else:
            res15, orientation = abs(swapped), "swapped (u = k_25r^(1/4))"

        tol = ctx.tolerance()
        return [
            IdentityEntry("eq13-thm22", _round_to(ctx, res13), bool(res13 < tol)),
            IdentityEntry("eq14-w-poly", _round_to(ctx, res14), bool(res14 < tol)),
            IdentityEntry(
                "eq15-depressed",
                _round_to(ctx, res15),
                bool(res15 < tol),
                detail={
                    "vanishing_orientation": orientation,
                    "stated_residual": mp.nstr(abs(stated), 12),
                    "swapped_residual": mp.nstr(abs(swapped), 12),
                },
            ),
        ]
