"""Zeros of Q_n(z) = 1 - z^n - (1 - z)^n.

The known roots 0 and 1 are divided out exactly in rational arithmetic, the
remaining factor is solved by Aberth-Ehrlich simultaneous iteration in double
precision, and every root is then polished by Newton steps in mpmath against
the exact coefficients. Residuals are reported on the undeflated Q_n.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import mpmath
import numpy as np
import sympy

from .errors import NumericalError, PreconditionError

EPS_ROOT = 1e-8
MAX_SWEEPS = 200


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial, ``coeffs[k]`` multiplies z^k; exact rational coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = [Fraction(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def eval_mp(self, z, dps: int = 50):
        with mpmath.workdps(dps):
            zz = mpmath.mpc(z)
            acc = mpmath.mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * zz + mpmath.mpf(c.numerator) / c.denominator
            return acc

    def derivative(self) -> "Polynomial":
        if len(self.coeffs) == 1:
            return Polynomial((0,))
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def divide_linear(self, r) -> tuple["Polynomial", Fraction]:
        """Synthetic division by (z - r): returns (quotient, remainder)."""
        r = Fraction(r)
        high = list(reversed(self.coeffs))
        out = [high[0]]
        for c in high[1:]:
            out.append(c + r * out[-1])
        rem = out.pop()
        return Polynomial(tuple(reversed(out)) or (0,)), rem

    def as_complex(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs])


def build_qn(n: int) -> Polynomial:
    if n < 2:
        raise PreconditionError("Q_n is defined for n >= 2")
    c = [Fraction(0)] * (n + 1)
    for k in range(1, n + 1):
        c[k] = Fraction(-comb(n, k) * (-1) ** k)
    c[n] -= 1
    return Polynomial(tuple(c))


@dataclass
class RootSet:
    n: int | None
    degree: int
    roots: list
    residuals: list
    multiple: list  # True where the root is repeated
    precise: list = None  # polished roots as mpmath values, same order


    def __len__(self) -> int:
        return len(self.roots)


def aberth(
    ratio,
    deg: int,
    radius: float,
    tol: float = 1e-12,
    max_sweeps: int = MAX_SWEEPS,
) -> np.ndarray:
    """Aberth-Ehrlich iteration for ``deg`` simultaneous roots.

    ``ratio(z)`` must return p(z)/p'(z) elementwise. Initial guesses sit on a
    circle of the given radius, slightly off-centre and rotated so that no
    guess is real.
    """
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    z = 0.5 + 0.01j + 0.03 + radius * np.exp(1j * angles)
    step = np.zeros(deg, dtype=complex)
    for _ in range(max_sweeps):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = ratio(z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = r / (1 - r * inv.sum(axis=1))
        step = np.where(np.isfinite(step), step, 0)
        z = z - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            return z
    # rounding noise can stall the last digits; the mpmath polish and the
    # residual check decide from here
    if np.max(np.abs(step)) < 1e-6 * max(1.0, float(np.max(np.abs(z)))):
        return z
    raise NumericalError(
        f"Aberth iteration did not converge in {max_sweeps} sweeps",
        {"degree": deg, "max_step": float(np.max(np.abs(step)))},
    )


def _coefficient_ratio(poly: Polynomial):
    hi = poly.as_complex()[::-1]
    dhi = np.polyder(hi)
    return lambda z: np.polyval(hi, z) / np.polyval(dhi, z)


def _root_radius(poly: Polynomial) -> float:
    # Fujiwara-type bound, halved as a starting radius
    c = poly.coeffs
    deg = poly.degree
    bound = 2 * max(abs(float(c[k] / c[-1])) ** (1.0 / (deg - k)) for k in range(deg))
    return min(max(bound, 1e-3), 1e6) / 2


def _polish(poly: Polynomial, z, dps: int = 60, steps: int = 12):
    dpoly = poly.derivative()
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z)
        for _ in range(steps):
            f = poly.eval_mp(zz, dps)
            df = dpoly.eval_mp(zz, dps)
            if df == 0:
                break
            delta = f / df
            zz = zz - delta
            if abs(delta) < mpmath.mpf(10) ** (-dps + 10):
                break
        return zz


def _symmetrize(roots: list, eps: float) -> list:
    # real coefficients: snap near-real roots and pair the rest with exact
    # conjugates (call under the working precision of the roots)
    real = [mpmath.mpc(r.real, 0) for r in roots if abs(r.imag) < eps]
    upper = [r for r in roots if r.imag >= eps]
    lower = [r for r in roots if r.imag <= -eps]
    if len(upper) != len(lower):
        raise NumericalError("root set is not closed under conjugation", {"upper": len(upper), "lower": len(lower)})
    paired = []
    remaining = list(lower)
    for u in upper:
        j = min(range(len(remaining)), key=lambda i: abs(remaining[i] - u.conjugate()))
        low = remaining.pop(j)
        if abs(low - u.conjugate()) > eps:
            raise NumericalError("conjugate partner missing", {"root": u, "nearest": low})
        paired += [u, mpmath.conj(u)]
    return real + paired


def _squarefree_factors(poly: Polynomial) -> list:
    """Exact square-free decomposition as [(factor, multiplicity), ...]."""
    x = sympy.Symbol("x")
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(poly.coeffs)], x, domain="QQ")
    _, factors = sp.sqf_list()
    out = []
    for f, mult in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(f.all_coeffs())]
        out.append((Polynomial(tuple(coeffs)), mult))
    return out


def all_roots(
    poly: Polynomial,
    eps_root: float = EPS_ROOT,
    trivial: Sequence = (0, 1),
    n: int | None = None,
    log_derivative=None,
) -> RootSet:
    """All complex roots of ``poly`` listed with multiplicity, residuals below ``eps_root``.

    Exact rational roots among ``trivial`` are divided out first. What is left
    is split into square-free factors exactly, so that the numerical stage
    never sees a repeated root. ``log_derivative(z)``, if given, returns
    poly'/poly on a numpy array and is used for the largest factor instead of
    the coefficient form (much better conditioned for Q_n at high degree).
    """
    if poly.degree < 1:
        raise PreconditionError("need a polynomial of degree >= 1")
    found = []
    rest = poly
    for r in trivial:
        while rest.degree >= 1:
            q, rem = rest.divide_linear(r)
            if rem != 0:
                break
            found.append(mpmath.mpc(r))
            rest = q
    pairs = [(z, found.count(z) > 1) for z in found]
    factors = [(f, m) for f, m in _squarefree_factors(rest) if f.degree >= 1] if rest.degree >= 1 else []
    big = max(range(len(factors)), key=lambda i: factors[i][0].degree) if factors else None
    for i, (factor, mult) in enumerate(factors):
        if log_derivative is not None and i == big:
            others = [(g, m) for j, (g, m) in enumerate(factors) if j != i]
            ratio = _factor_ratio(log_derivative, [complex(t) for t in found], others, mult)
        else:
            ratio = _coefficient_ratio(factor)
        approx = aberth(ratio, factor.degree, _root_radius(factor))
        dps = 40 + factor.degree
        with mpmath.workdps(dps):
            numeric = _symmetrize([_polish(factor, complex(z), dps=dps) for z in approx], eps_root)
        pairs += [(z, mult > 1) for z in numeric for _ in range(mult)]
    pairs.sort(key=lambda t: (round(float(t[0].real), 12), round(float(t[0].imag), 12)))
    precise = [z for z, _ in pairs]
    roots = [complex(z) for z in precise]
    with mpmath.workdps(40 + poly.degree):
        residuals = [float(abs(poly.eval_mp(z, 40 + poly.degree))) for z in precise]
    bad = [r for r in residuals if not r < eps_root]
    if bad:
        raise NumericalError("roots failed the residual bound", {"eps_root": eps_root, "worst": max(bad)})
    if len(roots) != poly.degree:
        raise NumericalError("root count differs from degree", {"found": len(roots), "degree": poly.degree})
    return RootSet(n, poly.degree, roots, residuals, [m for _, m in pairs], precise)


def _factor_ratio(log_derivative, known: list, others: list, mult: int):
    """p/p' for one square-free factor, from the log-derivative of the whole polynomial."""
    other_ratios = [(_coefficient_ratio(g), m) for g, m in others]

    def ratio(z):
        ld = log_derivative(z)
        for t in known:
            ld = ld - 1 / (z - t)
        for r, m in other_ratios:
            ld = ld - m / r(z)
        return mult / ld

    return ratio


def qn_log_derivative(n: int):
    def ld(z):
        w = 1 - z
        q = 1 - z ** n - w ** n
        dq = -n * z ** (n - 1) + n * w ** (n - 1)
        return dq / q

    return ld


def qn_roots(n: int, eps_root: float = EPS_ROOT) -> RootSet:
    return all_roots(build_qn(n), eps_root, n=n, log_derivative=qn_log_derivative(n))


def half_line_polynomial(n: int) -> Polynomial:
    """R_n(t) = Q_n(1/2 + i t) = 1 - 2 Re (1/2 + i t)^n, as a real polynomial in t."""
    c = [Fraction(0)] * (n + 1)
    c[0] = Fraction(1)
    for j in range(0, n + 1, 2):
        c[j] -= 2 * comb(n, j) * Fraction(1, 2 ** (n - j)) * (-1) ** (j // 2)
    return Polynomial(tuple(c))


@dataclass
class RootCheckRow:
    n: int
    degree: int
    n_roots: int
    real_roots: list
    real_ok: bool
    half_line_count: int
    half_line_required: bool
    half_line_ok: bool
    r_leading_negative: bool
    r_residual: float


@dataclass
class RootCheckReport:
    rows: list

    @property
    def ok(self) -> bool:
        return all(r.real_ok and r.half_line_ok for r in self.rows)


def root_checks(n_max: int, eps_root: float = EPS_ROOT, n_limit: int = 64) -> RootCheckReport:
    """Real roots are only 0 and 1; Re = 1/2 roots exist when n = 0, 1 mod 4."""
    if n_max > n_limit:
        raise PreconditionError(f"n_max {n_max} exceeds the configured limit {n_limit}")
    rows = []
    for n in range(2, n_max + 1):
        rs = qn_roots(n, eps_root)
        real = [z for z in rs.roots if abs(z.imag) < eps_root]
        real_ok = all(abs(z) < eps_root or abs(z - 1) < eps_root for z in real)
        on_line = [z for z in rs.precise if abs(z.real - 0.5) < eps_root]
        required = n % 4 in (0, 1)
        rpoly = half_line_polynomial(n)
        r_res = max((float(abs(rpoly.eval_mp(z.imag, 40 + n))) for z in on_line), default=0.0)
        rows.append(
            RootCheckRow(
                n=n,
                degree=rs.degree,
                n_roots=len(rs),
                real_roots=real,
                real_ok=real_ok,
                half_line_count=len(on_line),
                half_line_required=required,
                half_line_ok=(len(on_line) >= 2) if required else True,
                r_leading_negative=rpoly.coeffs[-1] < 0,
                r_residual=r_res,
            )
        )
    return RootCheckReport(rows)


def figure1_rows(n_max: int = 32, eps_root: float = EPS_ROOT) -> list:
    rows = []
    for n in range(2, n_max + 1):
        rs = qn_roots(n, eps_root)
        rows += [(n, z.real, z.imag, res) for z, res in zip(rs.roots, rs.residuals)]
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "re", "im", "residual"])
    for n, re, im, res in rows:
        w.writerow([n, repr(float(re)), repr(float(im)), f"{res:.3e}"])
    return buf.getvalue()


def rows_to_svg(rows, width: int = 640, height: int = 640, version: str = "") -> str:
    """Scatter plot of the roots in the complex plane, coloured by n."""
    xs = [r[1] for r in rows]
    ys = [r[2] for r in rows]
    span = max(max(abs(x - 0.5) for x in xs), max(abs(y) for y in ys)) * 1.1 or 1.0
    ns = [r[0] for r in rows]
    lo, hi = min(ns), max(ns)

    def sx(x):
        return width / 2 + (x - 0.5) / span * (width / 2 - 20)

    def sy(y):
        return height / 2 - y / span * (height / 2 - 20)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- freethin {version} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="0" y1="{sy(0):.2f}" x2="{width}" y2="{sy(0):.2f}" stroke="#999" stroke-width="0.5"/>',
        f'<line x1="{sx(0.5):.2f}" y1="0" x2="{sx(0.5):.2f}" y2="{height}" stroke="#999" stroke-width="0.5" stroke-dasharray="4 3"/>',
    ]
    for n, x, y, _ in rows:
        t = 0.0 if hi == lo else (n - lo) / (hi - lo)
        colour = f"rgb({int(40 + 200 * t)},{int(60 + 60 * (1 - t))},{int(220 - 180 * t)})"
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="1.8" fill="{colour}"/>')
    out.append(
        f'<text x="10" y="{height - 10}" font-size="12" font-family="sans-serif">'
        f"zeros of 1 - z^n - (1 - z)^n, {lo} &lt;= n &lt;= {hi}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
