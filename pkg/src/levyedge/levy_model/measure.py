"""
Levy measures made of point masses plus density pieces.

Density pieces come from a closed descriptor family so that moment
existence and tail decay are decidable:

* ``power_exp``: c * |u|^p * exp(-beta * |u|^q) on an interval that does
  not contain 0 (either end may be infinite);
* ``tabulated``: piecewise-linear density through user grid points on a
  finite interval that does not contain 0.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from ..errors import ModelError, MomentDoesNotExist, QuadratureError
from ..quadrature import integrate

MOMENT_RTOL = 1e-12


def expm1i_minus_linear(theta):
    """exp(i theta) - 1 - i theta without cancellation at small theta."""
    theta = np.asarray(theta, dtype=np.float64)
    real = -2.0 * np.sin(0.5 * theta) ** 2
    small = np.abs(theta) < 0.5
    t2 = theta * theta
    # sin(theta) - theta as a Horner series; exact to rounding for |theta| < 0.5.
    inner = 1.0
    for d in (272.0, 210.0, 156.0, 110.0, 72.0, 42.0, 20.0):
        inner = 1.0 - t2 / d * inner
    series = -theta * t2 / 6.0 * inner
    imag = np.where(small, series, np.sin(theta) - theta)
    return real + 1j * imag


@dataclass(frozen=True)
class Atom:
    x: float
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "mass", float(self.mass))
        if not math.isfinite(self.x) or self.x == 0.0:
            raise ModelError(f"atom location must be finite and nonzero, got {self.x}")
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise ModelError(f"atom mass must be positive and finite, got {self.mass}")

    def to_dict(self):
        return {"x": self.x, "mass": self.mass}


def _check_support(lower, upper):
    lower, upper = float(lower), float(upper)
    if math.isnan(lower) or math.isnan(upper) or not lower < upper:
        raise ModelError(f"support must satisfy lower < upper, got ({lower}, {upper})")
    if lower < 0.0 < upper:
        raise ModelError(f"density support ({lower}, {upper}) contains 0")
    return lower, upper


@dataclass(frozen=True)
class PowerExpPiece:
    """Density c |u|^p exp(-beta |u|^q) on (lower, upper)."""

    c: float
    p: float
    beta: float
    q: float
    lower: float
    upper: float

    kind = "power_exp"

    def __post_init__(self):
        for name in ("c", "p", "beta", "q"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ModelError(f"power_exp parameter {name} must be finite")
            object.__setattr__(self, name, value)
        lower, upper = _check_support(self.lower, self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.c <= 0.0:
            raise ModelError("power_exp needs c > 0")
        if self.beta < 0.0 or self.q <= 0.0:
            raise ModelError("power_exp needs beta >= 0 and q > 0")

    # -- geometry ---------------------------------------------------------
    @property
    def side(self):
        return 1.0 if self.lower >= 0.0 else -1.0

    @property
    def abs_range(self):
        if self.side > 0:
            return self.lower, self.upper
        return -self.upper, -self.lower

    @property
    def bounded(self):
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def log_density_abs(self, r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            out = math.log(self.c) + self.p * np.log(r)
        if self.beta > 0.0:
            out = out - self.beta * r ** self.q
        return out

    def density(self, u):
        u = np.asarray(u, dtype=np.float64)
        inside = (u > self.lower) & (u < self.upper)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = np.exp(self.log_density_abs(np.abs(u)))
        return np.where(inside, vals, 0.0)

    # -- analytic classification (guards for the numeric route) -----------
    def moment_exists(self, order):
        a, b = self.abs_range
        if a == 0.0 and order + self.p <= -1.0:
            return False
        if math.isinf(b) and self.beta == 0.0 and order + self.p >= -1.0:
            return False
        return True

    # -- integrals ----------------------------------------------------------
    def _clip(self, r_lo, r_hi):
        a, b = self.abs_range
        return max(a, r_lo), min(b, r_hi)

    def abs_moments(self, orders, r_lo=0.0, r_hi=math.inf, rtol=MOMENT_RTOL):
        """int r^k density over |u| in [r_lo, r_hi] for every k in ``orders``."""
        orders = np.asarray(orders, dtype=np.float64)
        lo, hi = self._clip(r_lo, r_hi)
        if lo >= hi:
            return np.zeros(orders.shape)
        unbounded_tail = math.isinf(hi)
        touches_zero = lo == 0.0
        for k in orders:
            if (touches_zero and k + self.p <= -1.0) or (
                unbounded_tail and self.beta == 0.0 and k + self.p >= -1.0
            ):
                raise MomentDoesNotExist(f"moment of order {k:g} of {self} diverges")

        def f(r):
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                logs = np.log(r)[:, None] * orders[None, :] + self.log_density_abs(r)[:, None]
                return np.exp(logs)

        try:
            res = integrate(f, lo, hi, rtol=rtol)
        except QuadratureError as exc:
            raise MomentDoesNotExist(f"moment integral of {self} did not converge: {exc}") from exc
        return res.value

    def signed_moments(self, orders, r_lo=0.0, r_hi=math.inf):
        orders = np.asarray(orders)
        vals = self.abs_moments(orders, r_lo, r_hi)
        if self.side < 0:
            vals = vals * np.where(orders % 2 == 1, -1.0, 1.0)
        return vals

    def jump_integral(self, s, rtol=1e-13, atol=1e-300):
        """int (e^{isu} - 1 - isu) density(u) du for every s."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        lo, hi = self.abs_range
        signed_s = self.side * s

        def f(r):
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                dens = np.exp(self.log_density_abs(r))
            return expm1i_minus_linear(r[:, None] * signed_s[None, :]) * dens[:, None]

        return integrate(f, lo, hi, rtol=rtol, atol=atol).value

    def mass(self):
        return float(self.abs_moments([0.0])[0])

    # -- sampling -------------------------------------------------------------
    def inverse_cdf(self, v):
        """Map uniforms in [0, 1) to jump sizes distributed as this piece."""
        v = np.asarray(v, dtype=np.float64)
        a, b = self.abs_range
        k = (self.p + 1.0) / self.q
        if self.beta == 0.0:
            if self.p == -1.0:
                r = a * np.exp(v * math.log(b / a))
            else:
                e = self.p + 1.0
                lo = a ** e
                hi = 0.0 if math.isinf(b) else b ** e
                r = (lo + v * (hi - lo)) ** (1.0 / e)
        elif k > 0.0:
            w_lo = self.beta * a ** self.q
            w_hi = math.inf if math.isinf(b) else self.beta * b ** self.q
            q_lo = special.gammaincc(k, w_lo)
            q_hi = 0.0 if math.isinf(w_hi) else special.gammaincc(k, w_hi)
            # Upper regularised form keeps precision on far-tail pieces.
            w = special.gammainccinv(k, q_lo - v * (q_lo - q_hi))
            r = (w / self.beta) ** (1.0 / self.q)
        else:
            r = _numeric_inverse(self)(v)
        return self.side * np.clip(r, a, b)

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {"c": self.c, "p": self.p, "beta": self.beta, "q": self.q},
            "support": [_encode_end(self.lower), _encode_end(self.upper)],
        }


@lru_cache(maxsize=32)
def _numeric_inverse(piece, n_cells=8192):
    a, b = piece.abs_range
    if math.isinf(b):
        # Cut where the remaining mass is negligible.
        b = max(2.0 * a, 1.0)
        total = piece.abs_moments([0.0])[0]
        while piece.abs_moments([0.0], r_lo=b)[0] > 1e-15 * total:
            b *= 2.0
    if a > 0.0 and b / a > 50.0:
        grid = np.geomspace(a, b, n_cells + 1)
    else:
        grid = np.linspace(a, b, n_cells + 1)
    x, w = np.polynomial.legendre.leggauss(12)
    mid = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * (grid[1:] - grid[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    with np.errstate(divide="ignore", over="ignore"):
        dens = np.exp(piece.log_density_abs(nodes))
    cell = half * (dens @ w)
    cdf = np.concatenate(([0.0], np.cumsum(cell)))
    cdf /= cdf[-1]

    def inv(v):
        return np.interp(v, cdf, grid)

    return inv


@dataclass(frozen=True)
class TabulatedPiece:
    """Piecewise-linear density through (x_i, y_i); zero outside [x_0, x_n]."""

    x: tuple
    y: tuple

    kind = "tabulated"

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) < 2 or len(x) != len(y):
            raise ModelError("tabulated density needs matching x, y with at least 2 points")
        if any(not math.isfinite(v) for v in x + y):
            raise ModelError("tabulated density values must be finite")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ModelError("tabulated grid must be strictly increasing")
        if any(v < 0.0 for v in y) or not any(v > 0.0 for v in y):
            raise ModelError("tabulated density must be non-negative and not identically 0")
        _check_support(x[0], x[-1])
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def lower(self):
        return self.x[0]

    @property
    def upper(self):
        return self.x[-1]

    @property
    def bounded(self):
        return True

    @property
    def abs_range(self):
        if self.x[0] >= 0.0:
            return self.x[0], self.x[-1]
        return -self.x[-1], -self.x[0]

    def density(self, u):
        u = np.asarray(u, dtype=np.float64)
        vals = np.interp(u, self.x, self.y)
        return np.where((u >= self.x[0]) & (u <= self.x[-1]), vals, 0.0)

    def log_density_abs(self, r):
        """log density at |u| = r on this piece's side."""
        side = 1.0 if self.x[0] >= 0.0 else -1.0
        with np.errstate(divide="ignore"):
            return np.log(self.density(side * np.asarray(r, dtype=np.float64)))

    def moment_exists(self, order):
        return not (self.abs_range[0] == 0.0 and order <= -1.0)

    def _segments(self, r_lo, r_hi):
        lo_u, hi_u = (r_lo, r_hi) if self.x[0] >= 0.0 else (-r_hi, -r_lo)
        for x0, x1 in zip(self.x, self.x[1:]):
            a, b = max(x0, lo_u), min(x1, hi_u)
            if a < b:
                yield a, b

    def signed_moments(self, orders, r_lo=0.0, r_hi=math.inf):
        orders = np.asarray(orders, dtype=np.float64)
        # 32-point Gauss-Legendre is exact for linear * u^k with k <= 62.
        x, w = np.polynomial.legendre.leggauss(32)
        total = np.zeros(orders.shape)
        for a, b in self._segments(r_lo, r_hi):
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
            vals = self.density(nodes)
            pw = nodes[:, None] ** orders[None, :]
            total += 0.5 * (b - a) * (w * vals) @ pw
        return total

    def abs_moments(self, orders, r_lo=0.0, r_hi=math.inf):
        vals = self.signed_moments(orders, r_lo, r_hi)
        if self.x[0] < 0.0:
            vals = vals * np.where(np.asarray(orders) % 2 == 1, -1.0, 1.0)
        return vals

    def jump_integral(self, s, rtol=1e-13, atol=1e-300):
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        total = np.zeros(s.shape, dtype=np.complex128)
        for a, b in self._segments(0.0, math.inf):
            def f(u):
                return expm1i_minus_linear(u[:, None] * s[None, :]) * self.density(u)[:, None]

            total += integrate(f, a, b, rtol=rtol, atol=atol).value
        return total

    def mass(self):
        return float(sum(0.5 * (y0 + y1) * (x1 - x0)
                         for x0, x1, y0, y1 in zip(self.x, self.x[1:], self.y, self.y[1:])))

    def inverse_cdf(self, v):
        v = np.asarray(v, dtype=np.float64)
        xs = np.array(self.x)
        ys = np.array(self.y)
        h = np.diff(xs)
        cell = 0.5 * (ys[:-1] + ys[1:]) * h
        cum = np.concatenate(([0.0], np.cumsum(cell)))
        target = v * cum[-1]
        j = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(cell) - 1)
        rem = target - cum[j]
        y0 = ys[j]
        slope = (ys[j + 1] - ys[j]) / h[j]
        disc = np.sqrt(np.maximum(y0 * y0 + 2.0 * slope * rem, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = np.where(y0 + disc > 0.0, 2.0 * rem / (y0 + disc), 0.0)
        return np.clip(xs[j] + tau, xs[j], xs[j + 1])

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {"x": list(self.x), "y": list(self.y)},
            "support": [self.x[0], self.x[-1]],
        }


def _encode_end(v):
    return None if math.isinf(v) else v


def _decode_end(v, default):
    if v is None:
        return default
    return float(v)


def piece_from_dict(d):
    try:
        kind = d["kind"]
        params = d["params"]
        if kind == "power_exp":
            support = d["support"]
            return PowerExpPiece(
                c=params["c"], p=params.get("p", 0.0), beta=params.get("beta", 0.0),
                q=params.get("q", 1.0),
                lower=_decode_end(support[0], -math.inf),
                upper=_decode_end(support[1], math.inf),
            )
        if kind == "tabulated":
            piece = TabulatedPiece(x=tuple(params["x"]), y=tuple(params["y"]))
            if "support" in d and list(d["support"]) != [piece.x[0], piece.x[-1]]:
                raise ModelError("tabulated support must equal the grid end points")
            return piece
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelError(f"malformed density piece {d!r}: {exc}") from exc
    raise ModelError(f"unknown density piece kind {kind!r}")


@dataclass(frozen=True)
class LevyMeasure:
    atoms: tuple = ()
    pieces: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        # Integrability of min(u^2, 1).
        for piece in self.pieces:
            try:
                piece.abs_moments([2.0], 0.0, 1.0)
                piece.abs_moments([0.0], 1.0, math.inf)
            except MomentDoesNotExist as exc:
                raise ModelError(f"{piece} does not integrate min(u^2, 1): {exc}") from exc

    @property
    def is_empty(self):
        return not self.atoms and not self.pieces

    @property
    def has_density(self):
        return bool(self.pieces)

    @property
    def bound(self):
        """sup |u| over the support (0 for the zero measure, inf if unbounded)."""
        ends = [abs(a.x) for a in self.atoms]
        for piece in self.pieces:
            ends.append(max(abs(piece.lower), abs(piece.upper)))
        return max(ends, default=0.0)

    @property
    def bounded_support(self):
        return math.isfinite(self.bound)

    @property
    def positive_support(self):
        return all(a.x > 0 for a in self.atoms) and all(p.lower >= 0 for p in self.pieces)

    def moments(self, orders, r_lo=0.0, r_hi=math.inf):
        """Signed moments int u^k mu(du) restricted to |u| in [r_lo, r_hi]."""
        orders = np.asarray(orders)
        total = np.zeros(orders.shape, dtype=np.float64)
        for atom in self.atoms:
            if r_lo <= abs(atom.x) <= r_hi:
                total += atom.mass * atom.x ** orders.astype(np.float64)
        for piece in self.pieces:
            total += piece.signed_moments(orders, r_lo, r_hi)
        return total

    def total_mass(self):
        """Total mass; ``inf`` for infinite activity."""
        mass = sum(a.mass for a in self.atoms)
        for piece in self.pieces:
            try:
                mass += piece.abs_moments([0.0])[0]
            except MomentDoesNotExist:
                return math.inf
        return float(mass)

    def large_jump_mean(self):
        """int_{|u|>1} u mu(du) (the part the truncated compensator leaves out)."""
        total = sum(a.mass * a.x for a in self.atoms if abs(a.x) > 1.0)
        for piece in self.pieces:
            lo, hi = piece.abs_range
            if hi > 1.0:
                total += float(piece.signed_moments(np.array([1]), 1.0, math.inf)[0])
        return float(total)

    def jump_exponent(self, s, rtol=1e-13):
        """int (e^{isu} - 1 - isu) mu(du), the fully compensated jump part."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = np.zeros(s.shape, dtype=np.complex128)
        for atom in self.atoms:
            out += atom.mass * expm1i_minus_linear(atom.x * s)
        for piece in self.pieces:
            out += piece.jump_integral(s, rtol=rtol)
        return out

    def to_dict(self):
        return {
            "atoms": [a.to_dict() for a in self.atoms],
            "density_pieces": [p.to_dict() for p in self.pieces],
        }
