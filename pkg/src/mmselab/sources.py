"""Input-law registry: standardized scalar laws and tone amplitude laws.

Every registered scalar law X satisfies EX = 0, EX^2 = 1 (within 1e-12) and
carries closed-form third/fourth moments, a seeded sampler, and vectorized
kernels for the additive-noise channel Y = W + sqrt(q) X:

    output_density(y, q) = E_X[ phi(y - sqrt(q) X) ]
    cross_density(y, q)  = E_X[ X * phi(y - sqrt(q) X) ]

with phi the standard normal density.  Closed forms are used for every
built-in kind; only ``custom`` laws fall back to per-point quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special as _sp

from .numerics import DEFAULT_QUADRATURE, QuadratureConfig, integrate

__all__ = [
    "ZeroVariance",
    "ScalarSource",
    "AmplitudeLaw",
    "rademacher",
    "gaussian",
    "uniform",
    "expstd",
    "gaussian_mixture",
    "from_atoms",
    "custom_source",
    "standardize",
    "moment",
    "sample",
    "builtin_sources",
    "parse_source",
    "unit_amplitude",
    "gaussian_pair_amplitude",
    "magnitude_law",
    "parse_amplitude",
]

_STD_TOL = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class ZeroVariance(Exception):
    """Raised when a law with zero spread is asked to be standardized."""


def _phi(t):
    return np.exp(-0.5 * np.square(t)) / _SQRT_2PI


def _ndtr_diff(v1, v2):
    """Phi(v2) - Phi(v1) for v1 <= v2, accurate in both tails.

    When both arguments are positive the difference is formed from the
    complementary tail (mirrored), where the terms are far apart in
    magnitude and no cancellation occurs.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    return np.where(
        v1 >= 0.0,
        _sp.ndtr(-v1) - _sp.ndtr(-v2),
        _sp.ndtr(v2) - _sp.ndtr(v1),
    )


@dataclass(frozen=True)
class ScalarSource:
    """A scalar input law.

    kind is one of ``atoms``, ``gaussian``, ``uniform``, ``exponential``,
    ``mixture``, ``custom``.  Parameter fields by kind:

    - atoms:       ``atoms`` = ((value, prob), ...)
    - gaussian:    ``params`` = (mean, sigma)
    - uniform:     ``params`` = (lo, hi)
    - exponential: ``params`` = (loc, scale), law of loc + scale * Exp(1)
    - mixture:     ``components`` = ((weight, mean, sigma), ...)
    - custom:      ``pdf`` on ``support``; optional ``sampler(rng, n)``
    """

    kind: str
    name: str
    atoms: tuple = ()
    params: tuple = ()
    components: tuple = ()
    pdf: Callable | None = None
    support: tuple = (-math.inf, math.inf)
    sampler: Callable | None = None
    _moments: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.kind == "atoms":
            probs = np.array([p for _, p in self.atoms])
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError("atom probabilities must be >= 0 and sum to 1")
        if self.kind == "mixture":
            w = np.array([c[0] for c in self.components])
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("mixture weights must be >= 0 and sum to 1")
            if any(c[2] <= 0 for c in self.components):
                raise ValueError("mixture sigmas must be positive")
        if not self._moments:
            object.__setattr__(self, "_moments", self._raw_moments())

    # -- moments ---------------------------------------------------------

    def _raw_moments(self) -> tuple:
        """(EX, EX^2, EX^3, EX^4) from closed forms (quadrature for custom)."""
        if self.kind == "atoms":
            v = np.array([x for x, _ in self.atoms])
            p = np.array([w for _, w in self.atoms])
            return tuple(float(np.dot(p, v**k)) for k in (1, 2, 3, 4))
        if self.kind == "gaussian":
            mu, s = self.params
            return _gaussian_raw_moments(mu, s)
        if self.kind == "uniform":
            lo, hi = self.params
            # E X^k = (hi^{k+1} - lo^{k+1}) / ((k+1)(hi - lo))
            return tuple(
                (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo)) for k in (1, 2, 3, 4)
            )
        if self.kind == "exponential":
            loc, s = self.params
            # raw moments of Exp(1): 1, 2, 6, 24; shift/scale by binomial expansion
            e = (1.0, 1.0, 2.0, 6.0, 24.0)
            out = []
            for k in (1, 2, 3, 4):
                out.append(
                    sum(math.comb(k, j) * loc ** (k - j) * s**j * e[j] for j in range(k + 1))
                )
            return tuple(out)
        if self.kind == "mixture":
            acc = [0.0] * 4
            for w, mu, s in self.components:
                g = _gaussian_raw_moments(mu, s)
                for i in range(4):
                    acc[i] += w * g[i]
            return tuple(acc)
        if self.kind == "custom":
            lo, hi = self.support
            cfg = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-12, max_subdivisions=400)
            out = []
            for k in (1, 2, 3, 4):
                val, _ = integrate(lambda x, k=k: x**k * self.pdf(x), (lo, hi), cfg)
                out.append(val)
            return tuple(out)
        raise ValueError(f"unknown source kind {self.kind!r}")

    def moment(self, k: int) -> float:
        """Raw moment E X^k for k in 1..4."""
        if k not in (1, 2, 3, 4):
            raise ValueError("k must be in 1..4")
        return self._moments[k - 1]

    @property
    def is_standard(self) -> bool:
        m1, m2 = self._moments[0], self._moments[1]
        return abs(m1) <= _STD_TOL and abs(m2 - 1.0) <= _STD_TOL

    # -- sampling --------------------------------------------------------

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n i.i.d. draws using the supplied generator."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if self.kind == "atoms":
            v = np.array([x for x, _ in self.atoms])
            p = np.array([w for _, w in self.atoms])
            return rng.choice(v, size=n, p=p)
        if self.kind == "gaussian":
            mu, s = self.params
            return mu + s * rng.standard_normal(n)
        if self.kind == "uniform":
            lo, hi = self.params
            return rng.uniform(lo, hi, size=n)
        if self.kind == "exponential":
            loc, s = self.params
            return loc + s * rng.standard_exponential(n)
        if self.kind == "mixture":
            w = np.array([c[0] for c in self.components])
            idx = rng.choice(len(w), size=n, p=w)
            mus = np.array([c[1] for c in self.components])[idx]
            sig = np.array([c[2] for c in self.components])[idx]
            return mus + sig * rng.standard_normal(n)
        if self.kind == "custom":
            if self.sampler is None:
                raise ValueError("custom source has no sampler")
            return np.asarray(self.sampler(rng, n), dtype=float)
        raise ValueError(f"unknown source kind {self.kind!r}")

    # -- channel kernels --------------------------------------------------

    def output_density(self, y, q: float):
        """E_X[ phi(y - sqrt(q) X) ], vectorized over y."""
        y = np.asarray(y, dtype=float)
        sq = math.sqrt(q)
        if self.kind == "atoms":
            v = np.array([x for x, _ in self.atoms])
            p = np.array([w for _, w in self.atoms])
            return _phi(y[..., None] - sq * v) @ p
        if self.kind == "gaussian":
            mu, s = self.params
            var = 1.0 + q * s * s
            return np.exp(-0.5 * np.square(y - sq * mu) / var) / math.sqrt(2 * math.pi * var)
        if self.kind == "mixture":
            acc = np.zeros_like(y, dtype=float)
            for w, mu, s in self.components:
                var = 1.0 + q * s * s
                acc += w * np.exp(-0.5 * np.square(y - sq * mu) / var) / math.sqrt(2 * math.pi * var)
            return acc
        if self.kind == "uniform":
            lo, hi = self.params
            if q == 0.0:
                return _phi(y)
            width = hi - lo
            return _ndtr_diff(y - sq * hi, y - sq * lo) / (width * sq)
        if self.kind == "exponential":
            loc, s = self.params
            if q == 0.0:
                return _phi(y)
            # For X = loc + s*E:  p(y) = erfcx((1/(s*sq) - u)/sqrt2) exp(-u^2/2) / (2 s sq)
            # with u = y - sq*loc.  Past the crossover u > 1/(s*sq) the erfcx
            # form overflows; there the equivalent exponential-tail form
            # exp(1/(2 ssq^2) - u/ssq) Phi(u - 1/ssq) / ssq has a negative
            # exponent and is the stable one.
            ssq = s * sq
            u = y - sq * loc
            w = (1.0 / ssq - u) / math.sqrt(2.0)
            pos = w >= 0.0
            head = _sp.erfcx(np.where(pos, w, 0.0)) * np.exp(-0.5 * np.square(u)) / (2.0 * ssq)
            tail_exp = np.where(pos, -1.0, 0.5 / (ssq * ssq) - u / ssq)
            tail = np.exp(tail_exp) * _sp.ndtr(u - 1.0 / ssq) / ssq
            return np.where(pos, head, tail)
        if self.kind == "custom":
            return _custom_kernel(self, y, q, weight=None)
        raise ValueError(f"unknown source kind {self.kind!r}")

    def cross_density(self, y, q: float):
        """E_X[ X * phi(y - sqrt(q) X) ], vectorized over y."""
        y = np.asarray(y, dtype=float)
        sq = math.sqrt(q)
        if q == 0.0:
            return self._moments[0] * _phi(y)
        if self.kind == "atoms":
            v = np.array([x for x, _ in self.atoms])
            p = np.array([w for _, w in self.atoms])
            return _phi(y[..., None] - sq * v) @ (p * v)
        if self.kind in ("gaussian", "mixture"):
            comps = (
                ((1.0,) + tuple(self.params),) if self.kind == "gaussian" else self.components
            )
            acc = np.zeros_like(y, dtype=float)
            for w, mu, s in comps:
                var = 1.0 + q * s * s
                dens = np.exp(-0.5 * np.square(y - sq * mu) / var) / math.sqrt(2 * math.pi * var)
                post_mean = (mu + sq * s * s * y) / var
                acc += w * dens * post_mean
            return acc
        if self.kind == "uniform":
            lo, hi = self.params
            v2 = y - sq * lo
            v1 = y - sq * hi
            width = hi - lo
            return (y * _ndtr_diff(v1, v2) + _phi(v2) - _phi(v1)) / (width * q)
        if self.kind == "exponential":
            # score identity: E[X phi] = (p'(y) + y p(y)) / sq with
            # p'(y) = (phi(u) - p)/(s*sq) for the shifted/scaled exponential.
            loc, s = self.params
            p = self.output_density(y, q)
            u = y - sq * loc
            return ((_phi(u) - p) / (s * sq) + y * p) / sq
        if self.kind == "custom":
            return _custom_kernel(self, y, q, weight=lambda x: x)
        raise ValueError(f"unknown source kind {self.kind!r}")

    def bulk_radius(self, tail_width: float) -> float:
        """Radius B with P(|X| > B) negligible at the ``tail_width`` scale."""
        if self.kind == "atoms":
            return max(abs(x) for x, _ in self.atoms)
        if self.kind == "gaussian":
            mu, s = self.params
            return abs(mu) + tail_width * s
        if self.kind == "uniform":
            lo, hi = self.params
            return max(abs(lo), abs(hi))
        if self.kind == "exponential":
            loc, s = self.params
            return abs(loc) + s * (0.5 * tail_width**2 + tail_width)
        if self.kind == "mixture":
            return max(abs(mu) + tail_width * s for _, mu, s in self.components)
        lo, hi = self.support
        cap = 0.5 * tail_width**2
        return min(max(abs(lo), abs(hi)), cap)


def _gaussian_raw_moments(mu: float, s: float) -> tuple:
    v = s * s
    return (
        mu,
        mu * mu + v,
        mu**3 + 3 * mu * v,
        mu**4 + 6 * mu * mu * v + 3 * v * v,
    )


def _custom_kernel(src: ScalarSource, y: np.ndarray, q: float, weight) -> np.ndarray:
    sq = math.sqrt(q)
    lo, hi = src.support
    scalar = y.ndim == 0
    ys = np.atleast_1d(y)
    out = np.empty_like(ys, dtype=float)
    tail = DEFAULT_QUADRATURE.tail_width
    for i, yv in enumerate(ys):
        if q > 0:
            a = max(lo, (yv - tail) / sq)
            b = min(hi, (yv + tail) / sq)
        else:
            a, b = lo, hi
        if not a < b:
            out[i] = 0.0
            continue
        if weight is None:
            f = lambda x: src.pdf(x) * float(_phi(yv - sq * x))
        else:
            f = lambda x: weight(x) * src.pdf(x) * float(_phi(yv - sq * x))
        out[i] = integrate(f, (a, b))[0]
    return out[0] if scalar else out


# -- constructors ---------------------------------------------------------


def rademacher() -> ScalarSource:
    return ScalarSource(kind="atoms", name="rademacher", atoms=((-1.0, 0.5), (1.0, 0.5)))


def gaussian() -> ScalarSource:
    return ScalarSource(kind="gaussian", name="gaussian", params=(0.0, 1.0))


def uniform() -> ScalarSource:
    b = math.sqrt(3.0)
    return ScalarSource(kind="uniform", name="uniform", params=(-b, b))


def expstd() -> ScalarSource:
    """Standardized (shifted) exponential: Exp(1) - 1.  EX^3 = 2, EX^4 = 9."""
    return ScalarSource(kind="exponential", name="expstd", params=(-1.0, 1.0))


def from_atoms(values, probs, name: str = "atoms") -> ScalarSource:
    """Discrete law on the given atoms, standardized automatically."""
    raw = ScalarSource(
        kind="atoms",
        name=name,
        atoms=tuple((float(v), float(p)) for v, p in zip(values, probs)),
    )
    return standardize(raw)


def gaussian_mixture(weight, mu1, sigma1, mu2, sigma2, name: str = "mixture") -> ScalarSource:
    """Two-component Gaussian mixture, standardized automatically."""
    raw = ScalarSource(
        kind="mixture",
        name=name,
        components=(
            (float(weight), float(mu1), float(sigma1)),
            (1.0 - float(weight), float(mu2), float(sigma2)),
        ),
    )
    return standardize(raw)


def custom_source(pdf, support, name: str = "custom", sampler=None) -> ScalarSource:
    """Standardized law from an arbitrary density (moments by quadrature)."""
    raw = ScalarSource(kind="custom", name=name, pdf=pdf, support=tuple(support), sampler=sampler)
    return standardize(raw)


def standardize(src: ScalarSource) -> ScalarSource:
    """Affinely transformed copy of ``src`` with EX = 0, EX^2 = 1.

    Idempotent: already-standard laws come back unchanged.
    """
    m1 = src._moments[0]
    var = src._moments[1] - m1 * m1
    if var <= _STD_TOL:
        raise ZeroVariance(f"law {src.name!r} has vanishing variance {var:.3e}")
    if abs(m1) <= _STD_TOL and abs(var - 1.0) <= _STD_TOL:
        return src
    s = math.sqrt(var)
    if src.kind == "atoms":
        return ScalarSource(
            kind="atoms",
            name=src.name,
            atoms=tuple(((v - m1) / s, p) for v, p in src.atoms),
        )
    if src.kind == "gaussian":
        return ScalarSource(kind="gaussian", name=src.name, params=(0.0, 1.0))
    if src.kind == "uniform":
        lo, hi = src.params
        return ScalarSource(kind="uniform", name=src.name, params=((lo - m1) / s, (hi - m1) / s))
    if src.kind == "exponential":
        loc, sc = src.params
        return ScalarSource(
            kind="exponential", name=src.name, params=((loc - m1) / s, sc / s)
        )
    if src.kind == "mixture":
        return ScalarSource(
            kind="mixture",
            name=src.name,
            components=tuple((w, (mu - m1) / s, sg / s) for w, mu, sg in src.components),
        )
    if src.kind == "custom":
        base_pdf, (lo, hi) = src.pdf, src.support
        pdf = lambda x: base_pdf(m1 + s * x) * s
        base_sampler = src.sampler
        sampler = None
        if base_sampler is not None:
            sampler = lambda rng, n: (np.asarray(base_sampler(rng, n)) - m1) / s
        return ScalarSource(
            kind="custom",
            name=src.name,
            pdf=pdf,
            support=((lo - m1) / s, (hi - m1) / s),
            sampler=sampler,
        )
    raise ValueError(f"unknown source kind {src.kind!r}")


def moment(src: ScalarSource, k: int) -> float:
    return src.moment(k)


def sample(src: ScalarSource, rng: np.random.Generator, n: int) -> np.ndarray:
    return src.sample(rng, n)


def builtin_sources() -> tuple:
    """The registered laws used throughout the verification suites."""
    return (
        rademacher(),
        gaussian(),
        uniform(),
        expstd(),
        gaussian_mixture(0.3, -1.0, 0.5, 2.0, 1.2, name="mix-skew"),
        gaussian_mixture(0.5, -1.0, 0.6, 1.0, 0.6, name="mix-sym"),
    )


def parse_source(spec: str) -> ScalarSource:
    """Source from a CLI spec string.

    Accepted: ``rademacher``, ``gaussian``, ``uniform``, ``expstd``,
    ``mix:w,mu1,sigma1,mu2,sigma2``, ``atoms:v1,p1,v2,p2[,...]``.
    Parametric forms are standardized automatically.
    """
    spec = spec.strip()
    simple = {
        "rademacher": rademacher,
        "gaussian": gaussian,
        "uniform": uniform,
        "expstd": expstd,
    }
    if spec in simple:
        return simple[spec]()
    if spec.startswith("mix:"):
        parts = [float(t) for t in spec[4:].split(",")]
        if len(parts) != 5:
            raise ValueError(f"mix spec needs 5 numbers, got {spec!r}")
        return gaussian_mixture(*parts)
    if spec.startswith("atoms:"):
        parts = [float(t) for t in spec[6:].split(",")]
        if len(parts) < 4 or len(parts) % 2:
            raise ValueError(f"atoms spec needs value,prob pairs, got {spec!r}")
        return from_atoms(parts[0::2], parts[1::2])
    raise ValueError(f"unknown source spec {spec!r}")


# -- tone amplitude laws ---------------------------------------------------


@dataclass(frozen=True)
class AmplitudeLaw:
    """Per-tone amplitude law with E a^2 = 1.

    ``unit`` is the deterministic amplitude a = 1 (the mean-zero condition
    holds for the tone signal itself through its uniform phase, not for a).
    ``gaussian-pair`` is the jointly Gaussian cosine/sine coefficient pair,
    whose channel output is exactly Gaussian.  ``magnitudes`` is a discrete
    law on |a| values.
    """

    kind: str
    name: str
    magnitudes: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in ("unit", "gaussian-pair", "magnitudes"):
            raise ValueError(f"unknown amplitude kind {self.kind!r}")
        if self.kind == "magnitudes":
            a = np.array([v for v, _ in self.magnitudes])
            p = np.array([w for _, w in self.magnitudes])
            if np.any(a < 0) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("magnitudes must be >= 0 with probabilities summing to 1")
            if abs(float(p @ a**2) - 1.0) > 1e-12:
                raise ValueError("amplitude law must satisfy E a^2 = 1")

    def magnitude_atoms(self) -> tuple:
        """(|a|, prob) pairs; None-like for the gaussian pair (not discrete)."""
        if self.kind == "unit":
            return ((1.0, 1.0),)
        if self.kind == "magnitudes":
            return self.magnitudes
        raise ValueError("gaussian-pair amplitude has no discrete magnitudes")

    def sample_coefficients(self, rng: np.random.Generator, n: int):
        """n draws of the per-tone coefficient pair (a cos th, -a sin th)."""
        if self.kind == "gaussian-pair":
            return rng.standard_normal((n, 2)) / math.sqrt(2.0)
        mags = self.magnitude_atoms()
        a_vals = np.array([v for v, _ in mags])
        a_probs = np.array([w for _, w in mags])
        a = rng.choice(a_vals, size=n, p=a_probs)
        th = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return np.column_stack((a * np.cos(th), -a * np.sin(th)))


def unit_amplitude() -> AmplitudeLaw:
    return AmplitudeLaw(kind="unit", name="unit")


def gaussian_pair_amplitude() -> AmplitudeLaw:
    return AmplitudeLaw(kind="gaussian-pair", name="gaussian")


def magnitude_law(values, probs, name: str = "magnitudes") -> AmplitudeLaw:
    return AmplitudeLaw(
        kind="magnitudes",
        name=name,
        magnitudes=tuple((float(v), float(p)) for v, p in zip(values, probs)),
    )


def parse_amplitude(spec: str) -> AmplitudeLaw:
    """Amplitude law from ``unit``, ``gaussian``, or ``mags:a1,p1,a2,p2[,...]``."""
    spec = spec.strip()
    if spec == "unit":
        return unit_amplitude()
    if spec == "gaussian":
        return gaussian_pair_amplitude()
    if spec.startswith("mags:"):
        parts = [float(t) for t in spec[5:].split(",")]
        if len(parts) < 2 or len(parts) % 2:
            raise ValueError(f"mags spec needs value,prob pairs, got {spec!r}")
        return magnitude_law(parts[0::2], parts[1::2])
    raise ValueError(f"unknown amplitude spec {spec!r}")
