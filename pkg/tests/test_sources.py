import math

import numpy as np
import pytest

from mmselab import sources
from mmselab.numerics import integrate
from mmselab.sources import (
    AmplitudeLaw,
    ScalarSource,
    ZeroVariance,
    builtin_sources,
    expstd,
    from_atoms,
    gaussian,
    gaussian_mixture,
    gaussian_pair_amplitude,
    magnitude_law,
    moment,
    parse_amplitude,
    parse_source,
    rademacher,
    sample,
    standardize,
    uniform,
    unit_amplitude,
)


def test_moment_examples():
    assert moment(rademacher(), 4) == pytest.approx(1.0)
    assert moment(gaussian(), 4) == pytest.approx(3.0)
    assert moment(uniform(), 4) == pytest.approx(9.0 / 5.0)
    assert moment(expstd(), 3) == pytest.approx(2.0)
    assert moment(expstd(), 4) == pytest.approx(9.0)


def test_moment_rejects_bad_order():
    with pytest.raises(ValueError):
        moment(gaussian(), 5)


def test_all_registered_sources_standardized():
    for src in builtin_sources():
        assert abs(src.moment(1)) <= 1e-12, src.name
        assert abs(src.moment(2) - 1.0) <= 1e-12, src.name


def test_standardize_gaussian():
    raw = ScalarSource(kind="gaussian", name="raw", params=(5.0, 2.0))
    std = standardize(raw)
    assert std.params == (0.0, 1.0)


def test_standardize_atoms():
    raw = ScalarSource(kind="atoms", name="raw", atoms=((0.0, 0.5), (2.0, 0.5)))
    std = standardize(raw)
    values = sorted(v for v, _ in std.atoms)
    assert values == pytest.approx([-1.0, 1.0])


def test_standardize_exponential_moments():
    raw = ScalarSource(kind="exponential", name="raw", params=(0.0, 1.0))
    std = standardize(raw)
    assert std.moment(3) == pytest.approx(2.0, abs=1e-12)
    assert std.moment(4) == pytest.approx(9.0, abs=1e-12)
    # quadrature oracle for the standardized moments
    for k, expected in ((3, 2.0), (4, 9.0)):
        val, _ = integrate(
            lambda x, k=k: (x**k) * math.exp(-(x + 1.0)), (-1.0, 120.0)
        )
        assert val == pytest.approx(expected, abs=1e-8)


def test_standardize_idempotent():
    for src in builtin_sources():
        again = standardize(src)
        assert again.moment(3) == pytest.approx(src.moment(3), abs=1e-12)
        assert again.moment(4) == pytest.approx(src.moment(4), abs=1e-12)


def test_standardize_rejects_degenerate():
    raw = ScalarSource(kind="atoms", name="point", atoms=((3.0, 1.0),))
    with pytest.raises(ZeroVariance):
        standardize(raw)


def test_mixture_standardization_moments():
    mix = gaussian_mixture(0.3, -1.0, 0.5, 2.0, 1.2)
    # frozen from a 40-digit computation of the standardized component moments
    assert mix.moment(3) == pytest.approx(-0.003686968611927, abs=1e-13)
    assert mix.moment(4) == pytest.approx(1.9898664163139, abs=1e-12)


def test_sampling_reproducible():
    for src in builtin_sources():
        a = sample(src, np.random.default_rng(123), 64)
        b = sample(src, np.random.default_rng(123), 64)
        np.testing.assert_array_equal(a, b)


def test_rademacher_sample_values():
    draws = sample(rademacher(), np.random.default_rng(7), 4)
    assert set(np.unique(draws)).issubset({-1.0, 1.0})


def test_gaussian_sample_variance():
    draws = sample(gaussian(), np.random.default_rng(11), 10**6)
    # 3 sigma bound on the sample variance of 1e6 standard normals
    assert abs(np.var(draws) - 1.0) < 0.01


def test_sample_statistics_all_sources():
    rng = np.random.default_rng(2024)
    for src in builtin_sources():
        draws = src.sample(rng, 200_000)
        assert abs(draws.mean()) < 0.02, src.name
        assert abs(draws.var() - 1.0) < 0.04, src.name


def test_output_density_matches_sampling_free_quadrature():
    # generic check: closed-form kernels agree with direct x-integration
    y_probe = np.array([-1.7, -0.3, 0.0, 0.8, 2.4])
    q = 0.7
    sq = math.sqrt(q)
    for src in builtin_sources():
        dens = src.output_density(y_probe, q)
        cross = src.cross_density(y_probe, q)
        for yi, d, c in zip(y_probe, dens, cross):
            if src.kind == "atoms":
                vals = np.array([v for v, _ in src.atoms])
                probs = np.array([p for _, p in src.atoms])
                phi = np.exp(-0.5 * (yi - sq * vals) ** 2) / math.sqrt(2 * math.pi)
                d_ref, c_ref = float(probs @ phi), float((probs * vals) @ phi)
            else:
                rng_draws = src.sample(np.random.default_rng(5), 400_000)
                phi = np.exp(-0.5 * (yi - sq * rng_draws) ** 2) / math.sqrt(2 * math.pi)
                d_ref, c_ref = float(phi.mean()), float((rng_draws * phi).mean())
                assert d == pytest.approx(d_ref, abs=4e-3)
                assert c == pytest.approx(c_ref, abs=4e-3)
                continue
            assert d == pytest.approx(d_ref, rel=1e-12)
            assert c == pytest.approx(c_ref, rel=1e-12)


def test_custom_source_roundtrip():
    # triangular density on [-sqrt(6), sqrt(6)] is already standardized
    b = math.sqrt(6.0)
    tri = sources.custom_source(
        lambda x: max(0.0, (1.0 - abs(x) / b) / b), (-b, b), name="triangle"
    )
    assert abs(tri.moment(1)) < 1e-9
    assert tri.moment(4) == pytest.approx(2.4, abs=1e-6)  # 6*b^4/15/b... = 12/5
    dens = tri.output_density(np.array([0.0, 1.0]), 0.5)
    assert np.all(dens > 0)
    with pytest.raises(ValueError):
        tri.sample(np.random.default_rng(0), 8)


def test_parse_source_specs():
    assert parse_source("rademacher").name == "rademacher"
    assert parse_source("expstd").kind == "exponential"
    mix = parse_source("mix:0.3,-1,0.5,2,1.2")
    assert mix.is_standard
    atoms = parse_source("atoms:0,0.5,2,0.5")
    assert sorted(v for v, _ in atoms.atoms) == pytest.approx([-1.0, 1.0])
    with pytest.raises(ValueError):
        parse_source("cauchy")
    with pytest.raises(ValueError):
        parse_source("mix:1,2")


def test_amplitude_laws():
    assert unit_amplitude().magnitude_atoms() == ((1.0, 1.0),)
    mags = magnitude_law([0.5, math.sqrt(1.75)], [0.5, 0.5])
    a = np.array([v for v, _ in mags.magnitudes])
    p = np.array([w for _, w in mags.magnitudes])
    assert float(p @ a**2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        magnitude_law([1.0, 2.0], [0.5, 0.5])  # E a^2 = 2.5 != 1
    with pytest.raises(ValueError):
        AmplitudeLaw(kind="nope", name="x")


def test_amplitude_coefficient_sampling():
    rng = np.random.default_rng(3)
    pairs = unit_amplitude().sample_coefficients(rng, 50_000)
    radii = np.hypot(pairs[:, 0], pairs[:, 1])
    np.testing.assert_allclose(radii, 1.0, atol=1e-12)
    g = gaussian_pair_amplitude().sample_coefficients(np.random.default_rng(4), 200_000)
    assert np.mean(np.sum(g * g, axis=1)) == pytest.approx(1.0, abs=0.01)


def test_parse_amplitude():
    assert parse_amplitude("unit").kind == "unit"
    assert parse_amplitude("gaussian").kind == "gaussian-pair"
    assert parse_amplitude("mags:0.5,0.5,1.3228756555322954,0.5").kind == "magnitudes"
    with pytest.raises(ValueError):
        parse_amplitude("rayleigh")
