"""The 31 benchmark objectives: fifteen 2-D functions, Lennard-Jones clusters
of 3..10 particles and Rastrigin in 3..10 dimensions.

Every evaluator works along the last axis, so a ``(n, d)`` swarm is scored
in one call. Gradients take a single point.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .core import BoxDomain, ObjectiveSpec, OutOfDomain, UnknownFunction

PI = np.pi
TWO_PI = 2 * np.pi


# --------------------------------------------------------------------------
# 2-D functions
# --------------------------------------------------------------------------

def ackley(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    r = np.sqrt(0.5 * (x1**2 + x2**2))
    return (-20.0 * np.exp(-0.2 * r) - np.exp(0.5 * (np.cos(TWO_PI * x1) + np.cos(TWO_PI * x2)))
            + np.e + 20.0)


def ackley_grad(x):
    x1, x2 = x
    r = math.sqrt(0.5 * (x1**2 + x2**2))
    e2 = math.exp(0.5 * (math.cos(TWO_PI * x1) + math.cos(TWO_PI * x2)))
    g = np.array([PI * math.sin(TWO_PI * x1) * e2, PI * math.sin(TWO_PI * x2) * e2])
    if r > 0:
        g += 2.0 * math.exp(-0.2 * r) / r * np.array([x1, x2])
    return g


def beale(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return ((1.5 - x1 + x1 * x2) ** 2 + (2.25 - x1 + x1 * x2**2) ** 2
            + (2.625 - x1 + x1 * x2**3) ** 2)


def beale_grad(x):
    x1, x2 = x
    t1 = 1.5 - x1 + x1 * x2
    t2 = 2.25 - x1 + x1 * x2**2
    t3 = 2.625 - x1 + x1 * x2**3
    return np.array([
        2 * t1 * (x2 - 1) + 2 * t2 * (x2**2 - 1) + 2 * t3 * (x2**3 - 1),
        2 * t1 * x1 + 4 * t2 * x1 * x2 + 6 * t3 * x1 * x2**2,
    ])


def booth(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return (x1 + 2 * x2 - 7) ** 2 + (2 * x1 + x2 - 5) ** 2


def booth_grad(x):
    x1, x2 = x
    a, b = x1 + 2 * x2 - 7, 2 * x1 + x2 - 5
    return np.array([2 * a + 4 * b, 4 * a + 2 * b])


def easom(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return -np.cos(x1) * np.cos(x2) * np.exp(-((x1 - PI) ** 2 + (x2 - PI) ** 2))


def easom_grad(x):
    x1, x2 = x
    e = math.exp(-((x1 - PI) ** 2 + (x2 - PI) ** 2))
    c1, c2 = math.cos(x1), math.cos(x2)
    return np.array([
        e * (math.sin(x1) * c2 + 2 * (x1 - PI) * c1 * c2),
        e * (c1 * math.sin(x2) + 2 * (x2 - PI) * c1 * c2),
    ])


def eggholder(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return (-(x2 + 47) * np.sin(np.sqrt(np.abs(x1 / 2 + x2 + 47)))
            - x1 * np.sin(np.sqrt(np.abs(x1 - (x2 + 47)))))


def eggholder_grad(x):
    """Gradient away from the kinks ``x1/2 + x2 + 47 = 0`` and ``x1 - x2 - 47 = 0``."""
    x1, x2 = x
    a = x1 / 2 + x2 + 47
    b = x1 - x2 - 47
    ra, rb = math.sqrt(abs(a)), math.sqrt(abs(b))
    # d sqrt|u| / du
    da = math.copysign(0.5 / ra, a) if ra > 0 else 0.0
    db = math.copysign(0.5 / rb, b) if rb > 0 else 0.0
    ca = (x2 + 47) * math.cos(ra)
    cb = x1 * math.cos(rb)
    return np.array([
        -ca * da * 0.5 - math.sin(rb) - cb * db,
        -math.sin(ra) - ca * da + cb * db,
    ])


def goldstein_price(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    p = 19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2
    q = 18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2
    return (1 + (x1 + x2 + 1) ** 2 * p) * (30 + (2 * x1 - 3 * x2) ** 2 * q)


def goldstein_price_grad(x):
    x1, x2 = x
    u = x1 + x2 + 1
    v = 2 * x1 - 3 * x2
    p = 19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2
    q = 18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2
    a = 1 + u**2 * p
    b = 30 + v**2 * q
    dp = -14 + 6 * x1 + 6 * x2  # same for both coordinates
    da = 2 * u * p + u**2 * dp
    db1 = 4 * v * q + v**2 * (-32 + 24 * x1 - 36 * x2)
    db2 = -6 * v * q + v**2 * (48 - 36 * x1 + 54 * x2)
    return np.array([da * b + a * db1, da * b + a * db2])


def levy13(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return (np.sin(3 * PI * x1) ** 2 + (x1 - 1) ** 2 * (1 + np.sin(3 * PI * x2) ** 2)
            + (x2 - 1) ** 2 * (1 + np.sin(TWO_PI * x2) ** 2))


def levy13_grad(x):
    x1, x2 = x
    s3y = math.sin(3 * PI * x2)
    s2y = math.sin(TWO_PI * x2)
    return np.array([
        3 * PI * math.sin(6 * PI * x1) + 2 * (x1 - 1) * (1 + s3y**2),
        (x1 - 1) ** 2 * 3 * PI * math.sin(6 * PI * x2) + 2 * (x2 - 1) * (1 + s2y**2)
        + (x2 - 1) ** 2 * TWO_PI * math.sin(4 * PI * x2),
    ])


def matyas(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return 0.26 * (x1**2 + x2**2) - 0.48 * x1 * x2


def matyas_grad(x):
    x1, x2 = x
    return np.array([0.52 * x1 - 0.48 * x2, 0.52 * x2 - 0.48 * x1])


def mccormick(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return np.sin(x1 + x2) + (x1 - x2) ** 2 - 1.5 * x1 + 2.5 * x2 + 1


def mccormick_grad(x):
    x1, x2 = x
    c = math.cos(x1 + x2)
    return np.array([c + 2 * (x1 - x2) - 1.5, c - 2 * (x1 - x2) + 2.5])


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return 100 * (x2 - x1**2) ** 2 + (x1 - 1) ** 2


def rosenbrock_grad(x):
    x1, x2 = x
    return np.array([-400 * x1 * (x2 - x1**2) + 2 * (x1 - 1), 200 * (x2 - x1**2)])


def schaffer2(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    den = (1 + 0.001 * (x1**2 + x2**2)) ** 2
    return 0.5 + (np.sin(x1**2 - x2**2) ** 2 - 0.5) / den


def schaffer2_grad(x):
    x1, x2 = x
    u = x1**2 - x2**2
    dd = 1 + 0.001 * (x1**2 + x2**2)
    num = math.sin(u) ** 2 - 0.5
    dnum = math.sin(2 * u)
    return np.array([
        dnum * 2 * x1 / dd**2 - 2 * num * 0.002 * x1 / dd**3,
        -dnum * 2 * x2 / dd**2 - 2 * num * 0.002 * x2 / dd**3,
    ])


def schaffer4(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    den = (1 + 0.001 * (x1**2 + x2**2)) ** 2
    return 0.5 + (np.cos(np.sin(np.abs(x1**2 - x2**2))) ** 2 - 0.5) / den


def schaffer4_grad(x):
    """Gradient away from the kink ``|x1| = |x2|``."""
    x1, x2 = x
    u = x1**2 - x2**2
    s = math.sin(abs(u))
    dd = 1 + 0.001 * (x1**2 + x2**2)
    num = math.cos(s) ** 2 - 0.5
    dnum = -math.sin(2 * s) * math.cos(abs(u)) * (1.0 if u > 0 else -1.0 if u < 0 else 0.0)
    return np.array([
        dnum * 2 * x1 / dd**2 - 2 * num * 0.002 * x1 / dd**3,
        -dnum * 2 * x2 / dd**2 - 2 * num * 0.002 * x2 / dd**3,
    ])


def sphere(x):
    x = np.asarray(x, dtype=float)
    return np.sum(x**2, axis=-1)


def sphere_grad(x):
    return 2.0 * np.asarray(x, dtype=float)


def three_hump_camel(x):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return 2 * x1**2 - 1.05 * x1**4 + x1**6 / 6 + x1 * x2 + x2**2


def three_hump_camel_grad(x):
    x1, x2 = x
    return np.array([4 * x1 - 4.2 * x1**3 + x1**5 + x2, x1 + 2 * x2])


# --------------------------------------------------------------------------
# Rastrigin and Lennard-Jones
# --------------------------------------------------------------------------

def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return 10.0 * x.shape[-1] + np.sum(x**2 - 10.0 * np.cos(TWO_PI * x), axis=-1)


def rastrigin_grad(x):
    x = np.asarray(x, dtype=float)
    return 2 * x + 20 * PI * np.sin(TWO_PI * x)


_PAIR_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _pairs(m):
    if m not in _PAIR_CACHE:
        _PAIR_CACHE[m] = np.triu_indices(m, k=1)
    return _PAIR_CACHE[m]


def lj_energy(positions):
    """Lennard-Jones energy in reduced units, summed over unordered pairs.

    ``positions`` is ``(..., m, 3)`` or flattened ``(..., 3m)``. Coincident
    particles give ``+inf``.
    """
    p = np.asarray(positions, dtype=float)
    if p.shape[-1] != 3 or p.ndim == 1:
        p = p.reshape(p.shape[:-1] + (-1, 3))
    i, j = _pairs(p.shape[-2])
    diff = p[..., i, :] - p[..., j, :]
    r2 = np.einsum("...k,...k->...", diff, diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv6 = 1.0 / r2**3
        terms = np.where(r2 > 0, inv6 * inv6 - inv6, np.inf)
    return 4.0 * np.sum(terms, axis=-1)


def lj_gradient(positions):
    """Analytic gradient of :func:`lj_energy`, flattened to length ``3m``."""
    p = np.asarray(positions, dtype=float).reshape(-1, 3)
    diff = p[:, None, :] - p[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    if np.any(r2 == 0):
        return np.full(p.size, np.nan)
    inv2 = 1.0 / r2
    inv8 = inv2**4
    coef = 24.0 * (-2.0 * inv8 * inv2**3 + inv8)
    np.fill_diagonal(coef, 0.0)
    return np.einsum("ij,ijk->ik", coef, diff).reshape(-1)


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------

# Known minima. Values commonly quoted with 4-6 decimals were refined once
# with a bounded local minimizer from the quoted optimum; see ROUNDED_VALUES
# for the rounded figures.
EGGHOLDER_MIN = (np.array([512.0, 404.2318051252468]), -959.640662720851)
MCCORMICK_MIN = (np.array([0.5 - PI / 3, -0.5 - PI / 3]), -math.sqrt(3) / 2 - PI / 3)
SCHAFFER4_MIN = (np.array([0.0, 1.2531318314762414]), 0.29257863203598045)

ROUNDED_VALUES = {
    "ackley": 0.0, "beale": 0.0, "booth": 0.0, "easom": -1.0, "eggholder": -959.6407,
    "goldstein_price": 3.0, "levy13": 0.0, "matyas": 0.0, "mccormick": -1.9133,
    "rastrigin2d": 0.0, "rosenbrock2d": 0.0, "schaffer2": 0.0, "schaffer4": 0.292579,
    "sphere": 0.0, "three_hump_camel": 0.0,
}

# Global minima of L_m, confirmed by multi-start local minimization.
LJ_MINIMA = {
    3: -3.0,
    4: -6.0,
    5: -9.103852415707559,
    6: -12.71206225680934,
    7: -16.505384168012217,
    8: -19.82148919215477,
    9: -24.11336043364719,
    10: -28.42253189343757,
}


def _lj_geometries():
    text = resources.files("gasearch").joinpath("data/lj_minima.json").read_text()
    raw = json.loads(text)
    return {int(m): np.array(v["positions"], dtype=float).reshape(-1) for m, v in raw.items()}


def _box(bounds):
    lo, hi = zip(*bounds)
    return BoxDomain(np.array(lo, float), np.array(hi, float))


def _two_d(name, f, g, bounds, position, value):
    return ObjectiveSpec(name=name, dimension=2, evaluate=f, gradient=g, domain=_box(bounds),
                         known_min_value=float(value),
                         known_min_position=np.array(position, dtype=float), vectorized=True)


def _build_registry():
    sq = lambda a: [(-a, a), (-a, a)]  # noqa: E731
    specs = [
        _two_d("ackley", ackley, ackley_grad, sq(5), (0, 0), 0.0),
        _two_d("beale", beale, beale_grad, sq(4.5), (3, 0.5), 0.0),
        _two_d("booth", booth, booth_grad, sq(10), (1, 3), 0.0),
        _two_d("easom", easom, easom_grad, sq(100), (PI, PI), -1.0),
        _two_d("eggholder", eggholder, eggholder_grad, sq(512), *EGGHOLDER_MIN),
        _two_d("goldstein_price", goldstein_price, goldstein_price_grad, sq(2), (0, -1), 3.0),
        _two_d("levy13", levy13, levy13_grad, sq(10), (1, 1), 0.0),
        _two_d("matyas", matyas, matyas_grad, sq(10), (0, 0), 0.0),
        _two_d("mccormick", mccormick, mccormick_grad, [(-1.5, 4), (-3, 4)], *MCCORMICK_MIN),
        _two_d("rastrigin2d", rastrigin, rastrigin_grad, sq(5.12), (0, 0), 0.0),
        # defined on R x R; a conventional compact box containing the optimum
        _two_d("rosenbrock2d", rosenbrock, rosenbrock_grad, [(-5, 10), (-5, 10)], (1, 1), 0.0),
        _two_d("schaffer2", schaffer2, schaffer2_grad, sq(100), (0, 0), 0.0),
        _two_d("schaffer4", schaffer4, schaffer4_grad, sq(100), *SCHAFFER4_MIN),
        _two_d("sphere", sphere, sphere_grad, sq(100), (0, 0), 0.0),
        _two_d("three_hump_camel", three_hump_camel, three_hump_camel_grad, sq(5), (0, 0), 0.0),
    ]
    geometries = _lj_geometries()
    for m in range(3, 11):
        specs.append(ObjectiveSpec(
            name=f"lj{m}", dimension=3 * m, evaluate=lj_energy, gradient=lj_gradient,
            domain=BoxDomain.cube(-1.1, 1.1, 3 * m), known_min_value=LJ_MINIMA[m],
            known_min_position=geometries[m], vectorized=True))
    for d in range(3, 11):
        specs.append(ObjectiveSpec(
            name=f"rastrigin{d}", dimension=d, evaluate=rastrigin, gradient=rastrigin_grad,
            domain=BoxDomain.cube(-5.12, 5.12, d), known_min_value=0.0,
            known_min_position=np.zeros(d), vectorized=True))
    return {s.name: s for s in specs}


REGISTRY: dict[str, ObjectiveSpec] = _build_registry()

TWO_D = [n for n, s in REGISTRY.items() if s.dimension == 2]
LJ = [f"lj{m}" for m in range(3, 11)]
RASTRIGIN = ["rastrigin2d"] + [f"rastrigin{d}" for d in range(3, 11)]


def get(name: str) -> ObjectiveSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownFunction(name) from None


def evaluate(name: str, x) -> float:
    spec = get(name)
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dimension,) or not spec.domain.contains(x):
        raise OutOfDomain(f"point outside the domain of {name}")
    return float(spec.evaluate(x))


def known_minimum(name: str):
    """Return ``(value, position)`` of the registry's known global minimum."""
    spec = get(name)
    return spec.known_min_value, spec.known_min_position


def resolve_functions(selector: str) -> list[str]:
    """Expand ``all``, ``2d``, ``lj``, ``rastrigin`` or a comma-separated list."""
    groups = {"all": list(REGISTRY), "2d": TWO_D, "lj": LJ, "rastrigin": RASTRIGIN}
    if selector in groups:
        return list(groups[selector])
    names = [s.strip() for s in selector.split(",") if s.strip()]
    if not names:
        raise UnknownFunction(selector)
    for n in names:
        get(n)
    return names


def manifest() -> list[dict]:
    out = []
    for name, spec in REGISTRY.items():
        out.append({
            "name": name,
            "dimension": spec.dimension,
            "lower": spec.domain.lower.tolist(),
            "upper": spec.domain.upper.tolist(),
            "target": spec.known_min_value,
            "tolerance": spec.success_tolerance,
        })
    return out


def manifest_json() -> str:
    return json.dumps(manifest(), indent=2)
