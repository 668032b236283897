"""
Failure probability models for vehicle health states.

Each model maps a parameter point (and, for the reliability families, the
mileage of the operated service) to the probability that the vehicle fails.
Models also describe the axis-aligned regions on which the probability is
monotone along signed coordinate directions.
"""
import math
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy
from scipy import special

logger = logging.getLogger('rsrptools')

INF = float('inf')


class HealthModelError(ValueError):
    pass


@dataclass(frozen=True)
class MonotonicityRegion:
    index: int
    rank: int
    signs: tuple
    bounds: tuple
    alpha: float = None

    def contains(self, theta, tol=0.0):
        return all(lo - tol <= t <= hi + tol for t, (lo, hi) in zip(theta, self.bounds))

    @property
    def directions(self):
        '''The signed unit axis vectors along which P_f does not decrease.'''
        n = len(self.signs)
        return tuple(tuple(float(s) if i == j else 0.0 for i in range(n)) for j, s in enumerate(self.signs))


@dataclass
class CheckReport:
    passed: bool
    samples: int
    witness: tuple = None
    worst: float = None


@lru_cache(maxsize=None)
def _normal_functions():
    mu, var = sympy.symbols('mu var', real=True)
    expr = (1 + sympy.erf(-mu / sympy.sqrt(2 * var))) / 2
    grad = [sympy.diff(expr, s) for s in (mu, var)]
    return (sympy.lambdify((mu, var), expr, 'math'),
            sympy.lambdify((mu, var), grad, 'math'))


@lru_cache(maxsize=None)
def _weibull_functions():
    kappa, lam, alpha = sympy.symbols('kappa lam alpha', positive=True)
    expr = 1 - sympy.exp(-(alpha / lam) ** kappa)
    grad = [sympy.diff(expr, s) for s in (kappa, lam)]
    return (sympy.lambdify((kappa, lam, alpha), expr, 'math'),
            sympy.lambdify((kappa, lam, alpha), grad, 'math'))


class HealthModel(object):
    family = None
    reliability = False
    n = 2

    def check_space(self, space):
        if space.n != self.n:
            raise HealthModelError('%s model needs %d parameters, got %d' % (self.family, self.n, space.n))

    def _check(self, theta, alpha):
        if len(theta) != self.n:
            raise HealthModelError('%s model needs %d parameters, got %d' % (self.family, self.n, len(theta)))
        if self.reliability:
            if alpha is None:
                raise HealthModelError('%s model needs the service mileage alpha' % self.family)
            if alpha < 0:
                raise HealthModelError('mileage alpha must be nonnegative, got %s' % alpha)

    def failure_probability(self, theta, alpha=None):
        raise NotImplementedError

    def gradient(self, theta, alpha=None):
        raise NotImplementedError

    def boundaries(self, alphas=()):
        '''Region boundary hyperplanes as (axis, coordinate) pairs.'''
        return []

    def anchors(self, points, alphas=()):
        '''Hyperplanes through `points` on the axes whose rounding direction depends on the mileage.'''
        return []

    def rounding_signs(self, theta, alphas=()):
        '''Per-axis signs of a rounding that does not raise P_f at any of `alphas`.

        An axis on which the regions of two mileages disagree gets sign 0: the
        value on that axis can only be kept, never rounded.

        Args:
            theta: Parameter point.
            alphas: Trip mileages that may be priced after theta.

        Returns:
            tuple of -1, 0 and +1.
        '''
        if not self.reliability:
            return self.region_of(theta).signs
        if not alphas:
            # nothing is priced
            return (-1,) * self.n
        votes = set(self.region_of(theta, alpha).signs for alpha in set(alphas))
        return tuple(axis[0] if len(set(axis)) == 1 else 0 for axis in zip(*votes))

    def regions(self, alphas=()):
        '''All monotonicity regions, ordered by mileage then rank.'''
        if self.reliability:
            if not alphas:
                raise HealthModelError('%s model needs at least one mileage to form regions' % self.family)
            result = []
            for alpha in sorted(set(alphas)):
                result.extend(self._regions_for(alpha))
            return result
        return list(self._regions_for(None))

    def region_of(self, theta, alpha=None):
        '''The region containing theta; boundary points belong to the lower rank.'''
        if self.reliability and alpha is None:
            raise HealthModelError('%s model needs the service mileage alpha' % self.family)
        candidates = self._regions_for(alpha if self.reliability else None)
        for region in candidates:
            if region.contains(theta):
                return region
        # outside every closed bound only through float noise
        return candidates[-1]

    @lru_cache(maxsize=None)
    def _regions_for(self, alpha):
        return tuple(self._build_regions(alpha))

    def _build_regions(self, alpha):
        raise NotImplementedError


class NormalModel(HealthModel):
    '''Health state ~ N(mu, sigma^2); failure when the state drops below zero.'''
    family = 'normal'

    def check_space(self, space):
        super(NormalModel, self).check_space(space)
        if not space.lower[1] > 0:
            raise HealthModelError('normal model needs sigma^2 > 0 on the whole box')

    def _check(self, theta, alpha):
        super(NormalModel, self)._check(theta, alpha)
        if not theta[1] > 0:
            raise HealthModelError('sigma^2 must be positive, got %s' % theta[1])

    def failure_probability(self, theta, alpha=None):
        self._check(theta, alpha)
        value, _ = _normal_functions()
        return min(1.0, max(0.0, value(float(theta[0]), float(theta[1]))))

    def gradient(self, theta, alpha=None):
        self._check(theta, alpha)
        _, grad = _normal_functions()
        return np.array(grad(float(theta[0]), float(theta[1])), dtype=float)

    def boundaries(self, alphas=()):
        return [(0, 0.0)]

    def _build_regions(self, alpha):
        return [MonotonicityRegion(0, 1, (-1, 1), ((0.0, INF), (0.0, INF))),
                MonotonicityRegion(1, 2, (-1, -1), ((-INF, 0.0), (0.0, INF)))]


class WeibullModel(HealthModel):
    '''Weibull lifetime with shape kappa and scale lambda; failure within mileage alpha.'''
    family = 'weibull'
    reliability = True

    def check_space(self, space):
        super(WeibullModel, self).check_space(space)
        if not (space.lower[0] > 0 and space.lower[1] > 0):
            raise HealthModelError('%s model needs kappa > 0 and lambda > 0 on the whole box' % self.family)

    def _check(self, theta, alpha):
        super(WeibullModel, self)._check(theta, alpha)
        if not (theta[0] > 0 and theta[1] > 0):
            raise HealthModelError('kappa and lambda must be positive, got %s' % (tuple(theta),))

    def failure_probability(self, theta, alpha=None):
        self._check(theta, alpha)
        if alpha == 0:
            return 0.0
        value, _ = _weibull_functions()
        return min(1.0, max(0.0, value(float(theta[0]), float(theta[1]), float(alpha))))

    def gradient(self, theta, alpha=None):
        self._check(theta, alpha)
        if alpha == 0:
            return np.zeros(2)
        _, grad = _weibull_functions()
        return np.array(grad(float(theta[0]), float(theta[1]), float(alpha)), dtype=float)

    def boundaries(self, alphas=()):
        return [(1, float(alpha)) for alpha in sorted(set(alphas))]

    def anchors(self, points, alphas=()):
        # the sign of dP/dkappa flips at lambda = alpha
        if len(set(alphas)) < 2:
            return []
        return sorted(set((0, float(point[0])) for point in points))

    def _build_regions(self, alpha):
        return [MonotonicityRegion(0, 1, (-1, -1), ((0.0, INF), (alpha, INF)), alpha),
                MonotonicityRegion(1, 2, (1, -1), ((0.0, INF), (0.0, alpha)), alpha)]


class GammaModel(WeibullModel):
    '''Gamma lifetime with shape kappa and scale lambda; failure within mileage alpha.'''
    family = 'gamma'

    def failure_probability(self, theta, alpha=None):
        self._check(theta, alpha)
        return float(special.gammainc(theta[0], alpha / theta[1]))

    def gradient(self, theta, alpha=None):
        self._check(theta, alpha)
        kappa, lam = float(theta[0]), float(theta[1])
        x = alpha / lam
        if x <= 0:
            return np.zeros(2)
        d_lam = -math.exp(kappa * math.log(x) - x - special.gammaln(kappa)) / lam
        return np.array([_gamma_dkappa(kappa, x), d_lam])

    def boundaries(self, alphas=()):
        return []

    def anchors(self, points, alphas=()):
        return []

    def regions(self, alphas=()):
        return list(self._regions_for(None))

    def region_of(self, theta, alpha=None):
        return self._regions_for(None)[0]

    def _build_regions(self, alpha):
        return [MonotonicityRegion(0, 1, (-1, -1), ((0.0, INF), (0.0, INF)))]


def _gamma_dkappa(kappa, x):
    # term-wise derivative of the power series of the regularized lower incomplete gamma
    terms = int(x + 12 * math.sqrt(x + 1) + 50)
    n = np.arange(terms, dtype=float)
    a = kappa + n + 1
    log_x = math.log(x)
    series = np.exp((kappa + n) * log_x - x - special.gammaln(a))
    return float(np.sum(series * (log_x - special.digamma(a))))


MODELS = {
    'normal': NormalModel(),
    'weibull': WeibullModel(),
    'gamma': GammaModel(),
}


def get_model(family):
    try:
        return MODELS[family]
    except (KeyError, TypeError):
        raise HealthModelError('Unknown health model family %r, expected one of %s'
                               % (family, ', '.join(sorted(MODELS))))


def _as_map(degradation, space):
    if hasattr(degradation, 'apply'):
        return lambda theta: degradation.apply(theta, space)
    return degradation


def check_alignment(model, degradation, space, sample_count=1000, alpha=None, seed=0):
    '''Sample parameter pairs and test that the degradation keeps their P_f order.

    Args:
        model (HealthModel): The failure probability model.
        degradation: A DegradationSpec, or any callable mapping theta to theta.
        space (ParameterSpace): The box to sample from.
        sample_count (int): Number of random pairs.
        alpha (float): Mileage for reliability families.
        seed (int): Sampler seed.

    Returns:
        CheckReport; witness is the first violating pair (theta, phi).
    '''
    apply = _as_map(degradation, space)
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(space.lower, space.upper, size=(sample_count, 2, space.n))
    for theta, phi in pairs:
        theta, phi = tuple(theta), tuple(phi)
        p_theta = model.failure_probability(theta, alpha)
        p_phi = model.failure_probability(phi, alpha)
        d_theta = model.failure_probability(apply(theta), alpha)
        d_phi = model.failure_probability(apply(phi), alpha)
        if p_theta <= p_phi and d_theta > d_phi + 1e-12:
            return CheckReport(False, sample_count, (theta, phi), d_theta - d_phi)
        if p_phi <= p_theta and d_phi > d_theta + 1e-12:
            return CheckReport(False, sample_count, (phi, theta), d_phi - d_theta)
    return CheckReport(True, sample_count)


def check_convex_hull_monotonicity(model, region, space, sample_count=1000, alpha=None, seed=0, weights=None):
    '''Test that P_f does not decrease along convex combinations of a region's directions.

    Points are drawn from the intersection of the box and the region bounds.
    With weights=None a fresh random combination is drawn per point.
    '''
    lower = [max(lo, b[0]) for lo, b in zip(space.lower, region.bounds)]
    upper = [min(hi, b[1]) for hi, b in zip(space.upper, region.bounds)]
    if any(lo > hi for lo, hi in zip(lower, upper)):
        return CheckReport(True, 0)
    if alpha is None:
        alpha = region.alpha
    rng = np.random.default_rng(seed)
    signs = np.array(region.signs, dtype=float)
    worst = INF
    witness = None
    for _ in range(sample_count):
        theta = tuple(rng.uniform(lower, upper))
        combo = np.asarray(weights, dtype=float) if weights is not None else rng.dirichlet(np.ones(len(signs)))
        derivative = float(np.dot(model.gradient(theta, alpha), combo * signs))
        if derivative < worst:
            worst, witness = derivative, theta
    return CheckReport(worst >= -1e-10, sample_count, None if worst >= -1e-10 else witness, worst)


def lipschitz_estimate(model, space, alphas=(), grid=61, margin=1.05):
    '''Estimate the Lipschitz constant of P_f in unit-cube coordinates.

    This is a sampled estimate, not a certified bound: the gradient norm is
    only evaluated at the `grid` x `grid` points of the box, so a steeper
    spot between grid points is missed. The margin widens the estimate but
    does not make it rigorous.

    Returns:
        The largest gradient norm on a grid over the box, times margin.
    '''
    widths = np.array(space.upper) - np.array(space.lower)
    axes = [np.linspace(lo, hi, grid) for lo, hi in zip(space.lower, space.upper)]
    contexts = sorted(set(alphas)) if model.reliability else [None]
    best = 0.0
    for alpha in contexts:
        for a in axes[0]:
            for b in axes[1]:
                norm = float(np.linalg.norm(model.gradient((a, b), alpha) * widths))
                if math.isfinite(norm):
                    best = max(best, norm)
    return best * margin


def verify_kappa_monotonicity(model, space, alphas, size=50):
    '''Grid check that P_f decreases in kappa; the gamma family has no proof of it.'''
    contexts = sorted(set(alphas)) or [None]
    grid = [np.linspace(lo, hi, size) for lo, hi in zip(space.lower, space.upper)]
    worst = -INF
    witness = None
    samples = 0
    for alpha in contexts:
        for kappa in grid[0]:
            for lam in grid[1]:
                samples += 1
                derivative = float(model.gradient((kappa, lam), alpha)[0])
                if derivative > worst:
                    worst, witness = derivative, (float(kappa), float(lam), alpha)
    passed = worst <= 1e-12
    if not passed:
        logger.warning('kappa monotonicity fails at %s: derivative %g' % (witness, worst))
    return CheckReport(passed, samples, None if passed else witness, worst)
