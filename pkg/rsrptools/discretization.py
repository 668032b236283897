"""
Nested grid discretizations of the unit cube and the rounding function that
maps a parameter point into the grid without lowering its failure probability.
"""
import math
import logging
import itertools
from bisect import bisect_left, bisect_right

logger = logging.getLogger('rsrptools')

SNAP = 1e-12


class DiscretizationError(RuntimeError):
    pass


class OffGridError(DiscretizationError):
    '''A coordinate that must be kept exactly is not a grid value.'''
    pass


def epsilon_bound(level, k, n):
    '''Largest distance between a point and its rounded image at this level.'''
    return math.sqrt(n) / float(k) ** level


def propagated_error_bound(steps, lipschitz, epsilon):
    '''Distance bound between exact and rounded parameters after `steps`
    degradations following an initial rounding.

    Uses the limit (steps + 1) * epsilon when lipschitz is 1.
    '''
    if abs(lipschitz - 1.0) < 1e-12:
        return (steps + 1) * epsilon
    return (lipschitz ** (steps + 1) - 1.0) * epsilon / (lipschitz - 1.0)


class RoundingCone(object):
    '''Cone emitted from apex along the negated region directions.

    A point lies in the cone when it is not above the apex on axes with
    sign +1, not below it on axes with sign -1 and equal to it on axes
    with sign 0.
    '''

    def __init__(self, apex, signs):
        self.apex = tuple(apex)
        self.signs = tuple(signs)

    @property
    def directions(self):
        n = len(self.signs)
        return tuple(tuple(-float(s) if i == j else 0.0 for i in range(n)) for j, s in enumerate(self.signs))

    def contains(self, point, tol=SNAP):
        for p, a, s in zip(point, self.apex, self.signs):
            if s > 0 and p > a + tol:
                return False
            if s < 0 and p < a - tol:
                return False
            if s == 0 and abs(p - a) > tol:
                return False
        return True


def nearest_in_cone(point, candidates, signs):
    '''Reference rounding: scan all candidates, ties go to the lexicographically smallest.'''
    cone = RoundingCone(point, signs)
    best = None
    for candidate in candidates:
        if not cone.contains(candidate):
            continue
        distance = sum((c - p) ** 2 for c, p in zip(candidate, point))
        if best is None or (distance, tuple(candidate)) < best[:2]:
            best = (distance, tuple(candidate))
    if best is None:
        raise DiscretizationError('discretization not suitable: no grid point in the rounding cone of %s'
                                  % (tuple(point),))
    return best[1]


class Discretization(object):
    '''Product grid on the unit cube at a refinement level.

    Args:
        level (int): Refinement level i.
        k (int): Subdivision factor.
        n (int): Dimension.
        hyperplanes: (axis, coordinate) pairs in unit coordinates whose
            coordinates are inserted on their axis.
    '''

    def __init__(self, level, k, n, hyperplanes=()):
        if level < 0 or k < 2 or n < 1:
            raise DiscretizationError('need level >= 0, k >= 2 and n >= 1')
        self.level = level
        self.k = k
        self.n = n
        self.hyperplanes = tuple(sorted(set(hyperplanes)))
        cells = k ** level
        axes = [[j / float(cells) for j in range(cells + 1)] for _ in range(n)]
        for axis, coordinate in self.hyperplanes:
            values = axes[axis]
            if all(abs(v - coordinate) > SNAP for v in values):
                values.append(coordinate)
        self.axes = tuple(tuple(sorted(values)) for values in axes)

    def __len__(self):
        size = 1
        for values in self.axes:
            size *= len(values)
        return size

    def __iter__(self):
        return itertools.product(*self.axes)

    def __contains__(self, point):
        return self.index(point) is not None

    @property
    def epsilon(self):
        return epsilon_bound(self.level, self.k, self.n)

    def index(self, point):
        '''Per-axis indices of a grid point, or None when the point is not on the grid.'''
        result = []
        for value, values in zip(point, self.axes):
            i = bisect_left(values, value - SNAP)
            if i == len(values) or abs(values[i] - value) > SNAP:
                return None
            result.append(i)
        return tuple(result)

    def round_down(self, point, signs):
        '''Nearest grid point in the cone of point along the negated signs.

        Separable on a product grid: floor on axes with sign +1, ceiling on
        axes with sign -1. Axes with sign 0 must already hold a grid value.
        '''
        return tuple(values[i] for values, i in zip(self.axes, self.round_index(point, signs)))

    def round_index(self, point, signs):
        result = []
        for axis, (value, sign, values) in enumerate(zip(point, signs, self.axes)):
            value = min(max(value, 0.0), 1.0)
            if sign > 0:
                i = bisect_right(values, value + SNAP) - 1
            else:
                i = bisect_left(values, value - SNAP)
            if i < 0 or i >= len(values):
                raise DiscretizationError('discretization not suitable at %s' % (tuple(point),))
            if sign == 0 and abs(values[i] - value) > SNAP:
                raise OffGridError('%s is not on the grid along axis %d' % (tuple(point), axis))
            result.append(i)
        return tuple(result)

    def snap(self, theta, signs, space):
        '''Round a box point with per-axis signs and return (key, rounded box point).'''
        key = self.round_index(space.to_unit(theta), signs)
        return key, self.theta(key, space)

    def theta(self, key, space):
        unit = tuple(values[i] for values, i in zip(self.axes, key))
        return space.clamp(space.from_unit(unit))

    def points(self, space):
        '''(key, box point) pairs in lexicographic key order.'''
        for key in itertools.product(*(range(len(values)) for values in self.axes)):
            yield key, self.theta(key, space)

    def refine(self):
        return Discretization(self.level + 1, self.k, self.n, self.hyperplanes)

    def __repr__(self):
        return 'Discretization(level=%d, k=%d, points=%d)' % (self.level, self.k, len(self))


class PointSetDiscretization(object):
    '''An explicit finite set of box points with identity rounding.

    Points outside the set do not round; snap() returns None for them.
    '''

    level = None

    def __init__(self, points):
        self.values = tuple(sorted(set(tuple(p) for p in points)))
        self._members = frozenset(self.values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, theta):
        return tuple(theta) in self._members

    def snap(self, theta, signs, space):
        theta = tuple(theta)
        if theta in self._members:
            return theta, theta
        return None

    def points(self, space):
        for theta in self.values:
            yield theta, theta


def refine(discretization):
    return discretization.refine()


def build_discretization(level, k, model, alphas, space, anchors=()):
    '''Grid of level `level` with the model's region boundaries inserted.

    Args:
        level (int): Refinement level i >= 0.
        k (int): Subdivision factor >= 2.
        model (HealthModel): Supplies the region boundary hyperplanes.
        alphas: Distinct trip mileages (reliability families).
        space (ParameterSpace): Box used to scale boundaries to unit coordinates.
        anchors: Parameter points (initial and reset parameters) that must
            stay exact on the axes where the rounding direction depends on
            the mileage.

    Returns:
        A Discretization.
    '''
    hyperplanes = []
    planes = []
    if model is not None:
        planes = list(model.boundaries(alphas)) + list(model.anchors(anchors, alphas))
    for axis, coordinate in planes:
        lo, hi = space.lower[axis], space.upper[axis]
        unit = (coordinate - lo) / (hi - lo)
        if unit < 0 or unit > 1:
            logger.warning('Ignoring region boundary %s on axis %d outside the parameter box' % (coordinate, axis))
            continue
        hyperplanes.append((axis, unit))
    discretization = Discretization(level, k, space.n, hyperplanes)
    logger.debug('Built %r' % discretization)
    return discretization
