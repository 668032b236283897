"""
Instance and solution model for the rolling stock rotation problem with
predictive maintenance, with JSON loading, saving and validation.
"""
import json
import math
import logging
from dataclasses import dataclass, field

logger = logging.getLogger('rsrptools')

SERVICE_KINDS = ('art_start', 'trip', 'wait', 'deadhead', 'maint_in', 'maint_out', 'art_end')


class InstanceError(ValueError):
    pass


def _reals(values, name, length=None):
    try:
        result = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise InstanceError('%s must be a list of numbers' % name)
    if any(not math.isfinite(v) for v in result):
        raise InstanceError('%s must be finite' % name)
    if length is not None and len(result) != length:
        raise InstanceError('%s must have %d components, got %d' % (name, length, len(result)))
    return result


def _integer(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or float(value) != int(value):
        raise InstanceError('%s must be an integer, got %r' % (name, value))
    return int(value)


def _real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InstanceError('%s must be a finite number, got %r' % (name, value))
    return float(value)


def _require(data, key, where):
    try:
        return data[key]
    except (KeyError, TypeError):
        raise InstanceError('%s: missing field "%s"' % (where, key))

def _entries(data, key, required=False):
    '''(where, entry) pairs of a list of JSON objects.'''
    raw = _require(data, key, 'instance') if required else data.get(key, [])
    if not isinstance(raw, list):
        raise InstanceError('%s must be a list' % key)
    for i, entry in enumerate(raw):
        where = '%s[%d]' % (key, i)
        if not isinstance(entry, dict):
            raise InstanceError('%s must be a JSON object, got %r' % (where, entry))
        yield where, entry



@dataclass(frozen=True)
class ParameterSpace:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise InstanceError('parameter_space: lower and upper must be nonempty and of equal length')
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not lo < hi:
                raise InstanceError('parameter_space: degenerate axis %d (lower %s, upper %s)' % (j, lo, hi))

    @property
    def n(self):
        return len(self.lower)

    def to_unit(self, theta):
        return tuple((t - lo) / (hi - lo) for t, lo, hi in zip(theta, self.lower, self.upper))

    def from_unit(self, point):
        return tuple(lo + p * (hi - lo) for p, lo, hi in zip(point, self.lower, self.upper))

    def clamp(self, theta):
        return tuple(min(max(t, lo), hi) for t, lo, hi in zip(theta, self.lower, self.upper))

    def contains(self, theta, tol=1e-12):
        return (len(theta) == self.n and
                all(lo - tol <= t <= hi + tol for t, lo, hi in zip(theta, self.lower, self.upper)))


def scale_to_unit(theta, space):
    '''Map a parameter point of the box onto the unit cube.'''
    return space.to_unit(theta)


def scale_from_unit(point, space):
    '''Inverse of scale_to_unit.'''
    return space.from_unit(point)


@dataclass(frozen=True)
class Location:
    id: str
    is_maintenance: bool = False
    reset_params: tuple = None
    service_duration: int = 0
    maintenance_cost: float = 0.0


@dataclass(frozen=True)
class Trip:
    id: str
    dep_time: int
    arr_time: int
    dep_loc: str
    arr_loc: str
    degradation_id: str
    n_vehicles: int = 1
    base_cost: float = 0.0
    mileage: float = 0.0


@dataclass(frozen=True)
class Vehicle:
    id: str
    origin: str
    initial_params: tuple


@dataclass(frozen=True)
class DegradationSpec:
    id: str
    slope: tuple
    offset: tuple
    lipschitz: float

    @classmethod
    def identity(cls, n, id='identity'):
        return cls(id, (1.0,) * n, (0.0,) * n, 1.0)

    @property
    def is_identity(self):
        return all(a == 1.0 for a in self.slope) and all(b == 0.0 for b in self.offset)

    def affine(self, theta):
        return tuple(a * t + b for a, t, b in zip(self.slope, theta, self.offset))

    def apply(self, theta, space):
        return space.clamp(self.affine(theta))

    def clamps(self, theta, space):
        '''True when the affine image of theta leaves the box.'''
        return not space.contains(self.affine(theta), tol=0.0)


@dataclass(frozen=True)
class CostConfig:
    failure_cost: float
    deadhead_cost_per_distance: float
    vehicle_usage_cost: float
    distance: tuple
    travel_time: tuple


class Instance(object):
    '''A validated problem instance.

    Locations keep their file order; the cost matrices are indexed by it.
    '''

    def __init__(self, parameter_space, family, locations, trips, vehicles, degradations, costs,
                 horizon=None, wait_degradation=None, deadhead_degradation=None):
        self.parameter_space = parameter_space
        self.family = family
        self.locations = tuple(locations)
        self.trips = tuple(trips)
        self.vehicles = tuple(vehicles)
        self.degradations = dict((d.id, d) for d in degradations)
        self.costs = costs
        if horizon is None:
            horizon = max([t.arr_time for t in self.trips] or [0])
        self.horizon = int(horizon)
        self.wait_degradation_id = wait_degradation
        self.deadhead_degradation_id = deadhead_degradation

        self._location_index = dict((loc.id, i) for i, loc in enumerate(self.locations))
        self._trips = dict((t.id, t) for t in self.trips)
        self._vehicles = dict((v.id, v) for v in self.vehicles)
        self._identity = DegradationSpec.identity(parameter_space.n)

    @property
    def n(self):
        return self.parameter_space.n

    @property
    def end_time(self):
        return self.horizon + 1

    def location(self, location_id):
        return self.locations[self._location_index[location_id]]

    def location_index(self, location_id):
        return self._location_index[location_id]

    def has_location(self, location_id):
        return location_id in self._location_index

    def trip(self, trip_id):
        return self._trips[trip_id]

    def has_trip(self, trip_id):
        return trip_id in self._trips

    def vehicle(self, vehicle_id):
        return self._vehicles[vehicle_id]

    def has_vehicle(self, vehicle_id):
        return vehicle_id in self._vehicles

    def degradation(self, degradation_id):
        return self.degradations[degradation_id]

    @property
    def wait_degradation(self):
        if self.wait_degradation_id is None:
            return self._identity
        return self.degradations[self.wait_degradation_id]

    @property
    def deadhead_degradation(self):
        if self.deadhead_degradation_id is None:
            return self._identity
        return self.degradations[self.deadhead_degradation_id]

    @property
    def maintenance_locations(self):
        return tuple(loc for loc in self.locations if loc.is_maintenance)

    @property
    def alphas(self):
        '''Distinct trip mileages in increasing order.'''
        return tuple(sorted(set(t.mileage for t in self.trips)))

    @property
    def anchor_points(self):
        '''Initial parameters of the vehicles and reset parameters of the workshops.'''
        points = set(tuple(v.initial_params) for v in self.vehicles)
        points.update(tuple(loc.reset_params) for loc in self.maintenance_locations)
        return tuple(sorted(points))

    def distance(self, origin, destination):
        return self.costs.distance[self._location_index[origin]][self._location_index[destination]]

    def travel_time(self, origin, destination):
        return self.costs.travel_time[self._location_index[origin]][self._location_index[destination]]

    def deadhead_cost(self, origin, destination):
        return self.distance(origin, destination) * self.costs.deadhead_cost_per_distance


def _parse_space(data):
    space = _require(data, 'parameter_space', 'instance')
    lower = _reals(_require(space, 'lower', 'parameter_space'), 'parameter_space.lower')
    upper = _reals(_require(space, 'upper', 'parameter_space'), 'parameter_space.upper')
    return ParameterSpace(lower, upper)


def _parse_matrix(raw, name, size):
    if not isinstance(raw, list) or len(raw) != size:
        raise InstanceError('costs.%s must be a %dx%d matrix' % (name, size, size))
    rows = tuple(_reals(row, 'costs.%s row %d' % (name, i), size) for i, row in enumerate(raw))
    for i in range(size):
        if rows[i][i] != 0:
            raise InstanceError('costs.%s must have a zero diagonal (row %d)' % (name, i))
        if any(v < 0 for v in rows[i]):
            raise InstanceError('costs.%s must be nonnegative (row %d)' % (name, i))
    return rows


def _unique(items, kind):
    seen = set()
    for item in items:
        if item.id in seen:
            raise InstanceError('duplicate %s id "%s"' % (kind, item.id))
        seen.add(item.id)


def instance_from_dict(data):
    '''Build and validate an Instance from its JSON document.

    Args:
        data (dict): Parsed instance JSON.

    Returns:
        A validated Instance.

    Raises:
        InstanceError: on schema violations, invariant violations and
            unknown references.
    '''
    from rsrptools import health

    if not isinstance(data, dict):
        raise InstanceError('instance must be a JSON object')
    space = _parse_space(data)
    n = space.n

    family = _require(_require(data, 'health_model', 'instance'), 'family', 'health_model')
    try:
        model = health.get_model(family)
        model.check_space(space)
    except health.HealthModelError as e:
        raise InstanceError('parameter_space: %s' % e)

    locations = []
    for where, raw in _entries(data, 'locations', required=True):
        is_maintenance = bool(raw.get('is_maintenance', False))
        reset = raw.get('reset_params')
        if is_maintenance:
            if reset is None:
                raise InstanceError('%s: maintenance location needs reset_params' % where)
            reset = _reals(reset, where + '.reset_params', n)
            if not space.contains(reset):
                raise InstanceError('%s: reset_params outside the parameter space' % where)
        elif reset is not None:
            raise InstanceError('%s: reset_params given for a non-maintenance location' % where)
        duration = _integer(raw.get('service_duration', 0), where + '.service_duration')
        cost = _real(raw.get('maintenance_cost', 0.0), where + '.maintenance_cost')
        if duration < 0 or cost < 0:
            raise InstanceError('%s: service_duration and maintenance_cost must be nonnegative' % where)
        if is_maintenance and duration < 1:
            raise InstanceError('%s: maintenance location needs a positive service_duration' % where)
        locations.append(Location(str(_require(raw, 'id', where)), is_maintenance, reset, duration, cost))
    _unique(locations, 'location')
    location_ids = set(loc.id for loc in locations)
    if not locations:
        raise InstanceError('instance needs at least one location')

    degradations = []
    for where, raw in _entries(data, 'degradations'):
        slope = _reals(_require(raw, 'slope', where), where + '.slope', n)
        offset = _reals(_require(raw, 'offset', where), where + '.offset', n)
        lipschitz = _real(_require(raw, 'lipschitz', where), where + '.lipschitz')
        spec = DegradationSpec(str(_require(raw, 'id', where)), slope, offset, lipschitz)
        if lipschitz < max(abs(a) for a in slope) - 1e-12:
            raise InstanceError('degradation "%s": declared Lipschitz constant %s is below max |slope| %s'
                                % (spec.id, lipschitz, max(abs(a) for a in slope)))
        degradations.append(spec)
    _unique(degradations, 'degradation')
    degradation_ids = set(d.id for d in degradations)

    trips = []
    for where, raw in _entries(data, 'trips'):
        trip = Trip(id=str(_require(raw, 'id', where)),
                    dep_time=_integer(_require(raw, 'dep_time', where), where + '.dep_time'),
                    arr_time=_integer(_require(raw, 'arr_time', where), where + '.arr_time'),
                    dep_loc=str(_require(raw, 'dep_loc', where)),
                    arr_loc=str(_require(raw, 'arr_loc', where)),
                    degradation_id=str(_require(raw, 'degradation_id', where)),
                    n_vehicles=_integer(raw.get('n_vehicles', 1), where + '.n_vehicles'),
                    base_cost=_real(raw.get('base_cost', 0.0), where + '.base_cost'),
                    mileage=_real(raw.get('mileage', 0.0), where + '.mileage'))
        if not trip.dep_time < trip.arr_time:
            raise InstanceError('trip "%s": dep_time %d must be before arr_time %d'
                                % (trip.id, trip.dep_time, trip.arr_time))
        if trip.dep_time < 0:
            raise InstanceError('trip "%s": dep_time must be nonnegative' % trip.id)
        if trip.n_vehicles < 1:
            raise InstanceError('trip "%s": n_vehicles must be at least 1' % trip.id)
        if trip.base_cost < 0 or trip.mileage < 0:
            raise InstanceError('trip "%s": base_cost and mileage must be nonnegative' % trip.id)
        if model.reliability and not trip.mileage > 0:
            raise InstanceError('trip "%s": mileage must be positive for the %s model' % (trip.id, family))
        for loc in (trip.dep_loc, trip.arr_loc):
            if loc not in location_ids:
                raise InstanceError('trip "%s": unknown location "%s"' % (trip.id, loc))
        if trip.degradation_id not in degradation_ids:
            raise InstanceError('trip "%s": unknown degradation "%s"' % (trip.id, trip.degradation_id))
        trips.append(trip)
    _unique(trips, 'trip')

    vehicles = []
    for where, raw in _entries(data, 'vehicles'):
        vehicle = Vehicle(str(_require(raw, 'id', where)), str(_require(raw, 'origin', where)),
                          _reals(_require(raw, 'initial_params', where), where + '.initial_params', n))
        if vehicle.origin not in location_ids:
            raise InstanceError('vehicle "%s": unknown origin "%s"' % (vehicle.id, vehicle.origin))
        if not space.contains(vehicle.initial_params):
            raise InstanceError('vehicle "%s": initial_params outside the parameter space' % vehicle.id)
        vehicles.append(vehicle)
    _unique(vehicles, 'vehicle')

    raw_costs = _require(data, 'costs', 'instance')
    size = len(locations)
    costs = CostConfig(failure_cost=_real(_require(raw_costs, 'failure_cost', 'costs'), 'costs.failure_cost'),
                       deadhead_cost_per_distance=_real(raw_costs.get('deadhead_cost_per_distance', 0.0),
                                                        'costs.deadhead_cost_per_distance'),
                       vehicle_usage_cost=_real(raw_costs.get('vehicle_usage_cost', 0.0),
                                                'costs.vehicle_usage_cost'),
                       distance=_parse_matrix(_require(raw_costs, 'distance', 'costs'), 'distance', size),
                       travel_time=_parse_matrix(_require(raw_costs, 'travel_time', 'costs'), 'travel_time', size))
    if min(costs.failure_cost, costs.deadhead_cost_per_distance, costs.vehicle_usage_cost) < 0:
        raise InstanceError('costs must be nonnegative')
    for i in range(size):
        for j in range(size):
            if i != j and not costs.travel_time[i][j] > 0:
                raise InstanceError('costs.travel_time between "%s" and "%s" must be positive'
                                    % (locations[i].id, locations[j].id))
            if costs.travel_time[i][j] != int(costs.travel_time[i][j]):
                raise InstanceError('costs.travel_time must hold integer minutes')
    costs = CostConfig(costs.failure_cost, costs.deadhead_cost_per_distance, costs.vehicle_usage_cost,
                       costs.distance, tuple(tuple(int(v) for v in row) for row in costs.travel_time))

    references = {}
    for key in ('wait_degradation', 'deadhead_degradation'):
        ref = data.get(key)
        if ref is not None and ref not in degradation_ids:
            raise InstanceError('%s: unknown degradation "%s"' % (key, ref))
        references[key] = ref

    horizon = data.get('horizon')
    if horizon is not None:
        horizon = _integer(horizon, 'horizon')
        late = [t.id for t in trips if t.arr_time > horizon]
        if late:
            raise InstanceError('trips arrive after the horizon %d: %s' % (horizon, ', '.join(late)))

    instance = Instance(space, family, locations, trips, vehicles, degradations, costs,
                        horizon=horizon, **references)

    if family == 'gamma' and trips:
        report = health.verify_kappa_monotonicity(model, space, instance.alphas)
        if not report.passed:
            raise InstanceError('gamma failure probability is not decreasing in kappa at %s (derivative %g)'
                                % (report.witness, report.worst))
    return instance


def instance_to_dict(instance):
    space = instance.parameter_space
    data = {
        'parameter_space': {'lower': list(space.lower), 'upper': list(space.upper)},
        'health_model': {'family': instance.family},
        'horizon': instance.horizon,
        'locations': [],
        'trips': [],
        'vehicles': [],
        'degradations': [],
        'costs': {
            'failure_cost': instance.costs.failure_cost,
            'deadhead_cost_per_distance': instance.costs.deadhead_cost_per_distance,
            'vehicle_usage_cost': instance.costs.vehicle_usage_cost,
            'distance': [list(row) for row in instance.costs.distance],
            'travel_time': [list(row) for row in instance.costs.travel_time],
        },
    }
    for loc in instance.locations:
        entry = {'id': loc.id, 'is_maintenance': loc.is_maintenance,
                 'service_duration': loc.service_duration, 'maintenance_cost': loc.maintenance_cost}
        if loc.is_maintenance:
            entry['reset_params'] = list(loc.reset_params)
        data['locations'].append(entry)
    for trip in instance.trips:
        data['trips'].append({'id': trip.id, 'dep_time': trip.dep_time, 'arr_time': trip.arr_time,
                              'dep_loc': trip.dep_loc, 'arr_loc': trip.arr_loc,
                              'n_vehicles': trip.n_vehicles, 'degradation_id': trip.degradation_id,
                              'base_cost': trip.base_cost, 'mileage': trip.mileage})
    for vehicle in instance.vehicles:
        data['vehicles'].append({'id': vehicle.id, 'origin': vehicle.origin,
                                 'initial_params': list(vehicle.initial_params)})
    for spec in sorted(instance.degradations.values(), key=lambda d: d.id):
        data['degradations'].append({'id': spec.id, 'slope': list(spec.slope),
                                     'offset': list(spec.offset), 'lipschitz': spec.lipschitz})
    if instance.wait_degradation_id is not None:
        data['wait_degradation'] = instance.wait_degradation_id
    if instance.deadhead_degradation_id is not None:
        data['deadhead_degradation'] = instance.deadhead_degradation_id
    return data


def load_instance(path):
    '''Load and validate an instance file.

    Args:
        path (str): Path to the instance JSON.

    Returns:
        A validated Instance.
    '''
    logger.debug('Loading instance %s' % path)
    with open(path) as f:
        try:
            data = json.load(f)
        except ValueError as e:
            raise InstanceError('%s is not valid JSON: %s' % (path, e))
    return instance_from_dict(data)


def save_instance(instance, path):
    with open(path, 'w') as f:
        json.dump(instance_to_dict(instance), f, indent=2, sort_keys=True)
        f.write('\n')


@dataclass
class Service:
    service_kind: str
    id: object
    origin: str
    destination: str
    depart: int
    arrive: int
    theta_after: tuple
    cost: float = 0.0


@dataclass
class Rotation:
    vehicle_id: str
    services: list = field(default_factory=list)

    @property
    def cost(self):
        return sum(s.cost for s in self.services)

    @property
    def trip_ids(self):
        return [s.id for s in self.services if s.service_kind == 'trip']


@dataclass
class RotationPlan:
    rotations: list = field(default_factory=list)
    objective: float = None
    lower_bound: float = None
    clamped_steps: int = field(default=0, compare=False)

    @property
    def cost(self):
        return sum(r.cost for r in self.rotations)


def validate_plan(plan, instance):
    '''Check that a plan only references known ids and runs forward in time.

    Raises:
        InstanceError: naming the offending rotation and service.
    '''
    for r, rotation in enumerate(plan.rotations):
        if not instance.has_vehicle(rotation.vehicle_id):
            raise InstanceError('rotation %d: unknown vehicle "%s"' % (r, rotation.vehicle_id))
        last = 0
        for s, service in enumerate(rotation.services):
            where = 'rotation %d service %d' % (r, s)
            if service.service_kind not in SERVICE_KINDS:
                raise InstanceError('%s: unknown service kind "%s"' % (where, service.service_kind))
            if service.service_kind == 'trip' and not instance.has_trip(service.id):
                raise InstanceError('%s: unknown trip "%s"' % (where, service.id))
            for loc in (service.origin, service.destination):
                if not instance.has_location(loc):
                    raise InstanceError('%s: unknown location "%s"' % (where, loc))
            if len(service.theta_after) != instance.n:
                raise InstanceError('%s: theta_after has %d components' % (where, len(service.theta_after)))
            if service.depart > service.arrive or service.depart < last:
                raise InstanceError('%s: services must run forward in time' % where)
            last = service.arrive


def plan_to_dict(plan):
    rotations = []
    for rotation in plan.rotations:
        rotations.append([{'service_kind': s.service_kind, 'id': s.id, 'origin': s.origin,
                           'destination': s.destination, 'depart': s.depart, 'arrive': s.arrive,
                           'theta_after': list(s.theta_after), 'cost': s.cost}
                          for s in rotation.services])
    return {'rotations': rotations, 'objective': plan.objective, 'lower_bound': plan.lower_bound}


def plan_from_dict(data):
    rotations = []
    for r, raw in enumerate(_require(data, 'rotations', 'solution')):
        services = []
        for s, item in enumerate(raw):
            where = 'rotations[%d][%d]' % (r, s)
            services.append(Service(service_kind=_require(item, 'service_kind', where),
                                    id=item.get('id'),
                                    origin=_require(item, 'origin', where),
                                    destination=_require(item, 'destination', where),
                                    depart=_integer(_require(item, 'depart', where), where + '.depart'),
                                    arrive=_integer(_require(item, 'arrive', where), where + '.arrive'),
                                    theta_after=_reals(_require(item, 'theta_after', where),
                                                       where + '.theta_after'),
                                    cost=_real(item.get('cost', 0.0), where + '.cost')))
        starts = [sv.id for sv in services if sv.service_kind == 'art_start']
        if len(starts) != 1:
            raise InstanceError('rotations[%d] must start with exactly one art_start service' % r)
        rotations.append(Rotation(starts[0], services))
    return RotationPlan(rotations, data.get('objective'), data.get('lower_bound'))


def save_solution(plan, path, instance=None):
    '''Write a rotation plan as solution JSON.

    Args:
        plan (RotationPlan): The plan to write.
        path (str): Target file.
        instance (Instance): When given, the plan is validated against it first.
    '''
    if instance is not None:
        validate_plan(plan, instance)
    with open(path, 'w') as f:
        json.dump(plan_to_dict(plan), f, indent=2, sort_keys=True)
        f.write('\n')


def load_solution(path, instance=None):
    with open(path) as f:
        plan = plan_from_dict(json.load(f))
    if instance is not None:
        validate_plan(plan, instance)
    return plan
