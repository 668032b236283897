"""
Seeded random instances for tests and benchmarks.
"""
import numpy as np

from rsrptools.instance import instance_from_dict

BOXES = {
    'normal': ((0.0, 0.25), (1.0, 1.25)),
    'weibull': ((1.5, 0.5), (3.0, 2.5)),
    'gamma': ((1.5, 0.5), (3.0, 2.5)),
}


def _round(value):
    return round(float(value), 4)


def generate_document(seed, max_trips=5, max_vehicles=2, max_locations=3, family='normal', horizon=600,
                      aligned=True):
    '''A random instance document, reproducible from the seed.

    Args:
        seed (int): Generator seed.
        max_trips, max_vehicles, max_locations (int): Upper bounds on the sizes.
        family (str): Health model family.
        horizon (int): Planning horizon in minutes.
        aligned (bool): Use order-preserving degradations (scaling of mu for
            the normal family). Otherwise mu also shifts down and sigma^2 grows.

    Returns:
        dict in the instance JSON layout.
    '''
    if family not in BOXES:
        raise ValueError('Unknown family %r' % family)
    rng = np.random.default_rng(seed)
    lower, upper = BOXES[family]
    n_locations = int(rng.integers(2, max(2, max_locations) + 1))
    n_vehicles = int(rng.integers(1, max(1, max_vehicles) + 1))
    n_trips = int(rng.integers(0, max_trips + 1))
    locations = ['L%d' % i for i in range(n_locations)]
    reliability = family != 'normal'

    # locations on a line: distances obey the triangle inequality
    positions = rng.permutation(np.cumsum(rng.integers(5, 31, size=n_locations)))
    distance = [[abs(int(p) - int(q)) for q in positions] for p in positions]
    travel_time = [[2 * d for d in row] for row in distance]

    if reliability:
        reset = [lower[0], upper[1]]
    else:
        reset = [upper[0], lower[1]]
    location_docs = [{'id': locations[0], 'is_maintenance': True, 'reset_params': reset,
                      'service_duration': int(rng.integers(30, 61)),
                      'maintenance_cost': float(rng.integers(20, 81))}]
    location_docs.extend({'id': l, 'is_maintenance': False} for l in locations[1:])

    degradations = []
    for d in range(2):
        a = _round(rng.uniform(0.6, 0.95))
        if reliability:
            slope, offset = [1.0, a], [0.0, 0.0]
        elif aligned:
            slope, offset = [a, 1.0], [0.0, 0.0]
        else:
            c = _round(rng.uniform(1.0, 1.2))
            slope, offset = [a, c], [-_round(rng.uniform(0.0, 0.1)), _round(rng.uniform(0.0, 0.05))]
        degradations.append({'id': 'd%d' % d, 'slope': slope, 'offset': offset,
                             'lipschitz': max(abs(v) for v in slope)})

    alphas = [0.8, 1.0, 1.2]
    trips = []
    departures = sorted(int(t) for t in rng.integers(0, horizon - 120, size=n_trips))
    for t, dep in enumerate(departures):
        dep_loc = int(rng.integers(n_locations))
        arr_loc = (dep_loc + int(rng.integers(1, n_locations))) % n_locations
        trip = {'id': 't%d' % t, 'dep_time': dep, 'arr_time': dep + int(rng.integers(20, 91)),
                'dep_loc': locations[dep_loc], 'arr_loc': locations[arr_loc], 'n_vehicles': 1,
                'degradation_id': 'd%d' % int(rng.integers(len(degradations))),
                'base_cost': float(rng.integers(5, 21))}
        if reliability:
            trip['mileage'] = alphas[int(rng.integers(len(alphas)))]
        trips.append(trip)

    vehicles = []
    for v in range(n_vehicles):
        if reliability:
            initial = [lower[0] if rng.random() < 0.5 else upper[0], _round(rng.uniform(1.0, upper[1]))]
        else:
            initial = [_round(rng.uniform(0.5, upper[0])), _round(rng.uniform(lower[1], upper[1]))]
        vehicles.append({'id': 'v%d' % v, 'origin': locations[int(rng.integers(n_locations))],
                         'initial_params': initial})

    return {
        'parameter_space': {'lower': list(lower), 'upper': list(upper)},
        'health_model': {'family': family},
        'horizon': horizon,
        'locations': location_docs,
        'trips': trips,
        'vehicles': vehicles,
        'degradations': degradations,
        'costs': {'failure_cost': float(rng.integers(100, 401)), 'deadhead_cost_per_distance': 1.0,
                  'vehicle_usage_cost': 50.0, 'distance': distance, 'travel_time': travel_time},
    }


def generate_instance(seed, **kwargs):
    '''Like generate_document, returning a validated Instance.'''
    return instance_from_dict(generate_document(seed, **kwargs))
