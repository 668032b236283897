"""
Instance documents for the unit tests.

Every builder returns a fresh dict in the instance JSON layout; tests edit
it before passing it to instance_from_dict.
"""
import copy
import json
import os
import tempfile

from rsrptools import Interface
from rsrptools.config import Config
from rsrptools.instance import instance_from_dict

NORMAL_SPACE = {'lower': [0.0, 0.5], 'upper': [1.0, 1.5]}
WEIBULL_SPACE = {'lower': [1.0, 0.1], 'upper': [3.0, 1.1]}

HALVE_MU = {'id': 'halve', 'slope': [0.5, 1.0], 'offset': [0.0, 0.0], 'lipschitz': 1.0}
SCALE_LAMBDA = {'id': 'wear', 'slope': [1.0, 0.5], 'offset': [0.0, 0.0], 'lipschitz': 1.0}


def get_mock_interface(**overrides):
    '''An Interface that ignores ~/.rsrp-config and the environment.'''
    values = {'alignment_samples': 200, 'time_limit': 60.0}
    values.update(overrides)
    return Interface(config=Config(**values))


def two_location_document(family='normal', trips=None, vehicles=None, workshop=False):
    '''Locations A and B, 5 minutes and 10 distance units apart.

    The default vehicle v1 starts at A with mu = 1, sigma^2 = 0.5 (normal)
    or kappa = 2, lambda = 1.1 (reliability families).
    '''
    reliability = family != 'normal'
    space = WEIBULL_SPACE if reliability else NORMAL_SPACE
    initial = [2.0, 1.1] if reliability else [1.0, 0.5]
    location_a = {'id': 'A', 'is_maintenance': False}
    if workshop:
        location_a = {'id': 'A', 'is_maintenance': True, 'reset_params': list(initial),
                      'service_duration': 15, 'maintenance_cost': 30.0}
    if trips is None:
        trips = [one_trip('t1', 10, 20, 'A', 'B', family)]
    if vehicles is None:
        vehicles = [{'id': 'v1', 'origin': 'A', 'initial_params': list(initial)}]
    return {
        'parameter_space': copy.deepcopy(space),
        'health_model': {'family': family},
        'locations': [location_a, {'id': 'B', 'is_maintenance': False}],
        'trips': trips,
        'vehicles': vehicles,
        'degradations': [copy.deepcopy(SCALE_LAMBDA if reliability else HALVE_MU)],
        'costs': {
            'failure_cost': 100.0,
            'deadhead_cost_per_distance': 1.0,
            'vehicle_usage_cost': 50.0,
            'distance': [[0, 10], [10, 0]],
            'travel_time': [[0, 5], [5, 0]],
        },
    }


def one_trip(trip_id, dep, arr, dep_loc, arr_loc, family='normal', base_cost=10.0, mileage=1.0):
    trip = {'id': trip_id, 'dep_time': dep, 'arr_time': arr, 'dep_loc': dep_loc, 'arr_loc': arr_loc,
            'n_vehicles': 1, 'degradation_id': 'wear' if family != 'normal' else 'halve',
            'base_cost': base_cost}
    if family != 'normal':
        trip['mileage'] = mileage
    return trip


def shuttle_document(family='normal', workshop=False):
    '''One vehicle, t1 A->B at 10-20 and t2 B->A at 30-40.'''
    trips = [one_trip('t1', 10, 20, 'A', 'B', family), one_trip('t2', 30, 40, 'B', 'A', family)]
    return two_location_document(family, trips=trips, workshop=workshop)


def three_trip_document():
    '''Two vehicles and three trips; small enough for exhaustive enumeration.'''
    trips = [one_trip('t1', 10, 20, 'A', 'B'), one_trip('t2', 30, 40, 'B', 'A'),
             one_trip('t3', 15, 25, 'B', 'A', base_cost=12.0)]
    vehicles = [{'id': 'v1', 'origin': 'A', 'initial_params': [1.0, 0.5]},
                {'id': 'v2', 'origin': 'B', 'initial_params': [0.5, 1.0]}]
    return two_location_document(trips=trips, vehicles=vehicles, workshop=True)


def connection_document():
    '''Three locations, 30 minutes apart: two arrivals at A (540, 570) and
    two departures at B (600, 660).'''
    trips = [one_trip('in1', 500, 540, 'C', 'A'), one_trip('in2', 520, 570, 'C', 'A'),
             one_trip('out1', 600, 640, 'B', 'C'), one_trip('out2', 660, 700, 'B', 'C')]
    document = two_location_document(trips=trips)
    document['locations'].append({'id': 'C', 'is_maintenance': False})
    document['vehicles'][0]['origin'] = 'C'
    document['costs']['distance'] = [[0, 10, 10], [10, 0, 10], [10, 10, 0]]
    document['costs']['travel_time'] = [[0, 30, 30], [30, 0, 30], [30, 30, 0]]
    return document


def build(document):
    return instance_from_dict(document)


def write_document(document, directory=None):
    '''Write a document to a temporary file and return its path.'''
    handle, path = tempfile.mkstemp(suffix='.json', dir=directory)
    with os.fdopen(handle, 'w') as f:
        json.dump(document, f)
    return path
