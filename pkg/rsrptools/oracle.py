"""
Reference solvers and property checks used to validate the graph pipeline.
"""
import math
import heapq
import itertools
from collections import Counter, OrderedDict, defaultdict
from dataclasses import dataclass, field

import numpy as np

from rsrptools import health
from rsrptools.discretization import RoundingCone, propagated_error_bound
from rsrptools.events import service_cost
from rsrptools.flow import FlowModel
from rsrptools.seeg import round_state
from rsrptools.instance import Rotation, Service

MAX_TRIPS = 7
MAX_VEHICLES = 3
MAX_LOCATIONS = 4


class OracleError(ValueError):
    pass


@dataclass
class OracleResult:
    optimum: float
    assignment: list = field(default_factory=list)
    count: int = 0
    feasible: bool = True


@dataclass
class PropagationReport:
    passed: bool
    trials: int
    steps: int = 0
    min_slack: float = None
    max_ratio: float = 0.0
    witness: list = None


class ExactCoverInstance(object):
    '''Weighted exact cover: elements, a collection of subsets, one weight per subset.'''

    def __init__(self, elements, subsets, weights=None):
        self.elements = tuple(elements)
        self.subsets = tuple(tuple(s) for s in subsets)
        self.weights = tuple(float(w) for w in (weights if weights is not None else [1.0] * len(self.subsets)))
        known = set(self.elements)
        if len(self.weights) != len(self.subsets):
            raise OracleError('need one weight per subset')
        for k, subset in enumerate(self.subsets):
            if not subset:
                raise OracleError('subset %d is empty' % k)
            if not set(subset) <= known:
                raise OracleError('subset %d has elements outside the element set' % k)
            if self.weights[k] < 0:
                raise OracleError('subset %d has a negative weight' % k)


class EpcpGraph(object):
    '''Exact path cover graph of a weighted exact cover instance.

    Nodes are 's', 't' and ('v', k, i) for position i of the chain of subset k.
    Arcs are (tail, head, cost, element), element None outside the chains.
    '''

    def __init__(self, cover):
        order = dict((e, i) for i, e in enumerate(cover.elements))
        self.cover = cover
        self.nodes = ['s', 't']
        self.arcs = []
        self.groups = OrderedDict((e, []) for e in cover.elements)
        self.entries = []
        for k, subset in enumerate(cover.subsets):
            chain = sorted(subset, key=order.get)
            self.nodes.extend(('v', k, i) for i in range(len(chain) + 1))
            self.entries.append(len(self.arcs))
            self.arcs.append(('s', ('v', k, 0), 0.0, None))
            for i, element in enumerate(chain):
                self.groups[element].append(len(self.arcs))
                self.arcs.append((('v', k, i), ('v', k, i + 1), 0.0, element))
            self.arcs.append((('v', k, len(chain)), 't', cover.weights[k], None))

    def flow_model(self):
        incoming = defaultdict(list)
        outgoing = defaultdict(list)
        for a, (tail, head, _, _) in enumerate(self.arcs):
            outgoing[tail].append(a)
            incoming[head].append(a)
        coverage = OrderedDict((e, (arcs, 1)) for e, arcs in self.groups.items())
        conservation = [(node, incoming[node], outgoing[node]) for node in self.nodes if node not in ('s', 't')]
        balance = [('st', outgoing['s'], incoming['t'])]
        return FlowModel([arc[2] for arc in self.arcs], [False] * len(self.arcs), coverage, conservation, balance,
                         name='EPCP')


def brute_force_exact_cover(cover):
    '''Minimum-weight exact cover by scanning every subcollection.'''
    target = Counter(cover.elements)
    best = None
    count = 0
    for size in range(len(cover.subsets) + 1):
        for chosen in itertools.combinations(range(len(cover.subsets)), size):
            count += 1
            covered = Counter()
            for k in chosen:
                covered.update(cover.subsets[k])
            if covered != target:
                continue
            weight = sum(cover.weights[k] for k in chosen)
            if best is None or weight < best[0]:
                best = (weight, list(chosen))
    if best is None:
        return OracleResult(None, [], count, False)
    return OracleResult(best[0], best[1], count, True)


def random_exact_cover(rng, max_elements=8, max_subsets=10):
    '''A random weighted exact cover instance; about half of them contain a planted cover.'''
    elements = ['e%d' % i for i in range(int(rng.integers(2, max_elements + 1)))]
    subsets = []
    if rng.random() < 0.5:
        shuffled = list(rng.permutation(elements))
        while shuffled and len(subsets) < max_subsets:
            size = int(rng.integers(1, len(shuffled) + 1))
            subsets.append(tuple(shuffled[:size]))
            shuffled = shuffled[size:]
        if shuffled:
            subsets[-1] = subsets[-1] + tuple(shuffled)
    total = int(rng.integers(max(1, len(subsets)), max_subsets + 1))
    while len(subsets) < total:
        size = int(rng.integers(1, len(elements) + 1))
        subsets.append(tuple(rng.choice(elements, size=size, replace=False)))
    order = list(rng.permutation(len(subsets)))
    subsets = [tuple(str(e) for e in subsets[i]) for i in order]
    weights = [float(rng.integers(1, 21)) for _ in subsets]
    return ExactCoverInstance(elements, subsets, weights)


class Oracle(object):

    def __init__(self, interface):
        ''' Construct the oracle.

        Args:
            interface: A reference to the rsrptools Interface.

        Returns:
            An instance of the Oracle class.
        '''
        self.logger = interface.logger
        self.config = interface.config
        self.flows = interface.flows

    def enumerate_optimal(self, instance):
        '''Optimum of an instance by exhaustive enumeration with exact parameters.

        Walks are generated straight from the trips and workshops: from a
        state (location, time, parameters, trips done) a vehicle may take any
        trip it can still reach (deadheading to its departure first), visit a
        workshop, or end at any location. Waiting is free and keeps the
        parameters. The cheapest walk per (trip set, end location) is kept
        and the walks are then combined under trip demand and balancedness.

        Raises:
            OracleError: above 7 trips, 3 vehicles or 4 locations, or when
                waiting degrades the parameters.
        '''
        if (len(instance.trips) > MAX_TRIPS or len(instance.vehicles) > MAX_VEHICLES or
                len(instance.locations) > MAX_LOCATIONS):
            raise OracleError('instance too large for enumeration (limits: %d trips, %d vehicles, %d locations)'
                              % (MAX_TRIPS, MAX_VEHICLES, MAX_LOCATIONS))
        if not instance.wait_degradation.is_identity:
            raise OracleError('enumeration needs an identity wait degradation')
        model = health.get_model(instance.family)
        vehicles = sorted(instance.vehicles, key=lambda v: v.id)
        count = 0
        options = []
        for vehicle in vehicles:
            walks, labels = self._walks(instance, model, vehicle)
            count += labels
            options.append(sorted(walks.items(), key=lambda item: (item[1][0], sorted(item[0][0]), item[0][1])))

        demand = Counter()
        for trip in instance.trips:
            demand[trip.id] = trip.n_vehicles
        best = [math.inf, None]
        covered = Counter()
        balance = Counter()

        def search(i, cost, chosen):
            if cost >= best[0]:
                return
            if i == len(vehicles):
                if +covered == +demand and not any(balance.values()):
                    best[0], best[1] = cost, list(chosen)
                return
            search(i + 1, cost, chosen)
            for (trips, end), (walk_cost, services) in options[i]:
                if any(covered[t] >= demand[t] for t in trips):
                    continue
                covered.update(trips)
                balance[vehicles[i].origin] += 1
                balance[end] -= 1
                chosen.append(Rotation(vehicles[i].id, list(services)))
                search(i + 1, cost + walk_cost, chosen)
                chosen.pop()
                balance[end] += 1
                balance[vehicles[i].origin] -= 1
                covered.subtract(trips)

        search(0, 0.0, [])
        if best[1] is None:
            self.logger.debug('Enumeration found no feasible assignment')
            return OracleResult(None, [], count, False)
        return OracleResult(best[0], best[1], count, True)

    def _walks(self, instance, model, vehicle):
        space = instance.parameter_space
        end_time = instance.end_time
        deadhead = instance.deadhead_degradation
        workshops = instance.maintenance_locations

        def service(kind, ident, origin, destination, depart, arrive, theta):
            cost = service_cost(instance, model, kind, origin, destination, theta, ident if kind == 'trip' else None)
            return Service(kind, ident, origin, destination, depart, arrive, tuple(theta), cost)

        labels = {}
        queue = []

        def push(state, cost, services):
            known = labels.get(state)
            if known is None:
                heapq.heappush(queue, (state[1], len(labels), state))
            if known is None or cost < known[0]:
                labels[state] = (cost, services)

        initial = tuple(vehicle.initial_params)
        first = service('art_start', vehicle.id, vehicle.origin, vehicle.origin, 0, 0, initial)
        push((vehicle.origin, 0, initial, frozenset(), False), first.cost, (first,))
        walks = {}
        count = 0
        while queue:
            _, _, state = heapq.heappop(queue)
            location, time, theta, trips, maintained = state
            cost, services = labels[state]
            count += 1

            for end in instance.locations:
                tail = services
                if end.id != location:
                    theta_end = deadhead.apply(theta, space)
                    tail += (service('deadhead', None, location, end.id, time,
                                     time + instance.travel_time(location, end.id), theta_end),)
                else:
                    theta_end = theta
                tail += (service('art_end', None, end.id, end.id, end_time, end_time, theta_end),)
                total = cost + sum(s.cost for s in tail[len(services):])
                key = (trips, end.id)
                if key not in walks or total < walks[key][0]:
                    walks[key] = (total, tail)

            for trip in instance.trips:
                if trip.id in trips or trip.dep_time < time + instance.travel_time(location, trip.dep_loc):
                    continue
                before, path = theta, services
                if trip.dep_loc != location:
                    before = deadhead.apply(theta, space)
                    path += (service('deadhead', None, location, trip.dep_loc, time,
                                     time + instance.travel_time(location, trip.dep_loc), before),)
                after = instance.degradation(trip.degradation_id).apply(before, space)
                path += (service('trip', trip.id, trip.dep_loc, trip.arr_loc, trip.dep_time, trip.arr_time, after),)
                step = sum(s.cost for s in path[len(services):])
                push((trip.arr_loc, trip.arr_time, tuple(after), trips | {trip.id}, False), cost + step, path)

            if maintained:
                continue
            for workshop in workshops:
                finish = time + instance.travel_time(location, workshop.id) + workshop.service_duration
                if finish > instance.horizon:
                    continue
                reset = tuple(workshop.reset_params)
                visit = service('maint_in', workshop.id, location, workshop.id, time, finish, reset)
                push((workshop.id, finish, reset, trips, True), cost + visit.cost, services + (visit,))
        return walks, count

    def exact_cover_to_epcp(self, cover):
        return EpcpGraph(cover)

    def solve_epcp(self, graph, backend=None):
        '''Solve an exact path cover graph with the flow solver.

        Returns:
            OracleResult with the indices of the chosen subsets.
        '''
        solution = self.flows.solve(graph.flow_model(), backend)
        if solution.status != 'optimal':
            return OracleResult(None, [], 0, False)
        chosen = [k for k, a in enumerate(graph.entries) if solution.values[a] > 0.5]
        return OracleResult(solution.objective, chosen, 0, True)

    def _sequences(self, instance, trials, seed, max_length):
        rng = np.random.default_rng(seed)
        workshops = instance.maintenance_locations
        for _ in range(trials):
            if instance.vehicles:
                start = instance.vehicles[int(rng.integers(len(instance.vehicles)))].initial_params
            else:
                start = tuple(rng.uniform(instance.parameter_space.lower, instance.parameter_space.upper))
            steps = []
            for _ in range(int(rng.integers(1, max_length + 1))):
                if workshops and rng.random() < 0.15:
                    steps.append(('maint_in', workshops[int(rng.integers(len(workshops)))].id))
                else:
                    steps.append(('trip', instance.trips[int(rng.integers(len(instance.trips)))].id))
            yield tuple(start), steps

    def _walk_sequence(self, instance, model, discretization, start, steps):
        '''Yield (kind, alpha, steps since reset, exact, before rounding, Rounded) per step.

        Starts and resets are priced at the smallest mileage, trips at their own.
        '''
        space = instance.parameter_space
        alphas = instance.alphas
        lowest = min(alphas)

        exact = start
        rounded = round_state(discretization, model, start, alphas, space)
        yield 'art_start', lowest, 0, exact, start, rounded
        count = 0
        for kind, ident in steps:
            if kind == 'maint_in':
                exact = before = instance.location(ident).reset_params
                alpha = None
                count = 0
            else:
                trip = instance.trip(ident)
                degradation = instance.degradation(trip.degradation_id)
                exact = degradation.apply(exact, space)
                before = degradation.apply(rounded.theta, space)
                alpha = trip.mileage
                count += 1
            rounded = round_state(discretization, model, before, alphas, space, alpha)
            yield kind, alpha if alpha is not None else lowest, count, exact, before, rounded

    def check_error_propagation(self, instance, discretization, trials=100, seed=0, lipschitz_p=None, max_length=10):
        '''Measure exact-versus-rounded parameter distance along random service sequences.

        Checks the distance after m steps since the last reset against the
        geometric bound, and the failure probability difference against
        lipschitz_p times that bound. Without lipschitz_p a grid-sampled
        estimate is used, so a pass is evidence rather than proof.

        Returns:
            PropagationReport; min_slack is the tightest bound minus distance.
        '''
        if not instance.trips:
            return PropagationReport(True, 0)
        model = health.get_model(instance.family)
        space = instance.parameter_space
        if lipschitz_p is None:
            lipschitz_p = health.lipschitz_estimate(model, space, instance.alphas)
        lipschitz = max(instance.degradation(t.degradation_id).lipschitz for t in instance.trips)
        epsilon = discretization.epsilon
        report = PropagationReport(True, trials, 0, math.inf, 0.0)
        for start, steps in self._sequences(instance, trials, seed, max_length):
            for kind, alpha, count, exact, _, rounded in self._walk_sequence(instance, model, discretization,
                                                                           start, steps):
                report.steps += 1
                distance = math.dist(space.to_unit(exact), space.to_unit(rounded.theta))
                bound = propagated_error_bound(count, lipschitz, epsilon)
                probability_gap = abs(model.failure_probability(exact, alpha) -
                                      model.failure_probability(rounded.theta, alpha))
                report.min_slack = min(report.min_slack, bound - distance)
                report.max_ratio = max(report.max_ratio, distance / bound)
                if distance > bound + 1e-12 or probability_gap > lipschitz_p * bound + 1e-12:
                    report.passed = False
                    report.witness = [start, steps]
                    return report
        return report

    def check_underestimation(self, instance, discretization, trials=100, seed=0, max_length=10):
        '''Check rounding stays in its cone and never overestimates P_f along random sequences.

        Soundly rounded states are checked at every trip mileage, the others
        at the mileage they were rounded for.
        '''
        if not instance.trips:
            return PropagationReport(True, 0)
        model = health.get_model(instance.family)
        space = instance.parameter_space
        report = PropagationReport(True, trials, 0, math.inf, 0.0)
        for start, steps in self._sequences(instance, trials, seed, max_length):
            for kind, alpha, count, exact, before, rounded in self._walk_sequence(
                    instance, model, discretization, start, steps):
                report.steps += 1
                in_cone = RoundingCone(space.to_unit(before), rounded.signs).contains(space.to_unit(rounded.theta))
                slack = min(model.failure_probability(exact, priced) - model.failure_probability(rounded.theta, priced)
                            for priced in (instance.alphas if rounded.sound else (alpha,)))
                report.min_slack = min(report.min_slack, slack)
                if not in_cone or slack < -1e-12:
                    report.passed = False
                    report.witness = [start, steps]
                    return report
        return report
