"""
Event skeleton of an instance: the (location, time) events and the moves a
vehicle can make between them, before any parameter values are attached.

The state-expanded graph replicates these events per discretized parameter
value.
"""
import logging
from bisect import bisect_left, bisect_right
from collections import namedtuple, defaultdict

logger = logging.getLogger('rsrptools')

Event = namedtuple('Event', ['location', 'time'])
Move = namedtuple('Move', ['kind', 'tail', 'head', 'trip_id', 'reset'])


def service_cost(instance, model, kind, origin, destination, theta_after=None, trip_id=None):
    '''Cost of one service.

    Args:
        kind (str): Service kind (trip, wait, deadhead, maint_in, maint_out,
            art_start or art_end).
        origin, destination (str): Location ids.
        theta_after: Parameters on arrival, needed for trips.
        trip_id: The operated trip, for trips.
    '''
    if kind == 'wait':
        return 0.0
    if kind == 'trip':
        trip = instance.trip(trip_id)
        return trip.base_cost + instance.costs.failure_cost * model.failure_probability(theta_after, trip.mileage)
    deadhead = instance.deadhead_cost(origin, destination)
    if kind == 'art_start':
        return instance.costs.vehicle_usage_cost + deadhead
    if kind == 'maint_in':
        return instance.location(destination).maintenance_cost + deadhead
    return deadhead


def service_degradation(instance, kind, origin, destination, trip_id=None):
    '''Degradation of a service kind; None for maintenance resets and artificial services.'''
    if kind == 'trip':
        return instance.degradation(instance.trip(trip_id).degradation_id)
    if kind in ('maint_in', 'art_start', 'art_end'):
        return None
    if kind == 'wait' or (kind == 'maint_out' and origin == destination):
        return instance.wait_degradation
    return instance.deadhead_degradation


class EventNetwork(object):
    '''Events and moves of an instance.

    Regular events are (l, 0), (l, END) and the trip departures and arrivals
    at l. Maintenance-only events are workshop finish times that coincide
    with no regular event. Every move strictly increases time.
    '''

    def __init__(self, instance):
        self.instance = instance
        self.end_time = instance.end_time
        location_ids = [loc.id for loc in instance.locations]

        departures = dict((l, set()) for l in location_ids)
        arrivals = dict((l, set()) for l in location_ids)
        for trip in instance.trips:
            departures[trip.dep_loc].add(trip.dep_time)
            arrivals[trip.arr_loc].add(trip.arr_time)

        self.departures = dict((l, sorted(departures[l])) for l in location_ids)
        self.departure_like = dict((l, sorted(departures[l] | {self.end_time})) for l in location_ids)
        self.times = dict((l, sorted(departures[l] | arrivals[l] | {0, self.end_time})) for l in location_ids)
        self.regular = set(Event(l, t) for l in location_ids for t in self.times[l])

        visits = self._maintenance_visits()
        self.maintenance_only = set(head for _, head, _ in visits if head not in self.regular)
        # a vehicle leaves a workshop like one that arrived there
        for _, head, _ in visits:
            if head in self.regular:
                arrivals[head.location].add(head.time)
        self.arrival_like = dict((l, sorted(arrivals[l] | {0})) for l in location_ids)

        self.moves = []
        self._build_trip_moves()
        self._build_wait_moves()
        self._build_deadhead_moves()
        self._build_maintenance_moves(visits)

        self.out_moves = defaultdict(list)
        for move in self.moves:
            self.out_moves[move.tail].append(move)
        order = dict((l, i) for i, l in enumerate(location_ids))
        self.events = sorted(self.regular | self.maintenance_only,
                             key=lambda e: (e.time, order[e.location], e in self.maintenance_only))
        logger.debug('Event network: %d regular events, %d maintenance events, %d moves'
                     % (len(self.regular), len(self.maintenance_only), len(self.moves)))

    def start_event(self, location):
        return Event(location, 0)

    def end_event(self, location):
        return Event(location, self.end_time)

    def is_maintenance_only(self, event):
        return event in self.maintenance_only

    def first_after(self, event, location, terminal=True):
        '''Earliest departure-like event at `location` reachable from `event`.

        With terminal=True the end event of `location` is always a candidate.
        '''
        earliest = event.time + self.instance.travel_time(event.location, location)
        times = self.departure_like[location] if terminal else self.departures[location]
        i = bisect_left(times, earliest)
        if i < len(times):
            return Event(location, times[i])
        if terminal:
            return Event(location, self.end_time)
        return None

    def last_before(self, event, location):
        '''Latest arrival-like event at `location` from which `event` is reachable.'''
        times = self.arrival_like[location]
        if event.time >= self.end_time:
            return Event(location, times[-1])
        latest = event.time - self.instance.travel_time(location, event.location)
        i = bisect_right(times, latest) - 1
        if i < 0:
            return None
        return Event(location, times[i])

    def _build_trip_moves(self):
        for trip in self.instance.trips:
            self.moves.append(Move('trip', Event(trip.dep_loc, trip.dep_time),
                                   Event(trip.arr_loc, trip.arr_time), trip.id, None))

    def _build_wait_moves(self):
        for location, times in self.times.items():
            for a, b in zip(times, times[1:]):
                self.moves.append(Move('wait', Event(location, a), Event(location, b), None, None))

    def _build_deadhead_moves(self):
        for origin, times in self.arrival_like.items():
            for time in times:
                tail = Event(origin, time)
                for destination in self.times:
                    if destination == origin:
                        continue
                    head = self.first_after(tail, destination)
                    if head is not None and self.last_before(head, origin) == tail:
                        self.moves.append(Move('deadhead', tail, head, None, None))

    def _maintenance_visits(self):
        '''(tail, finish event, workshop id) for every regular event and workshop.

        Workshops have a positive service duration, so the finish is always
        later than the tail.
        '''
        visits = []
        horizon = self.instance.horizon
        for tail in sorted(self.regular):
            if tail.time >= self.end_time:
                continue
            for workshop in self.instance.maintenance_locations:
                finish = tail.time + self.instance.travel_time(tail.location, workshop.id) + workshop.service_duration
                if finish <= horizon:
                    visits.append((tail, Event(workshop.id, finish), workshop.id))
        return visits

    def _build_maintenance_moves(self, visits):
        for tail, head, workshop in visits:
            self.moves.append(Move('maint_in', tail, head, None, workshop))

        for event in sorted(self.maintenance_only):
            times = self.times[event.location]
            following = times[bisect_right(times, event.time)]
            self.moves.append(Move('maint_out', event, Event(event.location, following), None, None))
            for destination in self.times:
                if destination != event.location:
                    self.moves.append(Move('maint_out', event, self.first_after(event, destination), None, None))

    def degradation(self, move):
        '''Degradation applied along a move; None for maintenance resets.'''
        return service_degradation(self.instance, move.kind, move.tail.location, move.head.location, move.trip_id)

    def apply(self, move, theta):
        '''Exact parameters after a move.'''
        if move.kind == 'maint_in':
            return self.instance.location(move.reset).reset_params
        return self.degradation(move).apply(theta, self.instance.parameter_space)

    def cost(self, move, model, theta_after):
        return service_cost(self.instance, model, move.kind, move.tail.location, move.head.location,
                            theta_after, move.trip_id)
