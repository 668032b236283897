"""
State-expanded event graph construction.
"""
from collections import namedtuple, defaultdict, OrderedDict

import networkx as nx
from networkx.drawing import nx_pydot

from rsrptools import health
from rsrptools.events import EventNetwork, service_cost
from rsrptools.discretization import OffGridError, PointSetDiscretization

Node = namedtuple('Node', ['kind', 'location', 'time', 'key', 'theta'])
Arc = namedtuple('Arc', ['tail', 'head', 'kind', 'cost', 'trip_id', 'vehicle_id'])
Rounded = namedtuple('Rounded', ['key', 'theta', 'signs', 'sound'])

ARC_KINDS = ('art_start', 'trip', 'wait', 'deadhead', 'maint_in', 'maint_out', 'art_end')
NODE_KINDS = ('artificial', 'start', 'departure', 'arrival', 'maintenance', 'end')


class GraphError(RuntimeError):
    pass


class Seeg(object):
    '''An event graph held in a networkx MultiDiGraph, with flat indices on top.

    Graph nodes are the integers 0..N-1 and carry their Node under 'node'.
    Every edge carries its Arc under 'arc' and its position in `arcs` under
    'id'. Edge keys name the arc kind, followed by the trip or vehicle id
    for trip and start arcs.
    '''

    def __init__(self, graph=None, discretization=None):
        if graph is None:
            graph = nx.MultiDiGraph(name='seeg')
        self.graph = graph
        self.discretization = discretization
        self.nodes = tuple(graph.nodes[i]['node'] for i in range(graph.number_of_nodes()))
        edges = sorted(graph.edges(data=True), key=lambda edge: edge[2]['id'])
        self.arcs = tuple(data['arc'] for _, _, data in edges)
        self.out_arcs = [sorted(a for _, _, a in graph.out_edges(i, data='id')) for i in range(len(self.nodes))]
        self.in_arcs = [sorted(a for _, _, a in graph.in_edges(i, data='id')) for i in range(len(self.nodes))]
        self.trip_arcs = defaultdict(list)
        self.event_nodes = defaultdict(list)
        self.sources = OrderedDict()
        self.sinks = OrderedDict()
        self._identity = {}
        for i, node in enumerate(self.nodes):
            self._identity[(node.location, node.time, node.key)] = i
            if node.kind == 'artificial':
                if node.time == 0:
                    self.sources[node.location] = i
                else:
                    self.sinks[node.location] = i
            else:
                self.event_nodes[(node.location, node.time)].append(i)
        for a, arc in enumerate(self.arcs):
            if arc.kind == 'trip':
                self.trip_arcs[arc.trip_id].append(a)

    def node_id(self, location, time, key):
        return self._identity.get((location, time, key))

    def is_artificial(self, node_id):
        return self.nodes[node_id].kind == 'artificial'

    def arcs_of_kind(self, kind):
        return [a for a, arc in enumerate(self.arcs) if arc.kind == kind]

    def __repr__(self):
        return 'Seeg(nodes=%d, arcs=%d)' % (len(self.nodes), len(self.arcs))


def _node_kind(network, event):
    if network.is_maintenance_only(event):
        return 'maintenance'
    if event.time == 0:
        return 'start'
    if event.time == network.end_time:
        return 'end'
    if event.time in network.departures[event.location]:
        return 'departure'
    return 'arrival'


def _edge_key(kind, trip_id=None, vehicle_id=None):
    ident = trip_id if trip_id is not None else vehicle_id
    return kind if ident is None else '%s %s' % (kind, ident)


def round_state(discretization, model, theta, alphas, space, alpha=None):
    '''Round a parameter point so that P_f does not rise at any of `alphas`.

    When the rounding direction of an axis depends on the mileage and the
    point is not on the grid along that axis, the region of `alpha` (the
    smallest mileage by default) is used instead and the result is marked
    unsound.

    Returns:
        A Rounded tuple, or None when a point set discretization lacks theta.
    '''
    signs = model.rounding_signs(theta, alphas)
    sound = True
    try:
        snapped = discretization.snap(theta, signs, space)
    except OffGridError:
        if alpha is None:
            alpha = min(alphas)
        signs = model.region_of(theta, alpha).signs
        snapped = discretization.snap(theta, signs, space)
        sound = False
    if snapped is None:
        return None
    return Rounded(snapped[0], snapped[1], signs, sound)


def prune(graph):
    '''Drop non-artificial nodes with indegree or outdegree zero until none is left.

    Artificial nodes left without arcs are dropped too. Works in place.

    Args:
        graph (nx.MultiDiGraph): Nodes carry their Node under 'node'.

    Returns:
        The pruned graph.
    '''
    def dead(n):
        return graph.nodes[n]['node'].kind != 'artificial' and (graph.in_degree(n) == 0 or graph.out_degree(n) == 0)

    doomed = [n for n in graph if dead(n)]
    while doomed:
        touched = set()
        for n in doomed:
            touched.update(graph.predecessors(n))
            touched.update(graph.successors(n))
        graph.remove_nodes_from(doomed)
        doomed = [n for n in touched if n in graph and dead(n)]
    graph.remove_nodes_from(list(nx.isolates(graph)))
    return graph


class GraphBuilder(object):

    def __init__(self, interface):
        ''' Construct the graph builder.

        Args:
            interface: A reference to the rsrptools Interface.

        Returns:
            An instance of the GraphBuilder class.
        '''
        self.logger = interface.logger
        self.config = interface.config

    def build_seeg(self, instance, discretization, model=None, prune_graph=True):
        '''Build the state-expanded event graph of an instance at a discretization.

        Every rounded state keeps P_f from rising at every trip mileage of
        the instance.

        Args:
            instance (Instance): The problem instance.
            discretization: A Discretization, or a PointSetDiscretization.
            model (HealthModel): Defaults to the instance's family.
            prune_graph (bool): Apply the degree pruning loop. Default True.

        Returns:
            A Seeg.
        '''
        if model is None:
            model = health.get_model(instance.family)
        space = instance.parameter_space
        network = EventNetwork(instance)
        alphas = instance.alphas
        unsound = set()

        def snap(theta, alpha=None):
            rounded = round_state(discretization, model, theta, alphas, space, alpha)
            if rounded is not None and not rounded.sound:
                unsound.add(tuple(theta))
            return rounded

        graph = nx.MultiDiGraph(name='seeg')

        def add(kind, location, time, key, theta):
            identity = (location, time, key)
            if identity not in graph:
                graph.add_node(identity, node=Node(kind, location, time, key, theta))
            return identity

        def connect(tail, head, kind, cost, trip_id=None, vehicle_id=None):
            graph.add_edge(tail, head, key=_edge_key(kind, trip_id, vehicle_id), kind=kind, cost=cost,
                           trip_id=trip_id, vehicle_id=vehicle_id)

        points = list(discretization.points(space))
        for event in sorted(network.regular):
            kind = _node_kind(network, event)
            for key, theta in points:
                add(kind, event.location, event.time, key, theta)

        resets = {}
        for workshop in instance.maintenance_locations:
            rounded = snap(workshop.reset_params)
            if rounded is None:
                raise GraphError('reset parameters of %s are not in the discretization' % workshop.id)
            resets[workshop.id] = (rounded.key, rounded.theta)
        for event in sorted(network.maintenance_only):
            key, theta = resets[event.location]
            add('maintenance', event.location, event.time, key, theta)

        heads = {}
        trip_costs = {}
        for move in network.moves:
            if move.tail in network.maintenance_only:
                tail_points = [resets[move.tail.location]]
            else:
                tail_points = points
            degradation = network.degradation(move)
            alpha = instance.trip(move.trip_id).mileage if move.kind == 'trip' else None
            for key, theta in tail_points:
                if move.kind == 'maint_in':
                    head_key, head_theta = resets[move.reset]
                else:
                    cache_key = (degradation, alpha, key)
                    if cache_key not in heads:
                        heads[cache_key] = snap(degradation.apply(theta, space), alpha)
                    if heads[cache_key] is None:
                        continue
                    head_key, head_theta = heads[cache_key].key, heads[cache_key].theta
                if move.kind == 'trip':
                    if (move.trip_id, head_key) not in trip_costs:
                        trip_costs[(move.trip_id, head_key)] = network.cost(move, model, head_theta)
                    cost = trip_costs[(move.trip_id, head_key)]
                else:
                    cost = network.cost(move, model, head_theta)
                connect((move.tail.location, move.tail.time, key), (move.head.location, move.head.time, head_key),
                        move.kind, cost, move.trip_id)

        for vehicle in sorted(instance.vehicles, key=lambda v: v.id):
            rounded = snap(vehicle.initial_params)
            if rounded is None:
                raise GraphError('initial parameters of vehicle %s are not in the discretization' % vehicle.id)
            source = add('artificial', vehicle.origin, 0, (), None)
            cost = service_cost(instance, model, 'art_start', vehicle.origin, vehicle.origin)
            connect(source, (vehicle.origin, 0, rounded.key), 'art_start', cost, vehicle_id=vehicle.id)

        for location in instance.locations:
            sink = add('artificial', location.id, network.end_time, (), None)
            cost = service_cost(instance, model, 'art_end', location.id, location.id)
            for key, _ in points:
                connect((location.id, network.end_time, key), sink, 'art_end', cost)

        if unsound:
            self.logger.warning('%d parameter points are off the grid on an axis whose rounding direction depends '
                                'on the mileage; the lower bound is not guaranteed' % len(unsound))
        self.logger.debug('Graph before pruning: %d nodes, %d arcs'
                          % (graph.number_of_nodes(), graph.number_of_edges()))
        if prune_graph:
            prune(graph)
        seeg = self._assemble(instance, graph, discretization)
        self.logger.debug('Built %r' % seeg)
        return seeg

    def _assemble(self, instance, graph, discretization):
        order = dict((loc.id, i) for i, loc in enumerate(instance.locations))

        def node_order(identity):
            node = graph.nodes[identity]['node']
            rank = NODE_KINDS.index(node.kind)
            if node.kind == 'artificial' and node.time > 0:
                rank = len(NODE_KINDS)
            return (node.time, rank, order[node.location], node.key)

        identities = sorted(graph, key=node_order)
        index = dict((identity, i) for i, identity in enumerate(identities))
        arcs = [(Arc(index[u], index[v], data['kind'], data['cost'], data['trip_id'], data['vehicle_id']), key)
                for u, v, key, data in graph.edges(keys=True, data=True)]
        arcs.sort(key=lambda item: (item[0].tail, item[0].head, ARC_KINDS.index(item[0].kind),
                                    item[0].trip_id or '', item[0].vehicle_id or ''))

        numbered = nx.MultiDiGraph(name=graph.graph.get('name', 'seeg'))
        numbered.add_nodes_from((index[identity], graph.nodes[identity]) for identity in identities)
        for a, (arc, key) in enumerate(arcs):
            numbered.add_edge(arc.tail, arc.head, key=key, id=a, arc=arc)
        return Seeg(numbered, discretization)

    def ceeg_values(self, instance, cap=None):
        '''Every parameter value a vehicle can carry at any event, computed exactly.

        Raises:
            GraphError: when more than `cap` distinct values appear.
        '''
        if cap is None:
            cap = self.config.ceeg_cap
        network = EventNetwork(instance)
        reach = defaultdict(set)
        values = set()
        for vehicle in instance.vehicles:
            reach[network.start_event(vehicle.origin)].add(vehicle.initial_params)
        for workshop in instance.maintenance_locations:
            values.add(workshop.reset_params)
        for event in network.events:
            current = reach.pop(event, set())
            values |= current
            if len(values) > cap:
                raise GraphError('CEEG too large: more than %d parameter values' % cap)
            for move in network.out_moves[event]:
                if move.kind == 'maint_in':
                    reach[move.head].add(network.apply(move, None))
                else:
                    reach[move.head].update(network.apply(move, theta) for theta in current)
        return values

    def build_ceeg(self, instance, model=None, cap=None):
        '''Build the completely expanded event graph, whose rounding is the identity.'''
        discretization = PointSetDiscretization(self.ceeg_values(instance, cap))
        self.logger.debug('CEEG over %d exact parameter values' % len(discretization))
        return self.build_seeg(instance, discretization, model)

    def arc_cost(self, arc, seeg, instance, model=None):
        '''Recompute the cost of an arc from its end nodes.'''
        if model is None:
            model = health.get_model(instance.family)
        tail, head = seeg.nodes[arc.tail], seeg.nodes[arc.head]
        return service_cost(instance, model, arc.kind, tail.location, head.location, head.theta, arc.trip_id)

    def statistics(self, seeg):
        nodes_by_kind = OrderedDict((kind, 0) for kind in NODE_KINDS)
        arcs_by_kind = OrderedDict((kind, 0) for kind in ARC_KINDS)
        for node in seeg.nodes:
            nodes_by_kind[node.kind] += 1
        for arc in seeg.arcs:
            arcs_by_kind[arc.kind] += 1
        return OrderedDict([
            ('nodes', len(seeg.nodes)),
            ('arcs', len(seeg.arcs)),
            ('discretization_points', len(seeg.discretization) if seeg.discretization is not None else 0),
            ('nodes_by_kind', nodes_by_kind),
            ('arcs_by_kind', arcs_by_kind),
        ])

    def dot_graph(self, seeg):
        '''A labelled copy of the graph for DOT output, with nodes named n<id>.'''
        dot = nx.MultiDiGraph(name='seeg')
        for i, node in enumerate(seeg.nodes):
            if node.kind == 'artificial':
                label = '%s %s %d' % ('source' if node.time == 0 else 'sink', node.location, node.time)
            else:
                label = '%s, %d, (%s)' % (node.location, node.time, ', '.join('%.6g' % v for v in node.theta))
            dot.add_node('n%d' % i, label=label)
        for a, arc in enumerate(seeg.arcs):
            label = '%s %.6f' % (_edge_key(arc.kind, arc.trip_id), arc.cost)
            dot.add_edge('n%d' % arc.tail, 'n%d' % arc.head, key=a, label=label)
        return dot

    def to_dot(self, seeg):
        return nx_pydot.to_pydot(self.dot_graph(seeg)).to_string().rstrip('\n') + '\n'

    def export_dot(self, seeg, path):
        nx_pydot.write_dot(self.dot_graph(seeg), path)
        self.logger.debug('Wrote DOT graph to %s' % path)
