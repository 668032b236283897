"""
Arc-flow integer program over an event graph, solved through PuLP.
"""
from collections import OrderedDict

import pulp

from rsrptools.instance import Rotation, RotationPlan, Service

STATUSES = ('optimal', 'infeasible', 'time_limit')

# name -> PuLP solver class name
BACKENDS = OrderedDict([
    ('cbc', 'PULP_CBC_CMD'),
    ('highs', 'HiGHS_CMD'),
])


class SolverError(RuntimeError):
    pass


class DecompositionError(RuntimeError):
    pass


class FlowModel(object):
    '''The integer program: one variable per arc.

    Args:
        costs: Objective coefficient per arc.
        binary: Per arc, True when the variable is restricted to {0, 1}.
        coverage: OrderedDict label -> (arc ids, right-hand side).
        conservation: List of (label, incoming arc ids, outgoing arc ids).
        balance: List of (label, starting arc ids, ending arc ids).
    '''

    def __init__(self, costs, binary, coverage, conservation, balance, name='AP'):
        self.costs = list(costs)
        self.binary = list(binary)
        self.coverage = coverage
        self.conservation = conservation
        self.balance = balance
        self.name = name

    @classmethod
    def from_seeg(cls, seeg, instance):
        coverage = OrderedDict()
        for trip in instance.trips:
            coverage[trip.id] = (list(seeg.trip_arcs.get(trip.id, [])), trip.n_vehicles)
        conservation = []
        for i, node in enumerate(seeg.nodes):
            if node.kind != 'artificial':
                conservation.append((i, seeg.in_arcs[i], seeg.out_arcs[i]))
        balance = []
        for location in instance.locations:
            source_out = []
            if location.id in seeg.sources:
                source_out = seeg.out_arcs[seeg.sources[location.id]]
            sink_in = []
            if location.id in seeg.sinks:
                sink_in = seeg.in_arcs[seeg.sinks[location.id]]
            balance.append((location.id, list(source_out), list(sink_in)))
        return cls([arc.cost for arc in seeg.arcs], [arc.kind == 'art_start' for arc in seeg.arcs],
                   coverage, conservation, balance)

    @property
    def num_variables(self):
        return len(self.costs)

    @property
    def trivially_infeasible(self):
        return any(not arcs for arcs, _ in self.coverage.values())

    def objective_of(self, values):
        return sum(c * v for c, v in zip(self.costs, values))

    def to_pulp(self, relaxed=False):
        '''Build the PuLP problem.

        Returns:
            (problem, variables) with variables in arc order.
        '''
        problem = pulp.LpProblem(self.name, pulp.LpMinimize)
        category = pulp.LpContinuous if relaxed else pulp.LpInteger
        variables = [pulp.LpVariable('x_%d' % a, lowBound=0, upBound=1 if binary else None, cat=category)
                     for a, binary in enumerate(self.binary)]
        problem += pulp.lpSum(c * x for c, x in zip(self.costs, variables)), 'total_cost'
        for i, (label, (arcs, rhs)) in enumerate(self.coverage.items()):
            problem += pulp.lpSum(variables[a] for a in arcs) == rhs, 'cover_%d' % i
        for i, (label, incoming, outgoing) in enumerate(self.conservation):
            problem += (pulp.lpSum(variables[a] for a in incoming) -
                        pulp.lpSum(variables[a] for a in outgoing) == 0), 'flow_%d' % i
        for i, (label, starting, ending) in enumerate(self.balance):
            if starting or ending:
                problem += (pulp.lpSum(variables[a] for a in starting) -
                            pulp.lpSum(variables[a] for a in ending) == 0), 'balance_%d' % i
        return problem, variables

    def write_lp(self, path, relaxed=False):
        problem, _ = self.to_pulp(relaxed)
        problem.writeLP(path)


class FlowSolution(object):

    def __init__(self, status, objective=None, values=None, relaxed=False, message=None):
        self.status = status
        self.objective = objective
        self.values = values
        self.relaxed = relaxed
        self.message = message

    @property
    def has_values(self):
        return self.values is not None

    def __repr__(self):
        return 'FlowSolution(status=%r, objective=%r, relaxed=%r)' % (self.status, self.objective, self.relaxed)


class SolverBackend(object):
    '''A solver able to handle FlowModel problems.'''

    name = None
    capabilities = ('ilp', 'lp')

    def __init__(self, time_limit=None, gap_abs=None, gap_rel=None, seed=0):
        self.time_limit = time_limit
        self.gap_abs = gap_abs
        self.gap_rel = gap_rel
        self.seed = seed

    def available(self):
        return True

    def solve(self, model, relaxed=False, time_limit=None):
        raise NotImplementedError


class PulpBackend(SolverBackend):
    '''A PuLP command-line solver (CBC by default, HiGHS when installed).'''

    def __init__(self, name='cbc', **kwargs):
        super(PulpBackend, self).__init__(**kwargs)
        if name not in BACKENDS:
            raise SolverError('Unknown solver %r, expected one of %s' % (name, ', '.join(BACKENDS)))
        self.name = name
        self.solver_name = BACKENDS[name]

    def _solver(self, time_limit):
        options = {'msg': False}
        if time_limit is not None:
            options['timeLimit'] = time_limit
        if self.gap_abs is not None:
            options['gapAbs'] = self.gap_abs
        if self.gap_rel is not None:
            options['gapRel'] = self.gap_rel
        if self.name == 'cbc':
            options['threads'] = 1
            if self.seed:
                options['options'] = ['randomSeed %d' % self.seed, 'randomCbcSeed %d' % self.seed]
        return pulp.getSolver(self.solver_name, **options)

    def available(self):
        try:
            return bool(pulp.getSolver(self.solver_name, msg=False).available())
        except pulp.PulpSolverError:
            return False

    def outcome(self, problem, time_limit=None):
        '''Map the PuLP status of a solved problem to optimal, infeasible or time_limit.

        CBC reports an undefined status when it stops at the time limit
        without an incumbent; that case counts as time_limit, not infeasible.
        '''
        if problem.sol_status == pulp.LpSolutionOptimal:
            return 'optimal'
        if problem.sol_status == pulp.LpSolutionIntegerFeasible:
            return 'time_limit'
        if (problem.status == pulp.LpStatusUndefined and time_limit is not None and
                getattr(problem, 'solutionTime', 0.0) >= time_limit):
            return 'time_limit'
        if (problem.status in (pulp.LpStatusInfeasible, pulp.LpStatusUndefined) or
                problem.sol_status == pulp.LpSolutionInfeasible):
            return 'infeasible'
        if problem.status == pulp.LpStatusNotSolved:
            return 'time_limit'
        raise SolverError('%s returned status %s' % (self.solver_name, pulp.LpStatus[problem.status]))

    def solve(self, model, relaxed=False, time_limit=None):
        if time_limit is None:
            time_limit = self.time_limit
        problem, variables = model.to_pulp(relaxed)
        try:
            problem.solve(self._solver(time_limit))
        except pulp.PulpSolverError as e:
            raise SolverError('%s failed: %s' % (self.solver_name, e))

        status = pulp.LpStatus[problem.status]
        result = self.outcome(problem, time_limit)
        if problem.sol_status not in (pulp.LpSolutionOptimal, pulp.LpSolutionIntegerFeasible):
            return FlowSolution(result, relaxed=relaxed, message=status)

        values = [x.varValue or 0.0 for x in variables]
        if not relaxed:
            values = [float(round(v)) if abs(v - round(v)) <= 1e-6 else v for v in values]
        return FlowSolution(result, model.objective_of(values), values, relaxed, status)


def get_backend(name='cbc', **options):
    backend = PulpBackend(name, **options)
    if not backend.available():
        raise SolverError('Solver %s is not available' % name)
    return backend


class FlowSolver(object):

    def __init__(self, interface):
        ''' Construct the flow solver.

        Args:
            interface: A reference to the rsrptools Interface.

        Returns:
            An instance of the FlowSolver class.
        '''
        self.logger = interface.logger
        self.config = interface.config

    def build_model(self, seeg, instance):
        '''Build the arc-flow model of an event graph.

        Args:
            seeg (Seeg): A pruned, indexed event graph.
            instance (Instance): Its instance.

        Returns:
            A FlowModel; model.trivially_infeasible is set when a trip has no arc.
        '''
        model = FlowModel.from_seeg(seeg, instance)
        self.logger.debug('Flow model: %d variables, %d coverage rows, %d conservation rows'
                          % (model.num_variables, len(model.coverage), len(model.conservation)))
        return model

    def backend(self, model=None):
        '''The configured backend with the gap tolerance suited to the model size.'''
        if model is not None and model.num_variables > self.config.tiny_model_size:
            gaps = {'gap_rel': self.config.gap_rel}
        else:
            gaps = {'gap_abs': self.config.gap_abs}
        return get_backend(self.config.solver, seed=self.config.seed, **gaps)

    def solve(self, model, backend=None, relaxed=False, time_limit=None):
        '''Solve a flow model or its LP relaxation.

        Args:
            model (FlowModel): The model.
            backend (SolverBackend): Defaults to the configured solver.
            relaxed (bool): Solve the LP relaxation. Default False.
            time_limit (float): Seconds for the solver.

        Returns:
            A FlowSolution.
        '''
        if model.trivially_infeasible:
            self.logger.debug('Model has a trip without arcs, infeasible')
            return FlowSolution('infeasible', relaxed=relaxed, message='trip without arcs')
        if not model.coverage:
            return FlowSolution('optimal', 0.0, [0.0] * model.num_variables, relaxed, 'no trips')
        if backend is None:
            backend = self.backend(model)
        solution = backend.solve(model, relaxed, time_limit)
        self.logger.debug('Solved %s: %r' % ('LP relaxation' if relaxed else 'ILP', solution))
        return solution

    def extract_rotations(self, solution, seeg, instance=None):
        '''Decompose an integral flow into one rotation per used vehicle.

        Each path follows, at every node, the remaining arc whose head is
        earliest in time (lowest arc id on ties).

        Raises:
            DecompositionError: on fractional input or flow that does not
                decompose into start-to-end paths.
        '''
        if not solution.has_values:
            raise DecompositionError('solution with status %s carries no flow' % solution.status)
        if solution.relaxed:
            raise DecompositionError('cannot decompose an LP relaxation')
        for a, value in enumerate(solution.values):
            if abs(value - round(value)) > 1e-6:
                raise DecompositionError('fractional flow %s on arc %d' % (value, a))

        graph = seeg.graph.copy()
        for _, _, data in graph.edges(data=True):
            data['remaining_flow'] = int(round(solution.values[data['id']]))

        def used(edges):
            return [e for e in edges if graph.edges[e]['remaining_flow'] > 0]

        starts = sorted(used(graph.out_edges(list(seeg.sources.values()), keys=True)),
                        key=lambda e: graph.edges[e]['arc'].vehicle_id)
        rotations = []
        for edge in starts:
            if graph.edges[edge]['remaining_flow'] > 1:
                raise DecompositionError('vehicle %s starts %d times'
                                         % (graph.edges[edge]['arc'].vehicle_id, graph.edges[edge]['remaining_flow']))
            path = [edge]
            graph.edges[edge]['remaining_flow'] -= 1
            while not seeg.is_artificial(path[-1][1]):
                candidates = used(graph.out_edges(path[-1][1], keys=True))
                if not candidates:
                    raise DecompositionError('flow conservation broken at node %d' % path[-1][1])
                edge = min(candidates, key=lambda e: (seeg.nodes[e[1]].time, graph.edges[e]['id']))
                graph.edges[edge]['remaining_flow'] -= 1
                path.append(edge)
            rotations.append(self._rotation([graph.edges[e]['id'] for e in path], seeg))
        left = used(graph.edges(keys=True))
        if left:
            raise DecompositionError('flow left on %d arcs after decomposition' % len(left))
        return RotationPlan(rotations, solution.objective, solution.objective)

    def _rotation(self, path, seeg):
        services = []
        for a in path:
            arc = seeg.arcs[a]
            tail, head = seeg.nodes[arc.tail], seeg.nodes[arc.head]
            if arc.kind == 'trip':
                ident = arc.trip_id
            elif arc.kind == 'art_start':
                ident = arc.vehicle_id
            elif arc.kind == 'maint_in':
                ident = head.location
            else:
                ident = None
            theta = head.theta if head.theta is not None else tail.theta
            services.append(Service(arc.kind, ident, tail.location, head.location, tail.time, head.time,
                                    tuple(theta), arc.cost))
        return Rotation(seeg.arcs[path[0]].vehicle_id, services)

    def write_lp(self, model, path, relaxed=False):
        model.write_lp(path, relaxed)
        self.logger.debug('Wrote LP file %s' % path)
