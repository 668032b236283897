"""
Iterative refinement: solve the approximate problem on ever finer
discretizations, collecting lower bounds and repropagated upper bounds.
"""
import json
import time
from collections import OrderedDict

from rsrptools import health
from rsrptools.discretization import build_discretization, propagated_error_bound
from rsrptools.events import service_cost, service_degradation
from rsrptools.instance import Rotation, RotationPlan, Service

STATUSES = ('converged', 'max_iterations', 'time_limit', 'infeasible')


class AlignmentError(ValueError):
    pass


class RefinementReport(object):
    '''Outcome of a refinement run.

    `lb` is the largest lower bound found, `ub` the best repropagated value;
    each iteration record also keeps the literal ub of that iteration.
    '''

    def __init__(self, mode, k):
        self.mode = mode
        self.k = k
        self.iterations = []
        self.status = None
        self.lb = None
        self.ub = None
        self.best_plan = None
        self.monotone = True
        self.alignment_failures = []

    @property
    def gap(self):
        if self.lb is None or self.ub is None:
            return None
        return self.ub - self.lb

    @property
    def lower_bounds(self):
        return [record['lb'] for record in self.iterations if record['lb'] is not None]

    def as_dict(self, timings=False):
        iterations = []
        for record in self.iterations:
            entry = OrderedDict((key, value) for key, value in record.items() if timings or key != 'seconds')
            iterations.append(entry)
        return OrderedDict([
            ('mode', self.mode),
            ('k', self.k),
            ('status', self.status),
            ('lb', self.lb),
            ('ub', self.ub),
            ('gap', self.gap),
            ('monotone', self.monotone),
            ('alignment_failures', list(self.alignment_failures)),
            ('iterations', iterations),
        ])

    def to_json(self, timings=False):
        return json.dumps(self.as_dict(timings), indent=2)

    def write(self, path, timings=False):
        with open(path, 'w') as f:
            f.write(self.to_json(timings) + '\n')


class Refinement(object):

    def __init__(self, interface):
        ''' Construct the refinement driver.

        Args:
            interface: A reference to the rsrptools Interface.

        Returns:
            An instance of the Refinement class.
        '''
        self.logger = interface.logger
        self.config = interface.config
        self.graphs = interface.graphs
        self.flows = interface.flows

    def check_alignment(self, instance, model=None, config=None):
        '''Sample every non-identity degradation for alignment.

        Returns:
            Sorted ids of the degradations that failed.

        Raises:
            AlignmentError: when strict_alignment is set and a check fails.
        '''
        config = config or self.config
        if model is None:
            model = health.get_model(instance.family)
        if not instance.trips:
            return []
        # a state may be priced at any mileage later on
        alphas = instance.alphas if model.reliability else (None,)
        used = OrderedDict()
        for trip in instance.trips:
            used[instance.degradation(trip.degradation_id)] = True
        used[instance.wait_degradation] = True
        used[instance.deadhead_degradation] = True

        failures = []
        for degradation in used:
            if degradation.is_identity:
                continue
            for alpha in alphas:
                report = health.check_alignment(model, degradation, instance.parameter_space,
                                                config.alignment_samples, alpha, config.seed)
                if not report.passed:
                    self.logger.warning('Degradation %s is not aligned: witness %s' % (degradation.id, report.witness))
                    failures.append(degradation.id)
                    break
        failures.sort()
        if failures and config.strict_alignment:
            raise AlignmentError('Degradations not aligned: %s' % ', '.join(failures))
        return failures

    def repropagate(self, plan, instance, model=None):
        '''Recompute the parameters and costs of a plan with the exact degradations.

        Args:
            plan (RotationPlan): Plan extracted from an event graph.
            instance (Instance): Its instance.

        Returns:
            A RotationPlan with exact parameters, costs and objective;
            clamped_steps counts degradations that left the box.
        '''
        if model is None:
            model = health.get_model(instance.family)
        space = instance.parameter_space
        rotations = []
        clamped = 0
        for rotation in plan.rotations:
            theta = instance.vehicle(rotation.vehicle_id).initial_params
            services = []
            for service in rotation.services:
                kind = service.service_kind
                trip_id = service.id if kind == 'trip' else None
                if kind == 'art_start':
                    theta = instance.vehicle(rotation.vehicle_id).initial_params
                elif kind == 'maint_in':
                    theta = instance.location(service.destination).reset_params
                else:
                    degradation = service_degradation(instance, kind, service.origin, service.destination, trip_id)
                    if degradation is not None:
                        if degradation.clamps(theta, space):
                            clamped += 1
                        theta = degradation.apply(theta, space)
                cost = service_cost(instance, model, kind, service.origin, service.destination, theta, trip_id)
                services.append(Service(kind, service.id, service.origin, service.destination,
                                        service.depart, service.arrive, tuple(theta), cost))
            rotations.append(Rotation(rotation.vehicle_id, services))
        exact = RotationPlan(rotations, None, plan.lower_bound, clamped)
        exact.objective = exact.cost
        if clamped:
            self.logger.warning('Repropagation clamped %d parameter updates to the box' % clamped)
        return exact

    def gap_bound(self, plan, instance, epsilon, lipschitz_p):
        '''Estimate of exact minus approximate cost of a plan from an event graph.

        The estimate is only as good as lipschitz_p: with a sampled Lipschitz
        constant (see health.lipschitz_estimate) it is not a certified bound.

        Args:
            plan (RotationPlan): The plan with rounded parameters.
            epsilon (float): Rounding error of the discretization.
            lipschitz_p (float): Lipschitz constant of P_f in unit coordinates.
        '''
        lipschitz = max([d.lipschitz for d in instance.degradations.values()] +
                        [instance.wait_degradation.lipschitz, instance.deadhead_degradation.lipschitz])
        total = 0.0
        for rotation in plan.rotations:
            steps = 0
            for service in rotation.services:
                kind = service.service_kind
                if kind in ('art_start', 'maint_in'):
                    steps = 0
                elif kind != 'art_end':
                    steps += 1
                if kind == 'trip':
                    total += min(1.0, lipschitz_p * propagated_error_bound(steps, lipschitz, epsilon))
        return instance.costs.failure_cost * total

    def run(self, instance, config=None, backend=None, callback=None):
        '''Refine the discretization until the bounds meet or a limit is hit.

        Args:
            instance (Instance): The problem instance.
            config (Config): Defaults to the interface configuration.
            backend (SolverBackend): Defaults to the configured solver.
            callback: Called with each iteration record.

        Returns:
            A RefinementReport.
        '''
        config = config or self.config
        model = health.get_model(instance.family)
        space = instance.parameter_space
        relaxed = config.mode == 'lp'
        report = RefinementReport(config.mode, config.k)
        report.alignment_failures = self.check_alignment(instance, model, config)

        started = time.monotonic()
        deadline = started + config.time_limit
        lipschitz_p = None if relaxed else health.lipschitz_estimate(model, space, instance.alphas)
        discretization = build_discretization(0, config.k, model, instance.alphas, space, instance.anchor_points)

        for level in range(config.max_iterations):
            if time.monotonic() >= deadline:
                report.status = 'time_limit'
                break
            seeg = self.graphs.build_seeg(instance, discretization, model)
            flow_model = self.flows.build_model(seeg, instance)
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                report.status = 'time_limit'
                break
            solution = self.flows.solve(flow_model, backend, relaxed=relaxed, time_limit=remaining)

            record = OrderedDict([
                ('level', level),
                ('points', len(discretization)),
                ('epsilon', discretization.epsilon),
                ('nodes', len(seeg.nodes)),
                ('arcs', len(seeg.arcs)),
                ('solver_status', solution.status),
                ('lb', None),
                ('ub', None),
                ('best_ub', report.ub),
                ('gap_bound', None),
                ('clamped_steps', 0),
                ('seconds', None),
            ])
            if solution.status == 'optimal':
                lb = solution.objective
                record['lb'] = lb
                if report.lb is not None and lb < report.lb - config.tolerance:
                    report.monotone = False
                    self.logger.warning('Lower bound decreased from %s to %s at level %d' % (report.lb, lb, level))
                report.lb = lb if report.lb is None else max(report.lb, lb)

            if not relaxed and solution.status in ('optimal', 'time_limit') and solution.has_values:
                plan = self.flows.extract_rotations(solution, seeg, instance)
                exact = self.repropagate(plan, instance, model)
                record['ub'] = exact.objective
                record['clamped_steps'] = exact.clamped_steps
                if solution.status == 'optimal':
                    record['gap_bound'] = self.gap_bound(plan, instance, discretization.epsilon, lipschitz_p)
                if report.ub is None or exact.objective < report.ub:
                    report.ub = exact.objective
                    report.best_plan = exact
                record['best_ub'] = report.ub

            record['seconds'] = time.monotonic() - started
            report.iterations.append(record)
            self.logger.info('level %d: |D|=%d nodes=%d arcs=%d lb=%s ub=%s'
                             % (level, len(discretization), len(seeg.nodes), len(seeg.arcs), record['lb'], record['ub']))
            if callback is not None:
                callback(record)

            if solution.status == 'infeasible':
                report.status = 'infeasible'
                break
            if solution.status == 'time_limit':
                report.status = 'time_limit'
                break
            if not relaxed and report.ub is not None and report.lb >= report.ub - config.tolerance:
                report.status = 'converged'
                break
            discretization = discretization.refine()
        else:
            report.status = 'max_iterations'

        if report.best_plan is not None:
            report.best_plan.lower_bound = report.lb
        self.logger.debug('Refinement finished: %s, lb=%s, ub=%s' % (report.status, report.lb, report.ub))
        return report
