"""
End-to-end checks on random tiny instances against exhaustive enumeration.

These run the full refinement loop with CBC many times; they take a few
minutes and are kept out of the unit test run.
"""

import unittest

import numpy as np

from rsrptools import Interface, health
from rsrptools.config import Config
from rsrptools.discretization import build_discretization
from rsrptools.generator import generate_document, generate_instance
from rsrptools.instance import instance_from_dict
from rsrptools.oracle import EpcpGraph, brute_force_exact_cover, random_exact_cover

TINY = {'max_trips': 6, 'max_vehicles': 2, 'max_locations': 3}
LEVELS = range(5)


def quarter_grid_instance(seed):
    '''A normal family instance whose reachable parameters all lie on the level 2 grid of its box.'''
    document = generate_document(seed, max_trips=5, max_vehicles=2, max_locations=3)
    rng = np.random.default_rng(seed)
    document['degradations'] = [
        {'id': 'd0', 'slope': [1.0, 1.0], 'offset': [-0.25, 0.0], 'lipschitz': 1.0},
        {'id': 'd1', 'slope': [1.0, 1.0], 'offset': [-0.5, 0.0], 'lipschitz': 1.0},
    ]
    for vehicle in document['vehicles']:
        vehicle['initial_params'] = [float(rng.choice([0.5, 0.75, 1.0])),
                                     float(rng.choice([0.25, 0.5, 0.75, 1.0, 1.25]))]
    return instance_from_dict(document)


class AcceptanceTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = Interface(config=Config(max_iterations=5, alignment_samples=200, time_limit=300.0))

    def test_bounds_bracket_optimum(self):
        for seed in range(20):
            instance = generate_instance(seed, **TINY)
            reference = self.rsrp.oracle.enumerate_optimal(instance)
            report = self.rsrp.solve(instance)
            if not reference.feasible:
                self.assertEqual(report.status, 'infeasible', seed)
                continue
            self.assertNotEqual(report.status, 'infeasible', seed)
            self.assertLessEqual(report.lb, reference.optimum + 1e-6, seed)
            self.assertGreaterEqual(report.ub, reference.optimum - 1e-6, seed)
            self.assertTrue(report.monotone, seed)

    def test_bounds_per_level(self):
        model = health.get_model('normal')
        for seed in range(20):
            instance = generate_instance(seed, **TINY)
            reference = self.rsrp.oracle.enumerate_optimal(instance)
            if not reference.feasible:
                continue
            previous = None
            for level in LEVELS:
                grid = build_discretization(level, 2, model, instance.alphas, instance.parameter_space,
                                            instance.anchor_points)
                seeg = self.rsrp.graphs.build_seeg(instance, grid, model)
                flow_model = self.rsrp.flows.build_model(seeg, instance)
                integral = self.rsrp.flows.solve(flow_model)
                relaxed = self.rsrp.flows.solve(flow_model, relaxed=True)
                self.assertEqual(integral.status, 'optimal', (seed, level))
                self.assertLessEqual(relaxed.objective, integral.objective + 1e-6, (seed, level))
                self.assertLessEqual(integral.objective, reference.optimum + 1e-6, (seed, level))
                if previous is not None:
                    self.assertLessEqual(previous, integral.objective + 1e-6, (seed, level))
                previous = integral.objective

    def test_ceeg_matches_enumeration(self):
        for seed in range(20):
            instance = generate_instance(seed, **TINY)
            reference = self.rsrp.oracle.enumerate_optimal(instance)
            seeg = self.rsrp.graphs.build_ceeg(instance)
            solution = self.rsrp.flows.solve(self.rsrp.flows.build_model(seeg, instance))
            if not reference.feasible:
                self.assertEqual(solution.status, 'infeasible', seed)
                continue
            self.assertEqual(solution.status, 'optimal', seed)
            self.assertAlmostEqual(solution.objective, reference.optimum, delta=1e-6, msg=seed)

    def test_weibull_lower_bounds(self):
        model = health.get_model('weibull')
        for seed in range(10):
            instance = generate_instance(seed, family='weibull', max_trips=5, max_vehicles=2, max_locations=3)
            reference = self.rsrp.oracle.enumerate_optimal(instance)
            if not reference.feasible:
                continue
            for level in range(4):
                grid = build_discretization(level, 2, model, instance.alphas, instance.parameter_space,
                                            instance.anchor_points)
                seeg = self.rsrp.graphs.build_seeg(instance, grid, model)
                solution = self.rsrp.flows.solve(self.rsrp.flows.build_model(seeg, instance))
                self.assertLessEqual(solution.objective, reference.optimum + 1e-6, (seed, level))

    def test_convergence_on_grid_values(self):
        rsrp = Interface(config=Config(max_iterations=3, alignment_samples=200, time_limit=300.0, tolerance=1e-6))
        checked = 0
        seed = 0
        while checked < 5:
            instance = quarter_grid_instance(seed)
            seed += 1
            reference = rsrp.oracle.enumerate_optimal(instance)
            if not instance.trips or not reference.feasible:
                continue
            checked += 1
            report = rsrp.solve(instance)
            self.assertEqual(report.status, 'converged', seed - 1)
            self.assertLessEqual(len(report.iterations), 3)
            self.assertAlmostEqual(report.lb, reference.optimum, delta=1e-6)
            self.assertAlmostEqual(report.ub, reference.optimum, delta=1e-6)

    def test_convergence(self):
        converged = 0
        for seed in range(20):
            report = self.rsrp.solve(generate_instance(seed, max_trips=3, max_vehicles=2, max_locations=2))
            if report.status == 'converged':
                converged += 1
                self.assertAlmostEqual(report.lb, report.ub, delta=self.rsrp.config.gap_abs +
                                       self.rsrp.config.gap_rel * abs(report.ub) + 1e-6)
        self.assertGreater(converged, 0)

    def test_exact_cover_reduction(self):
        rng = np.random.default_rng(2016)
        for _ in range(50):
            cover = random_exact_cover(rng)
            reference = brute_force_exact_cover(cover)
            result = self.rsrp.oracle.solve_epcp(EpcpGraph(cover))
            self.assertEqual(result.feasible, reference.feasible)
            if reference.feasible:
                self.assertAlmostEqual(result.optimum, reference.optimum)

    def test_deterministic(self):
        instance = generate_instance(9, max_trips=5, max_vehicles=2, max_locations=3)
        first = self.rsrp.solve(instance)
        second = self.rsrp.solve(instance)
        self.assertEqual(first.to_json(), second.to_json())
        grid = build_discretization(2, 2, health.get_model('normal'), instance.alphas, instance.parameter_space)
        dots = [self.rsrp.graphs.to_dot(self.rsrp.graphs.build_seeg(instance, grid)) for _ in range(2)]
        self.assertEqual(dots[0], dots[1])
