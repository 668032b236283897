"""
Unit test the exhaustive oracle, the exact cover reduction and the
rounding property checks
"""

import unittest

import numpy as np

import instance_mock
from rsrptools import health
from rsrptools.discretization import Discretization, build_discretization
from rsrptools.oracle import (EpcpGraph, ExactCoverInstance, Oracle, OracleError, brute_force_exact_cover,
                              random_exact_cover)
from rsrptools.seeg import round_state

SEVEN_ELEMENT_SUBSETS = [('a', 'd', 'g'), ('a', 'd'), ('d', 'e', 'g'), ('c', 'e', 'f'), ('b', 'c', 'f', 'g'), ('b', 'g')]


class EnumerationTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()
        cls.model = health.get_model('normal')

    def test_init(self):
        oracle = Oracle(self.rsrp)
        assert oracle.flows is self.rsrp.flows

    def test_empty_timetable(self):
        instance = instance_mock.build(instance_mock.two_location_document(trips=[]))
        result = self.rsrp.oracle.enumerate_optimal(instance)
        assert result.feasible
        assert result.optimum == 0
        assert result.assignment == []

    def test_single_trip(self):
        instance = instance_mock.build(instance_mock.two_location_document())
        result = self.rsrp.oracle.enumerate_optimal(instance)
        expected = 50.0 + 10.0 + 100.0 * self.model.failure_probability((0.5, 0.5)) + 10.0
        self.assertAlmostEqual(result.optimum, expected)
        assert [r.trip_ids for r in result.assignment] == [['t1']]
        assert result.count > 0

    def test_infeasible(self):
        instance = instance_mock.build(instance_mock.two_location_document(vehicles=[]))
        result = self.rsrp.oracle.enumerate_optimal(instance)
        assert not result.feasible
        assert result.optimum is None

    def test_deadhead_to_first_departure(self):
        trips = [instance_mock.one_trip('t1', 10, 20, 'B', 'A')]
        instance = instance_mock.build(instance_mock.two_location_document(trips=trips))
        result = self.rsrp.oracle.enumerate_optimal(instance)
        expected = 50.0 + 10.0 + 10.0 + 100.0 * self.model.failure_probability((0.5, 0.5))
        self.assertAlmostEqual(result.optimum, expected)
        kinds = [s.service_kind for s in result.assignment[0].services]
        assert kinds == ['art_start', 'deadhead', 'trip', 'art_end']
        seeg = self.rsrp.graphs.build_ceeg(instance)
        solution = self.rsrp.flows.solve(self.rsrp.flows.build_model(seeg, instance))
        self.assertAlmostEqual(solution.objective, expected, places=6)

    def test_unreachable_departure(self):
        trips = [instance_mock.one_trip('t1', 3, 20, 'B', 'A')]
        instance = instance_mock.build(instance_mock.two_location_document(trips=trips))
        assert not self.rsrp.oracle.enumerate_optimal(instance).feasible

    def test_degrading_wait(self):
        document = instance_mock.two_location_document()
        document['wait_degradation'] = 'halve'
        instance = instance_mock.build(document)
        self.assertRaises(OracleError, self.rsrp.oracle.enumerate_optimal, instance)

    def test_guard(self):
        trips = [instance_mock.one_trip('t%d' % i, 10 * i + 1, 10 * i + 5, 'A', 'B') for i in range(8)]
        instance = instance_mock.build(instance_mock.two_location_document(trips=trips))
        self.assertRaises(OracleError, self.rsrp.oracle.enumerate_optimal, instance)

    def test_ceeg_matches_enumeration(self):
        instance = instance_mock.build(instance_mock.three_trip_document())
        seeg = self.rsrp.graphs.build_ceeg(instance)
        solution = self.rsrp.flows.solve(self.rsrp.flows.build_model(seeg, instance))
        result = self.rsrp.oracle.enumerate_optimal(instance)
        assert solution.status == 'optimal'
        self.assertAlmostEqual(solution.objective, result.optimum, places=6)

    def test_grid_optimum_is_lower_bound(self):
        instance = instance_mock.build(instance_mock.three_trip_document())
        optimum = self.rsrp.oracle.enumerate_optimal(instance).optimum
        for level in range(3):
            seeg = self.rsrp.graphs.build_seeg(instance, Discretization(level, 2, 2))
            solution = self.rsrp.flows.solve(self.rsrp.flows.build_model(seeg, instance))
            assert solution.objective <= optimum + 1e-6, level


class ExactCoverTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()
        cls.cover = ExactCoverInstance('abcdefg', SEVEN_ELEMENT_SUBSETS, [3, 1, 4, 2, 5, 1])

    def test_reduction_graph(self):
        graph = self.rsrp.oracle.exact_cover_to_epcp(self.cover)
        assert len(graph.nodes) == 25
        assert len(graph.arcs) == 29
        assert [len(graph.groups[e]) for e in 'abcdefg'] == [2, 2, 2, 3, 2, 2, 4]

    def test_reduction_optimum(self):
        graph = EpcpGraph(self.cover)
        result = self.rsrp.oracle.solve_epcp(graph)
        reference = brute_force_exact_cover(self.cover)
        assert reference.assignment == [1, 3, 5]
        assert reference.count == 2 ** 6
        assert result.assignment == reference.assignment
        self.assertAlmostEqual(result.optimum, 4.0)

    def test_single_subset(self):
        cover = ExactCoverInstance('xyz', [('x', 'y', 'z')], [7.5])
        result = self.rsrp.oracle.solve_epcp(EpcpGraph(cover))
        self.assertAlmostEqual(result.optimum, 7.5)
        assert result.assignment == [0]

    def test_no_cover(self):
        cover = ExactCoverInstance('xyz', [('x', 'y'), ('y', 'z')])
        assert not brute_force_exact_cover(cover).feasible
        assert not self.rsrp.oracle.solve_epcp(EpcpGraph(cover)).feasible

    def test_random_instances(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            cover = random_exact_cover(rng, max_elements=6, max_subsets=7)
            reference = brute_force_exact_cover(cover)
            result = self.rsrp.oracle.solve_epcp(EpcpGraph(cover))
            assert result.feasible == reference.feasible
            if reference.feasible:
                self.assertAlmostEqual(result.optimum, reference.optimum)

    def test_invalid_cover(self):
        self.assertRaises(OracleError, ExactCoverInstance, 'ab', [('a', 'c')])
        self.assertRaises(OracleError, ExactCoverInstance, 'ab', [()])
        self.assertRaises(OracleError, ExactCoverInstance, 'ab', [('a',)], [1.0, 2.0])


class PropagationTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()

    def test_identity_degradations(self):
        document = instance_mock.shuttle_document()
        document['degradations'][0]['slope'] = [1.0, 1.0]
        instance = instance_mock.build(document)
        grid = Discretization(1, 2, 2)
        report = self.rsrp.oracle.check_error_propagation(instance, grid, trials=50)
        assert report.passed
        assert report.min_slack >= 0

    def test_expanding_degradation(self):
        document = instance_mock.shuttle_document()
        document['degradations'][0] = {'id': 'halve', 'slope': [1.5, 1.0], 'offset': [-0.2, 0.0],
                                       'lipschitz': 1.5}
        instance = instance_mock.build(document)
        report = self.rsrp.oracle.check_error_propagation(instance, Discretization(2, 2, 2), trials=100)
        assert report.passed
        assert report.max_ratio < 1.0 + 1e-9

    def test_with_maintenance(self):
        instance = instance_mock.build(instance_mock.shuttle_document(workshop=True))
        report = self.rsrp.oracle.check_error_propagation(instance, Discretization(1, 2, 2), trials=100, seed=3)
        assert report.passed
        assert report.steps > 100

    def test_grid_values_are_exact(self):
        document = instance_mock.shuttle_document()
        document['degradations'][0]['slope'] = [1.0, 1.0]
        instance = instance_mock.build(document)
        report = self.rsrp.oracle.check_underestimation(instance, Discretization(0, 2, 2), trials=20)
        assert report.passed
        assert report.min_slack == 0

    def test_normal_underestimation(self):
        instance = instance_mock.build(instance_mock.shuttle_document(workshop=True))
        report = self.rsrp.oracle.check_underestimation(instance, Discretization(1, 2, 2), trials=1000)
        assert report.passed
        assert report.steps >= 2000

    def test_weibull_underestimation(self):
        document = instance_mock.shuttle_document('weibull', workshop=True)
        document['trips'][0]['mileage'] = 0.5
        document['trips'][1]['mileage'] = 0.8
        instance = instance_mock.build(document)
        model = health.get_model('weibull')
        grid = build_discretization(1, 2, model, instance.alphas, instance.parameter_space, instance.anchor_points)
        report = self.rsrp.oracle.check_underestimation(instance, grid, trials=1000)
        assert report.passed

    def test_mileages_on_both_sides_of_lambda(self):
        # lambda = 1.1 lies between the mileages, so kappa must be kept exactly
        document = instance_mock.shuttle_document('weibull')
        document['trips'][0]['mileage'] = 1.0
        document['trips'][1]['mileage'] = 2.0
        document['vehicles'][0]['initial_params'] = [1.7, 1.1]
        instance = instance_mock.build(document)
        model = health.get_model('weibull')
        space = instance.parameter_space
        optimum = self.rsrp.oracle.enumerate_optimal(instance).optimum
        for level in range(4):
            grid = build_discretization(level, 2, model, instance.alphas, space, instance.anchor_points)
            assert round_state(grid, model, (1.7, 1.1), instance.alphas, space).sound
            report = self.rsrp.oracle.check_underestimation(instance, grid, trials=200, seed=1)
            assert report.passed, (level, report.witness)
            seeg = self.rsrp.graphs.build_seeg(instance, grid, model)
            solution = self.rsrp.flows.solve(self.rsrp.flows.build_model(seeg, instance))
            assert solution.objective <= optimum + 1e-6, level
