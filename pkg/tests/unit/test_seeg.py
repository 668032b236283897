"""
Unit test state-expanded event graph construction
"""

import os
import shutil
import tempfile
import unittest

import networkx as nx

import instance_mock
from rsrptools import health
from rsrptools.discretization import Discretization, build_discretization
from rsrptools.events import service_degradation
from rsrptools.seeg import GraphBuilder, GraphError, Node, Seeg, prune


class SeegTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()
        cls.model = health.get_model('normal')

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_init(self):
        builder = GraphBuilder(self.rsrp)
        assert isinstance(builder, GraphBuilder)
        assert builder.config is self.rsrp.config

    def test_empty_timetable(self):
        instance = instance_mock.build(instance_mock.two_location_document(trips=[]))
        seeg = self.rsrp.graphs.build_seeg(instance, Discretization(0, 2, 2))
        assert seeg.arcs_of_kind('trip') == []
        assert set(node.kind for node in seeg.nodes) <= {'artificial', 'start', 'end'}
        assert list(seeg.sources) == ['A']
        assert len(seeg.arcs_of_kind('art_start')) == 1

    def test_one_trip_pruning(self):
        instance = instance_mock.build(instance_mock.two_location_document())
        grid = Discretization(0, 2, 2)
        full = self.rsrp.graphs.build_seeg(instance, grid, prune_graph=False)
        assert len(full.trip_arcs['t1']) == 4
        pruned = self.rsrp.graphs.build_seeg(instance, grid)
        assert len(pruned.trip_arcs['t1']) == 1
        arc = pruned.arcs[pruned.trip_arcs['t1'][0]]
        assert pruned.nodes[arc.tail].theta == (1.0, 0.5)
        assert len(pruned.nodes) < len(full.nodes)

    def test_pruned_degrees(self):
        instance = instance_mock.build(instance_mock.three_trip_document())
        seeg = self.rsrp.graphs.build_seeg(instance, Discretization(1, 2, 2))
        for i, node in enumerate(seeg.nodes):
            if node.kind != 'artificial':
                assert seeg.in_arcs[i] and seeg.out_arcs[i], node

    def test_head_consistency(self):
        instance = instance_mock.build(instance_mock.shuttle_document(workshop=True))
        grid = Discretization(1, 2, 2)
        seeg = self.rsrp.graphs.build_seeg(instance, grid)
        space = instance.parameter_space
        for arc in seeg.arcs:
            if arc.kind not in ('trip', 'wait', 'deadhead'):
                continue
            tail, head = seeg.nodes[arc.tail], seeg.nodes[arc.head]
            degradation = service_degradation(instance, arc.kind, tail.location, head.location, arc.trip_id)
            exact = degradation.apply(tail.theta, space)
            _, expected = grid.snap(exact, self.model.rounding_signs(exact, instance.alphas), space)
            assert head.theta == expected, arc

    def test_maintenance_heads_reset(self):
        instance = instance_mock.build(instance_mock.shuttle_document(workshop=True))
        seeg = self.rsrp.graphs.build_seeg(instance, Discretization(1, 2, 2))
        resets = [seeg.nodes[seeg.arcs[a].head].theta for a in seeg.arcs_of_kind('maint_in')]
        assert resets
        assert set(resets) == {(1.0, 0.5)}

    def test_arc_costs(self):
        instance = instance_mock.build(instance_mock.three_trip_document())
        seeg = self.rsrp.graphs.build_seeg(instance, Discretization(1, 2, 2))
        for arc in seeg.arcs:
            self.assertAlmostEqual(self.rsrp.graphs.arc_cost(arc, seeg, instance), arc.cost)

    def test_reliability_determinism(self):
        document = instance_mock.two_location_document('weibull')
        document['trips'] = [instance_mock.one_trip('t1', 10, 20, 'A', 'B', 'weibull', mileage=0.5),
                             instance_mock.one_trip('t2', 10, 20, 'A', 'B', 'weibull', mileage=0.8)]
        document['vehicles'].append({'id': 'v2', 'origin': 'A', 'initial_params': [1.0, 0.6]})
        forward = instance_mock.build(document)
        document['trips'].reverse()
        document['vehicles'].reverse()
        backward = instance_mock.build(document)
        model = health.get_model('weibull')
        grids = [build_discretization(1, 2, model, i.alphas, i.parameter_space, i.anchor_points)
                 for i in (forward, backward)]
        first = self.rsrp.graphs.build_seeg(forward, grids[0])
        second = self.rsrp.graphs.build_seeg(backward, grids[1])
        assert self.rsrp.graphs.to_dot(first) == self.rsrp.graphs.to_dot(second)

    def test_statistics(self):
        instance = instance_mock.build(instance_mock.shuttle_document())
        seeg = self.rsrp.graphs.build_seeg(instance, Discretization(1, 2, 2))
        stats = self.rsrp.graphs.statistics(seeg)
        assert stats['nodes'] == len(seeg.nodes)
        assert stats['arcs'] == len(seeg.arcs)
        assert stats['arcs_by_kind']['trip'] == len(seeg.arcs_of_kind('trip'))
        assert sum(stats['nodes_by_kind'].values()) == len(seeg.nodes)
        assert stats['discretization_points'] == 9


class CeegTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()

    def test_no_trips(self):
        instance = instance_mock.build(instance_mock.two_location_document(trips=[]))
        assert self.rsrp.graphs.ceeg_values(instance) == {(1.0, 0.5)}

    def test_two_sequential_trips(self):
        instance = instance_mock.build(instance_mock.shuttle_document())
        values = self.rsrp.graphs.ceeg_values(instance)
        assert len(values) <= 7
        assert values == {(1.0, 0.5), (0.5, 0.5), (0.25, 0.5)}

    def test_cap(self):
        instance = instance_mock.build(instance_mock.shuttle_document())
        with self.assertRaises(GraphError) as context:
            self.rsrp.graphs.ceeg_values(instance, cap=2)
        assert 'CEEG too large' in str(context.exception)

    def test_identity_rounding(self):
        instance = instance_mock.build(instance_mock.shuttle_document(workshop=True))
        seeg = self.rsrp.graphs.build_ceeg(instance)
        values = set(seeg.discretization)
        for node in seeg.nodes:
            if node.theta is not None:
                assert node.theta in values
        assert len(seeg.trip_arcs['t2']) >= 1


class DotTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()
        cls.instance = instance_mock.build(instance_mock.two_location_document())

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_empty_graph(self):
        text = self.rsrp.graphs.to_dot(Seeg())
        assert text.startswith('digraph')
        assert '->' not in text

    def test_one_trip(self):
        seeg = self.rsrp.graphs.build_seeg(self.instance, Discretization(0, 2, 2))
        text = self.rsrp.graphs.to_dot(seeg)
        trip_lines = [line for line in text.splitlines() if 'trip t1' in line]
        assert len(trip_lines) == 1
        cost = 10.0 + 100.0 * health.get_model('normal').failure_probability((1.0, 0.5))
        assert ('%.6f' % cost) in trip_lines[0]

    def test_export_is_deterministic(self):
        grid = Discretization(1, 2, 2)
        paths = []
        for name in ('first.dot', 'second.dot'):
            path = os.path.join(self.directory, name)
            self.rsrp.graphs.export_dot(self.rsrp.graphs.build_seeg(self.instance, grid), path)
            paths.append(path)
        with open(paths[0]) as f, open(paths[1]) as g:
            assert f.read() == g.read()


class GraphTests(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.rsrp = instance_mock.get_mock_interface()

    def test_multigraph(self):
        instance = instance_mock.build(instance_mock.three_trip_document())
        seeg = self.rsrp.graphs.build_seeg(instance, Discretization(1, 2, 2))
        assert isinstance(seeg.graph, nx.MultiDiGraph)
        assert seeg.graph.number_of_nodes() == len(seeg.nodes)
        assert seeg.graph.number_of_edges() == len(seeg.arcs)
        for tail, head, key, data in seeg.graph.edges(keys=True, data=True):
            arc = seeg.arcs[data['id']]
            assert (arc.tail, arc.head) == (tail, head)
            assert key.split(' ')[0] == arc.kind
            if arc.kind == 'trip':
                assert key == 'trip %s' % arc.trip_id
        starts = [key for _, _, key in seeg.graph.out_edges(list(seeg.sources.values()), keys=True)]
        assert sorted(starts) == ['art_start v1', 'art_start v2']

    def test_prune(self):
        graph = nx.MultiDiGraph()
        for name, kind in (('s', 'artificial'), ('a', 'start'), ('b', 'arrival'), ('c', 'arrival'),
                           ('t', 'artificial'), ('u', 'artificial')):
            graph.add_node(name, node=Node(kind, 'A', 0, (), None))
        graph.add_edge('s', 'a', key='art_start v1')
        graph.add_edge('a', 'b', key='wait')
        graph.add_edge('a', 'c', key='wait')
        graph.add_edge('b', 't', key='art_end')
        graph.add_edge('c', 'u', key='wait')
        graph.remove_edge('c', 'u', key='wait')
        prune(graph)
        assert sorted(graph) == ['a', 'b', 's', 't']
        assert graph.number_of_edges() == 3
