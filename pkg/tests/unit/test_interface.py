"""
Unit test the Interface and its clients
"""

import json
import logging
import os
import shutil
import tempfile
import unittest

import instance_mock
from rsrptools import Interface
from rsrptools.config import Config
from rsrptools.flow import FlowSolver
from rsrptools.oracle import Oracle
from rsrptools.refinement import Refinement
from rsrptools.seeg import GraphBuilder


class InterfaceTests(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_init(self):
        rsrp = instance_mock.get_mock_interface()
        assert isinstance(rsrp, Interface)
        assert isinstance(rsrp.graphs, GraphBuilder)
        assert isinstance(rsrp.flows, FlowSolver)
        assert isinstance(rsrp.refinement, Refinement)
        assert isinstance(rsrp.oracle, Oracle)

    def test_shared_logger(self):
        rsrp = Interface(config=Config(log_level='debug'))
        assert rsrp.logger.name == 'rsrptools'
        assert rsrp.logger.level == logging.DEBUG
        assert rsrp.flows.logger is rsrp.logger
        count = len(rsrp.logger.handlers)
        Interface(config=Config())
        assert len(rsrp.logger.handlers) == count

    def test_overrides(self):
        config_file = os.path.join(self.directory, 'rsrp.ini')
        with open(config_file, 'w') as f:
            f.write('[rsrp]\nk = 3\nmax_iterations = 2\n')
        rsrp = Interface(config_file=config_file, max_iterations=5, seed=None)
        assert rsrp.config.k == 3
        assert rsrp.config.max_iterations == 5
        assert rsrp.refinement.config is rsrp.config

    def test_solve_and_save(self):
        rsrp = instance_mock.get_mock_interface()
        path = instance_mock.write_document(instance_mock.shuttle_document(), self.directory)
        report = rsrp.solve(path, max_iterations=3)
        assert report.best_plan is not None
        solution = os.path.join(self.directory, 'solution.json')
        report_path = os.path.join(self.directory, 'report.json')
        rsrp.save(report, rsrp.load(path), solution, report_path)
        with open(solution) as f:
            assert json.load(f)['objective'] == report.best_plan.objective
        with open(report_path) as f:
            assert json.load(f)['status'] == report.status
