"""
Main interface to the rotation planning toolkit.
"""
import logging

from rsrptools.config import Config, load_config
from rsrptools.seeg import GraphBuilder
from rsrptools.flow import FlowSolver
from rsrptools.refinement import Refinement
from rsrptools.oracle import Oracle
from rsrptools.instance import load_instance, save_solution


class Interface(object):

    def __init__(self, config=None, config_file=None, **overrides):
        '''Set up logging and the toolkit clients.

        Args:
            config (Config): Use this configuration instead of reading one.
            config_file (str): Ini file to read when no config is passed.
            overrides: Configuration fields that replace the loaded values.
        '''
        if config is None:
            config = load_config(config_file)
        self.config = config.updated(**overrides) if overrides else config

        # console logging only; handler attached once per process
        self.logger = logging.getLogger('rsrptools')
        level = getattr(logging, self.config.log_level)
        self.logger.setLevel(level)
        if not self.logger.handlers:
            console_handler = logging.StreamHandler()
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)
        for handler in self.logger.handlers:
            handler.setLevel(level)
        self.logger.info('Logger initialized')

        # graph construction
        self.graphs = GraphBuilder(self)

        # arc-flow models and solver backends
        self.flows = FlowSolver(self)

        # refinement driver, uses graphs and flows
        self.refinement = Refinement(self)

        # brute-force references
        self.oracle = Oracle(self)

    def load(self, path):
        return load_instance(path)

    def solve(self, instance, callback=None, **overrides):
        '''Run the refinement loop on an instance or an instance file.

        Returns:
            A RefinementReport; its best_plan holds the best rotations.
        '''
        if isinstance(instance, str):
            instance = load_instance(instance)
        config = self.config.updated(**overrides) if overrides else self.config
        return self.refinement.run(instance, config, callback=callback)

    def save(self, report, instance, solution_path=None, report_path=None):
        if solution_path and report.best_plan is not None:
            save_solution(report.best_plan, solution_path, instance)
        if report_path:
            report.write(report_path)
