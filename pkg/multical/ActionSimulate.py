#	multical - Multilevel calibration weighting and doubly robust estimation
#	Copyright (C) 2024-2026 The multical developers
#
#	This file is part of multical.
#
#	multical is free software; you can redistribute it and/or modify
#	it under the terms of the GNU General Public License as published by
#	the Free Software Foundation; this program is ONLY licensed under
#	version 3 of the License, later versions are explicitly excluded.
#
#	multical is distributed in the hope that it will be useful,
#	but WITHOUT ANY WARRANTY; without even the implied warranty of
#	MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#	GNU General Public License for more details.
#
#	You should have received a copy of the GNU General Public License
#	along with multical; if not, write to the Free Software
#	Foundation, Inc., 59 Temple Place, Suite 330, Boston, MA  02111-1307  USA

import logging
import numpy as np
from .BaseAction import BaseAction
from .simlab.Presets import Presets
from .simlab.SimulationConfig import SimulationConfig
from .simlab.Replications import Replications
from .simlab.Oracles import Oracles
from .estimators.ImbalanceReport import ImbalanceReport
from .SummaryRenderer import SummaryRenderer
from .Tools import JSONTools, CSVTools
from .Enums import ExitCode
from .Exceptions import UsageException, MultiCalException

_log = logging.getLogger(__spec__.name)

class ActionSimulate(BaseAction):
	def _simulation_config(self):
		if (self._args.preset is None) == (self._args.config is None):
			raise UsageException("Give exactly one of --preset or --config.")
		if self._args.preset is not None:
			config = Presets.get(self._args.preset)
		else:
			config = SimulationConfig.load_from_file(self._args.config)
		return config.with_overrides(reps = self._args.reps, seed = self._args.seed)

	def execute(self):
		config = self._simulation_config()
		population = config.build_population()
		suite = config.build_suite()
		result = Replications.run_replications(population, suite, config.reps, config.seed, jobs = self._args.jobs)

		record = {
			"config":	config,
			"result":	result,
			"population": {
				"N":				population.N,
				"mean":				population.mean,
				"min_propensity":	population.min_propensity,
				"oracle_variance":	population.oracle_variance(),
			},
		}
		if self._args.balance_check > 0:
			report = Oracles.balance_bound_check(population, draws = self._args.balance_check, seed = config.seed)
			record["balance_bound"] = report
			if not report.holds:
				_log.error("Balance bound violated on %d of %d draws.", report.violations, len(report.draws))
		if self._args.regression:
			coefficients = Oracles.population_regression(population, suite.design)
			regression = { "order_norms": Oracles.order_norms(suite.design, coefficients) }
			context = suite.context(population, population.draw_respondents(np.random.default_rng(config.seed)))
			try:
				imbalance = ImbalanceReport.evaluate(context.weights("multilevel"), suite.design)
				regression["bias_split"] = { str(k): split for (k, split) in imbalance.bias_split(coefficients).items() }
			except MultiCalException as e:
				_log.warning("No bias split, multilevel weights failed on the reference draw: %s", e)
			record["population_regression"] = regression
		self._output_dir()
		CSVTools.write(result.to_dataframe(), self._output_file("results.csv"))
		JSONTools.write(record, self._output_file("simulation.json"))
		SummaryRenderer().write(self._output_file("summary.txt"), "simulate.txt", result = result, population = population)
		return ExitCode.Success
