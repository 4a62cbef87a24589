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
import pandas
from .BaseAction import BaseAction
from .design.InteractionDesign import InteractionDesign
from .solver.CalibrationSpec import CalibrationSpec
from .solver.DualSolver import DualSolver
from .solver.WeightSolution import WeightSolution
from .estimators.Weighting import Weighting
from .estimators.ModelAssisted import ModelAssisted
from .outcomes.BaseOutcomeModel import BaseOutcomeModel
from .SummaryRenderer import SummaryRenderer
from .Tools import JSONTools, CSVTools
from .Enums import ExitCode, EstimationMethod
from .Exceptions import IngestionException, MissingOutcomeException, UsageException

_log = logging.getLogger(__spec__.name)

class ActionEstimate(BaseAction):
	def __init__(self, cmd, args):
		super().__init__(cmd, args)
		self._weights = { }
		self._not_converged = False

	def _max_order(self, schema):
		return min(self._args.order, schema.d) if (self._args.order is not None) else min(2, schema.d)

	def _read_weights(self, cell_table):
		try:
			frame = pandas.read_csv(self._args.weights)
			cells = frame["cell"].to_numpy(dtype = np.int64)
			gamma = frame["gamma"].to_numpy(dtype = float)
		except (KeyError, ValueError, pandas.errors.ParserError) as e:
			raise IngestionException(f"{self._args.weights}: need numeric 'cell' and 'gamma' columns ({e})") from e
		if np.any((cells < 0) | (cells >= cell_table.J)):
			raise IngestionException(f"{self._args.weights}: cell index out of range")
		full = np.zeros(cell_table.J)
		full[cells] = gamma
		return WeightSolution(cell_table, full, method = EstimationMethod.Weighted)

	def _base_weights(self, base, design, cell_table):
		if base not in self._weights:
			(lower, upper) = self._args.bounds
			if base == "weighted":
				if self._args.weights is None:
					raise UsageException("Method 'weighted' needs a weights file (--weights).")
				solution = self._read_weights(cell_table)
			elif base == "poststrat":
				solution = Weighting.poststrat_weights(cell_table)
			else:
				max_order = 1 if (base == "raking") else self._max_order(design.schema)
				spec = CalibrationSpec(max_order, lambdas = self._lambdas(max_order, cell_table.N), lower = lower, upper = upper, **self._tolerances())
				solution = DualSolver.calibrate(design, cell_table, spec, method = EstimationMethod(base))
				if not solution.converged:
					self._not_converged = True
			self._weights[base] = solution
		return self._weights[base]

	def _model_options(self):
		name = self._args.outcome_model
		options = { }
		if name in ("ridge", "map"):
			if self._args.model_order is not None:
				options["order"] = self._args.model_order
			if (name == "ridge") and (self._args.penalty is not None):
				options["penalty"] = self._args.penalty
			if (name == "ridge"):
				options["seed"] = self._args.seed
		elif name == "trees":
			options.update({ "trees": self._args.trees, "depth": self._args.depth, "seed": self._args.seed })
		elif (name == "constant") and (self._args.constant is not None):
			options["value"] = self._args.constant
		return options

	def execute(self):
		schema = self._load_schema()
		cell_table = self._load_cell_table(schema)
		if not cell_table.has_outcomes:
			raise MissingOutcomeException(f"{self._args.data}: estimation needs an 'outcome' column.")
		alpha = self._alpha()
		model_order = self._args.model_order if ((self._args.model_order is not None) and (self._args.outcome_model in ("ridge", "map"))) else 1
		design = InteractionDesign(schema, max(self._max_order(schema), min(model_order, schema.d)))
		if model_order > schema.d:
			raise UsageException(f"Model order {model_order} exceeds the {schema.d} covariates of the schema.")

		methods = self._args.method or [ "drp" ]
		model = None
		if any(method in ("mrp", "drp") for method in methods):
			model = BaseOutcomeModel.fit_by_name(self._args.outcome_model, design, cell_table, **self._model_options())

		reports = [ ]
		for method in methods:
			if method == "mrp":
				reports.append(ModelAssisted.mrp_estimate(model, label = "mrp:%s" % (model.name)))
			elif method == "drp":
				weights = self._base_weights(self._args.drp_base, design, cell_table)
				reports.append(ModelAssisted.drp_estimate(model, weights, alpha = alpha, label = "drp:%s:%s" % (self._args.drp_base, model.name)))
			else:
				weights = self._base_weights(method, design, cell_table)
				reports.append(Weighting.weighted_mean(weights, alpha = alpha, label = method))
		for report in reports:
			_log.info("%s: %.12g", report.label, report.estimate)

		self._output_dir()
		JSONTools.write({
			"alpha":		alpha,
			"estimates":	reports,
			"weights":		{ base: solution for (base, solution) in self._weights.items() },
		}, self._output_file("estimates.json"))
		if model is not None:
			CSVTools.write(model.predictions_dataframe(), self._output_file("predictions.csv"))
			JSONTools.write(model, self._output_file("model.json"))
		SummaryRenderer().write(self._output_file("summary.txt"), "estimates.txt", table = cell_table, model = model, reports = reports)
		return ExitCode.NotConverged if self._not_converged else ExitCode.Success
