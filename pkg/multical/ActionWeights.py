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
from .BaseAction import BaseAction
from .design.InteractionDesign import InteractionDesign
from .solver.CalibrationSpec import CalibrationSpec
from .solver.DualSolver import DualSolver
from .solver.KKTReport import KKTReport
from .estimators.ImbalanceReport import ImbalanceReport
from .SummaryRenderer import SummaryRenderer
from .Tools import JSONTools, CSVTools
from .Enums import ExitCode, EstimationMethod

_log = logging.getLogger(__spec__.name)

class ActionWeights(BaseAction):
	def _calibration_spec(self, schema, cell_table):
		max_order = min(self._args.order, schema.d) if (self._args.order is not None) else min(2, schema.d)
		(lower, upper) = self._args.bounds
		return CalibrationSpec(max_order, lambdas = self._lambdas(max_order, cell_table.N), lower = lower, upper = upper, **self._tolerances())

	def execute(self):
		schema = self._load_schema()
		cell_table = self._load_cell_table(schema)
		spec = self._calibration_spec(schema, cell_table)
		design = InteractionDesign(schema, spec.max_order)
		_log.info("Calibrating %s against %s", cell_table, spec)

		method = EstimationMethod.Raking if (spec.max_order == 1) else EstimationMethod.Multilevel
		solver = DualSolver(design, cell_table, spec)
		dual = solver.solve()
		solution = solver.recover_primal(dual, method = method)
		kkt = KKTReport.evaluate(solution, design, cell_table, spec)
		imbalance = ImbalanceReport.evaluate(solution, design)
		occupancy = cell_table.occupancy()

		self._output_dir()
		CSVTools.write(solution.to_dataframe(), self._output_file("weights.csv"))
		JSONTools.write({
			"solution":		solution,
			"kkt":			kkt,
			"imbalance":	imbalance,
			"occupancy":	occupancy,
			"design":		design,
		}, self._output_file("diagnostics.json"))
		SummaryRenderer().write(self._output_file("summary.txt"), "weights.txt", table = cell_table, occupancy = occupancy, solution = solution, spec = spec, imbalance = imbalance, imbalance_orders = list(design.orders), kkt = kkt)

		if not solution.converged:
			return ExitCode.NotConverged
		return ExitCode.Success
