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
from .design.InteractionDesign import InteractionDesign
from .estimators.TradeoffCurve import TradeoffCurve
from .SummaryRenderer import SummaryRenderer
from .Tools import JSONTools, CSVTools
from .Enums import ExitCode
from .Exceptions import UsageException

_log = logging.getLogger(__spec__.name)

class ActionSweep(BaseAction):
	def execute(self):
		schema = self._load_schema()
		cell_table = self._load_cell_table(schema)
		max_order = min(self._args.order, schema.d) if (self._args.order is not None) else min(2, schema.d)
		if max_order < 2:
			raise UsageException("A sweep needs an interaction order of at least 2 and at least two covariates.")
		if self._args.grid is None:
			grid = TradeoffCurve.default_grid(cell_table)
		elif self._args.solver_scale:
			grid = np.asarray(self._args.grid)
		else:
			grid = np.asarray(self._args.grid) / cell_table.N
		(lower, upper) = self._args.bounds
		design = InteractionDesign(schema, max_order)
		curve = TradeoffCurve.sweep(design, cell_table, grid = grid, lower = lower, upper = upper, share = self._args.share, **self._tolerances())

		self._output_dir()
		CSVTools.write(curve.to_dataframe(), self._output_file("tradeoff.csv"))
		JSONTools.write(curve, self._output_file("selection.json"))
		SummaryRenderer().write(self._output_file("summary.txt"), "sweep.txt", curve = curve)
		if curve.selected is None:
			_log.error("No grid point converged; nothing selected.")
			return ExitCode.NotConverged
		_log.info("Selected lambda = %.12g", curve.selected.lambda_)
		return ExitCode.Success
