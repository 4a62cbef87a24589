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

import numpy as np
from multical.design.CovariateSchema import CovariateSchema
from multical.design.CellTable import CellTable
from multical.design.InteractionDesign import InteractionDesign

class Instances():
	"""Small random calibration instances for tests."""

	@classmethod
	def cell_table(cls, levels, seed, occupied = True, outcomes = True):
		rng = np.random.default_rng(seed)
		schema = CovariateSchema.from_levels(levels)
		J = schema.cell_count
		pop_counts = rng.integers(5, 40, size = J).astype(float)
		resp_counts = rng.integers(1, 9, size = J).astype(float)
		if not occupied:
			resp_counts[rng.random(J) < 0.25] = 0
			resp_counts[0] = max(resp_counts[0], 1)
		if not outcomes:
			return CellTable(schema, pop_counts, resp_counts)
		successes = rng.binomial(resp_counts.astype(int), 0.3 + 0.4 * rng.random(J)).astype(float)
		return CellTable(schema, pop_counts, resp_counts, successes, successes)

	@classmethod
	def instance(cls, levels, seed, max_order = None, **kwargs):
		cell_table = cls.cell_table(levels, seed, **kwargs)
		design = InteractionDesign.build(cell_table.schema, max_order)
		return (design, cell_table)

	@classmethod
	def two_cells(cls):
		"""One binary covariate, N^P = (60, 40), n = (10, 10), Ybar = (1, 0)."""
		schema = CovariateSchema.from_levels([ 2 ])
		return CellTable(schema, [ 60, 40 ], [ 10, 10 ], [ 10, 0 ], [ 10, 0 ])
