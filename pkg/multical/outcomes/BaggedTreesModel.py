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

from multical.outcomes.BaseOutcomeModel import BaseOutcomeModel
from multical.outcomes.SmootherModel import SmootherModel
from multical.outcomes.TreeEnsemble import TreeEnsemble
from multical.Enums import OutcomeModelKind

@BaseOutcomeModel.register
class BaggedTreesModel(BaseOutcomeModel):
	"""Bagged trees on respondent cell means. A cell's prediction is the
	average over trees of the respondent mean of its leaf."""
	_NAME = "trees"
	_KIND = OutcomeModelKind.BaggedTrees

	def __init__(self, cell_table, ensemble, parameters):
		super().__init__(cell_table, parameters = parameters)
		self._ensemble = ensemble

	@property
	def ensemble(self):
		return self._ensemble

	@classmethod
	def fit(cls, design, cell_table, trees = 100, depth = 4, seed = 0, bootstrap = True, min_leaf_weight = 1.0):
		cls._require_outcomes(cell_table)
		support = cell_table.support
		ensemble = TreeEnsemble.fit(cell_table.schema, support, cell_table.cell_means()[support], cell_table.resp_counts[support], trees = trees, depth = depth, seed = seed, bootstrap = bootstrap, min_leaf_weight = min_leaf_weight)
		parameters = {
			"trees":			trees,
			"depth":			depth,
			"seed":				seed,
			"bootstrap":		bootstrap,
			"min_leaf_weight":	min_leaf_weight,
		}
		return cls(cell_table, ensemble, parameters)

	def _predict_cells(self):
		return self._ensemble.leaf_ratio(self._cell_table.resp_sums, self._cell_table.resp_counts)

	def smoother(self):
		return SmootherModel.from_matrix(self._cell_table, self._ensemble.smoother(self._cell_table.resp_counts), description = "trees")

	def adjusted_weights(self, weights):
		return self.smoother().adjusted_weights(weights)

	def _fitted_json(self):
		return { "ensemble": self._ensemble.to_json() }
