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

import math
import logging
import numpy as np
from multical.estimators.EstimateReport import EstimateReport
from multical.solver.WeightSolution import WeightSolution
from multical.Enums import EstimationMethod
from multical.Exceptions import InfeasibleCalibrationException, MissingOutcomeException

_log = logging.getLogger(__spec__.name)

class Weighting():
	@classmethod
	def _require_outcomes(cls, cell_table):
		if not cell_table.has_outcomes:
			raise MissingOutcomeException("Estimation needs respondent outcomes.")

	@classmethod
	def weighted_sum(cls, weights, values):
		"""(1/N) sum_s n_s gamma(s) values_s over respondent cells."""
		support = weights.support
		return math.fsum(weights.weighted_counts[support] * values[support]) / weights.cell_table.N

	@classmethod
	def residual_variance(cls, weights, centers):
		"""(1/N^2) sum_i gamma(S_i)^2 (Y_i - centers[S_i])^2 from within-cell moments."""
		cell_table = weights.cell_table
		if not cell_table.has_second_moments:
			return None
		support = weights.support
		ss = cell_table.within_cell_sum_squares(centers)
		return math.fsum(weights.gamma[support] ** 2 * ss[support]) / cell_table.N ** 2

	@classmethod
	def weighted_mean(cls, weights, alpha = 0.05, label = None):
		cell_table = weights.cell_table
		cls._require_outcomes(cell_table)
		means = cell_table.cell_means()
		estimate = cls.weighted_sum(weights, means)
		variance = cls.residual_variance(weights, means)
		return EstimateReport(weights.method, estimate, variance = variance, alpha = alpha, n_eff = weights.n_eff, design_effect = weights.design_effect, label = label)

	@classmethod
	def poststrat_weights(cls, cell_table):
		empty = cell_table.empty_populated_cells()
		if len(empty) > 0:
			schema = cell_table.schema
			shown = "; ".join("/".join(schema.level_labels_of(schema.decode_cell(cell).levels)) for cell in empty[:10])
			more = "" if (len(empty) <= 10) else " and %d more" % (len(empty) - 10)
			missing = cell_table.pop_counts[empty].sum() / cell_table.N
			raise InfeasibleCalibrationException(f"{len(empty)} populated cell(s) without respondents ({100 * missing:.2f}% of the population): {shown}{more}")
		n = cell_table.resp_counts
		gamma = np.divide(cell_table.pop_counts, n, out = np.zeros_like(n), where = n > 0)
		return WeightSolution(cell_table, gamma, method = EstimationMethod.Poststratification)

	@classmethod
	def collapsed_poststrat_weights(cls, cell_table, mappings):
		"""Post-stratifies on coarsened levels and hands the coarse weights back
		to the fine cells."""
		(coarse_schema, cell_map) = cell_table.schema.collapse(mappings)
		coarse = cls.poststrat_weights(cell_table.collapse(coarse_schema, cell_map))
		_log.debug("Collapsed %d cells into %d for post-stratification", cell_table.J, coarse_schema.cell_count)
		return WeightSolution(cell_table, coarse.gamma[cell_map], method = EstimationMethod.Poststratification)

	@classmethod
	def uniform_weights(cls, cell_table):
		gamma = np.where(cell_table.resp_counts > 0, cell_table.N / cell_table.n, 0.0)
		return WeightSolution(cell_table, gamma, method = EstimationMethod.Weighted)

	@classmethod
	def inverse_propensity_weights(cls, cell_table, propensity):
		propensity = np.asarray(propensity, dtype = float)
		gamma = np.divide(1.0, propensity, out = np.zeros_like(propensity), where = (cell_table.resp_counts > 0) & (propensity > 0))
		return WeightSolution(cell_table, gamma, method = EstimationMethod.OracleHT)

	@classmethod
	def effective_sample_size(cls, weights):
		return (weights.n_eff, weights.design_effect)
