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
import collections
import numpy as np
from multical.Exceptions import EstimationException

class ErrorDecomposition():
	"""Exact splits of an estimation error into an imbalance term and an
	idiosyncratic term, given the true cell means of the population."""
	Result = collections.namedtuple("Result", [ "error", "imbalance_term", "idiosyncratic_term", "residual" ])

	@classmethod
	def _truth(cls, weights, true_cell_means):
		cell_table = weights.cell_table
		true_cell_means = np.asarray(true_cell_means, dtype = float)
		needed = np.flatnonzero((cell_table.pop_counts > 0) | (cell_table.resp_counts > 0))
		if not np.all(np.isfinite(true_cell_means[needed])):
			raise EstimationException("True cell means must be known on every populated or responding cell.")
		mu = np.zeros(cell_table.J)
		mu[needed] = true_cell_means[needed]
		return (mu, math.fsum(cell_table.pop_counts[needed] * mu[needed]) / cell_table.N)

	@classmethod
	def _combine(cls, estimate, truth, imbalance_term, idiosyncratic_term):
		error = estimate - truth
		return cls.Result(error = error, imbalance_term = imbalance_term, idiosyncratic_term = idiosyncratic_term, residual = error - imbalance_term - idiosyncratic_term)

	@classmethod
	def weighting(cls, weights, true_cell_means):
		"""mu_hat(gamma) - mu = (1/N) sum (n gamma - N^P) mu_s + (1/N) sum n gamma eps_bar_s"""
		cell_table = weights.cell_table
		(mu, truth) = cls._truth(weights, true_cell_means)
		support = weights.support
		N = cell_table.N
		estimate = math.fsum(weights.weighted_counts[support] * cell_table.cell_means()[support]) / N
		imbalance_term = math.fsum(weights.cell_imbalance() * mu) / N
		eps_bar = cell_table.cell_means()[support] - mu[support]
		idiosyncratic_term = math.fsum(weights.weighted_counts[support] * eps_bar) / N
		return cls._combine(estimate, truth, imbalance_term, idiosyncratic_term)

	@classmethod
	def drp(cls, model, weights, true_cell_means, drp_estimate):
		"""mu_hat_drp - mu = (1/N) sum (n gamma - N^P)(mu_s - mu_hat_s) + (1/N) sum n gamma eps_bar_s"""
		cell_table = weights.cell_table
		(mu, truth) = cls._truth(weights, true_cell_means)
		support = weights.support
		N = cell_table.N
		imbalance = weights.cell_imbalance()
		cells = np.flatnonzero(imbalance != 0)
		predictions = model.predictions_for(cells, purpose = "error decomposition")
		# (n gamma - N^P)(mu - mu_hat); the form with (mu_hat - mu) has the sign backwards
		imbalance_term = math.fsum(imbalance[cells] * (mu[cells] - predictions)) / N
		eps_bar = cell_table.cell_means()[support] - mu[support]
		idiosyncratic_term = math.fsum(weights.weighted_counts[support] * eps_bar) / N
		return cls._combine(drp_estimate, truth, imbalance_term, idiosyncratic_term)
