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

_log = logging.getLogger(__spec__.name)

class ImbalanceReport():
	"""Per-column relative imbalance |D_j^T(n gamma - N^P)| / D_j^T N^P by order,
	and the terms of the mean squared error bound."""

	def __init__(self, design, weights, imbalance, targets, cell_means = None):
		self._design = design
		self._weights = weights
		self._imbalance = imbalance
		self._targets = targets
		self._cell_means = cell_means
		self._relative = np.full(len(imbalance), np.nan)
		nonzero = targets > 0
		self._relative[nonzero] = np.abs(imbalance[nonzero]) / targets[nonzero]
		self._skipped = int(np.sum(~nonzero))
		if self._skipped > 0:
			_log.debug("%d design columns have no population and are skipped in relative imbalance.", self._skipped)

	@classmethod
	def evaluate(cls, weights, design, cell_means = None):
		cell_table = weights.cell_table
		return cls(design, weights, weights.imbalance(design), design.transpose_dot(cell_table.pop_counts), cell_means = cell_means)

	@property
	def skipped_columns(self):
		return self._skipped

	def relative(self, k):
		values = self._relative[self._design.order_slice(k)]
		return values[np.isfinite(values)]

	def relative_norm(self, k):
		return float(np.linalg.norm(self.relative(k)))

	def max_relative(self, k):
		values = self.relative(k)
		return float(values.max()) if (len(values) > 0) else 0.0

	def norm(self, k):
		return float(np.linalg.norm(self._imbalance[self._design.order_slice(k)]))

	def higher_order_imbalance_sq(self, max_order = None):
		max_order = self._design.max_order if (max_order is None) else max_order
		return math.fsum(self.norm(k) ** 2 for k in range(2, max_order + 1))

	@property
	def noise_term(self):
		"""sum_s (n_s / N)^2 gamma(s)^2"""
		N = self._weights.cell_table.N
		return math.fsum((self._weights.weighted_counts / N) ** 2)

	@property
	def cell_imbalance_norm(self):
		return float(np.linalg.norm(self._weights.cell_imbalance()))

	@property
	def bias_bound(self):
		"""Cauchy-Schwarz bound |mu|_2 |n gamma - N^P|_2 / N on the imbalance bias,
		available when true cell means are known."""
		if self._cell_means is None:
			return None
		mu = np.where(np.isfinite(self._cell_means), self._cell_means, 0)
		return float(np.linalg.norm(mu) * self.cell_imbalance_norm / self._weights.cell_table.N)

	def bias_split(self, coefficients):
		"""Per order k: the bias contribution eta_k . imbalance_k / N and its bound
		|eta_k| |imbalance_k| / N for population regression coefficients eta."""
		N = self._weights.cell_table.N
		split = { }
		for k in self._design.orders:
			order_slice = self._design.order_slice(k)
			(eta, imbalance) = (coefficients[order_slice], self._imbalance[order_slice])
			split[k] = {
				"contribution":	float(eta @ imbalance / N),
				"bound":		float(np.linalg.norm(eta) * np.linalg.norm(imbalance) / N),
			}
		return split

	def to_json(self):
		result = {
			"orders": { str(k): {
				"norm":				self.norm(k),
				"relative_norm":	self.relative_norm(k),
				"max_relative":		self.max_relative(k),
			} for k in self._design.orders },
			"skipped_columns":	self._skipped,
			"noise_term":		self.noise_term,
			"cell_imbalance_norm":	self.cell_imbalance_norm,
		}
		if self._cell_means is not None:
			result["bias_bound"] = self.bias_bound
		return result
