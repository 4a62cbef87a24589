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
import pandas
from multical.Enums import SolverStatus

class WeightSolution():
	"""Cell weights gamma over all J cells. Weights are only meaningful on
	cells with respondents; elsewhere gamma is stored as 0 so that n_s * gamma(s)
	vanishes in every sum."""

	def __init__(self, cell_table, gamma, method, design = None, dual = None, status = SolverStatus.Converged, spec = None, objective = None):
		self._cell_table = cell_table
		self._gamma = np.where(cell_table.resp_counts > 0, np.asarray(gamma, dtype = float), 0.0)
		self._method = method
		self._design = design
		self._dual = dual
		self._status = status
		self._spec = spec
		self._objective = objective
		self._imbalance = None

	@property
	def cell_table(self):
		return self._cell_table

	@property
	def gamma(self):
		return self._gamma

	@property
	def support(self):
		return self._cell_table.support

	@property
	def method(self):
		return self._method

	@property
	def dual(self):
		return self._dual

	@property
	def status(self):
		return self._status

	@property
	def converged(self):
		return self._status == SolverStatus.Converged

	@property
	def spec(self):
		return self._spec

	@property
	def design(self):
		return self._design

	@property
	def objective(self):
		return self._objective

	@property
	def weighted_counts(self):
		"""n_s * gamma(s) per cell."""
		return self._cell_table.resp_counts * self._gamma

	@property
	def normalized_weights(self):
		return self.weighted_counts / self._cell_table.N

	@property
	def total_weight(self):
		return float(self.weighted_counts.sum())

	@property
	def sum_sq_weights(self):
		return float((self._cell_table.resp_counts * self._gamma ** 2).sum())

	@property
	def n_eff(self):
		sum_sq = self.sum_sq_weights
		if sum_sq == 0:
			return 0.0
		return self.total_weight ** 2 / sum_sq

	@property
	def design_effect(self):
		n_eff = self.n_eff
		return (self._cell_table.n / n_eff) if (n_eff > 0) else np.inf

	def cell_imbalance(self):
		"""n_s gamma(s) - N^P_s over all cells."""
		return self.weighted_counts - self._cell_table.pop_counts

	def imbalance(self, design = None):
		"""D^T(diag(n) gamma - N^P) over all columns of the design."""
		design = design or self._design
		if design is None:
			return None
		if (design is self._design) and (self._imbalance is not None):
			return self._imbalance
		imbalance = design.transpose_dot(self.cell_imbalance())
		if design is self._design:
			self._imbalance = imbalance
		return imbalance

	def imbalance_by_order(self, design = None):
		design = design or self._design
		if design is None:
			return None
		imbalance = self.imbalance(design)
		return { k: float(np.linalg.norm(imbalance[design.order_slice(k)])) for k in design.orders }

	def to_dataframe(self):
		schema = self._cell_table.schema
		support = self.support
		levels = schema.decode_many(support)
		columns = { "cell": support }
		for (i, covariate) in enumerate(schema.covariates):
			columns[covariate.name] = [ covariate.level_labels[level] for level in levels[:, i] ]
		columns["resp_count"] = self._cell_table.resp_counts[support]
		columns["pop_count"] = self._cell_table.pop_counts[support]
		columns["gamma"] = self._gamma[support]
		columns["normalized_weight"] = self.normalized_weights[support]
		return pandas.DataFrame(columns)

	def to_json(self):
		result = {
			"method":			self._method.value,
			"status":			self._status.value,
			"sum_sq_weights":	self.sum_sq_weights,
			"total_weight":		self.total_weight,
			"n_eff":			self.n_eff,
			"design_effect":	self.design_effect,
		}
		if self._objective is not None:
			result["objective"] = self._objective
		if self._design is not None:
			result["imbalance_by_order"] = { str(k): value for (k, value) in self.imbalance_by_order().items() }
		if self._spec is not None:
			result["spec"] = self._spec.to_json()
		if self._dual is not None:
			result["dual"] = self._dual.to_json()
		return result

	def __repr__(self):
		return "WeightSolution<%s, %s, n_eff=%.1f>" % (self._method.value, self._status.value, self.n_eff)
