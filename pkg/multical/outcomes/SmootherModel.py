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
import scipy.sparse
import scipy.sparse.linalg
from multical.outcomes.BaseOutcomeModel import BaseOutcomeModel
from multical.Enums import OutcomeModelKind
from multical.Exceptions import SchemaMismatchException, OutcomeModelException

@BaseOutcomeModel.register
class SmootherModel(BaseOutcomeModel):
	"""mu_hat_s = sum_s' W(s, s') n_s' Ybar_s'. W is a J x J sparse matrix or
	linear operator; rows without respondent mass are undefined."""
	_NAME = "smoother"
	_KIND = OutcomeModelKind.Smoother

	def __init__(self, cell_table, operator, description):
		super().__init__(cell_table, parameters = { "smoother": description })
		J = cell_table.J
		if operator.shape != (J, J):
			raise SchemaMismatchException(f"Smoother has shape {operator.shape}, expected ({J}, {J}).")
		self._operator = operator
		self._description = description

	@property
	def operator(self):
		return self._operator

	@classmethod
	def diagonal(cls, cell_table):
		n = cell_table.resp_counts
		inverse = np.divide(1.0, n, out = np.zeros_like(n), where = n > 0)
		return cls(cell_table, scipy.sparse.diags(inverse).tocsr(), "diagonal")

	@classmethod
	def uniform(cls, cell_table):
		J = cell_table.J
		support = cell_table.resp_counts > 0
		n = cell_table.n
		def matvec(v):
			return np.full(J, v.ravel()[support].sum() / n)
		def rmatvec(u):
			return np.where(support, u.ravel().sum() / n, 0.0)
		operator = scipy.sparse.linalg.LinearOperator((J, J), matvec = matvec, rmatvec = rmatvec, dtype = float)
		return cls(cell_table, operator, "uniform")

	@classmethod
	def from_matrix(cls, cell_table, W, description = "matrix"):
		return cls(cell_table, W, description)

	@classmethod
	def fit(cls, design, cell_table, smoother = "diagonal"):
		cls._require_outcomes(cell_table)
		if smoother == "diagonal":
			return cls.diagonal(cell_table)
		elif smoother == "uniform":
			return cls.uniform(cell_table)
		raise OutcomeModelException(f"Unknown smoother: {smoother}")

	def respondent_mass(self):
		"""sum_s' W(s, s') n_s' per row."""
		return self._operator @ self._cell_table.resp_counts

	def _predict_cells(self):
		self._require_outcomes(self._cell_table)
		predictions = np.asarray(self._operator @ self._cell_table.resp_sums, dtype = float)
		predictions[self.respondent_mass() == 0] = np.nan
		return predictions

	def adjusted_weights(self, weights):
		"""gamma_tilde(s') = gamma(s') + sum_s W(s, s') (N^P_s - n_s gamma(s)) on
		respondent cells."""
		if weights.cell_table.schema != self._cell_table.schema:
			raise SchemaMismatchException("Weights and smoother use different schemas.")
		adjustment = self._operator.T @ (-weights.cell_imbalance())
		return np.where(self._cell_table.resp_counts > 0, weights.gamma + adjustment, 0.0)
