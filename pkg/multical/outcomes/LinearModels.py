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
import scipy.linalg
import scipy.sparse
import sklearn.model_selection
from multical.outcomes.BaseOutcomeModel import BaseOutcomeModel
from multical.Enums import OutcomeModelKind
from multical.Exceptions import SingularOutcomeModelException, SchemaMismatchException

_log = logging.getLogger(__spec__.name)

class PriorCovariance():
	"""Block diagonal prior precision over the design columns, q_k per order."""

	def __init__(self, q):
		self._q = { int(k): float(value) for (k, value) in q.items() }
		self._q.setdefault(1, 0.0)
		for (k, value) in self._q.items():
			if not (value >= 0):
				raise SingularOutcomeModelException(f"Prior precision for order {k} must be nonnegative, got {value}.")

	@classmethod
	def from_penalty(cls, penalty, max_order, main_penalty = 0.0):
		return cls({ k: (main_penalty if (k == 1) else penalty) for k in range(1, max_order + 1) })

	@property
	def max_order(self):
		return max(self._q)

	def q(self, k):
		return self._q.get(k, 0.0)

	def diagonal(self, design, max_order):
		"""The intercept, column 0, is never penalized."""
		diagonal = np.concatenate([ np.full(design.order_size(k), self.q(k)) for k in range(1, max_order + 1) ])
		diagonal[0] = 0.0
		return diagonal

	def to_json(self):
		return { str(k): value for (k, value) in sorted(self._q.items()) }

class LinearOutcomeModel(BaseOutcomeModel):
	"""mu_hat_s = D_s eta over the design columns of orders 1..K, eta from the
	penalized normal equations (D^T diag(n) D + Q) eta = D^T diag(n) Ybar."""
	RANK_CHECK_LIMIT = 4000

	def __init__(self, design, cell_table, order, coefficients, penalty_diag, parameters):
		super().__init__(cell_table, parameters = parameters)
		self._design = design
		self._order = order
		self._columns = design.order_columns(range(1, order + 1))
		self._coefficients = coefficients
		self._penalty_diag = penalty_diag

	@property
	def design(self):
		return self._design

	@property
	def order(self):
		return self._order

	@property
	def coefficients(self):
		return self._coefficients

	@staticmethod
	def _check_inputs(design, cell_table, order):
		if design.schema != cell_table.schema:
			raise SchemaMismatchException("Design and cell table use different schemas.")
		if not (1 <= order <= design.max_order):
			raise SchemaMismatchException(f"Model order {order} not available in a design of maximum order {design.max_order}.")

	@classmethod
	def _solve_normal_equations(cls, rows, n, ybar, penalty_diag):
		gram = (rows.T @ scipy.sparse.diags(n) @ rows).toarray()
		gram[np.diag_indices_from(gram)] += penalty_diag
		rhs = rows.T @ (n * ybar)
		free = np.flatnonzero(penalty_diag == 0)
		if (0 < len(free) <= cls.RANK_CHECK_LIMIT):
			# positive definite iff the unpenalized block is
			rank = np.linalg.matrix_rank(gram[np.ix_(free, free)])
			if rank < len(free):
				raise SingularOutcomeModelException(f"Normal equations are singular (rank {rank} of {len(free)} unpenalized columns); use a positive penalty or fewer interaction orders.")
		try:
			return scipy.linalg.solve(gram, rhs, assume_a = "pos")
		except np.linalg.LinAlgError as e:
			raise SingularOutcomeModelException(f"Normal equations are singular ({e}); use a positive penalty or fewer interaction orders.") from e

	@classmethod
	def _fit_coefficients(cls, design, cell_table, order, penalty_diag):
		support = cell_table.support
		columns = design.order_columns(range(1, order + 1))
		rows = design.rows(support)[:, columns]
		return cls._solve_normal_equations(rows, cell_table.resp_counts[support], cell_table.cell_means()[support], penalty_diag)

	def normal_equation_residual(self):
		support = self._cell_table.support
		rows = self._design.rows(support)[:, self._columns]
		n = self._cell_table.resp_counts[support]
		ybar = self._cell_table.cell_means()[support]
		gradient = rows.T @ (n * (rows @ self._coefficients - ybar)) + self._penalty_diag * self._coefficients
		return float(np.max(np.abs(gradient)))

	def _predict_cells(self):
		return self._design.matrix()[:, self._columns] @ self._coefficients

	def _fitted_json(self):
		return {
			"order":			self._order,
			"coefficients":		self._coefficients,
		}

@BaseOutcomeModel.register
class RidgeModel(LinearOutcomeModel):
	_NAME = "ridge"
	_KIND = OutcomeModelKind.Ridge
	DEFAULT_GRID = tuple(10.0 ** np.linspace(-2, 4, 13))

	@classmethod
	def _penalty_diag(cls, design, order, penalty, main_penalty = 0.0):
		return PriorCovariance.from_penalty(penalty, order, main_penalty = main_penalty).diagonal(design, order)

	@classmethod
	def cross_validate(cls, design, cell_table, order, grid = None, folds = 5, seed = 0, main_penalty = 0.0):
		"""Picks the penalty with the smallest n-weighted held-out squared error
		over folds of respondent cells."""
		grid = cls.DEFAULT_GRID if (grid is None) else tuple(grid)
		support = cell_table.support
		folds = min(folds, len(support))
		if folds < 2:
			return (grid[-1], { })
		columns = design.order_columns(range(1, order + 1))
		rows = design.rows(support)[:, columns].tocsr()
		n = cell_table.resp_counts[support]
		ybar = cell_table.cell_means()[support]
		kfold = sklearn.model_selection.KFold(n_splits = folds, shuffle = True, random_state = seed)
		splits = list(kfold.split(support))
		errors = { }
		for penalty in grid:
			penalty_diag = cls._penalty_diag(design, order, penalty, main_penalty)
			error = 0.0
			for (train, test) in splits:
				try:
					eta = cls._solve_normal_equations(rows[train], n[train], ybar[train], penalty_diag)
				except SingularOutcomeModelException:
					error = np.inf
					break
				error += float((n[test] * (ybar[test] - rows[test] @ eta) ** 2).sum())
			errors[penalty] = error
		best = min(grid, key = lambda penalty: errors[penalty])
		_log.debug("Ridge cross-validation over %d folds picked penalty %g", folds, best)
		return (best, errors)

	@classmethod
	def fit(cls, design, cell_table, order = None, penalty = None, folds = 5, seed = 0, grid = None, main_penalty = 0.0):
		"""penalty applies to interaction orders; main_penalty to the main effects.
		The intercept is unpenalized."""
		cls._require_outcomes(cell_table)
		order = design.max_order if (order is None) else order
		cls._check_inputs(design, cell_table, order)
		parameters = { "order": order }
		if penalty is None:
			(penalty, errors) = cls.cross_validate(design, cell_table, order, grid = grid, folds = folds, seed = seed, main_penalty = main_penalty)
			parameters["cross_validation"] = { "folds": folds, "seed": seed, "grid": list(errors.keys()), "errors": list(errors.values()) }
		parameters["penalty"] = float(penalty)
		if main_penalty > 0:
			parameters["main_penalty"] = float(main_penalty)
		penalty_diag = cls._penalty_diag(design, order, penalty, main_penalty)
		coefficients = cls._fit_coefficients(design, cell_table, order, penalty_diag)
		return cls(design, cell_table, order, coefficients, penalty_diag, parameters)

@BaseOutcomeModel.register
class MapLinearModel(LinearOutcomeModel):
	_NAME = "map"
	_KIND = OutcomeModelKind.MapLinear

	def __init__(self, design, cell_table, order, coefficients, penalty_diag, parameters, prior):
		super().__init__(design, cell_table, order, coefficients, penalty_diag, parameters)
		self._prior = prior

	@property
	def prior(self):
		return self._prior

	@classmethod
	def fit(cls, design, cell_table, prior = None, order = None):
		cls._require_outcomes(cell_table)
		if prior is None:
			prior = PriorCovariance.from_penalty(1.0, design.max_order)
		if isinstance(prior, dict):
			prior = PriorCovariance(prior)
		order = design.max_order if (order is None) else order
		cls._check_inputs(design, cell_table, order)
		penalty_diag = prior.diagonal(design, order)
		coefficients = cls._fit_coefficients(design, cell_table, order, penalty_diag)
		return cls(design, cell_table, order, coefficients, penalty_diag, { "order": order, "prior": prior.to_json() }, prior)

	def adjusted_weights(self, weights):
		"""gamma_tilde(s) = gamma(s) + D_s (D^T diag(n) D + Q)^-1 D^T (N^P - diag(n) gamma)
		on respondent cells. The weighted mean under gamma_tilde equals the DRP
		estimate with this model; gamma_tilde may be negative."""
		if weights.cell_table.schema != self._cell_table.schema:
			raise SchemaMismatchException("Weights and model use different schemas.")
		support = self._cell_table.support
		rows = self._design.rows(support)[:, self._columns]
		n = self._cell_table.resp_counts[support]
		gram = (rows.T @ scipy.sparse.diags(n) @ rows).toarray()
		gram[np.diag_indices_from(gram)] += self._penalty_diag
		imbalance = self._design.transpose_dot(-weights.cell_imbalance())[self._columns]
		adjustment = rows @ scipy.linalg.solve(gram, imbalance, assume_a = "pos")
		adjusted = np.zeros(self._cell_table.J)
		adjusted[support] = weights.gamma[support] + adjustment
		return adjusted
