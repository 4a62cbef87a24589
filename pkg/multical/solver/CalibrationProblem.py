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
import scipy.sparse
from multical.Exceptions import SchemaMismatchException, InvalidCalibrationSpecException, InfeasibleCalibrationException

_log = logging.getLogger(__spec__.name)

class CalibrationProblem():
	"""Matrices of one calibration instance restricted to what the solve needs:
	the design rows of respondent cells and the columns of all orders that are
	not dropped. beta and the gradient live on these columns."""

	def __init__(self, design, cell_table, spec):
		if design.schema != cell_table.schema:
			raise SchemaMismatchException("Design and cell table use different schemas.")
		if design.max_order < spec.max_order:
			raise InvalidCalibrationSpecException(f"Design has maximum order {design.max_order}, calibration asks for order {spec.max_order}.")
		self._design = design
		self._cell_table = cell_table
		self._spec = spec
		self._support = cell_table.balance_support
		if len(self._support) == 0:
			raise InfeasibleCalibrationException("There are no respondents in populated cells to weight.")
		self._orders = spec.active_orders
		self._columns = design.order_columns(self._orders)
		self._blocks = { }
		offset = 0
		penalty = [ ]
		for k in self._orders:
			size = design.order_size(k)
			self._blocks[k] = slice(offset, offset + size)
			penalty.append(np.full(size, spec.lambda_for(k)))
			offset += size
		self._penalty = np.concatenate(penalty)
		self._exact = self._penalty == 0
		self._D = design.rows(self._support)[:, self._columns].tocsr()
		self._Dt = self._D.T.tocsr()
		self._n = cell_table.resp_counts[self._support]
		self._N = cell_table.N
		self._target = design.transpose_dot(cell_table.pop_counts)[self._columns]

	@property
	def design(self):
		return self._design

	@property
	def cell_table(self):
		return self._cell_table

	@property
	def spec(self):
		return self._spec

	@property
	def support(self):
		return self._support

	@property
	def orders(self):
		return list(self._orders)

	@property
	def columns(self):
		return self._columns

	@property
	def blocks(self):
		return dict(self._blocks)

	@property
	def column_count(self):
		return len(self._columns)

	@property
	def D(self):
		return self._D

	@property
	def Dt(self):
		return self._Dt

	@property
	def n(self):
		return self._n

	@property
	def N(self):
		return self._N

	@property
	def target(self):
		return self._target

	@property
	def penalty(self):
		return self._penalty

	@property
	def exact(self):
		return self._exact

	def link(self, beta):
		z = self._D @ beta
		return (z, np.clip(z, self._spec.lower, self._spec.upper))

	def value_grad(self, beta):
		(z, c) = self.link(beta)
		value = (self._n * c * (2 * z - c)).sum() / (2 * self._N) - (self._target @ beta) / self._N + 0.5 * (self._penalty * beta ** 2).sum()
		grad = (self._Dt @ (self._n * c) - self._target) / self._N + self._penalty * beta
		return (value, grad)

	def imbalance(self, gamma_support):
		"""D^T(diag(n) gamma - N^P) on the active columns."""
		return self._Dt @ (self._n * gamma_support) - self._target

	def exact_residual(self, gamma_support):
		if not np.any(self._exact):
			return 0.0
		return float(np.max(np.abs(self.imbalance(gamma_support)[self._exact])))

	def primal_value(self, gamma_support):
		value = (self._n * gamma_support ** 2).sum() / (2 * self._N)
		imbalance = self.imbalance(gamma_support)
		for k in self._spec.penalized_orders:
			block = imbalance[self._blocks[k]]
			value += (block @ block) / (2 * self._spec.lambda_for(k) * self._N ** 2)
		return float(value)

	def generalized_hessian(self, beta):
		(z, c) = self.link(beta)
		free = (z > self._spec.lower) & (z < self._spec.upper)
		weighted = scipy.sparse.diags(self._n * free / self._N)
		hessian = (self._Dt @ weighted @ self._D).toarray()
		hessian[np.diag_indices_from(hessian)] += self._penalty
		return hessian
