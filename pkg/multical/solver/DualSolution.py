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
from multical.Enums import SolverStatus

class DualSolution():
	def __init__(self, beta, columns, blocks, iterations, grad_norm, first_order_residual, status, objective, newton_steps = 0):
		self._beta = beta
		self._columns = columns
		self._blocks = blocks
		self._iterations = iterations
		self._grad_norm = grad_norm
		self._first_order_residual = first_order_residual
		self._status = status
		self._objective = objective
		self._newton_steps = newton_steps

	@property
	def beta(self):
		return self._beta

	@property
	def columns(self):
		return self._columns

	@property
	def blocks(self):
		return dict(self._blocks)

	@property
	def iterations(self):
		return self._iterations

	@property
	def newton_steps(self):
		return self._newton_steps

	@property
	def grad_norm(self):
		return self._grad_norm

	@property
	def first_order_residual(self):
		return self._first_order_residual

	@property
	def status(self):
		return self._status

	@property
	def converged(self):
		return self._status == SolverStatus.Converged

	@property
	def objective(self):
		"""Dual loss q at beta; the dual objective is its negation."""
		return self._objective

	def block(self, k, design):
		"""beta for order k; zeros for orders that were dropped from the solve."""
		if k in self._blocks:
			return self._beta[self._blocks[k]]
		return np.zeros(design.order_size(k))

	def to_json(self):
		return {
			"status":				self._status.value,
			"iterations":			self._iterations,
			"newton_steps":			self._newton_steps,
			"grad_norm":			self._grad_norm,
			"first_order_residual":	self._first_order_residual,
			"dual_objective":		-self._objective,
		}
