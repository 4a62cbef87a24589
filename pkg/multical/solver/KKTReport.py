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
from multical.solver.CalibrationProblem import CalibrationProblem

class KKTReport():
	OrderStationarity = collections.namedtuple("OrderStationarity", [ "order", "lambda_", "scaled_imbalance", "penalty_norm", "difference", "applicable" ])

	def __init__(self, orders, primal_objective, dual_objective, first_order_residual):
		self._orders = orders
		self._primal_objective = primal_objective
		self._dual_objective = dual_objective
		self._first_order_residual = first_order_residual

	@classmethod
	def evaluate(cls, solution, design, cell_table, spec):
		"""Stationarity per order and duality gap for a dual-solved weight solution."""
		problem = CalibrationProblem(design, cell_table, spec)
		gamma = solution.gamma[problem.support]
		imbalance = solution.imbalance(design)
		orders = [ ]
		for k in range(2, spec.max_order + 1):
			scaled = float(np.linalg.norm(imbalance[design.order_slice(k)]) / cell_table.N)
			lambda_ = spec.lambda_for(k)
			if lambda_ == math.inf:
				orders.append(cls.OrderStationarity(order = k, lambda_ = lambda_, scaled_imbalance = scaled, penalty_norm = 0.0, difference = 0.0, applicable = False))
				continue
			penalty_norm = float(lambda_ * np.linalg.norm(solution.dual.block(k, design))) if (solution.dual is not None) else math.nan
			orders.append(cls.OrderStationarity(order = k, lambda_ = lambda_, scaled_imbalance = scaled, penalty_norm = penalty_norm, difference = abs(scaled - penalty_norm), applicable = True))
		primal_objective = problem.primal_value(gamma)
		dual_objective = -problem.value_grad(solution.dual.beta)[0] if (solution.dual is not None) else math.nan
		first_order_residual = float(np.max(np.abs(imbalance[design.order_slice(1)])))
		return cls(orders, primal_objective, dual_objective, first_order_residual)

	@property
	def orders(self):
		return list(self._orders)

	@property
	def primal_objective(self):
		return self._primal_objective

	@property
	def dual_objective(self):
		return self._dual_objective

	@property
	def duality_gap(self):
		return self._primal_objective - self._dual_objective

	@property
	def relative_duality_gap(self):
		return abs(self.duality_gap) / (1 + abs(self._primal_objective))

	@property
	def first_order_residual(self):
		return self._first_order_residual

	@property
	def max_stationarity_violation(self):
		differences = [ order.difference for order in self._orders if order.applicable ]
		return max(differences) if (len(differences) > 0) else 0.0

	def to_json(self):
		return {
			"primal_objective":		self._primal_objective,
			"dual_objective":		self._dual_objective,
			"duality_gap":			self.duality_gap,
			"relative_duality_gap":	self.relative_duality_gap,
			"first_order_residual":	self._first_order_residual,
			"stationarity": [ {
				"order":			order.order,
				"lambda":			order.lambda_,
				"scaled_imbalance":	order.scaled_imbalance,
				"penalty_norm":		order.penalty_norm,
				"difference":		order.difference,
				"applicable":		order.applicable,
			} for order in self._orders ],
		}
