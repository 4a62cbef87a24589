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
import collections
import numpy as np
import pandas
from multical.solver.DualSolver import DualSolver
from multical.solver.CalibrationSpec import CalibrationSpec
from multical.Enums import EstimationMethod, SolverStatus
from multical.Exceptions import InvalidCalibrationSpecException

_log = logging.getLogger(__spec__.name)

class TradeoffCurve():
	"""Higher-order imbalance against effective sample size along a common
	penalty lambda for all orders >= 2. The selected lambda is the largest grid
	value whose imbalance reduction relative to raking reaches the given share
	of the reduction achieved at the smallest grid value."""
	Point = collections.namedtuple("Point", [ "lambda_", "higher_order_imbalance_sq", "sum_sq_weights", "n_eff", "status", "iterations" ])
	SELECTION_SHARE = 0.95

	def __init__(self, points, raking_point, share = SELECTION_SHARE):
		self._points = sorted(points, key = lambda point: -point.lambda_)
		self._raking_point = raking_point
		self._share = share
		self._selected = self._select()

	@classmethod
	def default_grid(cls, cell_table, count = 25):
		"""log-spaced [1e-3, 1e6] on the population count scale, i.e. divided by N
		on the solver scale."""
		return np.logspace(-3, 6, count) / cell_table.N

	@classmethod
	def _point(cls, lambda_, solution, design, max_order):
		imbalance = solution.imbalance_by_order(design)
		higher = math.fsum(imbalance[k] ** 2 for k in range(2, max_order + 1))
		iterations = solution.dual.iterations if (solution.dual is not None) else 0
		return cls.Point(lambda_ = lambda_, higher_order_imbalance_sq = higher, sum_sq_weights = solution.sum_sq_weights, n_eff = solution.n_eff, status = solution.status, iterations = iterations)

	@classmethod
	def sweep(cls, design, cell_table, grid = None, max_order = None, lower = 0.0, upper = math.inf, share = SELECTION_SHARE, **tolerances):
		max_order = design.max_order if (max_order is None) else max_order
		if max_order < 2:
			raise InvalidCalibrationSpecException("A trade-off sweep needs interaction orders above one.")
		grid = cls.default_grid(cell_table) if (grid is None) else np.asarray(grid, dtype = float)
		if (len(grid) == 0) or np.any(~(grid > 0)) or np.any(~np.isfinite(grid)):
			raise InvalidCalibrationSpecException("Sweep grid must be a nonempty list of positive finite values.")
		grid = np.sort(grid)[::-1]

		template = CalibrationSpec(max_order, lambdas = math.inf, lower = lower, upper = upper, **tolerances)
		raking_solver = DualSolver(design, cell_table, template)
		raking_dual = raking_solver.solve()
		raking = raking_solver.recover_primal(raking_dual, method = EstimationMethod.Raking)
		raking_point = cls._point(math.inf, raking, design, max_order)

		points = [ ]
		beta = None
		for lambda_ in grid:
			spec = template.with_lambda(float(lambda_))
			solver = DualSolver(design, cell_table, spec)
			if beta is None:
				beta = np.zeros(solver.problem.column_count)
				beta[solver.problem.blocks[1]] = raking_dual.beta
			dual = solver.solve(beta0 = beta, check_feasibility = False)
			solution = solver.recover_primal(dual)
			if dual.converged:
				beta = dual.beta
			else:
				_log.warning("Sweep point lambda = %g did not converge and is excluded from selection.", lambda_)
			points.append(cls._point(float(lambda_), solution, design, max_order))
			_log.info("lambda = %.6g: higher-order imbalance^2 = %.6g, n_eff = %.2f", lambda_, points[-1].higher_order_imbalance_sq, points[-1].n_eff)
		return cls(points, raking_point, share = share)

	def _select(self):
		converged = [ point for point in self._points if point.status == SolverStatus.Converged ]
		if len(converged) == 0:
			return None
		floor = min(converged, key = lambda point: point.lambda_).higher_order_imbalance_sq
		possible = self._raking_point.higher_order_imbalance_sq - floor
		if possible <= 0:
			return max(converged, key = lambda point: point.lambda_)
		eligible = [ point for point in converged if (self._raking_point.higher_order_imbalance_sq - point.higher_order_imbalance_sq) >= self._share * possible ]
		return max(eligible, key = lambda point: point.lambda_)

	@property
	def points(self):
		return list(self._points)

	@property
	def raking_point(self):
		return self._raking_point

	@property
	def selected(self):
		return self._selected

	@property
	def selection_rule(self):
		return f"largest lambda whose higher-order imbalance reduction from raking is at least {self._share:g} of the reduction at the smallest lambda"

	def is_monotone(self, rtol = 1e-8):
		"""Imbalance nonincreasing and sum of squared weights nondecreasing as
		lambda decreases, over converged points."""
		converged = [ point for point in self._points if point.status == SolverStatus.Converged ]
		for (previous, current) in zip(converged, converged[1:]):
			if current.higher_order_imbalance_sq > previous.higher_order_imbalance_sq * (1 + rtol) + rtol:
				return False
			if current.sum_sq_weights < previous.sum_sq_weights * (1 - rtol) - rtol:
				return False
		return True

	def to_dataframe(self):
		rows = [ self._raking_point ] + self._points
		return pandas.DataFrame({
			"lambda":						[ point.lambda_ for point in rows ],
			"higher_order_imbalance_sq":	[ point.higher_order_imbalance_sq for point in rows ],
			"sum_sq_weights":				[ point.sum_sq_weights for point in rows ],
			"n_eff":						[ point.n_eff for point in rows ],
			"status":						[ point.status.value for point in rows ],
			"selected":						[ (point is self._selected) for point in rows ],
		})

	def to_json(self):
		return {
			"rule":				self.selection_rule,
			"share":			self._share,
			"selected_lambda":	None if (self._selected is None) else self._selected.lambda_,
			"raking_imbalance_sq":	self._raking_point.higher_order_imbalance_sq,
			"excluded_points":	[ point.lambda_ for point in self._points if point.status != SolverStatus.Converged ],
		}
