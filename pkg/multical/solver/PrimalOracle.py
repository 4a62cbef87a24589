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
import scipy.optimize
import scipy.sparse
from multical.solver.CalibrationProblem import CalibrationProblem
from multical.solver.WeightSolution import WeightSolution
from multical.Enums import SolverStatus, EstimationMethod
from multical.Exceptions import InfeasibleCalibrationException, InvalidCalibrationSpecException

_log = logging.getLogger(__spec__.name)

class PrimalOracle():
	"""Direct primal solvers for small instances, used to check the dual solver
	and for the unregularized bounded variant."""
	MAX_SUPPORT = 200
	MAX_ACTIVE_SET_ITERATIONS = 500

	@classmethod
	def _quadratic_form(cls, problem):
		"""Returns (H, g, A, b) so that the primal is min 1/2 x^T H x - g^T x
		subject to A x = b and box bounds."""
		(N, n) = (problem.N, problem.n)
		G = (problem.Dt @ scipy.sparse.diags(n)).toarray()
		H = np.diag(n / N)
		g = np.zeros(len(n))
		for k in problem.spec.penalized_orders:
			block = problem.blocks[k]
			scale = 1 / (problem.spec.lambda_for(k) * N ** 2)
			H += scale * (G[block].T @ G[block])
			g += scale * (G[block].T @ problem.target[block])
		return (H, g, G[problem.exact], problem.target[problem.exact])

	@classmethod
	def _solve_equality_qp(cls, H, g, A, b, free, fixed_values):
		"""Minimizes over the free variables with all others held fixed."""
		fixed = ~free
		rhs = b - A[:, fixed] @ fixed_values[fixed]
		A_free = A[:, free]
		H_ff = H[np.ix_(free, free)]
		linear = g[free] - H[np.ix_(free, fixed)] @ fixed_values[fixed]
		if A_free.shape[0] > 0:
			particular = scipy.linalg.lstsq(A_free, rhs)[0]
			if np.linalg.norm(A_free @ particular - rhs) > 1e-9 * (1 + np.linalg.norm(rhs)):
				return None
			nullspace = scipy.linalg.null_space(A_free)
		else:
			particular = np.zeros(free.sum())
			nullspace = np.eye(free.sum())
		x_free = particular
		if nullspace.shape[1] > 0:
			reduced = nullspace.T @ H_ff @ nullspace
			t = scipy.linalg.solve(reduced, nullspace.T @ (linear - H_ff @ particular), assume_a = "pos")
			x_free = particular + nullspace @ t
		x = fixed_values.copy()
		x[free] = x_free
		if A_free.shape[0] > 0:
			nu = scipy.linalg.lstsq(A_free.T, linear - H_ff @ x_free)[0]
		else:
			nu = np.zeros(0)
		return (x, nu)

	@classmethod
	def brute_force_primal(cls, design, cell_table, spec):
		"""Primal-dual active set method on the box-constrained QP; each
		subproblem eliminates the equality constraints through a null-space basis."""
		problem = CalibrationProblem(design, cell_table, spec)
		p = len(problem.support)
		if p > cls.MAX_SUPPORT:
			raise InvalidCalibrationSpecException(f"Brute-force primal is limited to {cls.MAX_SUPPORT} respondent cells, got {p}.")
		(H, g, A, b) = cls._quadratic_form(problem)
		(lower, upper) = (spec.lower, spec.upper)
		at_lower = np.zeros(p, dtype = bool)
		at_upper = np.zeros(p, dtype = bool)
		seen = set()
		x = None
		for iteration in range(cls.MAX_ACTIVE_SET_ITERATIONS):
			fixed_values = np.zeros(p)
			fixed_values[at_lower] = lower
			fixed_values[at_upper] = upper
			solved = cls._solve_equality_qp(H, g, A, b, ~(at_lower | at_upper), fixed_values)
			if solved is None:
				if iteration == 0:
					raise InfeasibleCalibrationException("Exactly balanced margins are inconsistent.")
				_log.warning("Active set became inconsistent after %d iterations.", iteration)
				break
			(x, nu) = solved
			multiplier = g - H @ x - (A.T @ nu if (len(nu) > 0) else 0)
			multiplier[~(at_lower | at_upper)] = 0
			new_lower = (multiplier + (x - lower) < 0) if (lower > -np.inf) else np.zeros(p, dtype = bool)
			new_upper = (multiplier + (x - upper) > 0) if (upper < np.inf) else np.zeros(p, dtype = bool)
			new_upper &= ~new_lower
			if np.array_equal(new_lower, at_lower) and np.array_equal(new_upper, at_upper):
				break
			key = (new_lower.tobytes(), new_upper.tobytes())
			if key in seen:
				_log.warning("Active set cycles after %d iterations.", iteration)
				break
			seen.add(key)
			(at_lower, at_upper) = (new_lower, new_upper)
		x = np.clip(x, lower, upper)
		gamma = np.zeros(cell_table.J)
		gamma[problem.support] = x
		return WeightSolution(cell_table, gamma, method = EstimationMethod.Multilevel, design = design, spec = spec, objective = problem.primal_value(x))

	@classmethod
	def solve_unregularized(cls, design, cell_table, upper = 1.0):
		"""min sum_k |D_k^T(diag(n) gamma - N^P)|^2 over 0 <= gamma <= upper, all
		orders of the design."""
		support = cell_table.balance_support
		n = cell_table.resp_counts[support]
		A = design.rows(support).T @ scipy.sparse.diags(n)
		b = design.transpose_dot(cell_table.pop_counts)
		if (A.shape[0] * A.shape[1]) <= 4000000:
			result = scipy.optimize.lsq_linear(A.toarray(), b, bounds = (0, upper), method = "bvls", tol = 1e-12)
		else:
			result = scipy.optimize.lsq_linear(A.tocsr(), b, bounds = (0, upper), method = "trf", tol = 1e-12, lsq_solver = "lsmr")
		gamma = np.zeros(cell_table.J)
		gamma[support] = result.x
		at_upper = int(np.sum(result.x >= upper * (1 - 1e-12)))
		if at_upper > 0:
			_log.info("Upper bound %g binds on %d of %d cells.", upper, at_upper, len(support))
		status = SolverStatus.Converged if result.success else SolverStatus.NotConverged
		return WeightSolution(cell_table, gamma, method = EstimationMethod.Weighted, design = design, status = status, objective = float(2 * result.cost))
