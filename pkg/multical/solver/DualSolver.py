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
import warnings
import numpy as np
import scipy.optimize
import scipy.linalg
import scipy.sparse
from multical.solver.CalibrationProblem import CalibrationProblem
from multical.solver.DualSolution import DualSolution
from multical.solver.WeightSolution import WeightSolution
from multical.Enums import SolverStatus, EstimationMethod
from multical.Exceptions import InfeasibleCalibrationException, InvalidCalibrationSpecException

_log = logging.getLogger(__spec__.name)

class DualSolver():
	"""Solves the multilevel calibration program through its unconstrained dual.

	The dual loss is q(beta) = (1/2N) sum_s n_s c_s (2 z_s - c_s) - (1/N) beta.D^T N^P
	+ sum_k lambda_k/2 |beta_k|^2 with z = D beta and c = clip(z, L, U). It is
	minimized with L-BFGS-B and then polished with semismooth Newton steps on the
	generalized Hessian while the number of columns permits a dense solve."""
	NEWTON_COLUMN_LIMIT = 2500
	NEWTON_MAX_STEPS = 50

	def __init__(self, design, cell_table, spec, problem = None):
		self._problem = problem or CalibrationProblem(design, cell_table, spec)
		self._spec = spec

	@property
	def problem(self):
		return self._problem

	def dual_value_grad(self, beta):
		return self._problem.value_grad(np.asarray(beta, dtype = float))

	def _margin_name(self, column):
		design = self._problem.design
		return design.column_labels()[self._problem.columns[column]]

	def check_feasibility(self):
		"""Raises InfeasibleCalibrationException if no weights within the bounds
		meet the exactly balanced columns."""
		problem = self._problem
		(lower, upper) = (self._spec.lower, self._spec.upper)
		exact = np.flatnonzero(problem.exact)
		A = (problem.Dt[exact] @ scipy.sparse.diags(problem.n)).tocsr()
		b = problem.target[exact]

		capacity = np.asarray(A.sum(axis = 1)).ravel()
		for (row, column) in enumerate(exact):
			if (capacity[row] == 0) and (b[row] > 0):
				raise InfeasibleCalibrationException(f"Margin {self._margin_name(column)} has population count {b[row]:.0f} but no respondents.")
			if (capacity[row] * upper < b[row]) and (upper < np.inf):
				raise InfeasibleCalibrationException(f"Margin {self._margin_name(column)} needs {b[row]:.0f} but respondents can reach at most {capacity[row] * upper:.6g} with upper bound {upper}.")
			if (capacity[row] * lower > b[row]) and (lower > -np.inf):
				raise InfeasibleCalibrationException(f"Margin {self._margin_name(column)} needs {b[row]:.0f} but respondents carry at least {capacity[row] * lower:.6g} with lower bound {lower}.")

		bounds = (None if (lower == -np.inf) else lower, None if (upper == np.inf) else upper)
		result = scipy.optimize.linprog(np.zeros(A.shape[1]), A_eq = A, b_eq = b, bounds = bounds, method = "highs")
		if result.status == 2:
			raise InfeasibleCalibrationException(f"Exactly balanced margins cannot be met jointly within bounds [{lower}, {upper}]: {result.message}")
		elif result.status != 0:
			_log.warning("Feasibility check inconclusive: %s", result.message)

	def _converged(self, beta, grad):
		problem = self._problem
		grad_norm = float(np.max(np.abs(grad)))
		(z, c) = problem.link(beta)
		residual = problem.exact_residual(c)
		return ((grad_norm <= self._spec.grad_tol) and (residual <= self._spec.balance_tol * problem.N), grad_norm, residual)

	def _newton(self, beta):
		problem = self._problem
		(value, grad) = problem.value_grad(beta)
		for step in range(self.NEWTON_MAX_STEPS):
			(converged, grad_norm, residual) = self._converged(beta, grad)
			if converged:
				return (beta, step)
			hessian = problem.generalized_hessian(beta)
			with warnings.catch_warnings():
				warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
				try:
					direction = scipy.linalg.solve(hessian, -grad, assume_a = "sym")
				except (np.linalg.LinAlgError, ValueError):
					direction = scipy.linalg.lstsq(hessian, -grad)[0]
			slope = grad @ direction
			if not (slope < 0):
				direction = -grad
				slope = -(grad @ grad)

			grad_sq = grad @ grad
			step_size = 1.0
			for _ in range(60):
				candidate = beta + step_size * direction
				(candidate_value, candidate_grad) = problem.value_grad(candidate)
				armijo = candidate_value <= value + 1e-4 * step_size * slope
				flat = (candidate_value <= value + 1e-13 * max(1, abs(value))) and ((candidate_grad @ candidate_grad) < grad_sq)
				if armijo or flat:
					break
				step_size /= 2
			else:
				_log.debug("Newton line search failed after %d steps, gradient norm %.3e", step, grad_norm)
				return (beta, step)
			_log.trace("Newton step %d: q = %.17g, |g| = %.3e, t = %g", step, candidate_value, np.max(np.abs(candidate_grad)), step_size)
			(beta, value, grad) = (candidate, candidate_value, candidate_grad)
		return (beta, self.NEWTON_MAX_STEPS)

	def solve(self, beta0 = None, check_feasibility = True):
		problem = self._problem
		if check_feasibility:
			self.check_feasibility()
		if beta0 is None:
			beta = np.zeros(problem.column_count)
		else:
			beta = np.array(beta0, dtype = float)
			if beta.shape != (problem.column_count, ):
				raise InvalidCalibrationSpecException(f"Warm start has {beta.shape} entries, dual has {problem.column_count} variables.")

		iteration_count = [ 0 ]
		def callback(xk):
			iteration_count[0] += 1
			if _log.isEnabledFor(logging.TRACE):
				_log.trace("L-BFGS-B iteration %d: |g| = %.3e", iteration_count[0], np.max(np.abs(problem.value_grad(xk)[1])))

		result = scipy.optimize.minimize(problem.value_grad, beta, jac = True, method = "L-BFGS-B", callback = callback, options = {
			"maxiter":	self._spec.max_iterations,
			"gtol":		self._spec.grad_tol,
			"ftol":		0.0,
			"maxcor":	30,
			"maxls":	50,
		})
		beta = result.x
		_log.debug("L-BFGS-B finished after %d iterations: %s", result.nit, result.message)

		newton_steps = 0
		if problem.column_count <= self.NEWTON_COLUMN_LIMIT:
			(beta, newton_steps) = self._newton(beta)

		(value, grad) = problem.value_grad(beta)
		(converged, grad_norm, residual) = self._converged(beta, grad)
		if converged:
			status = SolverStatus.Converged
			_log.info("Dual converged: %d iterations, %d Newton steps, |g| = %.3e", result.nit, newton_steps, grad_norm)
		else:
			status = SolverStatus.NotConverged
			_log.warning("Dual solve did not converge: |g| = %.3e (tolerance %.1e), exact balance residual %.3e (tolerance %.1e)", grad_norm, self._spec.grad_tol, residual, self._spec.balance_tol * problem.N)
		return DualSolution(beta = beta, columns = problem.columns, blocks = problem.blocks, iterations = int(result.nit), grad_norm = grad_norm, first_order_residual = residual, status = status, objective = float(value), newton_steps = newton_steps)

	def recover_primal(self, dual, method = EstimationMethod.Multilevel):
		problem = self._problem
		(z, c) = problem.link(dual.beta)
		gamma = np.zeros(problem.cell_table.J)
		gamma[problem.support] = c
		return WeightSolution(problem.cell_table, gamma, method = method, design = problem.design, dual = dual, status = dual.status, spec = self._spec, objective = problem.primal_value(c))

	@classmethod
	def calibrate(cls, design, cell_table, spec, beta0 = None, method = None):
		if method is None:
			method = EstimationMethod.Raking if (spec.max_order == 1) else EstimationMethod.Multilevel
		solver = cls(design, cell_table, spec)
		dual = solver.solve(beta0 = beta0)
		return solver.recover_primal(dual, method = method)
