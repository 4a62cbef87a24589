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

import os
import math
import time
import unittest
import numpy as np
from multical.design.CovariateSchema import CovariateSchema
from multical.design.CellTable import CellTable
from multical.design.InteractionDesign import InteractionDesign
from multical.solver.CalibrationSpec import CalibrationSpec
from multical.solver.CalibrationProblem import CalibrationProblem
from multical.solver.DualSolver import DualSolver
from multical.solver.PrimalOracle import PrimalOracle
from multical.solver.KKTReport import KKTReport
from multical.estimators.Weighting import Weighting
from multical.estimators.TradeoffCurve import TradeoffCurve
from multical.simlab.Presets import Presets
from multical.Exceptions import InfeasibleCalibrationException, InvalidCalibrationSpecException
from multical.Enums import SolverStatus
from .Instances import Instances

TIGHT = { "balance_tol": 1e-11, "grad_tol": 1e-11 }

class SolverTests(unittest.TestCase):
	def _random_spec(self, rng, max_order, **kwargs):
		lambdas = [ 10 ** rng.uniform(-2, 2) for k in range(2, max_order + 1) ]
		return CalibrationSpec(max_order, lambdas = lambdas, **kwargs)

	def _linear_calibration(self, design, cell_table):
		"""Minimizer of sum_s n_s gamma_s^2 subject to exact first order margins,
		without bounds."""
		support = cell_table.support
		D1 = design.rows(support)[:, design.order_columns([ 1 ])].toarray()
		n = cell_table.resp_counts[support]
		target = design.transpose_dot(cell_table.pop_counts)[design.order_columns([ 1 ])]
		mu = np.linalg.solve(D1.T @ (n[:, None] * D1), target)
		gamma = np.zeros(cell_table.J)
		gamma[support] = D1 @ mu
		return gamma

	def test_spec_validation(self):
		with self.assertRaises(InvalidCalibrationSpecException):
			CalibrationSpec(2, lambdas = -1)
		with self.assertRaises(InvalidCalibrationSpecException):
			CalibrationSpec(3, lambdas = [ 1, 2, 3 ])
		with self.assertRaises(InvalidCalibrationSpecException):
			CalibrationSpec(2, lower = 2, upper = 1)
		with self.assertRaises(InvalidCalibrationSpecException):
			CalibrationSpec(2, lower = -1)
		with self.assertRaises(InvalidCalibrationSpecException):
			CalibrationSpec(0)
		spec = CalibrationSpec(3, lambdas = [ 0, math.inf ])
		self.assertEqual(spec.exact_orders, [ 1, 2 ])
		self.assertEqual(spec.dropped_orders, [ 3 ])
		self.assertEqual(spec.active_orders, [ 1, 2 ])
		self.assertEqual(CalibrationSpec(3, lambdas = { 2: 1, 3: 2 }).lambda_for(3), 2.0)

	def test_gradient_finite_differences(self):
		rng = np.random.default_rng(1)
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 2)
		spec = self._random_spec(rng, 3)
		problem = CalibrationProblem(design, cell_table, spec)
		for trial in range(5):
			beta = rng.normal(0, 1, size = problem.column_count)
			(value, grad) = problem.value_grad(beta)
			h = 1e-6
			numeric = np.empty_like(beta)
			for i in range(len(beta)):
				step = np.zeros_like(beta)
				step[i] = h
				numeric[i] = (problem.value_grad(beta + step)[0] - problem.value_grad(beta - step)[0]) / (2 * h)
			self.assertLessEqual(np.linalg.norm(numeric - grad), 1e-6 * max(1.0, np.linalg.norm(grad)))

		(value, grad) = DualSolver(design, cell_table, spec).dual_value_grad(beta)
		self.assertAlmostEqual(value, problem.value_grad(beta)[0], places = 12)
		np.testing.assert_allclose(grad, problem.value_grad(beta)[1], atol = 1e-12)

	def test_oracle_equivalence(self):
		rng = np.random.default_rng(3)
		for instance in range(50):
			levels = (2, 4, 3) if (instance % 2 == 0) else (2, 2, 2)
			max_order = 2 + (instance % 3 == 0)
			(design, cell_table) = Instances.instance(levels, seed = 100 + instance, max_order = max_order)
			spec = self._random_spec(rng, max_order, **TIGHT)
			dual_solution = DualSolver.calibrate(design, cell_table, spec)
			primal_solution = PrimalOracle.brute_force_primal(design, cell_table, spec)
			self.assertLessEqual(np.max(np.abs(dual_solution.gamma - primal_solution.gamma)), 1e-6, "instance %d" % (instance))
			kkt = KKTReport.evaluate(dual_solution, design, cell_table, spec)
			self.assertLessEqual(abs(kkt.duality_gap), 1e-6 * (1 + abs(kkt.primal_objective)), "instance %d" % (instance))

	def test_stationarity(self):
		rng = np.random.default_rng(4)
		for instance in range(10):
			(design, cell_table) = Instances.instance((2, 4, 3), seed = 200 + instance, occupied = (instance % 2 == 0))
			spec = self._random_spec(rng, 3)
			solution = DualSolver.calibrate(design, cell_table, spec)
			self.assertTrue(solution.converged)
			kkt = KKTReport.evaluate(solution, design, cell_table, spec)
			self.assertEqual(len(kkt.orders), 2)
			self.assertLessEqual(kkt.max_stationarity_violation, 1e-6)
			self.assertLessEqual(kkt.first_order_residual, spec.balance_tol * cell_table.N)

	def test_exact_margins(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 5, max_order = 2, occupied = False)
		spec = CalibrationSpec(2, lambdas = 0.01)
		solution = DualSolver.calibrate(design, cell_table, spec)
		self.assertTrue(solution.converged)
		first_order = solution.imbalance(design)[design.order_slice(1)]
		self.assertLessEqual(np.max(np.abs(first_order)), spec.balance_tol * cell_table.N)
		self.assertAlmostEqual(solution.total_weight, cell_table.N, delta = spec.balance_tol * cell_table.N)
		self.assertTrue(np.all(solution.gamma >= 0))

	def test_raking_matches_linear_calibration(self):
		for instance in range(20):
			levels = (2, 2) if (instance % 2 == 0) else (2, 4, 3)
			(design, cell_table) = Instances.instance(levels, seed = 300 + instance, max_order = 1)
			spec = CalibrationSpec.raking(lower = -math.inf, **TIGHT)
			solution = DualSolver.calibrate(design, cell_table, spec)
			np.testing.assert_allclose(solution.gamma, self._linear_calibration(design, cell_table), rtol = 1e-8, atol = 1e-8)

	def test_large_lambda_approaches_raking(self):
		(design, cell_table) = Instances.instance((2, 2), seed = 6)
		raking = DualSolver.calibrate(design, cell_table, CalibrationSpec(2, lambdas = math.inf, lower = -math.inf, **TIGHT))
		np.testing.assert_allclose(raking.gamma, self._linear_calibration(design, cell_table), atol = 1e-8)
		heavy = DualSolver.calibrate(design, cell_table, CalibrationSpec(2, lambdas = 1e8, lower = -math.inf, **TIGHT))
		np.testing.assert_allclose(heavy.gamma, raking.gamma, atol = 1e-6)

	def test_zero_lambda_recovers_poststratification(self):
		for (instance, levels) in enumerate([ (2, 2), (2, 4, 3), (2, 2, 2) ]):
			(design, cell_table) = Instances.instance(levels, seed = 400 + instance)
			spec = CalibrationSpec.poststratification(design.max_order, **TIGHT)
			solution = DualSolver.calibrate(design, cell_table, spec)
			expected = cell_table.pop_counts / cell_table.resp_counts
			np.testing.assert_allclose(solution.gamma, expected, rtol = 1e-8)
			np.testing.assert_allclose(solution.gamma, Weighting.poststrat_weights(cell_table).gamma, rtol = 1e-8)

	def test_bounds_respected(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 7, max_order = 2)
		spec = CalibrationSpec(2, lambdas = 1e-3, lower = 1.0, upper = 12.0)
		solution = DualSolver.calibrate(design, cell_table, spec)
		support = cell_table.support
		self.assertTrue(np.all(solution.gamma[support] >= 1.0))
		self.assertTrue(np.all(solution.gamma[support] <= 12.0))

	def test_bounded_oracle_equivalence(self):
		rng = np.random.default_rng(8)
		for instance in range(5):
			(design, cell_table) = Instances.instance((2, 4, 3), seed = 500 + instance, max_order = 2)
			spec = self._random_spec(rng, 2, lower = 0.8, upper = 15.0, **TIGHT)
			dual_solution = DualSolver.calibrate(design, cell_table, spec)
			primal_solution = PrimalOracle.brute_force_primal(design, cell_table, spec)
			self.assertLessEqual(np.max(np.abs(dual_solution.gamma - primal_solution.gamma)), 1e-6, "instance %d" % (instance))

	def test_higher_order_imbalance_below_raking(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 9, max_order = 3, occupied = False)
		raking = DualSolver.calibrate(design, cell_table, CalibrationSpec(3, lambdas = math.inf, **TIGHT))
		multilevel = DualSolver.calibrate(design, cell_table, CalibrationSpec(3, lambdas = 1.0, **TIGHT))
		raking_imbalance = raking.imbalance_by_order(design)
		multilevel_imbalance = multilevel.imbalance_by_order(design)
		higher = lambda imbalance: sum(imbalance[k] ** 2 for k in (2, 3))
		self.assertLessEqual(higher(multilevel_imbalance), higher(raking_imbalance) * (1 + 1e-8) + 1e-8)
		self.assertGreaterEqual(multilevel.sum_sq_weights, raking.sum_sq_weights * (1 - 1e-8))

	def test_margin_without_respondents_infeasible(self):
		schema = CovariateSchema.from_levels([ 2, 2 ])
		cell_table = CellTable(schema, [ 10, 10, 10, 10 ], [ 2, 3, 0, 0 ])
		design = InteractionDesign(schema, 2)
		with self.assertRaises(InfeasibleCalibrationException):
			DualSolver.calibrate(design, cell_table, CalibrationSpec(2))

	def test_upper_bound_infeasible(self):
		schema = CovariateSchema.from_levels([ 2, 2 ])
		cell_table = CellTable(schema, [ 50, 50, 50, 50 ], [ 5, 5, 5, 5 ])
		design = InteractionDesign(schema, 2)
		with self.assertRaises(InfeasibleCalibrationException):
			DualSolver.calibrate(design, cell_table, CalibrationSpec(2, upper = 1.0))

	def test_no_respondents(self):
		schema = CovariateSchema.from_levels([ 2 ])
		cell_table = CellTable(schema, [ 10, 10 ], [ 0, 0 ])
		with self.assertRaises(InfeasibleCalibrationException):
			DualSolver.calibrate(InteractionDesign(schema, 1), cell_table, CalibrationSpec.raking())

	def test_respondents_outside_population(self):
		schema = CovariateSchema.from_levels([ 2, 2 ])
		cell_table = CellTable(schema, [ 10, 20, 30, 0 ], [ 2, 2, 2, 2 ])
		self.assertEqual(list(cell_table.balance_support), [ 0, 1, 2 ])
		design = InteractionDesign(schema, 1)
		solution = DualSolver.calibrate(design, cell_table, CalibrationSpec.raking(**TIGHT))
		self.assertTrue(solution.converged)
		np.testing.assert_allclose(solution.gamma, [ 5, 10, 15, 0 ], rtol = 1e-6, atol = 1e-9)
		self.assertAlmostEqual(solution.total_weight, 60, places = 6)
		with self.assertRaises(InfeasibleCalibrationException):
			DualSolver.calibrate(design, CellTable(schema, [ 10, 10, 0, 0 ], [ 0, 0, 3, 3 ]), CalibrationSpec.raking())

	def test_warm_start(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 11, max_order = 2)
		spec = CalibrationSpec(2, lambdas = 0.5, **TIGHT)
		solver = DualSolver(design, cell_table, spec)
		cold = solver.solve()
		warm = solver.solve(beta0 = cold.beta)
		self.assertTrue(warm.converged)
		np.testing.assert_allclose(solver.recover_primal(warm).gamma, solver.recover_primal(cold).gamma, atol = 1e-8)
		with self.assertRaises(InvalidCalibrationSpecException):
			solver.solve(beta0 = np.zeros(3))

	def test_unregularized_fit(self):
		(design, cell_table) = Instances.instance((2, 2), seed = 12, outcomes = False)
		solution = PrimalOracle.solve_unregularized(design, cell_table, upper = 100.0)
		np.testing.assert_allclose(solution.gamma, cell_table.pop_counts / cell_table.resp_counts, rtol = 1e-8)

	def test_tradeoff_path_monotone(self):
		curves = 0
		for seed in range(40):
			if curves == 20:
				break
			levels = (2, 4, 3) if (seed % 2 == 0) else (2, 2, 2)
			(design, cell_table) = Instances.instance(levels, seed = 100 + seed, max_order = 2, occupied = (seed % 4 < 2), outcomes = False)
			grid = TradeoffCurve.default_grid(cell_table)
			self.assertEqual(len(grid), 25)
			try:
				curve = TradeoffCurve.sweep(design, cell_table, grid = grid)
			except InfeasibleCalibrationException:
				continue
			curves += 1
			self.assertEqual(len(curve.points), 25)
			self.assertTrue(curve.is_monotone(rtol = 1e-6), seed)

			# the selection again, from the emitted curve alone
			curve_table = curve.to_dataframe()
			raking_imbalance = curve_table["higher_order_imbalance_sq"].iloc[0]
			points = curve_table.iloc[1:]
			converged = points[points["status"] == SolverStatus.Converged.value]
			floor = converged.loc[converged["lambda"].idxmin(), "higher_order_imbalance_sq"]
			possible = raking_imbalance - floor
			if possible <= 0:
				expected = converged["lambda"].max()
			else:
				eligible = converged[raking_imbalance - converged["higher_order_imbalance_sq"] >= TradeoffCurve.SELECTION_SHARE * possible]
				expected = eligible["lambda"].max()
			self.assertEqual(curve.selected.lambda_, expected, seed)
			self.assertEqual(list(curve_table.loc[curve_table["selected"], "lambda"]), [ expected ])
		self.assertEqual(curves, 20)

	@unittest.skipUnless(os.environ.get("MULTICAL_SLOW_TESTS") == "1", "set MULTICAL_SLOW_TESTS=1 for survey-sized simulations")
	def test_survey_scale_solve(self):
		schema = Presets.survey_schema()
		self.assertEqual(schema.cell_count, 51840)
		rng = np.random.default_rng(5)
		pop_counts = rng.poisson(1.0, size = schema.cell_count).astype(float)
		populated = np.flatnonzero(pop_counts > 0)
		respondent_cells = rng.choice(populated, size = 2000, p = pop_counts[populated] / pop_counts.sum())
		resp_counts = np.bincount(respondent_cells, minlength = schema.cell_count).astype(float)
		cell_table = CellTable(schema, pop_counts, resp_counts)
		self.assertEqual(cell_table.n, 2000)

		start = time.perf_counter()
		design = InteractionDesign(schema, 2)
		raking = DualSolver.calibrate(design, cell_table, CalibrationSpec(2, lambdas = math.inf))
		multilevel = DualSolver.calibrate(design, cell_table, CalibrationSpec(2, lambdas = 1.0 / cell_table.N))
		elapsed = time.perf_counter() - start
		self.assertTrue(raking.converged)
		self.assertTrue(multilevel.converged)
		self.assertAlmostEqual(multilevel.total_weight, cell_table.N, delta = 1e-6 * cell_table.N)
		self.assertLess(elapsed, 60.0)
