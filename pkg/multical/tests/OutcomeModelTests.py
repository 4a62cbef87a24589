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

import unittest
import numpy as np
from multical.design.CovariateSchema import CovariateSchema
from multical.design.CellTable import CellTable
from multical.design.InteractionDesign import InteractionDesign
from multical.outcomes.BaseOutcomeModel import BaseOutcomeModel
from multical.outcomes.ConstantModel import ConstantModel
from multical.outcomes.LinearModels import PriorCovariance, RidgeModel, MapLinearModel
from multical.outcomes.SmootherModel import SmootherModel
from multical.outcomes.BaggedTreesModel import BaggedTreesModel
from multical.Exceptions import SingularOutcomeModelException, UndefinedPredictionException, OutcomeModelRegistryException, OutcomeModelException
from .Instances import Instances

class OutcomeModelTests(unittest.TestCase):
	def test_ridge_normal_equations(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 20, max_order = 2, occupied = False)
		model = RidgeModel.fit(design, cell_table, penalty = 2.5)
		self.assertLessEqual(model.normal_equation_residual(), 1e-8)

		support = cell_table.support
		X = design.rows(support).toarray()
		n = cell_table.resp_counts[support]
		ybar = cell_table.cell_means()[support]
		Q = np.diag(PriorCovariance.from_penalty(2.5, 2).diagonal(design, 2))
		expected = np.linalg.solve(X.T @ (n[:, None] * X) + Q, X.T @ (n * ybar))
		np.testing.assert_allclose(model.coefficients, expected, atol = 1e-8)
		np.testing.assert_allclose(model.predict_cells(), design.matrix() @ expected, atol = 1e-8)

	def test_ridge_main_penalty(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 22, max_order = 2)
		model = RidgeModel.fit(design, cell_table, penalty = 2.5, main_penalty = 40.0)
		self.assertEqual(model.parameters["main_penalty"], 40.0)
		self.assertLessEqual(model.normal_equation_residual(), 1e-8)

		support = cell_table.support
		X = design.rows(support).toarray()
		n = cell_table.resp_counts[support]
		ybar = cell_table.cell_means()[support]
		q = np.concatenate([ [ 0.0 ], np.full(design.order_size(1) - 1, 40.0), np.full(design.order_size(2), 2.5) ])
		expected = np.linalg.solve(X.T @ (n[:, None] * X) + np.diag(q), X.T @ (n * ybar))
		np.testing.assert_allclose(model.coefficients, expected, atol = 1e-8)

		# only the intercept survives
		flat = RidgeModel.fit(design, cell_table, penalty = 1e12, main_penalty = 1e12)
		np.testing.assert_allclose(flat.predict_cells(), (n * ybar).sum() / n.sum(), atol = 1e-6)

	def test_ridge_cross_validation(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 21, max_order = 2)
		first = RidgeModel.fit(design, cell_table, seed = 3)
		second = RidgeModel.fit(design, cell_table, seed = 3)
		self.assertEqual(first.parameters["penalty"], second.parameters["penalty"])
		self.assertIn(first.parameters["penalty"], RidgeModel.DEFAULT_GRID)
		self.assertEqual(len(first.parameters["cross_validation"]["errors"]), len(RidgeModel.DEFAULT_GRID))
		np.testing.assert_array_equal(first.predict_cells(), second.predict_cells())

	def test_prior_covariance(self):
		prior = PriorCovariance({ 2: 3.0 })
		self.assertEqual(prior.q(1), 0.0)
		self.assertEqual(prior.q(2), 3.0)
		self.assertEqual(prior.q(3), 0.0)
		self.assertEqual(prior.to_json(), { "1": 0.0, "2": 3.0 })
		with self.assertRaises(SingularOutcomeModelException):
			PriorCovariance({ 2: -1.0 })

	def test_map_singular(self):
		schema = CovariateSchema.from_levels([ 2, 2 ])
		cell_table = CellTable(schema, [ 10, 10, 10, 10 ], [ 2, 2, 2, 0 ], [ 1, 1, 1, 0 ], [ 1, 1, 1, 0 ])
		design = InteractionDesign(schema, 2)
		with self.assertRaises(SingularOutcomeModelException):
			MapLinearModel.fit(design, cell_table, prior = { 1: 0.0, 2: 0.0 })
		model = MapLinearModel.fit(design, cell_table, prior = { 1: 0.0, 2: 1.0 })
		self.assertTrue(np.all(np.isfinite(model.predict_cells())))

	def test_constant(self):
		cell_table = Instances.cell_table((2, 3), seed = 22)
		model = ConstantModel.fit(None, cell_table)
		np.testing.assert_allclose(model.predict_cells(), cell_table.respondent_mean())
		self.assertEqual(ConstantModel.fit(None, cell_table, value = 0.25).value, 0.25)
		self.assertEqual(model.to_json()["kind"], "constant")

	def test_diagonal_smoother(self):
		cell_table = Instances.cell_table((2, 4, 3), seed = 4, occupied = False)
		empty = cell_table.empty_populated_cells()
		self.assertGreater(len(empty), 0)
		model = SmootherModel.diagonal(cell_table)
		predictions = model.predict_cells()
		self.assertTrue(np.all(np.isnan(predictions[empty])))
		support = cell_table.support
		np.testing.assert_allclose(predictions[support], cell_table.cell_means()[support])
		np.testing.assert_allclose(model.predictions_for(support), cell_table.cell_means()[support])
		with self.assertRaises(UndefinedPredictionException):
			model.predictions_for(empty, purpose = "bias correction")

	def test_uniform_smoother(self):
		cell_table = Instances.cell_table((2, 4, 3), seed = 23, occupied = False)
		model = SmootherModel.fit(None, cell_table, smoother = "uniform")
		np.testing.assert_allclose(model.predict_cells(), cell_table.respondent_mean())
		with self.assertRaises(OutcomeModelException):
			SmootherModel.fit(None, cell_table, smoother = "gaussian")

	def test_depth_zero_trees(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 24, occupied = False)
		model = BaggedTreesModel.fit(design, cell_table, trees = 5, depth = 0, seed = 1)
		np.testing.assert_allclose(model.predict_cells(), cell_table.respondent_mean())

	def test_single_split_tree(self):
		schema = CovariateSchema.from_levels([ 2, 3 ])
		cell_table = CellTable(schema, [ 10 ] * 6, [ 4 ] * 6, [ 0, 0, 0, 4, 4, 4 ], [ 0, 0, 0, 4, 4, 4 ])
		design = InteractionDesign(schema, 1)
		model = BaggedTreesModel.fit(design, cell_table, trees = 1, depth = 1, bootstrap = False)
		np.testing.assert_allclose(model.predict_cells(), [ 0, 0, 0, 1, 1, 1 ])
		self.assertEqual(model.ensemble.trees[0].leaf_count, 2)

	def test_trees_deterministic(self):
		(design, cell_table) = Instances.instance((2, 4, 3), seed = 25)
		first = BaggedTreesModel.fit(design, cell_table, trees = 10, depth = 3, seed = 5)
		second = BaggedTreesModel.fit(design, cell_table, trees = 10, depth = 3, seed = 5)
		np.testing.assert_array_equal(first.predict_cells(), second.predict_cells())
		with self.assertRaises(OutcomeModelException):
			BaggedTreesModel.fit(design, cell_table, trees = 0)

	def test_registry(self):
		self.assertTrue({ "constant", "ridge", "map", "smoother", "trees" } <= set(BaseOutcomeModel.names()))
		self.assertIs(BaseOutcomeModel.get_class("ridge"), RidgeModel)
		cell_table = Instances.cell_table((2, 3), seed = 26)
		model = BaseOutcomeModel.fit_by_name("constant", None, cell_table, value = 0.5)
		self.assertEqual(model.value, 0.5)
		with self.assertRaises(OutcomeModelRegistryException):
			BaseOutcomeModel.get_class("spline")

		class DuplicateModel(BaseOutcomeModel):
			_NAME = "ridge"
		with self.assertRaises(OutcomeModelRegistryException):
			BaseOutcomeModel.register(DuplicateModel)

		class NamelessModel(BaseOutcomeModel):
			pass
		with self.assertRaises(OutcomeModelRegistryException):
			BaseOutcomeModel.register(NamelessModel)
