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
import unittest
import numpy as np
import pandas.testing
from multical.design.CovariateSchema import CovariateSchema
from multical.design.InteractionDesign import InteractionDesign
from multical.simlab.OutcomeSpec import OutcomeSpec
from multical.simlab.Population import Population
from multical.simlab.ResponseModels import ResponseModels
from multical.simlab.Oracles import Oracles
from multical.simlab.EstimatorSuite import EstimatorSuite
from multical.simlab.Replications import Replications
from multical.simlab.SimulationConfig import SimulationConfig
from multical.simlab.Presets import Presets
from multical.Exceptions import SimulationException, ConfigurationException, InvalidProbabilityException

class SimlabTests(unittest.TestCase):
	def _run(self, preset, reps, jobs = 1):
		config = Presets.get(preset).with_overrides(reps = reps)
		return Replications.run_replications(config.build_population(), config.build_suite(), config.reps, config.seed, jobs = jobs)

	def test_logit_response(self):
		design = InteractionDesign(CovariateSchema.from_levels([ 2, 4, 3 ]), 2)
		np.testing.assert_allclose(ResponseModels.logit(design, np.zeros(design.total_columns)), 0.5)
		coefficients = np.zeros(design.total_columns)
		coefficients[0] = -2
		np.testing.assert_allclose(ResponseModels.logit(design, coefficients, scale = 5.0), 0.11920292202211755)
		with self.assertRaises(SimulationException):
			ResponseModels.logit(design, np.zeros(3))

	def test_population_generate(self):
		schema = CovariateSchema.from_levels([ 2, 4, 3 ])
		population = Population.generate(schema, 2400, OutcomeSpec("reference_indicator"), seed = 1)
		self.assertEqual(population.N, 2400)
		self.assertEqual(population.pop_counts.sum(), 2400)
		self.assertTrue(np.all(population.pop_counts >= 50))
		self.assertTrue(np.all(population.pop_counts <= 150))
		np.testing.assert_array_equal(population.outcomes, population.cells == 0)
		again = Population.generate(schema, 2400, OutcomeSpec("reference_indicator"), seed = 1)
		np.testing.assert_array_equal(population.cells, again.cells)

	def test_invalid_propensity(self):
		schema = CovariateSchema.from_levels([ 2 ])
		population = Population(schema, [ 0, 1 ], [ 1.0, 0.0 ])
		with self.assertRaises(InvalidProbabilityException):
			population.with_propensity([ 0.5, 0.0 ])
		with self.assertRaises(InvalidProbabilityException):
			population.with_propensity([ 0.5, 1.5 ])
		with self.assertRaises(InvalidProbabilityException):
			Oracles.oracle_ht(population, [ True, True ])

	def test_oracle_ht(self):
		schema = CovariateSchema.from_levels([ 2 ])
		population = Population(schema, [ 0, 0, 0, 1, 1 ], [ 1, 0, 1, 2, 4 ], propensity = [ 0.5, 0.25 ])
		report = Oracles.oracle_ht(population, [ True, False, True, True, False ])
		self.assertAlmostEqual(report.estimate, 2.4, places = 12)
		self.assertAlmostEqual(report.variance, 52 / 25, places = 12)
		self.assertAlmostEqual(population.oracle_variance(), 4 / 15, places = 12)

		census = population.with_propensity([ 1.0, 1.0 ])
		report = Oracles.oracle_ht(census, [ True ] * 5)
		self.assertAlmostEqual(report.estimate, census.mean, places = 12)
		self.assertEqual(census.oracle_variance(), 0.0)
		self.assertEqual(report.variance, 0.0)

	def test_forest_response(self):
		config = Presets.get("small")
		population = config.build_population()
		respondent = population.draw_respondents(np.random.default_rng(3))
		propensity = ResponseModels.forest(population, respondent, trees = 5, depth = 2, seed = 4)
		self.assertEqual(propensity.shape, (population.schema.cell_count, ))
		self.assertTrue(np.all(propensity >= ResponseModels.PI_MIN))
		self.assertTrue(np.all(propensity <= 1))

	def test_balance_bound(self):
		population = Presets.get("small").build_population()
		self.assertEqual(population.schema.levels, (2, 4, 3))
		self.assertEqual(population.N, 5000)
		self.assertGreaterEqual(population.min_propensity, 0.02)
		report = Oracles.balance_bound_check(population, draws = 100, seed = 2)
		self.assertEqual(len(report.draws), 100)
		self.assertEqual(report.violations, 0)
		self.assertTrue(report.holds)
		self.assertGreaterEqual(report.condition_number, 1.0)
		with self.assertRaises(SimulationException):
			Oracles.balance_bound_check(population, design = InteractionDesign(population.schema, 1), draws = 1)

	def test_population_regression(self):
		schema = CovariateSchema.from_levels([ 2, 3 ])
		design = InteractionDesign(schema, 2)
		cells = np.repeat(np.arange(6), [ 3, 4, 5, 6, 7, 8 ])
		levels = schema.decode_many(cells)
		additive = np.array([ 0.0, 1.0 ])[levels[:, 0]] + np.array([ 0.0, 0.5, 2.0 ])[levels[:, 1]]
		population = Population(schema, cells, additive)
		coefficients = Oracles.population_regression(population, design)
		np.testing.assert_allclose(design.matrix() @ coefficients, population.cell_means(), atol = 1e-10)
		self.assertAlmostEqual(Oracles.order_norms(design, coefficients)[2], 0.0, places = 10)

		interacting = additive + (cells == 5)
		population = Population(schema, cells, interacting)
		coefficients = Oracles.population_regression(population, design)
		np.testing.assert_allclose(design.matrix() @ coefficients, population.cell_means(), atol = 1e-10)
		self.assertGreater(Oracles.order_norms(design, coefficients)[2], 0.1)

	def test_census_recovers_mean(self):
		result = self._run("census", reps = 3)
		for summary in result.summaries():
			self.assertEqual(summary.failures, 0, summary.estimator)
			self.assertEqual(summary.replications, 3)
			self.assertLessEqual(abs(summary.bias), 1e-8, summary.estimator)

	def test_replications_deterministic(self):
		first = self._run("small", reps = 4)
		second = self._run("small", reps = 4)
		pandas.testing.assert_frame_equal(first.to_dataframe(), second.to_dataframe())
		parallel = self._run("small", reps = 4, jobs = 2)
		pandas.testing.assert_frame_equal(first.to_dataframe(), parallel.to_dataframe())

	def test_error_identity(self):
		result = self._run("small", reps = 3)
		for summary in result.summaries():
			self.assertGreaterEqual(summary.rmse, abs(summary.bias) * (1 - 1e-12))
			if summary.max_identity_residual is not None:
				self.assertLessEqual(summary.max_identity_residual, 1e-10, summary.estimator)
		self.assertEqual(set(result.to_json()["estimators"]), set(result.names))

	def test_config_round_trip(self):
		config = Presets.get("small")
		serialized = config.to_json()
		self.assertEqual(SimulationConfig.from_json(serialized).to_json(), serialized)
		explicit = OutcomeSpec("linear", max_order = 1, coefficients = { 1: [ 1, 0, 0, 0, 0, 0, 0 ] })
		self.assertEqual(OutcomeSpec.from_json(explicit.to_json()).to_json(), explicit.to_json())

	def test_config_errors(self):
		with self.assertRaises(ConfigurationException):
			SimulationConfig.from_json({ })
		with self.assertRaises(ConfigurationException):
			Presets.get("no-such-preset")
		serialized = Presets.get("small").to_json()
		serialized["response"] = { "kind": "uniform" }
		with self.assertRaises(ConfigurationException):
			SimulationConfig.from_json(serialized)
		with self.assertRaises(ConfigurationException):
			Presets.get("small").with_overrides(reps = 0)

	def test_estimator_names(self):
		self.assertEqual(EstimatorSuite.parse("drp:multilevel:ridge").model, "ridge")
		self.assertEqual(EstimatorSuite.parse("raking").kind, "weighting")
		for name in [ "drp:raking", "bogus", "drp:oracle_ht:ridge", "mrp" ]:
			with self.assertRaises(SimulationException):
				EstimatorSuite.parse(name)
		with self.assertRaises(SimulationException):
			EstimatorSuite(Presets.small_schema(), names = [ "raking", "raking" ])

	@unittest.skipUnless(os.environ.get("MULTICAL_SLOW_TESTS") == "1", "set MULTICAL_SLOW_TESTS=1 for survey-sized simulations")
	def test_fourth_order_preset(self):
		config = Presets.get("fourth-order").with_overrides(reps = 200)
		population = config.build_population()
		self.assertEqual(population.schema.cell_count, 51840)
		self.assertTrue(0.01 <= population.min_propensity <= 0.05, population.min_propensity)
		result = Replications.run_replications(population, config.build_suite(), config.reps, config.seed, jobs = 4)
		summaries = { summary.estimator: summary for summary in result.summaries() }
		for name in [ "raking", "multilevel", "mrp:ridge", "drp:raking:ridge" ]:
			self.assertEqual(summaries[name].failures, 0, name)
		self.assertLess(abs(summaries["multilevel"].bias), abs(summaries["raking"].bias))
		self.assertLess(summaries["drp:raking:ridge"].rmse, summaries["raking"].rmse)
		self.assertLess(abs(summaries["drp:raking:ridge"].bias), abs(summaries["mrp:ridge"].bias))

	@unittest.skipUnless(os.environ.get("MULTICAL_SLOW_TESTS") == "1", "set MULTICAL_SLOW_TESTS=1 for survey-sized simulations")
	def test_drp_interval_coverage(self):
		serialized = Presets.get("small").to_json()
		serialized["response"] = dict(serialized["response"], intercept = -1.75)
		serialized["estimators"] = [ "drp:raking:ridge", "drp:multilevel:ridge" ]
		config = SimulationConfig.from_json(serialized).with_overrides(reps = 2000)
		population = config.build_population()
		self.assertGreaterEqual(population.min_propensity, 0.05)
		result = Replications.run_replications(population, config.build_suite(), config.reps, config.seed, jobs = 4)
		for summary in result.summaries():
			self.assertEqual(summary.failures, 0, summary.estimator)
			self.assertTrue(0.92 <= summary.coverage <= 0.98, "%s covers %.4f" % (summary.estimator, summary.coverage))
