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
import functools
import collections
from multical.design.InteractionDesign import InteractionDesign
from multical.solver.CalibrationSpec import CalibrationSpec
from multical.solver.DualSolver import DualSolver
from multical.estimators.Weighting import Weighting
from multical.estimators.ModelAssisted import ModelAssisted
from multical.estimators.ErrorDecomposition import ErrorDecomposition
from multical.outcomes.BaseOutcomeModel import BaseOutcomeModel
from multical.simlab.Oracles import Oracles
from multical.Enums import EstimationMethod
from multical.Exceptions import MultiCalException, ConvergenceException, SimulationException

_log = logging.getLogger(__spec__.name)
Estimator = collections.namedtuple("Estimator", [ "name", "kind", "base", "model" ])
Outcome = collections.namedtuple("Outcome", [ "report", "identity_residual" ])

class ReplicationContext():
	"""Everything the estimators of one replication share: the tabulated draw,
	weights per base method and fitted outcome models, each computed at most
	once."""

	def __init__(self, suite, population, respondent):
		self._suite = suite
		self._population = population
		self._respondent = respondent
		self._weights = { }
		self._models = { }

	@property
	def population(self):
		return self._population

	@property
	def respondent(self):
		return self._respondent

	@property
	def design(self):
		return self._suite.design

	@functools.cached_property
	def cell_table(self):
		return self._population.cell_table(self._respondent)

	@functools.cached_property
	def true_cell_means(self):
		return self._population.cell_means()

	@functools.cached_property
	def truth(self):
		return self._population.mean

	def _solve(self, spec, method):
		solution = DualSolver.calibrate(self.design, self.cell_table, spec, method = method)
		if not solution.converged:
			raise ConvergenceException(f"{method.value} weights did not converge (gradient {solution.dual.grad_norm:.3e}).")
		return solution

	def weights(self, base):
		if base not in self._weights:
			settings = self._suite.settings
			if base == "raking":
				self._weights[base] = self._solve(CalibrationSpec.raking(lower = settings.lower, upper = settings.upper), EstimationMethod.Raking)
			elif base == "multilevel":
				spec = CalibrationSpec(settings.multilevel_order, lambdas = settings.solver_lambdas(self.cell_table.N), lower = settings.lower, upper = settings.upper)
				self._weights[base] = self._solve(spec, EstimationMethod.Multilevel)
			elif base == "poststrat":
				self._weights[base] = Weighting.poststrat_weights(self.cell_table)
			else:
				raise SimulationException(f"Unknown weighting base '{base}'.")
		return self._weights[base]

	def model(self, name):
		if name not in self._models:
			self._models[name] = BaseOutcomeModel.fit_by_name(name, self.design, self.cell_table, **self._suite.settings.model_options(name))
		return self._models[name]

class SuiteSettings():
	"""Hyperparameters shared by all estimators of a suite. Multilevel penalties
	are given on the population count scale and divided by N before solving."""
	MODEL_DEFAULTS = {
		"ridge":	{ "order": 3 },
		"map":		{ "order": 2 },
		"trees":	{ "trees": 50, "depth": 4, "seed": 0 },
		"smoother":	{ },
		"constant":	{ },
	}

	def __init__(self, multilevel_order = 2, lambdas = 1.0, lower = 0.0, upper = math.inf, models = None, alpha = 0.05):
		self._multilevel_order = multilevel_order
		self._lambdas = lambdas
		self._lower = float(lower)
		self._upper = float(upper)
		self._models = { name: dict(options) for (name, options) in self.MODEL_DEFAULTS.items() }
		for (name, options) in (models or { }).items():
			self._models.setdefault(name, { }).update(options)
		self._alpha = alpha

	@classmethod
	def from_json(cls, data):
		return cls(**data)

	def to_json(self):
		return {
			"multilevel_order":	self._multilevel_order,
			"lambdas":			self._lambdas,
			"lower":			self._lower,
			"upper":			self._upper,
			"models":			self._models,
			"alpha":			self._alpha,
		}

	@property
	def multilevel_order(self):
		return self._multilevel_order

	@property
	def lower(self):
		return self._lower

	@property
	def upper(self):
		return self._upper

	@property
	def alpha(self):
		return self._alpha

	def solver_lambdas(self, N):
		if isinstance(self._lambdas, dict):
			return { int(k): float(value) / N for (k, value) in self._lambdas.items() }
		if isinstance(self._lambdas, (list, tuple)):
			return [ float(value) / N for value in self._lambdas ]
		return float(self._lambdas) / N

	def model_options(self, name):
		return dict(self._models.get(name, { }))

	def model_order(self, name):
		return self._models.get(name, { }).get("order", 1)

class EstimatorSuite():
	"""Named estimators run on every replication:
	raking, multilevel, poststrat: weighting estimators,
	mrp:<model>: population-weighted model predictions,
	drp:<base>:<model>: base weights plus the model's bias correction,
	oracle_ht: Horvitz-Thompson with the true propensities."""
	Estimator = Estimator
	Outcome = Outcome
	DEFAULT = ("raking", "multilevel", "poststrat", "mrp:ridge", "drp:raking:ridge", "drp:multilevel:ridge", "mrp:trees", "drp:multilevel:trees", "oracle_ht")
	WEIGHTING_BASES = ("raking", "multilevel", "poststrat")

	def __init__(self, schema, names = DEFAULT, settings = None):
		self._settings = settings or SuiteSettings()
		self._estimators = [ self.parse(name) for name in names ]
		if len(set(names)) != len(names):
			raise SimulationException("Estimator names in a suite must be unique.")
		orders = [ 1 ]
		for estimator in self._estimators:
			if estimator.base == "multilevel":
				orders.append(self._settings.multilevel_order)
			if estimator.model is not None:
				orders.append(self._settings.model_order(estimator.model))
		max_order = max(orders)
		if max_order > schema.d:
			raise SimulationException(f"Suite needs interaction order {max_order}, schema has only {schema.d} covariates.")
		self._design = InteractionDesign(schema, max_order)

	@classmethod
	def parse(cls, name):
		parts = name.split(":")
		if (len(parts) == 1) and (parts[0] in cls.WEIGHTING_BASES):
			return cls.Estimator(name = name, kind = "weighting", base = parts[0], model = None)
		if (len(parts) == 1) and (parts[0] == "oracle_ht"):
			return cls.Estimator(name = name, kind = "oracle_ht", base = None, model = None)
		if (len(parts) == 2) and (parts[0] == "mrp"):
			BaseOutcomeModel.get_class(parts[1])
			return cls.Estimator(name = name, kind = "mrp", base = None, model = parts[1])
		if (len(parts) == 3) and (parts[0] == "drp") and (parts[1] in cls.WEIGHTING_BASES):
			BaseOutcomeModel.get_class(parts[2])
			return cls.Estimator(name = name, kind = "drp", base = parts[1], model = parts[2])
		raise SimulationException(f"Cannot parse estimator name '{name}'; expected one of {', '.join(cls.WEIGHTING_BASES)}, oracle_ht, mrp:<model> or drp:<base>:<model>.")

	@property
	def settings(self):
		return self._settings

	@property
	def design(self):
		return self._design

	@property
	def names(self):
		return [ estimator.name for estimator in self._estimators ]

	def context(self, population, respondent):
		return ReplicationContext(self, population, respondent)

	def evaluate_one(self, estimator, context):
		alpha = self._settings.alpha
		if estimator.kind == "weighting":
			weights = context.weights(estimator.base)
			report = Weighting.weighted_mean(weights, alpha = alpha, label = estimator.name)
			residual = ErrorDecomposition.weighting(weights, context.true_cell_means).residual
		elif estimator.kind == "oracle_ht":
			report = Oracles.oracle_ht(context.population, context.respondent, alpha = alpha)
			weights = Weighting.inverse_propensity_weights(context.cell_table, context.population.propensity)
			residual = ErrorDecomposition.weighting(weights, context.true_cell_means).residual
		elif estimator.kind == "mrp":
			report = ModelAssisted.mrp_estimate(context.model(estimator.model), label = estimator.name)
			residual = None
		else:
			model = context.model(estimator.model)
			weights = context.weights(estimator.base)
			report = ModelAssisted.drp_estimate(model, weights, alpha = alpha, label = estimator.name)
			residual = ErrorDecomposition.drp(model, weights, context.true_cell_means, report.estimate).residual
		return self.Outcome(report = report, identity_residual = residual)

	def evaluate(self, context):
		"""Runs every estimator; returns {name: Outcome or the exception that
		stopped it}."""
		results = { }
		for estimator in self._estimators:
			try:
				results[estimator.name] = self.evaluate_one(estimator, context)
			except ConvergenceException as e:
				_log.warning("%s failed: %s", estimator.name, e)
				results[estimator.name] = e
			except SimulationException:
				raise
			except MultiCalException as e:
				_log.debug("%s failed: [%s] %s", estimator.name, type(e).__name__, e)
				results[estimator.name] = e
		return results

	def to_json(self):
		return {
			"estimators":	self.names,
			"settings":		self._settings.to_json(),
			"design":		self._design.to_json(),
		}
