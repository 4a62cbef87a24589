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

from multical.design.CovariateSchema import CovariateSchema
from multical.simlab.OutcomeSpec import OutcomeSpec
from multical.simlab.SimulationConfig import SimulationConfig
from multical.simlab.EstimatorSuite import EstimatorSuite, SuiteSettings
from multical.Exceptions import ConfigurationException

class Presets():
	SURVEY_LEVELS = (6, 9, 4, 2, 4, 3, 2, 5)
	SURVEY_NAMES = ("education", "income", "race", "female", "age", "party", "born_again", "region")
	SMALL_LEVELS = (2, 4, 3)
	_PRESETS = { }

	@classmethod
	def register(cls, name):
		def decorator(method):
			cls._PRESETS[name] = method
			return method
		return decorator

	@classmethod
	def names(cls):
		return sorted(cls._PRESETS)

	@classmethod
	def get(cls, name):
		if name not in cls._PRESETS:
			raise ConfigurationException(f"Unknown preset '{name}', choose one of {', '.join(cls.names())}.")
		return cls._PRESETS[name]()

	@classmethod
	def survey_schema(cls):
		return CovariateSchema.from_levels(cls.SURVEY_LEVELS, names = cls.SURVEY_NAMES)

	@classmethod
	def small_schema(cls):
		return CovariateSchema.from_levels(cls.SMALL_LEVELS, names = ("sex", "age", "region"))

@Presets.register("fourth-order")
def _fourth_order():
	"""Eight survey-like covariates; response and outcome both logistic in all
	interactions up to order four and drawn from the same coefficients, so
	selection runs through the interactions that raking leaves unbalanced.
	The ridge model shrinks its main effects, which MRP cannot undo."""
	settings = SuiteSettings(multilevel_order = 2, lambdas = 1.0, models = {
		"ridge":	{ "order": 3, "penalty": 100.0, "main_penalty": 1000.0 },
		"trees":	{ "trees": 50, "depth": 6, "seed": 17 },
	})
	return SimulationConfig(
		schema = Presets.survey_schema(),
		population = { "size": 50000, "seed": 2 },
		outcome = OutcomeSpec("logistic", max_order = 4, intercept = 0.0, scale = 2.0, seed = 4),
		response = { "kind": "logit", "max_order": 4, "intercept": -1.5, "scale": 1.25, "seed": 4 },
		# poststratification has no feasible solution with 51,840 cells
		estimators = tuple(name for name in EstimatorSuite.DEFAULT if (name != "poststrat")),
		settings = settings,
		reps = 1000,
		seed = 1,
	)

@Presets.register("forest-response")
def _forest_response():
	"""Survey-like covariates with response propensities taken from a bagged tree
	ensemble fitted to one reference respondent draw."""
	config = _fourth_order().to_json()
	config["response"] = {
		"kind":			"forest",
		"reference":	{ "kind": "logit", "max_order": 3, "intercept": -2.5, "scale": 2.0, "seed": 5 },
		"trees":		50,
		"depth":		6,
		"seed":			6,
	}
	return SimulationConfig.from_json(config)

@Presets.register("census")
def _census():
	"""Everybody responds; every estimator recovers the population mean."""
	return SimulationConfig(
		schema = Presets.small_schema(),
		population = { "size": 2400, "seed": 7 },
		outcome = OutcomeSpec("logistic", max_order = 2, intercept = 0.0, scale = 1.0, seed = 8),
		response = { "kind": "constant", "value": 1.0 },
		estimators = EstimatorSuite.DEFAULT,
		settings = SuiteSettings(models = { "ridge": { "order": 3, "penalty": 1.0 }, "trees": { "trees": 10, "depth": 3, "seed": 0 } }),
		reps = 20,
		seed = 9,
	)

@Presets.register("small")
def _small():
	"""Three covariates, 24 cells, moderate overlap and an outcome linear in all
	interactions, i.e. well specified for the saturated ridge model."""
	return SimulationConfig(
		schema = Presets.small_schema(),
		population = { "size": 5000, "seed": 10 },
		outcome = OutcomeSpec("linear", max_order = 3, intercept = 1.0, scale = 1.0, noise = 1.0, seed = 11),
		response = { "kind": "logit", "max_order": 3, "intercept": -1.0, "scale": 1.0, "seed": 12 },
		estimators = ("raking", "multilevel", "poststrat", "mrp:ridge", "drp:raking:ridge", "drp:multilevel:ridge", "oracle_ht"),
		settings = SuiteSettings(models = { "ridge": { "order": 3, "penalty": 1.0 } }),
		reps = 200,
		seed = 13,
	)
