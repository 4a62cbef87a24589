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
import numpy as np
from multical.design.CovariateSchema import CovariateSchema
from multical.design.InteractionDesign import InteractionDesign
from multical.simlab.Population import Population
from multical.simlab.OutcomeSpec import OutcomeSpec
from multical.simlab.ResponseModels import ResponseModels
from multical.simlab.EstimatorSuite import EstimatorSuite, SuiteSettings
from multical.Tools import JSONTools
from multical.Exceptions import ConfigurationException, SimulationException

_log = logging.getLogger(__spec__.name)

class SimulationConfig():
	"""One simulation study: schema, base population, response mechanism,
	estimator suite, replication count and master seed.

	Response kinds:
	  { "kind": "logit", "max_order": 4, "intercept": -3, "scale": 3.0, "seed": 1 }
	  { "kind": "forest", "reference": <logit response>, "trees": 50, "depth": 4, "seed": 2 }
	  { "kind": "constant", "value": 1.0 }"""
	RESPONSE_KINDS = ("logit", "forest", "constant")

	def __init__(self, schema, population, outcome, response, estimators = EstimatorSuite.DEFAULT, settings = None, reps = 1000, seed = 0):
		self._schema = schema
		self._population = dict(population)
		self._outcome = outcome
		self._response = dict(response)
		self._estimators = list(estimators)
		self._settings = settings or SuiteSettings()
		self._reps = int(reps)
		self._seed = seed
		self._plausibilize()

	def _plausibilize(self):
		if self._response.get("kind") not in self.RESPONSE_KINDS:
			raise ConfigurationException(f"Response kind must be one of {', '.join(self.RESPONSE_KINDS)}, got {self._response.get('kind')}.")
		if self._reps < 1:
			raise ConfigurationException(f"Replication count must be positive, got {self._reps}.")
		if int(self._population.get("size", 0)) < 1:
			raise ConfigurationException("Population size must be positive.")

	@classmethod
	def from_json(cls, data):
		try:
			return cls(
				schema = CovariateSchema.from_json(data["schema"]),
				population = data["population"],
				outcome = OutcomeSpec.from_json(data["outcome"]),
				response = data["response"],
				estimators = data.get("estimators", EstimatorSuite.DEFAULT),
				settings = SuiteSettings.from_json(data.get("settings", { })),
				reps = data.get("reps", 1000),
				seed = data.get("seed", 0),
			)
		except KeyError as e:
			raise ConfigurationException(f"Simulation configuration lacks required key {e}.") from e
		except TypeError as e:
			raise ConfigurationException(f"Simulation configuration is malformed: {e}") from e

	@classmethod
	def load_from_file(cls, filename):
		return cls.from_json(JSONTools.read(filename))

	def to_json(self):
		return {
			"schema":		self._schema.to_json(),
			"population":	self._population,
			"outcome":		self._outcome.to_json(),
			"response":		self._response,
			"estimators":	self._estimators,
			"settings":		self._settings.to_json(),
			"reps":			self._reps,
			"seed":			self._seed,
		}

	@property
	def schema(self):
		return self._schema

	@property
	def reps(self):
		return self._reps

	@property
	def seed(self):
		return self._seed

	def with_overrides(self, reps = None, seed = None):
		return SimulationConfig(self._schema, self._population, self._outcome, self._response, estimators = self._estimators, settings = self._settings, reps = self._reps if (reps is None) else reps, seed = self._seed if (seed is None) else seed)

	def _tilts(self):
		tilts = { }
		for entry in self._population.get("tilts", [ ]):
			tilts[(int(entry["a"]), int(entry["b"]))] = np.asarray(entry["matrix"], dtype = float)
		return tilts

	def _logit_propensity(self, response):
		max_order = min(int(response.get("max_order", 1)), self._schema.d)
		design = InteractionDesign(self._schema, max_order)
		if "coefficients" in response:
			return ResponseModels.logit(design, response["coefficients"], scale = response.get("scale", 1.0))
		(propensity, _) = ResponseModels.random_logit(design, response.get("seed", 0), intercept = response.get("intercept", -3.0), scale = response.get("scale", 3.0))
		return propensity

	def _propensity(self, population):
		response = self._response
		if response["kind"] == "constant":
			value = float(response.get("value", 1.0))
			return np.full(self._schema.cell_count, value)
		elif response["kind"] == "logit":
			return self._logit_propensity(response)
		else:
			reference = response.get("reference", { "kind": "logit", "max_order": 2 })
			if reference.get("kind") != "logit":
				raise ConfigurationException("The forest response is fitted to a reference draw from a logit response.")
			reference_population = population.with_propensity(self._logit_propensity(reference))
			seed = response.get("seed", 0)
			respondent = reference_population.draw_respondents(np.random.default_rng(seed))
			return ResponseModels.forest(population, respondent, trees = response.get("trees", 50), depth = response.get("depth", 4), seed = seed, pi_min = response.get("pi_min", ResponseModels.PI_MIN))

	def build_population(self):
		population = Population.generate(self._schema, int(self._population["size"]), self._outcome, self._population.get("seed", self._seed), marginals = self._population.get("marginals"), tilts = self._tilts())
		population = population.with_propensity(self._propensity(population))
		_log.info("Population of %d units over %d cells, mean %.6f, min propensity %.4g", population.N, self._schema.cell_count, population.mean, population.min_propensity)
		return population

	def build_suite(self):
		return EstimatorSuite(self._schema, names = self._estimators, settings = self._settings)
