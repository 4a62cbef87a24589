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
from multical.design.Tabulation import Tabulation
from multical.Exceptions import InvalidProbabilityException

_log = logging.getLogger(__spec__.name)

class Population():
	"""Synthetic finite population: one cell and one outcome per unit, and
	optionally the true response propensity of every cell."""

	def __init__(self, schema, cells, outcomes, propensity = None, outcome_probabilities = None):
		self._schema = schema
		self._cells = np.asarray(cells, dtype = np.int64)
		self._outcomes = np.asarray(outcomes, dtype = float)
		if self._cells.shape != self._outcomes.shape:
			raise InvalidProbabilityException("Every unit needs exactly one outcome.")
		self._pop_counts = np.bincount(self._cells, minlength = schema.cell_count).astype(float)
		self._outcome_probabilities = outcome_probabilities
		self._propensity = None
		if propensity is not None:
			self._propensity = self._check_propensity(propensity)

	def _check_propensity(self, propensity):
		propensity = np.asarray(propensity, dtype = float)
		if propensity.shape != (self._schema.cell_count, ):
			raise InvalidProbabilityException(f"Propensity table has shape {propensity.shape}, expected {self._schema.cell_count} cells.")
		populated = self._pop_counts > 0
		bad = populated & ~((propensity > 0) & (propensity <= 1))
		if np.any(bad):
			raise InvalidProbabilityException(f"Propensities must lie in (0, 1] on populated cells; {bad.sum()} cells violate this.")
		return propensity

	@staticmethod
	def cell_probabilities(schema, marginals = None, tilts = None):
		"""Independent covariates with the given marginals (uniform if absent),
		multiplied by exp(tilt[a_level, b_level]) for every pairwise tilt."""
		levels = schema.all_levels()
		log_probability = np.zeros(schema.cell_count)
		for (l, covariate) in enumerate(schema.covariates):
			marginal = None if (marginals is None) else marginals[l]
			if marginal is None:
				continue
			marginal = np.asarray(marginal, dtype = float)
			if (marginal.shape != (covariate.levels, )) or np.any(marginal < 0) or (not np.all(np.isfinite(marginal))) or (marginal.sum() <= 0):
				raise InvalidProbabilityException(f"Invalid marginal for covariate {covariate.name}: {marginal}")
			with np.errstate(divide = "ignore"):
				log_probability += np.log(marginal / marginal.sum())[levels[:, l]]
		for ((a, b), tilt) in (tilts or { }).items():
			tilt = np.asarray(tilt, dtype = float)
			if (tilt.shape != (schema.levels[a], schema.levels[b])) or (not np.all(np.isfinite(tilt))):
				raise InvalidProbabilityException(f"Tilt between covariates {a} and {b} must be a finite {schema.levels[a]} x {schema.levels[b]} matrix.")
			log_probability += tilt[levels[:, a], levels[:, b]]
		probability = np.exp(log_probability - log_probability.max())
		return probability / probability.sum()

	@classmethod
	def generate(cls, schema, size, outcome_spec, seed, cell_probabilities = None, marginals = None, tilts = None):
		if size < 1:
			raise InvalidProbabilityException(f"Population size must be positive, got {size}.")
		if size < schema.cell_count:
			_log.warning("Population of %d units is smaller than the %d cells.", size, schema.cell_count)
		if cell_probabilities is None:
			cell_probabilities = cls.cell_probabilities(schema, marginals = marginals, tilts = tilts)
		cell_probabilities = np.asarray(cell_probabilities, dtype = float)
		if (cell_probabilities.shape != (schema.cell_count, )) or np.any(cell_probabilities < 0) or (not np.all(np.isfinite(cell_probabilities))) or (cell_probabilities.sum() <= 0):
			raise InvalidProbabilityException("Cell probabilities must be a nonnegative finite vector over all cells with positive sum.")
		(cells_seed, outcome_seed) = np.random.SeedSequence(seed).spawn(2)
		rng = np.random.default_rng(cells_seed)
		cells = rng.choice(schema.cell_count, size = size, p = cell_probabilities / cell_probabilities.sum())
		(outcomes, outcome_probabilities) = outcome_spec.draw(schema, cells, np.random.default_rng(outcome_seed))
		return cls(schema, cells, outcomes, outcome_probabilities = outcome_probabilities)

	def with_propensity(self, propensity):
		return Population(self._schema, self._cells, self._outcomes, propensity = propensity, outcome_probabilities = self._outcome_probabilities)

	@property
	def schema(self):
		return self._schema

	@property
	def cells(self):
		return self._cells

	@property
	def outcomes(self):
		return self._outcomes

	@property
	def N(self):
		return len(self._cells)

	@property
	def pop_counts(self):
		return self._pop_counts

	@property
	def outcome_probabilities(self):
		return self._outcome_probabilities

	@property
	def propensity(self):
		return self._propensity

	@property
	def unit_propensity(self):
		return self._propensity[self._cells]

	@property
	def min_propensity(self):
		return float(self._propensity[self._pop_counts > 0].min())

	@property
	def mean(self):
		return math.fsum(self._outcomes) / self.N

	def cell_means(self):
		sums = np.bincount(self._cells, weights = self._outcomes, minlength = self._schema.cell_count)
		means = np.full(self._schema.cell_count, np.nan)
		populated = self._pop_counts > 0
		means[populated] = sums[populated] / self._pop_counts[populated]
		return means

	def residuals(self):
		return self._outcomes - self.cell_means()[self._cells]

	def oracle_variance(self):
		"""(1/N^2) sum_i (1 - pi_i) / pi_i eps_i^2 for Horvitz-Thompson with known pi."""
		pi = self.unit_propensity
		return math.fsum((1 - pi) / pi * self.residuals() ** 2) / self.N ** 2

	def resample(self, rng):
		index = rng.integers(0, self.N, size = self.N)
		return Population(self._schema, self._cells[index], self._outcomes[index], propensity = self._propensity, outcome_probabilities = self._outcome_probabilities)

	def draw_respondents(self, rng):
		return rng.random(self.N) < self.unit_propensity

	def cell_table(self, respondent, with_outcomes = True):
		return Tabulation.from_arrays(self._schema, self._cells, respondent, outcomes = self._outcomes if with_outcomes else None)

	def __repr__(self):
		return "Population<%s, N=%d>" % (self._schema, self.N)
