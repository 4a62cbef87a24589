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
import scipy.special
from multical.outcomes.TreeEnsemble import TreeEnsemble
from multical.simlab.OutcomeSpec import CoefficientDraw

_log = logging.getLogger(__spec__.name)

class ResponseModels():
	PI_MIN = 1e-4

	@classmethod
	def logit(cls, design, coefficients, scale = 1.0):
		"""pi(s) = expit(D_s beta) with all non-intercept coefficients multiplied
		by scale."""
		coefficients = CoefficientDraw.conform(design, coefficients).copy()
		coefficients[1:] *= scale
		return scipy.special.expit(design.matrix() @ coefficients)

	@classmethod
	def random_logit(cls, design, seed, intercept = -3.0, scale = 3.0):
		coefficients = CoefficientDraw.draw(design, np.random.default_rng(seed), intercept = intercept)
		return (cls.logit(design, coefficients, scale = scale), coefficients)

	@classmethod
	def forest(cls, population, respondent, trees = 50, depth = 4, seed = 0, pi_min = PI_MIN, bootstrap = True):
		"""Leaf response rates of a bagged tree ensemble fitted to one respondent
		draw: pi(s) is the tree average of (respondents in leaf) / (population in
		leaf), clipped to [pi_min, 1]."""
		cell_table = population.cell_table(respondent, with_outcomes = False)
		populated = cell_table.populated
		rates = cell_table.resp_counts[populated] / cell_table.pop_counts[populated]
		ensemble = TreeEnsemble.fit(population.schema, populated, rates, cell_table.pop_counts[populated], trees = trees, depth = depth, seed = seed, bootstrap = bootstrap)
		propensity = ensemble.leaf_ratio(cell_table.resp_counts, cell_table.pop_counts)
		propensity = np.where(np.isfinite(propensity), propensity, pi_min)
		clipped = (propensity < pi_min) | (propensity > 1)
		if np.any(clipped[populated]):
			_log.warning("Clipped %d forest propensities into [%g, 1].", np.sum(clipped[populated]), pi_min)
		return np.clip(propensity, pi_min, 1.0)
