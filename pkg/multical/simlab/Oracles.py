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
import collections
import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from multical.design.InteractionDesign import InteractionDesign
from multical.estimators.EstimateReport import EstimateReport
from multical.estimators.Weighting import Weighting
from multical.solver.PrimalOracle import PrimalOracle
from multical.Enums import EstimationMethod
from multical.Exceptions import InvalidProbabilityException, SimulationException

_log = logging.getLogger(__spec__.name)

class BalanceBoundReport():
	"""Per draw: |diag(n) gamma_hat - N^P| of the unregularized fit against
	kappa * |diag(n) / pi - N^P| of the true inverse propensities."""
	Draw = collections.namedtuple("Draw", [ "respondents", "fitted_imbalance", "bound", "holds" ])

	def __init__(self, condition_number, draws):
		self._condition_number = condition_number
		self._draws = draws

	@property
	def condition_number(self):
		return self._condition_number

	@property
	def draws(self):
		return list(self._draws)

	@property
	def violations(self):
		return sum(1 for draw in self._draws if not draw.holds)

	@property
	def holds(self):
		return self.violations == 0

	def to_json(self):
		return {
			"condition_number":	self._condition_number,
			"draws":			len(self._draws),
			"violations":		self.violations,
			"max_ratio":		max((draw.fitted_imbalance / draw.bound for draw in self._draws if draw.bound > 0), default = 0.0),
		}

class Oracles():
	"""Estimators and checks that need the full synthetic population."""
	BOUND_SLACK = 1e-8

	@classmethod
	def oracle_ht(cls, population, respondent, alpha = 0.05):
		"""(1/N) sum_i R_i Y_i / pi(S_i) with the true propensities. The variance is
		the unbiased Poisson sampling estimate (1/N^2) sum_i R_i (1 - pi_i) Y_i^2 / pi_i^2."""
		if population.propensity is None:
			raise InvalidProbabilityException("Horvitz-Thompson needs the true response propensities.")
		respondent = np.asarray(respondent, dtype = bool)
		pi = population.unit_propensity[respondent]
		estimate = math.fsum(population.outcomes[respondent] / pi) / population.N
		variance = math.fsum((1 - pi) * population.outcomes[respondent] ** 2 / pi ** 2) / population.N ** 2
		weights = Weighting.inverse_propensity_weights(population.cell_table(respondent), population.propensity)
		return EstimateReport(EstimationMethod.OracleHT, estimate, variance = variance, alpha = alpha, n_eff = weights.n_eff, design_effect = weights.design_effect)

	@classmethod
	def balance_bound_check(cls, population, design = None, draws = 100, seed = 0):
		"""Draws respondent sets from the true propensities and checks the
		imbalance bound of the unregularized fit on each. The fit uses the full
		interaction design so that D is square and invertible."""
		if population.propensity is None:
			raise InvalidProbabilityException("The balance bound check needs the true response propensities.")
		design = InteractionDesign.build(population.schema) if (design is None) else design
		if design.total_columns != population.schema.cell_count:
			raise SimulationException("The balance bound needs the saturated design of all interaction orders.")
		diagnostics = design.diagnostics()
		if diagnostics.condition_number is None:
			raise SimulationException(f"Design with {diagnostics.cells} cells is too large for the condition number the bound needs.")
		kappa = diagnostics.condition_number
		populated = population.pop_counts > 0
		upper = float(np.max(1 / population.propensity[populated]))
		results = [ ]
		for (draw, draw_seed) in enumerate(np.random.SeedSequence(seed).spawn(draws)):
			respondent = population.draw_respondents(np.random.default_rng(draw_seed))
			cell_table = population.cell_table(respondent, with_outcomes = False)
			if cell_table.n == 0:
				_log.debug("Draw %d has no respondents; skipped.", draw)
				continue
			fitted = PrimalOracle.solve_unregularized(design, cell_table, upper = upper)
			inverse_propensity = np.where(populated, 1 / np.where(populated, population.propensity, 1), 0)
			lhs = float(np.linalg.norm(fitted.cell_imbalance()))
			rhs = kappa * float(np.linalg.norm(cell_table.resp_counts * inverse_propensity - cell_table.pop_counts))
			holds = lhs <= rhs + cls.BOUND_SLACK * population.N
			if not holds:
				_log.error("Balance bound violated on draw %d: %.17g > %.17g", draw, lhs, rhs)
			results.append(BalanceBoundReport.Draw(respondents = cell_table.n, fitted_imbalance = lhs, bound = rhs, holds = holds))
		return BalanceBoundReport(kappa, results)

	@classmethod
	def population_regression(cls, population, design, dense_limit = 4000000):
		"""Least squares of Y_i on the design rows of all N units, i.e. the
		N^P-weighted fit of the true cell means. Minimum-norm solution when
		unpopulated cells leave the fit underdetermined."""
		populated = np.flatnonzero(population.pop_counts > 0)
		root_counts = np.sqrt(population.pop_counts[populated])
		rows = scipy.sparse.diags(root_counts) @ design.rows(populated)
		rhs = root_counts * population.cell_means()[populated]
		if rows.shape[0] * rows.shape[1] <= dense_limit:
			(coefficients, _, rank, _) = scipy.linalg.lstsq(rows.toarray(), rhs)
			if rank < design.total_columns:
				_log.debug("Population regression is rank deficient (%d of %d columns).", rank, design.total_columns)
		else:
			result = scipy.sparse.linalg.lsqr(rows.tocsr(), rhs, atol = 1e-12, btol = 1e-12, iter_lim = 10 * design.total_columns)
			coefficients = result[0]
		return coefficients

	@classmethod
	def order_norms(cls, design, coefficients):
		return { k: float(np.linalg.norm(coefficients[design.order_slice(k)])) for k in design.orders }
