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
from multical.estimators.EstimateReport import EstimateReport
from multical.estimators.Weighting import Weighting
from multical.Enums import EstimationMethod
from multical.Exceptions import EstimatorDisagreementException, MissingOutcomeException, SchemaMismatchException

_log = logging.getLogger(__spec__.name)

class ModelAssisted():
	"""MRP and DRP estimators on top of an outcome model's cell predictions."""
	AGREEMENT_TOLERANCE = 1e-12

	@classmethod
	def _check(cls, model, weights = None):
		if (weights is not None) and (weights.cell_table is not model.cell_table) and (weights.cell_table.schema != model.cell_table.schema):
			raise SchemaMismatchException("Weights and outcome model use different schemas.")

	@classmethod
	def _full_predictions(cls, model, cells, purpose):
		predictions = np.zeros(model.cell_table.J)
		predictions[cells] = model.predictions_for(cells, purpose = purpose)
		return predictions

	@classmethod
	def mrp_estimate(cls, model, label = None):
		cell_table = model.cell_table
		populated = cell_table.populated
		predictions = model.predictions_for(populated, purpose = "MRP")
		estimate = math.fsum(cell_table.pop_counts[populated] * predictions) / cell_table.N
		return EstimateReport(EstimationMethod.MRP, estimate, label = label)

	@classmethod
	def bias_estimate(cls, model, weights):
		"""(1/N) sum_s mu_hat_s (N^P_s - n_s gamma(s))."""
		cls._check(model, weights)
		difference = -weights.cell_imbalance()
		cells = np.flatnonzero(difference != 0)
		predictions = model.predictions_for(cells, purpose = "bias estimate")
		return math.fsum(predictions * difference[cells]) / weights.cell_table.N

	@classmethod
	def drp_variance(cls, model, weights):
		"""(1/N^2) sum_i gamma(S_i)^2 (Y_i - mu_hat_{S_i})^2, from within-cell second moments."""
		cls._check(model, weights)
		cell_table = weights.cell_table
		if not cell_table.has_second_moments:
			raise MissingOutcomeException("Variance needs unit-level outcomes or within-cell second moments.")
		predictions = cls._full_predictions(model, weights.support, "variance")
		return Weighting.residual_variance(weights, predictions)

	@classmethod
	def variance_ci(cls, model, weights, alpha = 0.05):
		report = cls.drp_estimate(model, weights, alpha = alpha)
		return (report.variance, report.ci)

	@classmethod
	def drp_estimate(cls, model, weights, alpha = 0.05, label = None):
		"""Weighted estimate plus the model's bias estimate, cross-checked against
		the MRP estimate plus the weighted residual correction."""
		cls._check(model, weights)
		cell_table = weights.cell_table
		Weighting._require_outcomes(cell_table)
		weighted = Weighting.weighted_sum(weights, cell_table.cell_means())
		bias_correction = cls.bias_estimate(model, weights)
		weighting_form = weighted + bias_correction

		mrp = cls.mrp_estimate(model).estimate
		residuals = cell_table.cell_means() - cls._full_predictions(model, weights.support, "DRP residuals")
		model_form = mrp + Weighting.weighted_sum(weights, residuals)

		if abs(weighting_form - model_form) > cls.AGREEMENT_TOLERANCE * max(1.0, abs(weighting_form)):
			raise EstimatorDisagreementException(f"DRP forms disagree: weighting form {weighting_form:.17g}, model form {model_form:.17g}")
		variance = cls.drp_variance(model, weights) if cell_table.has_second_moments else None
		return EstimateReport(EstimationMethod.DRP, weighting_form, variance = variance, alpha = alpha, n_eff = weights.n_eff, design_effect = weights.design_effect, bias_correction = bias_correction, label = label)
