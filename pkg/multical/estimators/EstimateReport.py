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
import scipy.stats

class EstimateReport():
	def __init__(self, method, estimate, variance = None, alpha = 0.05, n_eff = None, design_effect = None, bias_correction = None, label = None):
		self._method = method
		self._estimate = float(estimate)
		self._variance = None if (variance is None) else max(float(variance), 0.0)
		self._alpha = alpha
		self._n_eff = n_eff
		self._design_effect = design_effect
		self._bias_correction = bias_correction
		self._label = label

	@staticmethod
	def critical_value(alpha):
		return float(scipy.stats.norm.ppf(1 - alpha / 2))

	@property
	def method(self):
		return self._method

	@property
	def label(self):
		return self._label or self._method.value

	@property
	def estimate(self):
		return self._estimate

	@property
	def variance(self):
		return self._variance

	@property
	def standard_error(self):
		return None if (self._variance is None) else math.sqrt(self._variance)

	@property
	def alpha(self):
		return self._alpha

	@property
	def ci(self):
		if self._variance is None:
			return None
		half_width = self.critical_value(self._alpha) * self.standard_error
		return (self._estimate - half_width, self._estimate + half_width)

	def covers(self, value):
		ci = self.ci
		if ci is None:
			return None
		return ci[0] <= value <= ci[1]

	@property
	def n_eff(self):
		return self._n_eff

	@property
	def design_effect(self):
		return self._design_effect

	@property
	def bias_correction(self):
		return self._bias_correction

	def to_json(self):
		return {
			"method":			self.label,
			"estimate":			self._estimate,
			"variance":			self._variance,
			"ci":				None if (self.ci is None) else list(self.ci),
			"alpha":			self._alpha,
			"n_eff":			self._n_eff,
			"design_effect":	self._design_effect,
			"bias_correction":	self._bias_correction,
		}

	def __repr__(self):
		return "EstimateReport<%s: %.6g>" % (self.label, self._estimate)
