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
import numbers
from multical.Exceptions import InvalidCalibrationSpecException

class CalibrationSpec():
	"""Per-order penalties and weight bounds for one calibration solve.

	lambdas maps order k >= 2 to a penalty in [0, inf]. Zero makes the order an
	exact constraint, inf drops it. Order 1 is always exact."""

	def __init__(self, max_order, lambdas = None, lower = 0.0, upper = math.inf, balance_tol = 1e-8, grad_tol = 1e-8, max_iterations = 5000):
		if max_order < 1:
			raise InvalidCalibrationSpecException(f"Maximum order must be at least 1, got {max_order}.")
		self._max_order = int(max_order)
		self._lambdas = self._parse_lambdas(lambdas)
		self._lower = float(lower)
		self._upper = float(upper)
		self._balance_tol = float(balance_tol)
		self._grad_tol = float(grad_tol)
		self._max_iterations = int(max_iterations)
		self._plausibilize()

	def _parse_lambdas(self, lambdas):
		orders = range(2, self._max_order + 1)
		if lambdas is None:
			lambdas = 1.0
		if isinstance(lambdas, numbers.Real):
			return { k: float(lambdas) for k in orders }
		if isinstance(lambdas, dict):
			parsed = { int(k): float(value) for (k, value) in lambdas.items() }
			missing = [ k for k in orders if k not in parsed ]
			if len(missing) > 0:
				raise InvalidCalibrationSpecException(f"No penalty given for order(s) {', '.join(str(k) for k in missing)}.")
			return { k: parsed[k] for k in orders }
		lambdas = [ float(value) for value in lambdas ]
		if len(lambdas) == 1:
			return { k: lambdas[0] for k in orders }
		if len(lambdas) != len(orders):
			raise InvalidCalibrationSpecException(f"Expected one penalty per order 2..{self._max_order} ({len(orders)} values), got {len(lambdas)}.")
		return dict(zip(orders, lambdas))

	def _plausibilize(self):
		for (k, value) in self._lambdas.items():
			if math.isnan(value) or (value < 0):
				raise InvalidCalibrationSpecException(f"Penalty for order {k} must be nonnegative, got {value}.")
		if math.isnan(self._lower) or math.isnan(self._upper):
			raise InvalidCalibrationSpecException("Weight bounds must not be NaN.")
		if not ((self._lower >= 0) or (self._lower == -math.inf)):
			raise InvalidCalibrationSpecException(f"Lower weight bound must be nonnegative or -inf, got {self._lower}.")
		if not (self._upper > self._lower):
			raise InvalidCalibrationSpecException(f"Upper weight bound {self._upper} must exceed lower bound {self._lower}.")
		if (self._balance_tol <= 0) or (self._grad_tol <= 0) or (self._max_iterations < 1):
			raise InvalidCalibrationSpecException("Tolerances and iteration limit must be positive.")

	@classmethod
	def raking(cls, lower = 0.0, upper = math.inf, **kwargs):
		return cls(max_order = 1, lower = lower, upper = upper, **kwargs)

	@classmethod
	def poststratification(cls, max_order, lower = 0.0, upper = math.inf, **kwargs):
		return cls(max_order = max_order, lambdas = 0.0, lower = lower, upper = upper, **kwargs)

	def with_lambda(self, lambdas):
		return CalibrationSpec(max_order = self._max_order, lambdas = lambdas, lower = self._lower, upper = self._upper, balance_tol = self._balance_tol, grad_tol = self._grad_tol, max_iterations = self._max_iterations)

	@property
	def max_order(self):
		return self._max_order

	@property
	def lambdas(self):
		return dict(self._lambdas)

	def lambda_for(self, k):
		return 0.0 if (k == 1) else self._lambdas[k]

	@property
	def active_orders(self):
		return [ k for k in range(1, self._max_order + 1) if self.lambda_for(k) < math.inf ]

	@property
	def exact_orders(self):
		return [ k for k in range(1, self._max_order + 1) if self.lambda_for(k) == 0 ]

	@property
	def penalized_orders(self):
		return [ k for k in range(2, self._max_order + 1) if 0 < self._lambdas[k] < math.inf ]

	@property
	def dropped_orders(self):
		return [ k for k in range(2, self._max_order + 1) if self._lambdas[k] == math.inf ]

	@property
	def lower(self):
		return self._lower

	@property
	def upper(self):
		return self._upper

	@property
	def bounded(self):
		return (self._lower > -math.inf) or (self._upper < math.inf)

	@property
	def balance_tol(self):
		return self._balance_tol

	@property
	def grad_tol(self):
		return self._grad_tol

	@property
	def max_iterations(self):
		return self._max_iterations

	def to_json(self):
		return {
			"max_order":		self._max_order,
			"lambdas":			{ str(k): value for (k, value) in self._lambdas.items() },
			"bounds":			[ self._lower, self._upper ],
			"balance_tol":		self._balance_tol,
			"grad_tol":			self._grad_tol,
			"max_iterations":	self._max_iterations,
		}

	def __repr__(self):
		return "CalibrationSpec<K=%d, lambda=%s, [%s, %s]>" % (self._max_order, self._lambdas, self._lower, self._upper)
