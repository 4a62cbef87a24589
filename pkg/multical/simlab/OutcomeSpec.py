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
import numpy as np
import scipy.special
from multical.design.InteractionDesign import InteractionDesign
from multical.Exceptions import SimulationException

class CoefficientDraw():
	"""Random coefficients over the columns of a design. The intercept is fixed;
	order-k coefficients are normal with standard deviation
	base * decay^(k-1) / sqrt(C(d, k)) so that each order adds a comparable
	share of variance to the linear predictor regardless of d."""

	@classmethod
	def draw(cls, design, rng, intercept = 0.0, base = 0.3, decay = 0.7):
		coefficients = np.zeros(design.total_columns)
		d = design.schema.d
		coefficients[0] = intercept
		for k in design.orders:
			order_slice = design.order_slice(k)
			start = order_slice.start + (1 if (k == 1) else 0)
			sd = base * decay ** (k - 1) / math.sqrt(math.comb(d, k))
			coefficients[start:order_slice.stop] = rng.normal(0.0, sd, size = order_slice.stop - start)
		return coefficients

	@classmethod
	def conform(cls, design, coefficients):
		"""Flat vector over the design columns, or {order: block} with missing
		orders zero."""
		if isinstance(coefficients, dict):
			flat = np.zeros(design.total_columns)
			for (k, block) in coefficients.items():
				k = int(k)
				block = np.asarray(block, dtype = float)
				if block.shape != (design.order_size(k), ):
					raise SimulationException(f"Order {k} coefficients need {design.order_size(k)} entries, got {block.shape}.")
				flat[design.order_slice(k)] = block
			return flat
		flat = np.asarray(coefficients, dtype = float)
		if flat.shape != (design.total_columns, ):
			raise SimulationException(f"Coefficient vector needs {design.total_columns} entries, got {flat.shape}.")
		return flat

class OutcomeSpec():
	"""Outcome data generating process. Kinds:
	reference_indicator: Y = 1 if the unit's cell is the all-reference cell.
	logistic: Y ~ Bernoulli(expit(D_s eta)) with eta given or drawn.
	linear: Y = D_s eta + noise * N(0, 1).
	fixed: Y = cell_values[s]."""
	KINDS = ("reference_indicator", "logistic", "linear", "fixed")

	def __init__(self, kind, max_order = 1, coefficients = None, intercept = 0.0, scale = 1.0, noise = 0.0, cell_values = None, seed = None):
		if kind not in self.KINDS:
			raise SimulationException(f"Unknown outcome kind '{kind}', must be one of {', '.join(self.KINDS)}.")
		self._kind = kind
		self._max_order = max_order
		self._coefficients = coefficients
		self._intercept = intercept
		self._scale = scale
		self._noise = noise
		self._cell_values = cell_values
		self._seed = seed

	@classmethod
	def from_json(cls, data):
		data = dict(data)
		kind = data.pop("kind")
		return cls(kind, **data)

	def to_json(self):
		result = { "kind": self._kind }
		if self._kind in ("logistic", "linear"):
			result.update({ "max_order": self._max_order, "intercept": self._intercept, "scale": self._scale, "seed": self._seed })
		if self._kind == "linear":
			result["noise"] = self._noise
		if (self._coefficients is not None) and (self._kind in ("logistic", "linear")):
			if isinstance(self._coefficients, dict):
				result["coefficients"] = { str(k): list(np.asarray(block, dtype = float)) for (k, block) in self._coefficients.items() }
			else:
				result["coefficients"] = list(np.asarray(self._coefficients, dtype = float))
		if self._kind == "fixed":
			result["cell_values"] = list(np.asarray(self._cell_values, dtype = float))
		return result

	@property
	def kind(self):
		return self._kind

	def coefficients(self, design, rng):
		if self._coefficients is not None:
			return CoefficientDraw.conform(design, self._coefficients)
		if self._seed is not None:
			rng = np.random.default_rng(self._seed)
		coefficients = CoefficientDraw.draw(design, rng, intercept = self._intercept)
		coefficients[1:] *= self._scale
		return coefficients

	def linear_predictor(self, schema, rng):
		design = InteractionDesign(schema, min(self._max_order, schema.d))
		return design.matrix() @ self.coefficients(design, rng)

	def draw(self, schema, cells, rng):
		"""Returns (unit outcomes, per-cell outcome probabilities or None)."""
		if self._kind == "reference_indicator":
			return ((cells == 0).astype(float), None)
		elif self._kind == "fixed":
			values = np.asarray(self._cell_values, dtype = float)
			if values.shape != (schema.cell_count, ):
				raise SimulationException(f"Fixed outcomes need one value per cell ({schema.cell_count}), got {values.shape}.")
			return (values[cells], None)
		elif self._kind == "logistic":
			probabilities = scipy.special.expit(self.linear_predictor(schema, rng))
			return ((rng.random(len(cells)) < probabilities[cells]).astype(float), probabilities)
		else:
			means = self.linear_predictor(schema, rng)
			return (means[cells] + self._noise * rng.standard_normal(len(cells)), None)
