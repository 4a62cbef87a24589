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

import numpy as np
import pandas
from multical.Exceptions import OutcomeModelRegistryException, UndefinedPredictionException, MissingOutcomeException

class BaseOutcomeModel():
	"""Outcome model producing cell predictions mu_hat over all J cells. Cells a
	model cannot predict are NaN; callers check the cells they need."""
	_NAME = None
	_KIND = None
	_MODEL_CLASSES = { }

	def __init__(self, cell_table, parameters = None):
		self._cell_table = cell_table
		self._parameters = parameters or { }
		self._predictions = None

	@property
	def name(self):
		if self._NAME is None:
			raise NotImplementedError(__class__.__name__)
		return self._NAME

	@property
	def kind(self):
		return self._KIND

	@property
	def cell_table(self):
		return self._cell_table

	@property
	def parameters(self):
		return dict(self._parameters)

	def _predict_cells(self):
		raise NotImplementedError(__class__.__name__)

	def predict_cells(self):
		if self._predictions is None:
			self._predictions = np.asarray(self._predict_cells(), dtype = float)
		return self._predictions

	def predictions_for(self, cells, purpose = "prediction"):
		predictions = self.predict_cells()[cells]
		undefined = np.flatnonzero(~np.isfinite(predictions))
		if len(undefined) > 0:
			shown = ", ".join(str(cells[i]) for i in undefined[:10])
			more = "" if (len(undefined) <= 10) else " and %d more" % (len(undefined) - 10)
			raise UndefinedPredictionException(f"{self.name} model cannot predict {len(undefined)} cell(s) needed for {purpose}: {shown}{more}")
		return predictions

	def _fitted_json(self):
		return { }

	def to_json(self):
		result = {
			"kind":			self._KIND.value,
			"parameters":	self._parameters,
		}
		result.update(self._fitted_json())
		return result

	def predictions_dataframe(self):
		return pandas.DataFrame({
			"cell":			np.arange(self._cell_table.J),
			"prediction":	self.predict_cells(),
		})

	@staticmethod
	def _require_outcomes(cell_table):
		if not cell_table.has_outcomes:
			raise MissingOutcomeException("Fitting an outcome model needs respondent outcomes.")

	@classmethod
	def fit(cls, design, cell_table, **kwargs):
		raise NotImplementedError(__class__.__name__)

	@classmethod
	def names(cls):
		return sorted(cls._MODEL_CLASSES)

	@classmethod
	def get_class(cls, model_name):
		if model_name not in cls._MODEL_CLASSES:
			raise OutcomeModelRegistryException(f"No outcome model registered for: {model_name}")
		return cls._MODEL_CLASSES[model_name]

	@classmethod
	def fit_by_name(cls, model_name, design, cell_table, **kwargs):
		return cls.get_class(model_name).fit(design, cell_table, **kwargs)

	@classmethod
	def register(cls, model_class):
		if model_class._NAME is None:
			raise OutcomeModelRegistryException("Outcome model class needs to have a name.")
		if model_class._NAME in cls._MODEL_CLASSES:
			raise OutcomeModelRegistryException(f"Duplicate outcome model class name: {model_class._NAME}")
		cls._MODEL_CLASSES[model_class._NAME] = model_class
		return model_class
