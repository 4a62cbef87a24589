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
from multical.outcomes.BaseOutcomeModel import BaseOutcomeModel
from multical.Enums import OutcomeModelKind

@BaseOutcomeModel.register
class ConstantModel(BaseOutcomeModel):
	_NAME = "constant"
	_KIND = OutcomeModelKind.Constant

	def __init__(self, cell_table, value):
		super().__init__(cell_table, parameters = { "value": float(value) })
		self._value = float(value)

	@property
	def value(self):
		return self._value

	@classmethod
	def fit(cls, design, cell_table, value = None):
		if value is None:
			cls._require_outcomes(cell_table)
			value = cell_table.respondent_mean()
		return cls(cell_table, value)

	def _predict_cells(self):
		return np.full(self._cell_table.J, self._value)
