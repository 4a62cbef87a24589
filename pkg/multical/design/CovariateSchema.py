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

import json
import collections
import numpy as np
from multical.Exceptions import SchemaException, InvalidLevelException

Covariate = collections.namedtuple("Covariate", [ "name", "levels", "level_labels" ])
CellId = collections.namedtuple("CellId", [ "index", "levels" ])

class CovariateSchema():
	"""Ordered categorical covariates. Cells are indexed mixed-radix with the
	last covariate varying fastest; level index 0 is the reference level."""

	def __init__(self, covariates):
		self._covariates = tuple(covariates)
		self._plausibilize()
		self._levels = tuple(covariate.levels for covariate in self._covariates)
		self._label_index = [ { label: index for (index, label) in enumerate(covariate.level_labels) } for covariate in self._covariates ]

	def _plausibilize(self):
		if len(self._covariates) == 0:
			raise SchemaException("A schema needs at least one covariate.")
		names = set()
		for covariate in self._covariates:
			if covariate.name in names:
				raise SchemaException(f"Duplicate covariate name: {covariate.name}")
			names.add(covariate.name)
			if (not isinstance(covariate.levels, int)) or (covariate.levels < 2):
				raise SchemaException(f"Covariate {covariate.name} must have at least two levels, has {covariate.levels}.")
			if len(covariate.level_labels) != covariate.levels:
				raise SchemaException(f"Covariate {covariate.name} declares {covariate.levels} levels but has {len(covariate.level_labels)} labels.")
			if len(set(covariate.level_labels)) != covariate.levels:
				raise SchemaException(f"Covariate {covariate.name} has duplicate level labels.")

	@classmethod
	def from_levels(cls, level_counts, names = None):
		if names is None:
			names = [ "x%d" % (i + 1) for i in range(len(level_counts)) ]
		covariates = [ Covariate(name = name, levels = int(levels), level_labels = tuple(str(label) for label in range(levels))) for (name, levels) in zip(names, level_counts) ]
		return cls(covariates)

	@classmethod
	def from_json(cls, data):
		if not isinstance(data, dict) or ("covariates" not in data):
			raise SchemaException("Schema JSON needs a 'covariates' list.")
		covariates = [ ]
		for entry in data["covariates"]:
			if isinstance(entry["levels"], int):
				labels = tuple(str(label) for label in range(entry["levels"]))
			else:
				labels = tuple(str(label) for label in entry["levels"])
			covariates.append(Covariate(name = entry["name"], levels = len(labels), level_labels = labels))
		return cls(covariates)

	@classmethod
	def load_from_file(cls, filename):
		with open(filename) as f:
			try:
				data = json.load(f)
			except json.decoder.JSONDecodeError as e:
				raise SchemaException(f"{filename}: not valid JSON ({e})") from e
		return cls.from_json(data)

	def to_json(self):
		return {
			"covariates": [ { "name": covariate.name, "levels": list(covariate.level_labels) } for covariate in self._covariates ],
		}

	@property
	def covariates(self):
		return self._covariates

	@property
	def names(self):
		return tuple(covariate.name for covariate in self._covariates)

	@property
	def levels(self):
		return self._levels

	@property
	def d(self):
		return len(self._covariates)

	@property
	def cell_count(self):
		return int(np.prod(self._levels, dtype = np.int64))

	def covariate_index(self, name):
		for (index, covariate) in enumerate(self._covariates):
			if covariate.name == name:
				return index
		raise SchemaException(f"No such covariate: {name}")

	def level_index(self, covariate_index, label):
		try:
			return self._label_index[covariate_index][str(label)]
		except KeyError:
			covariate = self._covariates[covariate_index]
			raise InvalidLevelException(f"'{label}' is not a level of covariate {covariate.name} (must be one of {', '.join(covariate.level_labels)})")

	def level_labels_of(self, levels):
		return tuple(covariate.level_labels[level] for (covariate, level) in zip(self._covariates, levels))

	def _check_levels(self, level_matrix):
		if (level_matrix.ndim != 2) or (level_matrix.shape[1] != self.d):
			raise InvalidLevelException(f"Expected {self.d} level indices per cell, got shape {level_matrix.shape}.")
		bad = (level_matrix < 0) | (level_matrix >= np.asarray(self._levels))
		if np.any(bad):
			(row, col) = np.argwhere(bad)[0]
			raise InvalidLevelException(f"Level index {level_matrix[row, col]} out of range for covariate {self._covariates[col].name} with {self._levels[col]} levels.")

	def encode_cell(self, levels):
		levels = tuple(int(level) for level in levels)
		index = int(self.encode_many(np.asarray([ levels ], dtype = np.int64))[0])
		return CellId(index = index, levels = levels)

	def decode_cell(self, index):
		index = int(index)
		if not (0 <= index < self.cell_count):
			raise InvalidLevelException(f"Cell index {index} out of range [0, {self.cell_count}).")
		levels = tuple(int(level) for level in np.unravel_index(index, self._levels))
		return CellId(index = index, levels = levels)

	def encode_many(self, level_matrix):
		level_matrix = np.asarray(level_matrix, dtype = np.int64)
		self._check_levels(level_matrix)
		return np.ravel_multi_index(tuple(level_matrix.T), self._levels).astype(np.int64)

	def decode_many(self, indices):
		indices = np.asarray(indices, dtype = np.int64)
		return np.stack(np.unravel_index(indices, self._levels), axis = 1).astype(np.int64)

	def all_levels(self):
		return self.decode_many(np.arange(self.cell_count, dtype = np.int64))

	def collapse(self, mappings):
		"""mappings: {covariate name: {old label: new label}}. Returns the coarse
		schema and a vector mapping every fine cell to its coarse cell."""
		coarse_covariates = [ ]
		level_maps = [ ]
		for covariate in self._covariates:
			mapping = mappings.get(covariate.name)
			if mapping is None:
				coarse_covariates.append(covariate)
				level_maps.append(np.arange(covariate.levels))
				continue
			new_labels = [ ]
			for label in covariate.level_labels:
				if label not in mapping:
					raise SchemaException(f"Collapsing covariate {covariate.name}: level '{label}' has no target.")
				if mapping[label] not in new_labels:
					new_labels.append(mapping[label])
			if len(new_labels) < 2:
				raise SchemaException(f"Collapsing covariate {covariate.name} would leave fewer than two levels.")
			coarse_covariates.append(Covariate(name = covariate.name, levels = len(new_labels), level_labels = tuple(new_labels)))
			level_maps.append(np.asarray([ new_labels.index(mapping[label]) for label in covariate.level_labels ]))
		coarse = CovariateSchema(coarse_covariates)
		fine_levels = self.all_levels()
		coarse_levels = np.stack([ level_map[fine_levels[:, i]] for (i, level_map) in enumerate(level_maps) ], axis = 1)
		return (coarse, coarse.encode_many(coarse_levels))

	def __eq__(self, other):
		return isinstance(other, CovariateSchema) and (self._covariates == other._covariates)

	def __hash__(self):
		return hash(self._covariates)

	def __repr__(self):
		return "CovariateSchema<%s>" % (", ".join("%s:%d" % (covariate.name, covariate.levels) for covariate in self._covariates))
