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
import pandas
from multical.Exceptions import EmptyPopulationException, SchemaMismatchException, IngestionException

_log = logging.getLogger(__spec__.name)

class CellTable():
	"""Per-cell population counts, respondent counts and respondent outcome
	moments over the full cell grid of a schema."""

	def __init__(self, schema, pop_counts, resp_counts, resp_sums = None, resp_sumsq = None):
		self._schema = schema
		J = schema.cell_count
		self._pop_counts = self._as_vector(pop_counts, J, "pop_counts")
		self._resp_counts = self._as_vector(resp_counts, J, "resp_counts")
		self._resp_sums = None if (resp_sums is None) else self._as_vector(resp_sums, J, "resp_sums", nonnegative = False)
		self._resp_sumsq = None if (resp_sumsq is None) else self._as_vector(resp_sumsq, J, "resp_sumsq")
		self._plausibilize()

	@staticmethod
	def _as_vector(values, J, name, nonnegative = True):
		vector = np.asarray(values, dtype = float)
		if vector.shape != (J, ):
			raise SchemaMismatchException(f"{name} has shape {vector.shape}, schema has {J} cells.")
		if not np.all(np.isfinite(vector)):
			raise IngestionException(f"{name} contains non-finite values.")
		if nonnegative and np.any(vector < 0):
			raise IngestionException(f"{name} contains negative values.")
		return vector

	def _plausibilize(self):
		if self.N <= 0:
			raise EmptyPopulationException("Population is empty.")
		if self.n > self.N:
			raise IngestionException(f"More respondents ({self.n:.0f}) than population units ({self.N:.0f}).")
		outside = np.sum((self._resp_counts > 0) & (self._pop_counts == 0))
		if outside > 0:
			_log.warning("%d cells hold respondents but no population units; they get zero weight in calibration.", outside)
		if self._resp_sums is not None:
			stray = (self._resp_counts == 0) & (self._resp_sums != 0)
			if np.any(stray):
				raise IngestionException(f"Outcome sums present for {np.sum(stray)} cells without respondents.")

	@property
	def schema(self):
		return self._schema

	@property
	def J(self):
		return self._schema.cell_count

	@property
	def pop_counts(self):
		return self._pop_counts

	@property
	def resp_counts(self):
		return self._resp_counts

	@property
	def resp_sums(self):
		return self._resp_sums

	@property
	def resp_sumsq(self):
		return self._resp_sumsq

	@property
	def has_outcomes(self):
		return self._resp_sums is not None

	@property
	def has_second_moments(self):
		return self._resp_sumsq is not None

	@property
	def N(self):
		return float(self._pop_counts.sum())

	@property
	def n(self):
		return float(self._resp_counts.sum())

	@property
	def support(self):
		"""Indices of cells that contain at least one respondent."""
		return np.flatnonzero(self._resp_counts > 0)

	@property
	def balance_support(self):
		"""Cells with respondents and population units; the only cells that carry
		weight in calibration."""
		return np.flatnonzero((self._resp_counts > 0) & (self._pop_counts > 0))

	@property
	def populated(self):
		return np.flatnonzero(self._pop_counts > 0)

	def empty_populated_cells(self):
		return np.flatnonzero((self._pop_counts > 0) & (self._resp_counts == 0))

	def cell_means(self):
		if self._resp_sums is None:
			return None
		means = np.full(self.J, np.nan)
		support = self.support
		means[support] = self._resp_sums[support] / self._resp_counts[support]
		return means

	def respondent_mean(self):
		if self._resp_sums is None:
			return None
		return float(self._resp_sums.sum() / self.n)

	def within_cell_sum_squares(self, centers):
		"""Sum over respondents of (Y_i - centers[cell])^2, per cell."""
		if self._resp_sumsq is None:
			return None
		centers = np.where(self._resp_counts > 0, centers, 0)
		ss = self._resp_sumsq - 2 * centers * self._resp_sums + self._resp_counts * centers ** 2
		return np.maximum(ss, 0)

	def occupancy(self):
		populated = self._pop_counts > 0
		occupied = populated & (self._resp_counts > 0)
		return {
			"cells":							self.J,
			"populated_cells":					int(populated.sum()),
			"occupied_cells":					int(occupied.sum()),
			"occupied_fraction":				float(occupied.sum() / max(populated.sum(), 1)),
			"represented_population_fraction":	float(self._pop_counts[occupied].sum() / self.N),
		}

	def collapse(self, coarse_schema, cell_map):
		"""Sum all per-cell quantities into the coarse cells given by cell_map."""
		def fold(vector):
			if vector is None:
				return None
			return np.bincount(cell_map, weights = vector, minlength = coarse_schema.cell_count)
		return CellTable(coarse_schema, fold(self._pop_counts), fold(self._resp_counts), fold(self._resp_sums), fold(self._resp_sumsq))

	def to_dataframe(self, cells = None):
		if cells is None:
			cells = np.arange(self.J)
		levels = self._schema.decode_many(cells)
		columns = { "cell": cells }
		for (i, covariate) in enumerate(self._schema.covariates):
			columns[covariate.name] = [ covariate.level_labels[level] for level in levels[:, i] ]
		columns["pop_count"] = self._pop_counts[cells]
		columns["resp_count"] = self._resp_counts[cells]
		if self._resp_sums is not None:
			columns["resp_mean"] = self.cell_means()[cells]
		return pandas.DataFrame(columns)

	def __repr__(self):
		return "CellTable<J=%d, N=%.0f, n=%.0f>" % (self.J, self.N, self.n)
