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
from multical.design.CellTable import CellTable
from multical.Exceptions import EmptyPopulationException, MalformedRowException, IngestionException, MultiCalException

_log = logging.getLogger(__spec__.name)

class Tabulation():
	RESPONDENT_COLUMN = "respondent"
	OUTCOME_COLUMN = "outcome"
	COUNT_COLUMN = "count"

	@classmethod
	def from_arrays(cls, schema, cells, respondent, outcomes = None, pop_counts = None):
		"""Vectorized tabulation of unit-level arrays. pop_counts overrides the
		population counts implied by the units."""
		cells = np.asarray(cells, dtype = np.int64)
		respondent = np.asarray(respondent, dtype = bool)
		J = schema.cell_count
		if (len(cells) == 0) and (pop_counts is None):
			raise EmptyPopulationException("empty population")
		if pop_counts is None:
			pop_counts = np.bincount(cells, minlength = J).astype(float)
		resp_cells = cells[respondent]
		resp_counts = np.bincount(resp_cells, minlength = J).astype(float)
		if outcomes is None:
			return CellTable(schema, pop_counts, resp_counts)
		outcomes = np.asarray(outcomes, dtype = float)[respondent]
		resp_sums = np.bincount(resp_cells, weights = outcomes, minlength = J)
		resp_sumsq = np.bincount(resp_cells, weights = outcomes ** 2, minlength = J)
		return CellTable(schema, pop_counts, resp_counts, resp_sums, resp_sumsq)

	@classmethod
	def tabulate(cls, schema, microdata):
		"""microdata: iterable of (levels, respondent flag, outcome or None) rows."""
		cells = [ ]
		flags = [ ]
		outcomes = [ ]
		have_outcomes = None
		for (row_number, row) in enumerate(microdata, 1):
			try:
				(levels, respondent, outcome) = row
			except (TypeError, ValueError):
				raise MalformedRowException("expected (levels, respondent, outcome)", row_number = row_number)
			try:
				cell = schema.encode_cell(levels).index
			except MultiCalException as e:
				raise MalformedRowException(str(e), row_number = row_number) from e
			respondent = bool(respondent)
			if (not respondent) and (outcome is not None):
				raise MalformedRowException("non-respondent row carries an outcome", row_number = row_number)
			if respondent:
				if have_outcomes is None:
					have_outcomes = outcome is not None
				elif have_outcomes != (outcome is not None):
					raise MalformedRowException("outcomes must be given for all respondents or for none", row_number = row_number)
			cells.append(cell)
			flags.append(respondent)
			outcomes.append(np.nan if outcome is None else float(outcome))
		if len(cells) == 0:
			raise EmptyPopulationException("empty population")
		return cls.from_arrays(schema, cells, flags, outcomes = outcomes if have_outcomes else None)

	@classmethod
	def _encode_frame(cls, schema, frame, filename):
		missing = [ name for name in schema.names if name not in frame.columns ]
		if len(missing) > 0:
			raise IngestionException(f"{filename}: missing covariate column(s) {', '.join(missing)}")
		levels = np.empty((len(frame), schema.d), dtype = np.int64)
		for (i, name) in enumerate(schema.names):
			lookup = { label: index for (index, label) in enumerate(schema.covariates[i].level_labels) }
			column = frame[name].astype(str)
			encoded = column.map(lookup)
			bad = encoded.isna().to_numpy()
			if np.any(bad):
				row = int(np.flatnonzero(bad)[0])
				raise MalformedRowException(f"{filename}: '{column.iloc[row]}' is not a level of covariate {name}", row_number = row + 2)
			levels[:, i] = encoded.to_numpy(dtype = np.int64)
		return schema.encode_many(levels)

	@classmethod
	def _read_csv(cls, filename):
		try:
			return pandas.read_csv(filename, dtype = str, keep_default_na = False)
		except FileNotFoundError as e:
			raise IngestionException(f"{filename}: no such file") from e
		except pandas.errors.ParserError as e:
			raise IngestionException(f"{filename}: {e}") from e
		except pandas.errors.EmptyDataError as e:
			raise EmptyPopulationException(f"{filename}: empty population") from e

	@classmethod
	def _numeric_column(cls, frame, column, filename):
		values = pandas.to_numeric(frame[column].replace("", np.nan), errors = "coerce")
		raw_present = (frame[column] != "").to_numpy()
		bad = raw_present & values.isna().to_numpy()
		if np.any(bad):
			row = int(np.flatnonzero(bad)[0])
			raise MalformedRowException(f"{filename}: column {column} is not numeric ('{frame[column].iloc[row]}')", row_number = row + 2)
		return values.to_numpy(dtype = float)

	@classmethod
	def read_microdata(cls, schema, filename, pop_counts = None):
		"""Microdata CSV: covariate label columns, 'respondent' in {0, 1} and an
		optional numeric 'outcome' column. Row numbers in errors are file lines."""
		frame = cls._read_csv(filename)
		if len(frame) == 0:
			raise EmptyPopulationException(f"{filename}: empty population")
		if cls.RESPONDENT_COLUMN not in frame.columns:
			raise IngestionException(f"{filename}: missing column '{cls.RESPONDENT_COLUMN}'")
		cells = cls._encode_frame(schema, frame, filename)
		flags = frame[cls.RESPONDENT_COLUMN].str.strip()
		bad = ~flags.isin([ "0", "1" ]).to_numpy()
		if np.any(bad):
			row = int(np.flatnonzero(bad)[0])
			raise MalformedRowException(f"{filename}: respondent flag must be 0 or 1, got '{flags.iloc[row]}'", row_number = row + 2)
		respondent = (flags == "1").to_numpy()
		outcomes = None
		if cls.OUTCOME_COLUMN in frame.columns:
			outcomes = cls._numeric_column(frame, cls.OUTCOME_COLUMN, filename)
			present = ~np.isnan(outcomes)
			stray = present & ~respondent
			if np.any(stray):
				raise MalformedRowException(f"{filename}: non-respondent row carries an outcome", row_number = int(np.flatnonzero(stray)[0]) + 2)
			if np.any(respondent & ~present):
				if np.any(present):
					raise MalformedRowException(f"{filename}: respondent row without outcome", row_number = int(np.flatnonzero(respondent & ~present)[0]) + 2)
				outcomes = None
		_log.debug("Read %d rows (%d respondents) from %s", len(frame), respondent.sum(), filename)
		return cls.from_arrays(schema, cells, respondent, outcomes = outcomes, pop_counts = pop_counts)

	@classmethod
	def read_pop_counts(cls, schema, filename):
		"""Population counts CSV: covariate label columns and a 'count' column.
		Repeated cells are summed."""
		frame = cls._read_csv(filename)
		if cls.COUNT_COLUMN not in frame.columns:
			raise IngestionException(f"{filename}: missing column '{cls.COUNT_COLUMN}'")
		cells = cls._encode_frame(schema, frame, filename)
		counts = cls._numeric_column(frame, cls.COUNT_COLUMN, filename)
		bad = np.isnan(counts) | (counts < 0)
		if np.any(bad):
			raise MalformedRowException(f"{filename}: counts must be nonnegative numbers", row_number = int(np.flatnonzero(bad)[0]) + 2)
		pop_counts = np.bincount(cells, weights = counts, minlength = schema.cell_count)
		if pop_counts.sum() <= 0:
			raise EmptyPopulationException(f"{filename}: empty population")
		return pop_counts
