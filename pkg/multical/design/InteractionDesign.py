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
import itertools
import collections
import numpy as np
import scipy.sparse
import scipy.linalg
from multical.Exceptions import SchemaException

_log = logging.getLogger(__spec__.name)
ColumnGroup = collections.namedtuple("ColumnGroup", [ "order", "covariates", "offset", "size" ])
Diagnostics = collections.namedtuple("Diagnostics", [ "rank", "condition_number", "columns", "cells", "full_rank" ])

class InteractionDesign():
	"""Reference-cell coded design D = [D1 ... DK] over the cells of a schema.
	D1 holds the intercept and all non-reference level indicators; Dk holds the
	products of k indicators over distinct covariates."""
	ColumnGroup = ColumnGroup
	Diagnostics = Diagnostics
	DENSE_DIAGNOSTICS_LIMIT = 2000

	def __init__(self, schema, max_order):
		if (max_order < 1) or (max_order > schema.d):
			raise SchemaException(f"Interaction order must be in 1..{schema.d}, got {max_order}.")
		self._schema = schema
		self._max_order = max_order
		self._groups = [ ]
		offset = 0
		self._groups.append(self.ColumnGroup(order = 1, covariates = (), offset = 0, size = 1))
		offset += 1
		self._order_slices = { }
		for k in range(1, max_order + 1):
			start = 0 if (k == 1) else offset
			for subset in itertools.combinations(range(schema.d), k):
				size = math.prod(schema.levels[l] - 1 for l in subset)
				self._groups.append(self.ColumnGroup(order = k, covariates = subset, offset = offset, size = size))
				offset += size
			self._order_slices[k] = slice(start, offset)
		self._total_columns = offset
		self._matrix = None

	@classmethod
	def build(cls, schema, max_order = None):
		return cls(schema, schema.d if (max_order is None) else max_order)

	@property
	def schema(self):
		return self._schema

	@property
	def max_order(self):
		return self._max_order

	@property
	def total_columns(self):
		return self._total_columns

	@property
	def orders(self):
		return range(1, self._max_order + 1)

	def order_slice(self, k):
		return self._order_slices[k]

	def order_size(self, k):
		order_slice = self._order_slices[k]
		return order_slice.stop - order_slice.start

	@property
	def order_sizes(self):
		return { k: self.order_size(k) for k in self.orders }

	def order_columns(self, orders):
		"""Column indices of the given orders, concatenated in order."""
		return np.concatenate([ np.arange(self._order_slices[k].start, self._order_slices[k].stop) for k in orders ])

	def rows(self, cells):
		"""Sparse CSR rows of D for the given cell indices."""
		cells = np.asarray(cells, dtype = np.int64)
		levels = self._schema.decode_many(cells)
		row_parts = [ ]
		col_parts = [ ]
		for group in self._groups:
			if len(group.covariates) == 0:
				row_parts.append(np.arange(len(cells)))
				col_parts.append(np.zeros(len(cells), dtype = np.int64))
				continue
			sub = levels[:, group.covariates]
			hit = np.flatnonzero(np.all(sub > 0, axis = 1))
			if len(hit) == 0:
				continue
			dims = tuple(self._schema.levels[l] - 1 for l in group.covariates)
			local = np.ravel_multi_index(tuple((sub[hit] - 1).T), dims)
			row_parts.append(hit)
			col_parts.append(group.offset + local)
		row_index = np.concatenate(row_parts)
		col_index = np.concatenate(col_parts)
		data = np.ones(len(row_index))
		return scipy.sparse.csr_matrix((data, (row_index, col_index)), shape = (len(cells), self._total_columns))

	def matrix(self):
		if self._matrix is None:
			self._matrix = self.rows(np.arange(self._schema.cell_count))
		return self._matrix

	def transpose_dot(self, vector):
		"""D^T vector for a length-J vector; only nonzero cells are materialized."""
		vector = np.asarray(vector, dtype = float)
		cells = np.flatnonzero(vector)
		if len(cells) == 0:
			return np.zeros(self._total_columns)
		return self.rows(cells).T @ vector[cells]

	def column_labels(self):
		labels = [ ]
		for group in self._groups:
			if len(group.covariates) == 0:
				labels.append("(intercept)")
				continue
			ranges = [ range(1, self._schema.levels[l]) for l in group.covariates ]
			for combination in itertools.product(*ranges):
				labels.append(":".join("%s=%s" % (self._schema.covariates[l].name, self._schema.covariates[l].level_labels[level]) for (l, level) in zip(group.covariates, combination)))
		return labels

	def diagnostics(self):
		J = self._schema.cell_count
		if J > self.DENSE_DIAGNOSTICS_LIMIT:
			_log.warning("Design with %d cells is too large for dense rank/condition diagnostics.", J)
			return self.Diagnostics(rank = None, condition_number = None, columns = self._total_columns, cells = J, full_rank = None)
		singular_values = scipy.linalg.svdvals(self.matrix().toarray())
		tolerance = singular_values[0] * max(J, self._total_columns) * np.finfo(float).eps
		rank = int(np.sum(singular_values > tolerance))
		full_rank = rank == min(J, self._total_columns)
		if full_rank:
			condition_number = float(singular_values[0] / singular_values[-1])
		else:
			_log.warning("Design is rank deficient: rank %d with %d columns.", rank, self._total_columns)
			condition_number = math.inf
		return self.Diagnostics(rank = rank, condition_number = condition_number, columns = self._total_columns, cells = J, full_rank = full_rank)

	def to_json(self):
		return {
			"max_order":		self._max_order,
			"order_sizes":		{ str(k): size for (k, size) in self.order_sizes.items() },
			"total_columns":	self._total_columns,
		}

	def __repr__(self):
		return "InteractionDesign<%s, K=%d, m=%d>" % (self._schema, self._max_order, self._total_columns)
