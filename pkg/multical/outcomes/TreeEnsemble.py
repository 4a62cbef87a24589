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
import scipy.sparse.linalg
from multical.outcomes.RegressionTree import RegressionTree
from multical.Exceptions import OutcomeModelException

_log = logging.getLogger(__spec__.name)

class TreeEnsemble():
	"""Bagged regression trees over the cells of a schema. Tree structure comes
	from a multinomial bootstrap of the units behind the training cells; leaf
	values are always computed afterwards from the full data (leaf sums of a
	value vector divided by leaf sums of a mass vector)."""

	def __init__(self, schema, trees, seed, depth):
		self._schema = schema
		self._trees = trees
		self._seed = seed
		self._depth = depth
		self._all_leaves = None

	@classmethod
	def fit(cls, schema, cells, targets, masses, trees = 100, depth = 4, seed = 0, bootstrap = True, min_leaf_weight = 1.0):
		if trees < 1:
			raise OutcomeModelException(f"Need at least one tree, got {trees}.")
		if depth < 0:
			raise OutcomeModelException(f"Tree depth must be nonnegative, got {depth}.")
		cells = np.asarray(cells, dtype = np.int64)
		targets = np.asarray(targets, dtype = float)
		masses = np.asarray(masses, dtype = float)
		levels = schema.decode_many(cells)
		total = int(round(masses.sum()))
		fitted = [ ]
		for (b, tree_seed) in enumerate(np.random.SeedSequence(seed).spawn(trees)):
			if bootstrap:
				rng = np.random.default_rng(tree_seed)
				weights = rng.multinomial(total, masses / masses.sum()).astype(float)
			else:
				weights = masses
			keep = weights > 0
			fitted.append(RegressionTree.grow(levels[keep], targets[keep], weights[keep], depth, min_leaf_weight = min_leaf_weight))
		_log.debug("Grew %d trees of depth <= %d with %s leaves on average", trees, depth, "%.1f" % np.mean([ tree.leaf_count for tree in fitted ]))
		return cls(schema, fitted, seed, depth)

	@property
	def trees(self):
		return list(self._trees)

	@property
	def seed(self):
		return self._seed

	@property
	def depth(self):
		return self._depth

	def all_leaves(self):
		"""B x J array with the leaf of every cell in every tree."""
		if self._all_leaves is None:
			levels = self._schema.all_levels()
			self._all_leaves = np.stack([ tree.apply(levels) for tree in self._trees ])
		return self._all_leaves

	def leaf_ratio(self, values, masses):
		"""Per cell, the average over trees of (leaf sum of values) / (leaf sum of
		masses) for the leaf containing the cell. NaN where every tree puts the
		cell into a leaf without mass."""
		leaves = self.all_leaves()
		ratios = np.full(leaves.shape, np.nan)
		for (b, tree) in enumerate(self._trees):
			value_sums = np.bincount(leaves[b], weights = values, minlength = tree.leaf_count)
			mass_sums = np.bincount(leaves[b], weights = masses, minlength = tree.leaf_count)
			with np.errstate(invalid = "ignore", divide = "ignore"):
				leaf_values = np.where(mass_sums > 0, value_sums / mass_sums, np.nan)
			ratios[b] = leaf_values[leaves[b]]
		defined = np.isfinite(ratios)
		count = defined.sum(axis = 0)
		total = np.where(defined, ratios, 0).sum(axis = 0)
		return np.where(count > 0, total / np.maximum(count, 1), np.nan)

	def smoother(self, masses):
		"""W(s, s') = (1/B) sum_b 1{s' in leaf_b(s)} / (leaf mass), as a symmetric
		J x J linear operator."""
		leaves = self.all_leaves()
		J = leaves.shape[1]
		mass_sums = [ np.bincount(leaves[b], weights = masses, minlength = tree.leaf_count) for (b, tree) in enumerate(self._trees) ]
		def matvec(v):
			v = np.asarray(v, dtype = float).ravel()
			result = np.zeros(J)
			for (b, tree) in enumerate(self._trees):
				sums = np.bincount(leaves[b], weights = v, minlength = tree.leaf_count)
				with np.errstate(invalid = "ignore", divide = "ignore"):
					per_leaf = np.where(mass_sums[b] > 0, sums / mass_sums[b], 0.0)
				result += per_leaf[leaves[b]]
			return result / len(self._trees)
		return scipy.sparse.linalg.LinearOperator((J, J), matvec = matvec, rmatvec = matvec, dtype = float)

	def to_json(self):
		return {
			"seed":		self._seed,
			"depth":	self._depth,
			"trees":	[ tree.to_json() for tree in self._trees ],
		}
