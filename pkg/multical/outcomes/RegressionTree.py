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

import collections
import numpy as np

class RegressionTree():
	"""CART regression tree on categorical cells. Every split separates one
	level of one covariate from all other levels; the split with the largest
	weighted between-group sum of squares wins, ties go to the lowest
	(covariate, level) pair."""
	Node = collections.namedtuple("Node", [ "covariate", "level", "matching", "other", "leaf" ])

	def __init__(self, root, leaf_count):
		self._root = root
		self._leaf_count = leaf_count

	@property
	def leaf_count(self):
		return self._leaf_count

	@classmethod
	def grow(cls, levels, targets, weights, max_depth, min_leaf_weight = 1.0):
		leaf_counter = [ 0 ]

		def make_leaf():
			leaf = cls.Node(covariate = None, level = None, matching = None, other = None, leaf = leaf_counter[0])
			leaf_counter[0] += 1
			return leaf

		def best_split(index):
			w = weights[index]
			y = targets[index]
			total = w.sum()
			weighted_sum = w @ y
			mean = weighted_sum / total
			best = None
			best_gain = 1e-12 * max(1.0, float(w @ (y - mean) ** 2))
			for covariate in range(levels.shape[1]):
				column = levels[index, covariate]
				for level in np.unique(column):
					matching = column == level
					w_matching = w[matching].sum()
					w_other = total - w_matching
					if (w_matching < min_leaf_weight) or (w_other < min_leaf_weight):
						continue
					mean_matching = (w[matching] @ y[matching]) / w_matching
					mean_other = (weighted_sum - w_matching * mean_matching) / w_other
					gain = w_matching * (mean_matching - mean) ** 2 + w_other * (mean_other - mean) ** 2
					if gain > best_gain:
						best_gain = gain
						best = (covariate, int(level), matching)
			return best

		def grow_node(index, depth):
			if depth >= max_depth:
				return make_leaf()
			split = best_split(index)
			if split is None:
				return make_leaf()
			(covariate, level, matching) = split
			matching_node = grow_node(index[matching], depth + 1)
			other_node = grow_node(index[~matching], depth + 1)
			return cls.Node(covariate = covariate, level = level, matching = matching_node, other = other_node, leaf = None)

		root = grow_node(np.arange(len(targets)), 0)
		return cls(root, leaf_counter[0])

	def apply(self, levels):
		"""Leaf index for each row of a level matrix; unseen level combinations
		are routed through the splits like any other."""
		leaves = np.empty(len(levels), dtype = np.int64)
		stack = [ (self._root, np.arange(len(levels))) ]
		while len(stack) > 0:
			(node, index) = stack.pop()
			if node.leaf is not None:
				leaves[index] = node.leaf
				continue
			matching = levels[index, node.covariate] == node.level
			stack.append((node.matching, index[matching]))
			stack.append((node.other, index[~matching]))
		return leaves

	def to_json(self):
		def dump(node):
			if node.leaf is not None:
				return { "leaf": node.leaf }
			return { "covariate": node.covariate, "level": node.level, "matching": dump(node.matching), "other": dump(node.other) }
		return dump(self._root)
