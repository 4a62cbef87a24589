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
import collections
import numpy as np
import pandas

class SimResult():
	"""Aggregates over replications, per estimator. Each replication contributes
	either a record or a failure; failed replications are excluded from that
	estimator's aggregates and counted."""
	Record = collections.namedtuple("Record", [ "replication", "error", "covered", "n_eff", "identity_residual" ])
	Summary = collections.namedtuple("Summary", [ "estimator", "replications", "failures", "bias", "rmse", "mc_se", "coverage", "mean_n_eff", "max_identity_residual" ])

	def __init__(self, names, reps, seed, truth = None):
		self._names = list(names)
		self._reps = reps
		self._seed = seed
		self._truth = truth
		self._records = { name: [ ] for name in self._names }
		self._failures = { name: collections.Counter() for name in self._names }

	def add(self, replication, name, outcome, truth):
		if isinstance(outcome, Exception):
			self._failures[name][type(outcome).__name__] += 1
			return
		report = outcome.report
		self._records[name].append(self.Record(replication = replication, error = report.estimate - truth, covered = report.covers(truth), n_eff = report.n_eff, identity_residual = outcome.identity_residual))

	def add_replication(self, replication, outcomes, truth):
		for name in self._names:
			self.add(replication, name, outcomes[name], truth)

	@property
	def names(self):
		return list(self._names)

	@property
	def reps(self):
		return self._reps

	@property
	def seed(self):
		return self._seed

	def records(self, name):
		return sorted(self._records[name], key = lambda record: record.replication)

	def failures(self, name):
		return dict(self._failures[name])

	def summary(self, name):
		records = self.records(name)
		count = len(records)
		failures = sum(self._failures[name].values())
		if count == 0:
			return self.Summary(estimator = name, replications = 0, failures = failures, bias = math.nan, rmse = math.nan, mc_se = math.nan, coverage = None, mean_n_eff = None, max_identity_residual = None)
		errors = [ record.error for record in records ]
		bias = math.fsum(errors) / count
		mean_square = math.fsum(error ** 2 for error in errors) / count
		spread = math.fsum((error - bias) ** 2 for error in errors) / (count - 1) if (count > 1) else 0.0
		covered = [ record.covered for record in records if record.covered is not None ]
		n_effs = [ record.n_eff for record in records if record.n_eff is not None ]
		residuals = [ abs(record.identity_residual) for record in records if record.identity_residual is not None ]
		return self.Summary(
			estimator = name,
			replications = count,
			failures = failures,
			bias = bias,
			rmse = math.sqrt(mean_square),
			mc_se = math.sqrt(spread / count),
			coverage = (sum(covered) / len(covered)) if (len(covered) > 0) else None,
			mean_n_eff = (math.fsum(n_effs) / len(n_effs)) if (len(n_effs) > 0) else None,
			max_identity_residual = max(residuals) if (len(residuals) > 0) else None,
		)

	def summaries(self):
		return [ self.summary(name) for name in self._names ]

	def to_dataframe(self):
		summaries = self.summaries()
		return pandas.DataFrame({
			"estimator":				[ summary.estimator for summary in summaries ],
			"bias":						[ summary.bias for summary in summaries ],
			"rmse":						[ summary.rmse for summary in summaries ],
			"coverage":					[ np.nan if (summary.coverage is None) else summary.coverage for summary in summaries ],
			"mean_n_eff":				[ np.nan if (summary.mean_n_eff is None) else summary.mean_n_eff for summary in summaries ],
			"replications":				[ summary.replications for summary in summaries ],
			"failures":					[ summary.failures for summary in summaries ],
			"mc_se":					[ summary.mc_se for summary in summaries ],
			"max_identity_residual":	[ np.nan if (summary.max_identity_residual is None) else summary.max_identity_residual for summary in summaries ],
		})

	def to_json(self):
		return {
			"reps":			self._reps,
			"seed":			self._seed,
			"truth":		self._truth,
			"estimators":	{ summary.estimator: dict(summary._asdict(), failure_kinds = self.failures(summary.estimator)) for summary in self.summaries() },
		}
