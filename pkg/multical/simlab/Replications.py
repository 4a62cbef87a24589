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
import concurrent.futures
import numpy as np
from multical.simlab.SimResult import SimResult
from multical.Exceptions import SimulationException

_log = logging.getLogger(__spec__.name)

def _replicate(population, suite, seed_sequence):
	rng = np.random.default_rng(seed_sequence)
	resampled = population.resample(rng)
	respondent = resampled.draw_respondents(rng)
	context = suite.context(resampled, respondent)
	return (context.truth, int(respondent.sum()), suite.evaluate(context))

def _replicate_batch(population, suite, batch):
	return [ (index, ) + _replicate(population, suite, seed_sequence) for (index, seed_sequence) in batch ]

class Replications():
	"""Resample-and-respond replications of an estimator suite. Replication r
	draws from the r-th child of the master seed sequence, so results do not
	depend on how replications are distributed over worker processes."""

	def __init__(self, population, suite):
		if population.propensity is None:
			raise SimulationException("Replications need a response propensity table.")
		self._population = population
		self._suite = suite

	def _batches(self, children, jobs):
		indexed = list(enumerate(children))
		return [ indexed[i::jobs] for i in range(jobs) ]

	def run(self, reps, seed, jobs = 1):
		if reps < 1:
			raise SimulationException(f"Need at least one replication, got {reps}.")
		children = np.random.SeedSequence(seed).spawn(reps)
		result = SimResult(self._suite.names, reps = reps, seed = seed, truth = self._population.mean)
		if jobs <= 1:
			replicated = _replicate_batch(self._population, self._suite, list(enumerate(children)))
		else:
			replicated = [ ]
			with concurrent.futures.ProcessPoolExecutor(max_workers = jobs) as executor:
				futures = [ executor.submit(_replicate_batch, self._population, self._suite, batch) for batch in self._batches(children, jobs) ]
				for future in futures:
					replicated += future.result()
			replicated.sort(key = lambda entry: entry[0])
		for (index, truth, respondents, outcomes) in replicated:
			_log.debug("Replication %d: %d respondents", index, respondents)
			result.add_replication(index, outcomes, truth)
		for name in self._suite.names:
			failures = result.failures(name)
			if len(failures) > 0:
				_log.warning("%s failed in %d of %d replications (%s)", name, sum(failures.values()), reps, ", ".join("%s: %d" % (kind, count) for (kind, count) in sorted(failures.items())))
		return result

	@classmethod
	def run_replications(cls, population, suite, reps, seed, jobs = 1):
		return cls(population, suite).run(reps, seed, jobs = jobs)
