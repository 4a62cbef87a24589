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

import os
import math
import logging
import traceback
from .GlobalConfig import GlobalConfig
from .Enums import ExitCode
from .Exceptions import MultiCalException, InfeasibleCalibrationException, ConvergenceException, UsageException
from .design.CovariateSchema import CovariateSchema
from .design.Tabulation import Tabulation
from .design.CellTable import CellTable
from .Tools import FileTools

_log = logging.getLogger(__spec__.name)

class BaseAction():
	def __init__(self, cmd, args):
		self._cmd = cmd
		self._args = args
		if hasattr(self._args, "verbose"):
			logging.getLoggerClass().set_logging_by_verbosity(self._args.verbose)
		self._config = GlobalConfig.read()

	@property
	def config(self):
		return self._config

	def _tolerances(self):
		return {
			"balance_tol":		self._config.get("solver", "balance_tol"),
			"grad_tol":			self._config.get("solver", "grad_tol"),
			"max_iterations":	self._config.get("solver", "max_iterations"),
		}

	def _alpha(self):
		alpha = getattr(self._args, "alpha", None)
		return self._config.get("alpha") if (alpha is None) else alpha

	def _load_schema(self):
		return CovariateSchema.load_from_file(self._args.schema)

	def _load_cell_table(self, schema):
		pop_counts = None
		if getattr(self._args, "pop_counts", None) is not None:
			pop_counts = Tabulation.read_pop_counts(schema, self._args.pop_counts)
		if getattr(self._args, "data", None) is not None:
			return Tabulation.read_microdata(schema, self._args.data, pop_counts = pop_counts)
		if getattr(self._args, "resp_counts", None) is not None:
			if pop_counts is None:
				raise UsageException("Respondent counts need population counts (--pop-counts).")
			return CellTable(schema, pop_counts, Tabulation.read_pop_counts(schema, self._args.resp_counts))
		raise UsageException("Need either microdata (--data) or respondent counts (--resp-counts).")

	def _lambdas(self, max_order, N):
		"""Command-line penalties are on the population count scale unless
		--solver-scale is given."""
		if max_order < 2:
			return None
		lambdas = getattr(self._args, "lambda_", None)
		if lambdas is None:
			lambdas = [ 1.0 ]
		if not getattr(self._args, "solver_scale", False):
			lambdas = [ value / N for value in lambdas ]
		return lambdas

	def _output_dir(self):
		return FileTools.prepare_output_dir(self._args.out)

	def _output_file(self, filename):
		path = os.path.join(self._args.out, filename)
		if os.path.exists(path) and (not getattr(self._args, "force", False)):
			raise UsageException(f"Refusing to overwrite: {path}")
		return path

	def execute(self):
		raise NotImplementedError("%s.execute" % (self.__class__.__name__))

	def run(self):
		try:
			result = self.execute()
		except InfeasibleCalibrationException as e:
			_log.error("Infeasible: [%s] %s", e.__class__.__name__, str(e))
			return ExitCode.Infeasible
		except ConvergenceException as e:
			_log.error("Not converged: [%s] %s", e.__class__.__name__, str(e))
			return ExitCode.NotConverged
		except (MultiCalException, OSError) as e:
			_log.error("%s failed: [%s] %s", self._cmd, e.__class__.__name__, str(e))
			if _log.isEnabledFor(logging.DEBUG):
				print(traceback.format_exc())
			return ExitCode.Failure
		return ExitCode.Success if (result is None) else result
