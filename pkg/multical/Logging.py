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

logging.TRACE = logging.DEBUG - 1
logging.addLevelName(logging.TRACE, "TRACE")

class MultiCalLogger(logging.Logger):
	"""Logger class installed for the whole process. TRACE sits below DEBUG and
	carries per-iteration solver output."""
	VERBOSITY_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG, logging.TRACE)
	FORMAT = "{name:>30s} [{levelname:.1s}]: {message}"

	def trace(self, msg, *args, **kwargs):
		if self.isEnabledFor(logging.TRACE):
			self._log(logging.TRACE, msg, args, **kwargs)

	@classmethod
	def level_for_verbosity(cls, verbosity):
		return cls.VERBOSITY_LEVELS[min(max(verbosity, 0), len(cls.VERBOSITY_LEVELS) - 1)]

	@classmethod
	def set_logging_by_verbosity(cls, verbosity):
		level = cls.level_for_verbosity(verbosity)
		logging.basicConfig(format = cls.FORMAT, style = "{", level = level, force = True)
		# numpy and scipy warnings end up in the log
		logging.captureWarnings(True)

logging.setLoggerClass(MultiCalLogger)
