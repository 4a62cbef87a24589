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

class MultiCalException(Exception): pass

class ConfigurationException(MultiCalException): pass
class UsageException(MultiCalException): pass

class SchemaException(MultiCalException): pass
class InvalidLevelException(SchemaException): pass
class SchemaMismatchException(SchemaException): pass

class IngestionException(MultiCalException):
	def __init__(self, msg, row_number = None):
		if row_number is not None:
			msg = "row %d: %s" % (row_number, msg)
		super().__init__(msg)
		self.row_number = row_number

class EmptyPopulationException(IngestionException): pass
class MalformedRowException(IngestionException): pass

class CalibrationException(MultiCalException): pass
class InfeasibleCalibrationException(CalibrationException): pass
class ConvergenceException(CalibrationException): pass
class InvalidCalibrationSpecException(CalibrationException): pass

class OutcomeModelException(MultiCalException): pass
class SingularOutcomeModelException(OutcomeModelException): pass
class UndefinedPredictionException(OutcomeModelException): pass
class OutcomeModelRegistryException(OutcomeModelException): pass

class EstimationException(MultiCalException): pass
class MissingOutcomeException(EstimationException): pass
class EstimatorDisagreementException(EstimationException): pass

class SimulationException(MultiCalException): pass
class InvalidProbabilityException(SimulationException): pass
