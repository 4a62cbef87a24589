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

from .OutcomeSpec import OutcomeSpec, CoefficientDraw
from .Population import Population
from .ResponseModels import ResponseModels
from .Oracles import Oracles, BalanceBoundReport
from .EstimatorSuite import EstimatorSuite, SuiteSettings, ReplicationContext
from .SimResult import SimResult
from .Replications import Replications
from .SimulationConfig import SimulationConfig
from .Presets import Presets
