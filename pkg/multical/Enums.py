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

import enum

class EstimationMethod(enum.Enum):
	Raking = "raking"
	Multilevel = "multilevel"
	Poststratification = "poststrat"
	MRP = "mrp"
	DRP = "drp"
	Weighted = "weighted"
	OracleHT = "oracle_ht"

class SolverStatus(enum.Enum):
	Converged = "converged"
	NotConverged = "not_converged"
	Infeasible = "infeasible"

class ExitCode(enum.IntEnum):
	Success = 0
	Failure = 1
	NotConverged = 2
	Infeasible = 3

class OutcomeModelKind(enum.Enum):
	Constant = "constant"
	Ridge = "ridge"
	MapLinear = "map_linear"
	Smoother = "smoother"
	BaggedTrees = "bagged_trees"
