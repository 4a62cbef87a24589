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

from .BaseAction import BaseAction
from .design.CovariateSchema import CovariateSchema
from .design.InteractionDesign import InteractionDesign
from .Tools import JSONTools

class ActionDesign(BaseAction):
	def execute(self):
		if self._args.levels is not None:
			schema = CovariateSchema.from_levels(self._args.levels)
		else:
			schema = self._load_schema()
		design = InteractionDesign.build(schema, self._args.order)
		data = {
			"cells":		schema.cell_count,
			"design":		design,
		}
		if not self._args.no_diagnostics:
			diagnostics = design.diagnostics()
			data["rank"] = diagnostics.rank
			data["condition_number"] = diagnostics.condition_number
			data["full_rank"] = diagnostics.full_rank
		JSONTools.write(data, self._args.outfile)
