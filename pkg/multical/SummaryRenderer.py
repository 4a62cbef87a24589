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
import mako.lookup
import mako.exceptions
from .Exceptions import ConfigurationException

class SummaryRenderer():
	"""Plain-text run summaries from the mako templates shipped in
	multical/templates."""
	TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")

	def __init__(self, template_dirs = None):
		self._lookup = mako.lookup.TemplateLookup((template_dirs or [ ]) + [ self.TEMPLATE_DIR ], strict_undefined = True, input_encoding = "utf-8")

	@staticmethod
	def number(value, digits = 12):
		if value is None:
			return "n/a"
		value = float(value)
		if math.isnan(value):
			return "nan"
		if math.isinf(value):
			return "inf" if (value > 0) else "-inf"
		return "%.*g" % (digits, value)

	def render(self, template_name, **variables):
		try:
			template = self._lookup.get_template(template_name)
		except mako.exceptions.TopLevelLookupException as e:
			raise ConfigurationException(f"Summary template {template_name} not found in {self.TEMPLATE_DIR}.") from e
		return template.render(fmt = self.number, **variables)

	def write(self, filename, template_name, **variables):
		with open(filename, "w", newline = "") as f:
			f.write(self.render(template_name, **variables))
