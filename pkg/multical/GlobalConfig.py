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
import json
from .Exceptions import ConfigurationException

class GlobalConfig():
	"""User defaults from ~/.config/multical/configuration.json. Any key the file
	does not set falls back to the built-in default."""
	DEFAULT_FILENAME = "~/.config/multical/configuration.json"
	_DEFAULTS = {
		"solver": {
			"balance_tol":		1e-8,
			"grad_tol":			1e-8,
			"max_iterations":	5000,
		},
		"alpha":				0.05,
	}
	_MISSING = object()

	def __init__(self, filename, data = None):
		self._filename = filename
		self._config = { } if (data is None) else data
		if not isinstance(self._config, dict):
			raise ConfigurationException(f"{filename}: top level must be a JSON object")
		self._validate()

	@classmethod
	def read(cls, filename = None):
		filename = os.path.expanduser(cls.DEFAULT_FILENAME if (filename is None) else filename)
		try:
			with open(filename) as f:
				return cls(filename, json.load(f))
		except FileNotFoundError:
			return cls(filename)
		except json.decoder.JSONDecodeError as e:
			raise ConfigurationException(f"{filename}: not valid JSON ({e})") from e

	@classmethod
	def _lookup(cls, tree, path):
		for key in path:
			if (not isinstance(tree, dict)) or (key not in tree):
				return cls._MISSING
			tree = tree[key]
		return tree

	def _validate(self):
		for key in ("balance_tol", "grad_tol", "max_iterations"):
			value = self.get("solver", key)
			if (not isinstance(value, (int, float))) or (value <= 0):
				raise ConfigurationException(f"{self._filename}: solver.{key} must be a positive number, got {value!r}")
		alpha = self.get("alpha")
		if (not isinstance(alpha, (int, float))) or (not (0 < alpha < 1)):
			raise ConfigurationException(f"{self._filename}: alpha must lie inside (0, 1), got {alpha!r}")

	def has(self, *path):
		return self._lookup(self._config, path) is not self._MISSING

	def get(self, *path):
		value = self._lookup(self._config, path)
		if value is self._MISSING:
			value = self._lookup(self._DEFAULTS, path)
		return None if (value is self._MISSING) else value
