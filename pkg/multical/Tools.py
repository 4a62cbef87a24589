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
import sys
import json
import math
import contextlib
import numpy as np

class JSONTools():
	@classmethod
	def sanitize(cls, obj):
		if isinstance(obj, (bool, np.bool_)):
			return bool(obj)
		elif isinstance(obj, (int, np.integer)):
			return int(obj)
		elif isinstance(obj, (float, np.floating)):
			value = float(obj)
			if math.isnan(value):
				return "nan"
			elif math.isinf(value):
				return "inf" if (value > 0) else "-inf"
			return value
		elif isinstance(obj, np.ndarray):
			return [ cls.sanitize(child) for child in obj.tolist() ]
		elif isinstance(obj, (list, tuple)):
			return [ cls.sanitize(child) for child in obj ]
		elif isinstance(obj, dict):
			return { str(key): cls.sanitize(value) for (key, value) in obj.items() }
		elif hasattr(obj, "to_json"):
			return cls.sanitize(obj.to_json())
		else:
			return obj

	@classmethod
	def _serialize_default(cls, obj):
		raise NotImplementedError(f"Cannot serialize JSON from type {obj.__class__.__name__} (implement a 'to_json' method if you want this to be serializable)")

	@classmethod
	def dump(cls, obj, f, pretty_print = True):
		obj = cls.sanitize(obj)
		if pretty_print:
			json.dump(obj, f, indent = "\t", sort_keys = True, default = cls._serialize_default)
			print(file = f)
		else:
			json.dump(obj, f, separators = (",", ":"), sort_keys = True, default = cls._serialize_default)

	@classmethod
	def write(cls, obj, filename, pretty_print = True):
		with FileTools.open_write_stdout(filename) as f:
			cls.dump(obj, f, pretty_print = pretty_print)

	@classmethod
	def read(cls, filename):
		with open(filename) as f:
			return json.load(f)

class CSVTools():
	FLOAT_FORMAT = "%.17g"

	@classmethod
	def write(cls, dataframe, filename):
		with FileTools.open_write_stdout(filename) as f:
			dataframe.to_csv(f, index = False, float_format = cls.FLOAT_FORMAT, lineterminator = "\n")

class FileTools():
	@classmethod
	@contextlib.contextmanager
	def open_write_stdout(cls, filename):
		if filename == "-":
			yield sys.stdout
		else:
			with open(filename, "w", newline = "") as f:
				yield f

	@classmethod
	def prepare_output_dir(cls, dirname, force = False):
		if os.path.exists(dirname) and (not os.path.isdir(dirname)):
			raise FileExistsError("Output path exists and is not a directory: %s" % (dirname))
		with contextlib.suppress(FileExistsError):
			os.makedirs(dirname)
		return dirname
