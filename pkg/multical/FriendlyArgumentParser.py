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

import sys
import math
import argparse
import textwrap
from .Exceptions import UsageException

class FriendlyArgumentParser(argparse.ArgumentParser):
	def __init__(self, *args, **kwargs):
		argparse.ArgumentParser.__init__(self, *args, **kwargs)
		self.__silent_error = False

	def setsilenterror(self, silenterror):
		self.__silent_error = silenterror

	def error(self, msg):
		if self.__silent_error:
			raise UsageException(msg)
		else:
			for line in textwrap.wrap(f"Error: {msg}", subsequent_indent = "  "):
				print(line, file = sys.stderr)
			print(file = sys.stderr)
			self.print_help(file = sys.stderr)
			sys.exit(1)

def penalty(value):
	"""Nonnegative float; "inf" drops an order."""
	try:
		result = float(value)
	except ValueError:
		raise argparse.ArgumentTypeError("Not a valid penalty: %s" % (value))
	if math.isnan(result) or (result < 0):
		raise argparse.ArgumentTypeError("Penalty must be nonnegative or inf: %s" % (value))
	return result

def penalty_list(value):
	"""Comma-separated penalties, one for all orders or one per order 2..K."""
	return [ penalty(item.strip()) for item in value.split(",") ]

def bounds(value):
	"""L,U weight bounds; either side may be "inf" or "-inf"."""
	text = value.split(",")
	if len(text) != 2:
		raise argparse.ArgumentTypeError("Bounds must be given as L,U: %s" % (value))
	try:
		(lower, upper) = (float(text[0]), float(text[1]))
	except ValueError:
		raise argparse.ArgumentTypeError("Not valid numeric bounds: %s" % (value))
	return (lower, upper)

def grid(value):
	"""Either a comma-separated list of positive values or start:stop:count
	for a log-spaced grid of count points between 10^start and 10^stop."""
	try:
		if ":" in value:
			(start, stop, count) = value.split(":")
			(start, stop, count) = (float(start), float(stop), int(count))
			if count < 2:
				raise argparse.ArgumentTypeError("A log-spaced grid needs at least two points: %s" % (value))
			return [ 10 ** (start + (stop - start) * i / (count - 1)) for i in range(count) ]
		values = [ float(item) for item in value.split(",") ]
	except ValueError:
		raise argparse.ArgumentTypeError("Not a valid grid: %s" % (value))
	if any((not math.isfinite(item)) or (item <= 0) for item in values):
		raise argparse.ArgumentTypeError("Grid values must be positive and finite: %s" % (value))
	return values

def probability(value):
	try:
		result = float(value)
	except ValueError:
		raise argparse.ArgumentTypeError("Not a number: %s" % (value))
	if not (0 < result < 1):
		raise argparse.ArgumentTypeError("Must lie strictly between 0 and 1: %s" % (value))
	return result
