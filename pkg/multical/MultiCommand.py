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
import textwrap
import collections
from .FriendlyArgumentParser import FriendlyArgumentParser
from .Enums import ExitCode
from .Exceptions import UsageException

Subcommand = collections.namedtuple("Subcommand", [ "name", "summary", "configure_parser", "action" ])
Invocation = collections.namedtuple("Invocation", [ "subcommand", "args" ])

class MultiCommand():
	"""Dispatches "multical <subcommand> [options]" to an action class. A
	subcommand may be abbreviated to any unique prefix."""
	SUMMARY_WIDTH = 56

	def __init__(self, description = None, version = None):
		self._description = description
		self._version = version
		self._subcommands = collections.OrderedDict()

	def register(self, name, summary, configure_parser, action):
		if name in self._subcommands:
			raise UsageException(f"Subcommand '{name}' registered twice.")
		self._subcommands[name] = Subcommand(name = name, summary = summary, configure_parser = configure_parser, action = action)

	@property
	def names(self):
		return list(self._subcommands)

	def _print_overview(self, f):
		print(f"usage: {sys.argv[0]} [command] [options]", file = f)
		print(file = f)
		if self._description is not None:
			print(self._description, file = f)
			print(file = f)
		print("Available commands:", file = f)
		for subcommand in self._subcommands.values():
			lines = textwrap.wrap(subcommand.summary, width = self.SUMMARY_WIDTH) or [ "" ]
			print("    %-15s    %s" % (subcommand.name, lines[0]), file = f)
			for line in lines[1:]:
				print("    %-15s    %s" % ("", line), file = f)
		print(file = f)
		if self._version is not None:
			print(f"version: multical v{self._version}", file = f)
			print(file = f)
		print(f"Run \"{sys.argv[0]} [command] --help\" for the options of a command.", file = f)

	def _usage_error(self, msg, silent):
		if silent:
			raise UsageException(msg)
		print(f"Error: {msg}", file = sys.stderr)
		self._print_overview(sys.stderr)
		sys.exit(ExitCode.Failure)

	def resolve(self, prefix):
		if prefix in self._subcommands:
			return self._subcommands[prefix]
		candidates = [ name for name in self._subcommands if name.startswith(prefix) ]
		if len(candidates) == 1:
			return self._subcommands[candidates[0]]
		if len(candidates) == 0:
			raise UsageException(f"No such command: '{prefix}'.")
		raise UsageException(f"'{prefix}' could be any of {', '.join(candidates)}.")

	def parse(self, cmdline, silent = False):
		if len(cmdline) == 0:
			self._usage_error("No command supplied.", silent)
		if cmdline[0] in ("-h", "--help"):
			self._print_overview(sys.stdout)
			return None
		try:
			subcommand = self.resolve(cmdline[0])
		except UsageException as e:
			self._usage_error(str(e), silent)
		parser = FriendlyArgumentParser(prog = f"{sys.argv[0]} {subcommand.name}", description = subcommand.summary, add_help = False)
		subcommand.configure_parser(parser)
		parser.add_argument("--help", action = "help", help = "Show this help page.")
		parser.setsilenterror(silent)
		return Invocation(subcommand = subcommand, args = parser.parse_args(cmdline[1:]))

	def run(self, cmdline, silent = False):
		"""Returns the exit code of the action; usage errors raise
		UsageException when silent, otherwise exit."""
		invocation = self.parse(cmdline, silent = silent)
		if invocation is None:
			return ExitCode.Success
		action = invocation.subcommand.action(invocation.subcommand.name, invocation.args)
		return action.run()
