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
import tempfile
import unittest
import numpy as np
import pandas
from multical.__main__ import create_multicommand
from multical.Enums import ExitCode
from multical.GlobalConfig import GlobalConfig
from multical.Exceptions import UsageException, ConfigurationException

class CmdlineTests(unittest.TestCase):
	def setUp(self):
		self._tempdir = tempfile.TemporaryDirectory()
		self._dir = self._tempdir.name
		self._mc = create_multicommand()

	def tearDown(self):
		self._tempdir.cleanup()

	def _write(self, filename, text):
		path = os.path.join(self._dir, filename)
		with open(path, "w") as f:
			f.write(text)
		return path

	def _run(self, *cmdline):
		return self._mc.run(list(cmdline), silent = True)

	def _two_cell_inputs(self):
		"""60 units at level a with 10 respondents answering 1, 40 units at level
		b with 10 respondents answering 0."""
		schema = self._write("schema.json", json.dumps({ "covariates": [ { "name": "x", "levels": [ "a", "b" ] } ] }))
		lines = [ "x,respondent,outcome" ]
		lines += [ "a,1,1" ] * 10 + [ "a,0," ] * 50
		lines += [ "b,1,0" ] * 10 + [ "b,0," ] * 30
		data = self._write("data.csv", "\n".join(lines) + "\n")
		return (schema, data)

	def _counts_inputs(self):
		schema = self._write("schema2.json", json.dumps({ "covariates": [ { "name": "u", "levels": 2 }, { "name": "v", "levels": 3 } ] }))
		pop = self._write("pop.csv", "u,v,count\n0,0,30\n0,1,20\n0,2,25\n1,0,10\n1,1,40\n1,2,15\n")
		resp = self._write("resp.csv", "u,v,count\n0,0,5\n0,1,2\n0,2,6\n1,0,4\n1,1,3\n1,2,2\n")
		return (schema, pop, resp)

	def test_weights(self):
		(schema, data) = self._two_cell_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("weights", "-s", schema, "-d", data, "-k", "1", "-o", out), ExitCode.Success)
		weights = pandas.read_csv(os.path.join(out, "weights.csv"))
		np.testing.assert_allclose(weights["gamma"], [ 6, 4 ], rtol = 1e-6)
		self.assertEqual(list(weights["x"]), [ "a", "b" ])
		with open(os.path.join(out, "diagnostics.json")) as f:
			diagnostics = json.load(f)
		self.assertIn("kkt", diagnostics)
		self.assertIn("relative_duality_gap", diagnostics["kkt"])
		self.assertTrue(os.path.isfile(os.path.join(out, "summary.txt")))

	def test_refuses_overwrite(self):
		(schema, data) = self._two_cell_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("weights", "-s", schema, "-d", data, "-o", out), ExitCode.Success)
		self.assertEqual(self._run("weights", "-s", schema, "-d", data, "-o", out), ExitCode.Failure)
		self.assertEqual(self._run("weights", "-s", schema, "-d", data, "-o", out, "-f"), ExitCode.Success)

	def test_weights_infeasible(self):
		(schema, data) = self._two_cell_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("weights", "-s", schema, "-d", data, "-b", "0,1", "-o", out), ExitCode.Infeasible)

	def test_weights_from_counts(self):
		(schema, pop, resp) = self._counts_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("weights", "-s", schema, "-p", pop, "--resp-counts", resp, "-l", "10", "-o", out), ExitCode.Success)
		weights = pandas.read_csv(os.path.join(out, "weights.csv"))
		self.assertEqual(len(weights), 6)
		self.assertAlmostEqual(float((weights["resp_count"] * weights["gamma"]).sum()), 140, delta = 1e-5)

	def test_estimate(self):
		(schema, data) = self._two_cell_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("estimate", "-s", schema, "-d", data, "-m", "poststrat", "-m", "drp", "--drp-base", "poststrat", "-M", "constant", "-o", out), ExitCode.Success)
		with open(os.path.join(out, "estimates.json")) as f:
			estimates = json.load(f)["estimates"]
		self.assertEqual([ estimate["method"] for estimate in estimates ], [ "poststrat", "drp:poststrat:constant" ])
		for estimate in estimates:
			self.assertAlmostEqual(estimate["estimate"], 0.6, places = 10)
		predictions = pandas.read_csv(os.path.join(out, "predictions.csv"))
		np.testing.assert_allclose(predictions["prediction"], 0.5)

	def test_estimate_needs_outcomes(self):
		(schema, pop, resp) = self._counts_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("estimate", "-s", schema, "-p", pop, "--resp-counts", resp, "-o", out), ExitCode.Failure)

	def test_sweep(self):
		(schema, pop, resp) = self._counts_inputs()
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("sweep", "-s", schema, "-p", pop, "--resp-counts", resp, "-g", "0:4:5", "-o", out), ExitCode.Success)
		curve = pandas.read_csv(os.path.join(out, "tradeoff.csv"))
		self.assertGreaterEqual(len(curve), 5)
		with open(os.path.join(out, "selection.json")) as f:
			self.assertIn("selected_lambda", json.load(f))

	def test_design(self):
		outfile = os.path.join(self._dir, "design.json")
		self.assertEqual(self._run("design", "-L", "2,2", "-o", outfile), ExitCode.Success)
		with open(outfile) as f:
			design = json.load(f)
		self.assertEqual(design["cells"], 4)
		self.assertEqual(design["rank"], 4)
		self.assertEqual(design["design"]["order_sizes"], { "1": 3, "2": 1 })

	def test_simulate(self):
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("simulate", "-P", "census", "-r", "2", "-o", out), ExitCode.Success)
		results = pandas.read_csv(os.path.join(out, "results.csv"))
		self.assertTrue(np.all(np.abs(results["bias"]) <= 1e-8))
		self.assertTrue(np.all(results["failures"] == 0))
		self.assertEqual(self._run("simulate", "-o", os.path.join(self._dir, "other")), ExitCode.Failure)

	def test_simulate_regression(self):
		out = os.path.join(self._dir, "out")
		self.assertEqual(self._run("simulate", "-P", "census", "-r", "1", "--regression", "-o", out), ExitCode.Success)
		with open(os.path.join(out, "simulation.json")) as f:
			regression = json.load(f)["population_regression"]
		self.assertIn("1", regression["order_norms"])
		for split in regression["bias_split"].values():
			self.assertLessEqual(abs(split["contribution"]), 1e-6)

	def _output_bytes(self, out):
		contents = { }
		for filename in sorted(os.listdir(out)):
			with open(os.path.join(out, filename), "rb") as f:
				contents[filename] = f.read()
		return contents

	def test_reruns_byte_identical(self):
		(schema, data) = self._two_cell_inputs()
		(schema2, pop, resp) = self._counts_inputs()
		invocations = {
			"weights":	[ "weights", "-s", schema2, "-p", pop, "--resp-counts", resp, "-k", "2", "-l", "0.5" ],
			"estimate":	[ "estimate", "-s", schema, "-d", data, "-m", "raking", "-m", "drp", "-M", "ridge", "--penalty", "1.0" ],
			"sweep":	[ "sweep", "-s", schema2, "-p", pop, "--resp-counts", resp, "-g", "0:4:5" ],
			"simulate":	[ "simulate", "-P", "small", "-r", "3" ],
		}
		for (name, cmdline) in invocations.items():
			first = os.path.join(self._dir, name + "-first")
			second = os.path.join(self._dir, name + "-second")
			self.assertEqual(self._run(*cmdline, "-o", first), ExitCode.Success, name)
			self.assertEqual(self._run(*cmdline, "-o", second), ExitCode.Success, name)
			first_bytes = self._output_bytes(first)
			self.assertGreater(len(first_bytes), 0, name)
			self.assertEqual(first_bytes, self._output_bytes(second), name)

		parallel = os.path.join(self._dir, "simulate-parallel")
		self.assertEqual(self._run(*invocations["simulate"], "-j", "2", "-o", parallel), ExitCode.Success)
		self.assertEqual(self._output_bytes(os.path.join(self._dir, "simulate-first")), self._output_bytes(parallel))

	def test_usage_errors(self):
		with self.assertRaises(UsageException):
			self._run()
		with self.assertRaises(UsageException):
			self._run("frobnicate")
		with self.assertRaises(UsageException):
			self._run("weights", "-o", self._dir)
		with self.assertRaises(UsageException):
			self._run("weights", "-s", "schema.json", "-o", self._dir, "-l", "-1")

	def test_global_config(self):
		config = GlobalConfig.read(os.path.join(self._dir, "nonexistent.json"))
		self.assertEqual(config.get("solver", "balance_tol"), 1e-8)
		self.assertFalse(config.has("alpha"))
		config = GlobalConfig.read(self._write("config.json", json.dumps({ "solver": { "grad_tol": 1e-10 }, "alpha": 0.1 })))
		self.assertEqual(config.get("solver", "grad_tol"), 1e-10)
		self.assertEqual(config.get("solver", "max_iterations"), 5000)
		self.assertEqual(config.get("alpha"), 0.1)
		self.assertIsNone(config.get("solver", "no_such_key"))
		with self.assertRaises(ConfigurationException):
			GlobalConfig("inline", { "alpha": 1.5 })
		with self.assertRaises(ConfigurationException):
			GlobalConfig("inline", { "solver": { "balance_tol": 0 } })
		with self.assertRaises(ConfigurationException):
			GlobalConfig.read(self._write("broken.json", "{ not json"))
