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
import tempfile
import unittest
import numpy as np
from multical.design.CovariateSchema import CovariateSchema
from multical.design.CellTable import CellTable
from multical.design.Tabulation import Tabulation
from multical.design.InteractionDesign import InteractionDesign
from multical.Exceptions import SchemaException, InvalidLevelException, MalformedRowException, IngestionException, EmptyPopulationException, SchemaMismatchException

class DesignTests(unittest.TestCase):
	def setUp(self):
		self._schema = CovariateSchema.from_levels([ 2, 4, 3 ], names = [ "sex", "age", "region" ])

	def _write(self, dirname, filename, text):
		path = os.path.join(dirname, filename)
		with open(path, "w") as f:
			f.write(text)
		return path

	def test_encode_decode(self):
		self.assertEqual(self._schema.cell_count, 24)
		self.assertEqual(self._schema.encode_cell((1, 3, 2)).index, 23)
		self.assertEqual(self._schema.encode_cell((0, 0, 0)).index, 0)
		self.assertEqual(self._schema.encode_cell((0, 1, 0)).index, 3)
		self.assertEqual(self._schema.decode_cell(23).levels, (1, 3, 2))
		for index in range(24):
			self.assertEqual(self._schema.encode_cell(self._schema.decode_cell(index).levels).index, index)

	def test_invalid_levels(self):
		with self.assertRaises(InvalidLevelException):
			self._schema.encode_cell((2, 0, 0))
		with self.assertRaises(InvalidLevelException):
			self._schema.decode_cell(24)
		with self.assertRaises(InvalidLevelException):
			self._schema.level_index(1, "7")

	def test_schema_validation(self):
		with self.assertRaises(SchemaException):
			CovariateSchema.from_levels([ 2, 1 ])
		with self.assertRaises(SchemaException):
			CovariateSchema.from_levels([ 2, 3 ], names = [ "a", "a" ])
		with self.assertRaises(SchemaException):
			CovariateSchema.from_json({ "names": [ ] })

	def test_schema_json(self):
		schema = CovariateSchema.from_json({ "covariates": [
			{ "name": "sex", "levels": [ "f", "m" ] },
			{ "name": "age", "levels": 3 },
		] })
		self.assertEqual(schema.levels, (2, 3))
		self.assertEqual(schema.covariates[1].level_labels, ("0", "1", "2"))
		self.assertEqual(schema.level_index(0, "m"), 1)
		self.assertEqual(CovariateSchema.from_json(schema.to_json()), schema)

	def test_order_sizes(self):
		design = InteractionDesign.build(self._schema)
		self.assertEqual(design.order_sizes, { 1: 7, 2: 11, 3: 6 })
		self.assertEqual(design.total_columns, 24)
		self.assertEqual(design.matrix().shape, (24, 24))
		self.assertEqual(InteractionDesign(self._schema, 2).total_columns, 18)
		self.assertEqual(len(design.column_labels()), 24)
		self.assertEqual(design.column_labels()[0], "(intercept)")

	def test_reference_cell_row(self):
		design = InteractionDesign.build(self._schema)
		row = design.rows([ 0 ]).toarray()[0]
		self.assertEqual(row[0], 1)
		self.assertEqual(row.sum(), 1)
		row = design.rows([ 23 ]).toarray()[0]
		self.assertEqual(row.sum(), 8)

	def test_saturated_design_full_rank(self):
		diagnostics = InteractionDesign.build(self._schema).diagnostics()
		self.assertEqual(diagnostics.rank, 24)
		self.assertTrue(diagnostics.full_rank)

	def test_condition_number(self):
		schema = CovariateSchema.from_levels([ 2, 2 ])
		design = InteractionDesign.build(schema)
		dense = np.array([
			[ 1, 0, 0, 0 ],
			[ 1, 0, 1, 0 ],
			[ 1, 1, 0, 0 ],
			[ 1, 1, 1, 1 ],
		], dtype = float)
		np.testing.assert_array_equal(design.matrix().toarray(), dense)
		self.assertAlmostEqual(design.diagnostics().condition_number, np.linalg.cond(dense), places = 10)

	def test_transpose_dot(self):
		design = InteractionDesign(self._schema, 2)
		vector = np.arange(24, dtype = float) % 5
		np.testing.assert_allclose(design.transpose_dot(vector), design.matrix().T @ vector)
		np.testing.assert_array_equal(design.transpose_dot(np.zeros(24)), np.zeros(18))

	def test_order_out_of_range(self):
		with self.assertRaises(SchemaException):
			InteractionDesign(self._schema, 4)
		with self.assertRaises(SchemaException):
			InteractionDesign(self._schema, 0)

	def test_tabulate(self):
		rows = [
			((0, 0, 0), True, 1.0),
			((0, 0, 0), True, 0.0),
			((0, 0, 0), False, None),
			((1, 3, 2), True, 2.0),
			((1, 3, 2), False, None),
		]
		table = Tabulation.tabulate(self._schema, rows)
		self.assertEqual(table.N, 5)
		self.assertEqual(table.n, 3)
		self.assertEqual(table.pop_counts[0], 3)
		self.assertEqual(table.resp_counts[23], 1)
		self.assertAlmostEqual(table.cell_means()[0], 0.5)
		self.assertAlmostEqual(table.resp_sumsq[23], 4.0)
		self.assertTrue(np.isnan(table.cell_means()[1]))
		self.assertEqual(list(table.support), [ 0, 23 ])

	def test_tabulate_malformed(self):
		with self.assertRaises(MalformedRowException) as context:
			Tabulation.tabulate(self._schema, [ ((0, 0, 0), True, 1.0), ((0, 5, 0), True, 1.0) ])
		self.assertEqual(context.exception.row_number, 2)
		with self.assertRaises(MalformedRowException):
			Tabulation.tabulate(self._schema, [ ((0, 0, 0), False, 1.0) ])
		with self.assertRaises(MalformedRowException):
			Tabulation.tabulate(self._schema, [ ((0, 0, 0), True, 1.0), ((0, 0, 0), True, None) ])
		with self.assertRaises(EmptyPopulationException):
			Tabulation.tabulate(self._schema, [ ])

	def test_cell_table_validation(self):
		schema = CovariateSchema.from_levels([ 2 ])
		with self.assertRaises(IngestionException):
			CellTable(schema, [ 1, 1 ], [ 2, 1 ])
		with self.assertRaises(IngestionException):
			CellTable(schema, [ 1, -1 ], [ 0, 0 ])
		with self.assertRaises(EmptyPopulationException):
			CellTable(schema, [ 0, 0 ], [ 0, 0 ])
		with self.assertRaises(SchemaMismatchException):
			CellTable(schema, [ 1, 1, 1 ], [ 0, 0, 0 ])
		with self.assertRaises(IngestionException):
			CellTable(schema, [ 5, 5 ], [ 1, 0 ], [ 1, 1 ])

	def test_occupancy(self):
		schema = CovariateSchema.from_levels([ 2, 2 ])
		table = CellTable(schema, [ 10, 20, 30, 0 ], [ 1, 0, 3, 0 ])
		occupancy = table.occupancy()
		self.assertEqual(occupancy["populated_cells"], 3)
		self.assertEqual(occupancy["occupied_cells"], 2)
		self.assertAlmostEqual(occupancy["represented_population_fraction"], 40 / 60)
		self.assertEqual(list(table.empty_populated_cells()), [ 1 ])

	def test_collapse(self):
		schema = CovariateSchema.from_levels([ 2, 3 ], names = [ "a", "b" ])
		table = CellTable(schema, [ 1, 2, 3, 4, 5, 6 ], [ 1, 1, 0, 1, 0, 2 ])
		(coarse, cell_map) = schema.collapse({ "b": { "0": "low", "1": "high", "2": "high" } })
		self.assertEqual(coarse.levels, (2, 2))
		self.assertEqual(list(cell_map), [ 0, 1, 1, 2, 3, 3 ])
		collapsed = table.collapse(coarse, cell_map)
		np.testing.assert_array_equal(collapsed.pop_counts, [ 1, 5, 4, 11 ])
		np.testing.assert_array_equal(collapsed.resp_counts, [ 1, 1, 1, 2 ])
		with self.assertRaises(SchemaException):
			schema.collapse({ "b": { "0": "x", "1": "x", "2": "x" } })

	def test_read_microdata(self):
		with tempfile.TemporaryDirectory() as dirname:
			data = self._write(dirname, "data.csv", "sex,age,region,respondent,outcome\n0,0,0,1,1\n0,0,0,0,\n1,3,2,1,0.5\n1,3,2,0,\n")
			table = Tabulation.read_microdata(self._schema, data)
			self.assertEqual(table.N, 4)
			self.assertEqual(table.n, 2)
			self.assertAlmostEqual(table.cell_means()[23], 0.5)

			pop = self._write(dirname, "pop.csv", "sex,age,region,count\n0,0,0,10\n1,3,2,5\n0,0,0,2.5\n")
			pop_counts = Tabulation.read_pop_counts(self._schema, pop)
			self.assertEqual(pop_counts[0], 12.5)
			table = Tabulation.read_microdata(self._schema, data, pop_counts = pop_counts)
			self.assertEqual(table.N, 17.5)

	def test_read_microdata_errors(self):
		with tempfile.TemporaryDirectory() as dirname:
			bad_level = self._write(dirname, "bad_level.csv", "sex,age,region,respondent\n0,0,0,1\n0,9,0,1\n")
			with self.assertRaises(MalformedRowException) as context:
				Tabulation.read_microdata(self._schema, bad_level)
			self.assertEqual(context.exception.row_number, 3)

			bad_flag = self._write(dirname, "bad_flag.csv", "sex,age,region,respondent\n0,0,0,yes\n")
			with self.assertRaises(MalformedRowException):
				Tabulation.read_microdata(self._schema, bad_flag)

			stray = self._write(dirname, "stray.csv", "sex,age,region,respondent,outcome\n0,0,0,1,1\n0,0,0,0,1\n")
			with self.assertRaises(MalformedRowException):
				Tabulation.read_microdata(self._schema, stray)

			missing = self._write(dirname, "missing.csv", "sex,age,respondent\n0,0,1\n")
			with self.assertRaises(IngestionException):
				Tabulation.read_microdata(self._schema, missing)

			with self.assertRaises(IngestionException):
				Tabulation.read_microdata(self._schema, os.path.join(dirname, "nonexistent.csv"))
