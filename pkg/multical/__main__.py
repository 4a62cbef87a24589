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
import multical
from .MultiCommand import MultiCommand
from .FriendlyArgumentParser import penalty_list, bounds, grid, probability
from .ActionWeights import ActionWeights
from .ActionEstimate import ActionEstimate
from .ActionSweep import ActionSweep
from .ActionSimulate import ActionSimulate
from .ActionDesign import ActionDesign
from .outcomes.BaseOutcomeModel import BaseOutcomeModel
from .simlab.Presets import Presets
from .estimators.TradeoffCurve import TradeoffCurve

def _level_list(text):
	return [ int(value) for value in text.split(",") ]

def _add_input_arguments(parser):
	parser.add_argument("-s", "--schema", metavar = "filename", required = True, help = "Covariate schema JSON file.")
	parser.add_argument("-d", "--data", metavar = "filename", help = "Microdata CSV with one column per covariate, a 'respondent' column in {0, 1} and optionally an 'outcome' column.")
	parser.add_argument("-p", "--pop-counts", metavar = "filename", help = "Population counts CSV with one column per covariate and a 'count' column. By default, population counts are tabulated from the microdata.")
	parser.add_argument("--resp-counts", metavar = "filename", help = "Respondent counts CSV in the same format as the population counts; replaces --data for commands that do not need outcomes.")

def _add_calibration_arguments(parser):
	parser.add_argument("-k", "--order", metavar = "K", type = int, help = "Highest interaction order to balance. Defaults to 2, or 1 for a single covariate.")
	parser.add_argument("-l", "--lambda", dest = "lambda_", metavar = "value[,value...]", type = penalty_list, help = "Penalty per interaction order, either one value for all orders 2..K or one value per order. 0 balances an order exactly, 'inf' drops it. Given on the population count scale unless --solver-scale is set. Defaults to 1.")
	parser.add_argument("--solver-scale", action = "store_true", help = "Penalties are on the scale of the dual objective, i.e. already divided by the population size.")
	parser.add_argument("-b", "--bounds", metavar = "L,U", type = bounds, default = (0.0, math.inf), help = "Weight bounds L <= gamma <= U. Defaults to 0,inf.")

def _add_output_arguments(parser):
	parser.add_argument("-o", "--out", metavar = "dirname", required = True, help = "Output directory.")
	parser.add_argument("-f", "--force", action = "store_true", help = "Overwrite files in the output directory if they already exist.")
	parser.add_argument("-v", "--verbose", action = "count", default = 0, help = "Increases verbosity. Can be specified multiple times to increase.")

def create_multicommand():
	mc = MultiCommand(description = "Multilevel calibration weighting and doubly robust estimation for non-probability surveys", version = multical.VERSION)

	def genparser(parser):
		_add_input_arguments(parser)
		_add_calibration_arguments(parser)
		_add_output_arguments(parser)
	mc.register("weights", "Solve for calibration weights and emit weights.csv, diagnostics.json and summary.txt", genparser, action = ActionWeights)

	def genparser(parser):
		_add_input_arguments(parser)
		_add_calibration_arguments(parser)
		parser.add_argument("-m", "--method", choices = [ "raking", "multilevel", "poststrat", "weighted", "mrp", "drp" ], action = "append", help = "Estimator to report. Can be given multiple times. Defaults to drp.")
		parser.add_argument("--drp-base", choices = [ "raking", "multilevel", "poststrat", "weighted" ], default = "multilevel", help = "Weights the DRP estimator corrects. Defaults to %(default)s.")
		parser.add_argument("-w", "--weights", metavar = "filename", help = "Weights CSV as written by the 'weights' command, used by the 'weighted' method.")
		parser.add_argument("-M", "--outcome-model", choices = BaseOutcomeModel.names(), default = "ridge", help = "Outcome model for MRP and DRP. Can be one of %(choices)s, defaults to %(default)s.")
		parser.add_argument("--model-order", metavar = "K", type = int, help = "Interaction order of the ridge or MAP outcome model. Defaults to the calibration order.")
		parser.add_argument("--penalty", metavar = "value", type = float, help = "Ridge penalty on interaction coefficients. By default chosen by cross-validation.")
		parser.add_argument("--trees", metavar = "count", type = int, default = 100, help = "Number of bagged trees. Defaults to %(default)d.")
		parser.add_argument("--depth", metavar = "depth", type = int, default = 4, help = "Maximum tree depth. Defaults to %(default)d.")
		parser.add_argument("--constant", metavar = "value", type = float, help = "Prediction of the constant outcome model. Defaults to the respondent mean.")
		parser.add_argument("--seed", metavar = "seed", type = int, default = 0, help = "Seed for cross-validation folds and tree bootstrap. Defaults to %(default)d.")
		parser.add_argument("-a", "--alpha", metavar = "alpha", type = probability, help = "Confidence intervals have coverage 1 - alpha. Defaults to 0.05 or the configured value.")
		_add_output_arguments(parser)
	mc.register("estimate", "Compute weighting, MRP and DRP estimates of the outcome mean", genparser, action = ActionEstimate)

	def genparser(parser):
		_add_input_arguments(parser)
		parser.add_argument("-k", "--order", metavar = "K", type = int, help = "Highest interaction order; one common penalty applies to orders 2..K. Defaults to 2.")
		parser.add_argument("-g", "--grid", metavar = "values|start:stop:count", type = grid, help = "Penalty grid, either comma-separated or log-spaced as start:stop:count in powers of ten. Population count scale unless --solver-scale is set. Defaults to 25 points from 1e-3 to 1e6.")
		parser.add_argument("--solver-scale", action = "store_true", help = "Grid values are on the scale of the dual objective.")
		parser.add_argument("-b", "--bounds", metavar = "L,U", type = bounds, default = (0.0, math.inf), help = "Weight bounds L <= gamma <= U. Defaults to 0,inf.")
		parser.add_argument("--share", metavar = "fraction", type = probability, default = TradeoffCurve.SELECTION_SHARE, help = "Selected penalty is the largest one reaching this share of the achievable imbalance reduction. Defaults to %(default)s.")
		_add_output_arguments(parser)
	mc.register("sweep", "Trace higher-order imbalance against effective sample size over a penalty grid", genparser, action = ActionSweep)

	def genparser(parser):
		parser.add_argument("-P", "--preset", choices = Presets.names(), help = "Named simulation setup. Can be one of %(choices)s.")
		parser.add_argument("-c", "--config", metavar = "filename", help = "Simulation configuration JSON file.")
		parser.add_argument("-r", "--reps", metavar = "count", type = int, help = "Number of replications. Overrides the configured value.")
		parser.add_argument("--seed", metavar = "seed", type = int, help = "Master seed. Overrides the configured value.")
		parser.add_argument("-j", "--jobs", metavar = "count", type = int, default = 1, help = "Worker processes for replications. Results do not depend on this value. Defaults to %(default)d.")
		parser.add_argument("--balance-check", metavar = "draws", type = int, default = 0, help = "Also check the imbalance bound of the unregularized fit on this many respondent draws. Needs a small schema.")
		parser.add_argument("--regression", action = "store_true", help = "Also report per-order norms of the population regression coefficients.")
		_add_output_arguments(parser)
	mc.register("simulate", "Run a simulation study of the estimators on a synthetic population", genparser, action = ActionSimulate)

	def genparser(parser):
		group = parser.add_mutually_exclusive_group(required = True)
		group.add_argument("-s", "--schema", metavar = "filename", help = "Covariate schema JSON file.")
		group.add_argument("-L", "--levels", metavar = "J1,J2,...", type = _level_list, help = "Level counts of anonymous covariates.")
		parser.add_argument("-k", "--order", metavar = "K", type = int, help = "Highest interaction order. Defaults to all orders.")
		parser.add_argument("--no-diagnostics", action = "store_true", help = "Skip rank and condition number.")
		parser.add_argument("-o", "--outfile", metavar = "filename", default = "-", help = "Write JSON to this file. Defaults to stdout.")
		parser.add_argument("-v", "--verbose", action = "count", default = 0, help = "Increases verbosity. Can be specified multiple times to increase.")
	mc.register("design", "Show column counts per order, rank and condition number of an interaction design", genparser, action = ActionDesign)

	return mc

def main():
	return create_multicommand().run(sys.argv[1:])

if __name__ == "__main__":
	sys.exit(main())
