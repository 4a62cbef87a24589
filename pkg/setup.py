import setuptools

with open("README.md") as f:
	long_description = f.read()

setuptools.setup(
	name = "multical",
	packages = setuptools.find_packages(),
	version = "0.1.0",
	license = "gpl-3.0",
	description = "Multilevel calibration weighting and doubly robust estimation for non-probability surveys",
	long_description = long_description,
	long_description_content_type = "text/markdown",
	keywords = [ "survey", "calibration", "raking", "post-stratification", "weighting", "mrp", "doubly-robust" ],
	python_requires = ">=3.8",
	install_requires = [
		"numpy>=1.22",
		"scipy>=1.9",
		"pandas>=1.5",
		"scikit-learn>=1.1",
		"mako",
	],
	entry_points = {
		"console_scripts": [
			"multical = multical.__main__:main"
		]
	},
	package_data = {
		"multical": [ "templates/*.txt" ],
	},
	include_package_data = True,
	classifiers = [
		"Development Status :: 4 - Beta",
		"Intended Audience :: Science/Research",
		"License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
		"Programming Language :: Python :: 3",
		"Programming Language :: Python :: 3 :: Only",
		"Programming Language :: Python :: 3.8",
		"Programming Language :: Python :: 3.9",
		"Programming Language :: Python :: 3.10",
		"Programming Language :: Python :: 3.11",
		"Topic :: Scientific/Engineering :: Mathematics",
	],
)
