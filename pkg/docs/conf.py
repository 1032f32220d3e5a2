import datetime as dt
import os
import sys


# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here.
sys.path.insert(0, os.path.abspath(".."))

# -- Project information -----------------------------------------------------

project = "tsnswitch"
copyright = f"{dt.datetime.now().year}, The tsnswitch Development Team"  # noqa: A001
author = "The tsnswitch Development Team"

# The full version, including alpha/beta/rc tags.
release = "0.1.0"
version = ".".join(release.split(".")[:2])

# -- General configuration ------------------------------------------------

master_doc = "index"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "numpydoc",
]

autodoc_mock_imports = ["click", "joblib", "numba", "numpy", "pandas", "pytest", "yaml"]

intersphinx_mapping = {
    "numpy": ("https://numpy.org/doc/stable", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable", None),
    "python": ("https://docs.python.org/3.8", None),
}

language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# Configuration for numpydoc
numpydoc_xref_param_type = True
numpydoc_xref_ignore = {"type", "optional", "default"}

# Configuration for autodoc
autosummary_generate = True

# -- Options for HTML output ----------------------------------------------

html_theme = "pydata_sphinx_theme"
