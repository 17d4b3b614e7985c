# Sphinx configuration of the CIR_rates documentation
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

import sphinx_rtd_theme  # noqa: F401

# the package sits one level up
sys.path.insert(0, os.path.abspath('..'))

project = 'CIR_rates'
copyright = '2026, CIR_rates developers'
author = 'CIR_rates developers'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosectionlabel',
    'sphinx_rtd_theme'
]

autosectionlabel_prefix_document = True
autodoc_member_order = 'bysource'

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
