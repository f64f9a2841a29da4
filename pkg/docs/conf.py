# -*- coding: utf-8 -*-
#
# Pygrushin documentation build configuration file

import sys, os

sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.mathjax']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = "Pygrushin"
copyright = "2026, the Pygrushin developers"

import re
from pygrushin import __version__ as release
version = re.match(r'\d+\.\d+(?:\.\d+)?', release).group()

exclude_trees = ['_build']

pygments_style = 'sphinx'

# -- Options for HTML output --------------------------------------------------

html_theme = 'default'

htmlhelp_basename = 'Pygrushindoc'

# -- Options for LaTeX output -------------------------------------------------

latex_documents = [
  ('index', 'Pygrushin.tex', 'Pygrushin Documentation',
   'the Pygrushin developers', 'manual'),
]
