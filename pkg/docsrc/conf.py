#!/usr/bin/env python
#
# jetfdi documentation build configuration file.
#
import os
import sys
sys.path.insert(0, os.path.abspath('..'))

import jetfdi

# -- General configuration ---------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode',
              'sphinx_click', 'sphinx_copybutton']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'jetfdi'
copyright = "jetfdi developers"
author = "jetfdi developers"

version = jetfdi.__version__
release = jetfdi.__version__

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output -------------------------------------------

html_theme = 'furo'
htmlhelp_basename = 'jetfdidoc'

man_pages = [
    (master_doc, 'jetfdi', 'jetfdi Documentation', [author], 1)
]
