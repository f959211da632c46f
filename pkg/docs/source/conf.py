# -*- coding: utf-8 -*-
#
# wtv1d documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.coverage',
              'sphinx.ext.napoleon', 'sphinx.ext.mathjax']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'wtv1d'
copyright = u'2024, wtv1d developers'
version = '0.1'
release = '0.1.1'

exclude_patterns = []
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'
autodoc_mock_imports = ['matplotlib', 'joblib']

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'wtv1ddoc'

latex_documents = [
    ('index', 'wtv1d.tex', u'wtv1d Documentation',
     u'wtv1d developers', 'manual'),
]

man_pages = [
    ('index', 'wtv1d', u'wtv1d Documentation',
     [u'wtv1d developers'], 1)
]
