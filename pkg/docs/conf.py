# -*- coding: utf-8 -*-
#
# rsrptools documentation build configuration file.

import sys
import os
on_rtd = os.environ.get('READTHEDOCS', None) == 'True'

if not on_rtd:  # only import and set the theme if we're building docs locally
    import sphinx_rtd_theme
    html_theme = 'sphinx_rtd_theme'
    html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

# the numeric stack is not installed on ReadTheDocs
from mock import Mock as MagicMock

class Mock(MagicMock):
    @classmethod
    def __getattr__(cls, name):
            return Mock()

MOCK_MODULES = ['numpy', 'scipy', 'scipy.special', 'sympy', 'pulp', 'networkx', 'networkx.drawing', 'pydot']
sys.modules.update((mod_name, Mock()) for mod_name in MOCK_MODULES)

sys.path.insert(0, os.path.abspath('..'))

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'rsrptools'
copyright = u'2016, rsrptools developers'
author = u'rsrptools developers'

# The short X.Y version.
version = u'0.1.0'
# The full version, including alpha/beta/rc tags.
release = u'0.1.0'

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

html_static_path = []
htmlhelp_basename = 'rsrptoolsdoc'

latex_documents = [
    (master_doc, 'rsrptools.tex', u'rsrptools Documentation',
     u'rsrptools developers', 'manual'),
]

man_pages = [
    (master_doc, 'rsrptools', u'rsrptools Documentation',
     [author], 1)
]
