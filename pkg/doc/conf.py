# -*- coding: utf-8 -*-
#
# refina documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir. All configuration values have a default; only the values
# that differ are set here.

import os
import sys

import alabaster

sys.path.insert(0, os.path.abspath('..'))

from refina.version import __version__

# -- General configuration ------------------------------------------------

extensions = [
    'alabaster',
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.napoleon',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.todo',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.autosectionlabel',
]

templates_path = []
source_suffix = '.rst'
master_doc = 'index'

project = u'refina'
copyright = u'2020, the refina developers'
author = u'the refina developers'

rst_epilog = '.. |project| replace:: %s' % project

version = __version__
release = __version__

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_theme_path = [alabaster.get_path()]
html_static_path = []
html_theme_options = {
    'logo_name': True,
    'description': "Refinement of network alignments by matched "
                   "neighborhood consistency.",
}
html_sidebars = {
    '**': [
        'about.html',
        'navigation.html',
        'relations.html',
        'searchbox.html',
    ]
}
html_short_title = "refina"
html_show_sphinx = True
html_show_copyright = True
htmlhelp_basename = 'refinadoc'

# -- Options for LaTeX, manual page and Texinfo output --------------------

latex_documents = [
    (master_doc, 'refina.tex', u'refina Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'refina', u'refina Documentation', [author], 1)
]

texinfo_documents = [
    (master_doc, 'refina', u'refina Documentation', author, 'refina',
     'Refinement of network alignments.', 'Miscellaneous'),
]

intersphinx_mapping = {'https://docs.python.org/3': None,
                       'http://pandas.pydata.org/pandas-docs/stable/': None,
                       'https://docs.scipy.org/doc/scipy/reference/': None,
                       'https://docs.scipy.org/doc/numpy/': None}
