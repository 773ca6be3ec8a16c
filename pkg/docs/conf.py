# -*- coding: utf-8 -*-
#
# django-soilqr documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.intersphinx', 'sphinx.ext.viewcode']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'django-soilqr'
copyright = u'The django-soilqr contributors'

# Importing the package needs no configured Django settings.
import soilqr
version = '.'.join(soilqr.__version__.split('.')[:2])
release = soilqr.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'alabaster'
title_dict = {'project': project,
              'version': version,
              'release': release}
html_title = "%(project)s v%(release)s documentation" % title_dict
html_short_title = "%(project)s v%(version)s" % title_dict
html_static_path = ['_static']
htmlhelp_basename = 'django-soilqrdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'django-soilqr.tex', u'django-soilqr Documentation',
   u'The django-soilqr contributors', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'django-soilqr', u'django-soilqr Documentation',
     [u'The django-soilqr contributors'], 1)
]

# -- Options for autodoc -------------------------------------------------------

autodoc_member_order = 'bysource'
autodoc_default_options = {'members': True, 'undoc-members': True}

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
}
