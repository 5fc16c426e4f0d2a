# Sphinx configuration for the mmloc documentation.
import os
import re
import sys

ROOT = os.path.abspath('../..')
sys.path.insert(0, ROOT)

with open(os.path.join(ROOT, 'mmloc', '__init__.py')) as f:
    release = re.search(r'__version__ = "([^"]+)"', f.read()).group(1)

project = 'mmloc'
copyright = '2026, mmloc contributors'
author = 'mmloc contributors'
version = release

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
    'sphinx.ext.intersphinx',
]

templates_path = ['_templates']
exclude_patterns = []

autodoc_default_options = {
    'member-order': 'bysource',
    'exclude-members': '__weakref__, __init__',
}
autodoc_typehints = 'description'
autoclass_content = 'both'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
    'pandas': ('https://pandas.pydata.org/docs', None),
}

html_theme = 'sphinx_rtd_theme'
html_title = f'mmloc {release}'

latex_elements = {
    'papersize': 'a4paper',
    'pointsize': '11pt',
    'preamble': r'''
\usepackage{amsmath}
\usepackage{amssymb}
\usepackage{bm}
''',
}

master_doc = 'index'
