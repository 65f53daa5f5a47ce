"""Build script for the compiled walk/LCS kernels.

The package works without the extension (a pure-Python twin is selected at
import time), but the compiled kernels are what make large walk budgets and
ROUGE-L scoring cheap.
"""

from Cython.Build import cythonize
from setuptools import Extension, setup

ext_modules = [
    Extension(
        name="memscrub.kernels._native",
        sources=["src/memscrub/kernels/_native.pyx"],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
