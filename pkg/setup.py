"""Build the optional compiled kernels; without Cython the pure-Python fallback is used."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("STABPATH_NO_EXT", "0") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(["src/stabpath/_kernels.pyx"], language_level=3, quiet=True)

setup(ext_modules=ext_modules)
