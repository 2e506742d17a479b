"""Builds the optional compiled kernel extension.

The package works without it (ucal._kernels falls back to the pure NumPy
implementation at import time), so the extension is marked optional and a
failed compile does not fail the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ucal._kernels._core",
                sources=["src/ucal/_kernels/_core.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
