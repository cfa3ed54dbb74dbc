"""Builds the optional Cython kernels; the package still installs without them."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MODEDA_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "modeda._ckernels",
                    ["src/modeda/_ckernels.pyx"],
                    language="c++",
                    # no -ffast-math: results must match the pure-Python backend bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
