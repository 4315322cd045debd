"""Build script: compiles the optional tableau kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("QNETSIM_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/qnetsim/states/_tableau_cy.pyx"],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
        for ext in ext_modules:
            ext.include_dirs.append(numpy.get_include())
            ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
    except Exception as exc:  # pragma: no cover - build-env dependent
        sys.stderr.write(f"qnetsim: skipping compiled kernels ({exc})\n")
        ext_modules = []

setup(ext_modules=ext_modules)
