"""Build script: compiles the Cython stepping core when possible.

The extension is optional; `kswave` falls back to the pure-NumPy backend when
the compiled module is absent. Set KSWAVE_NO_EXT=1 to skip compilation.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("KSWAVE_NO_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension(
                "kswave._core",
                ["src/kswave/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )],
            language_level=3,
        )
    except ImportError as err:
        print(f"kswave: building without the compiled core ({err})",
              file=sys.stderr)

setup(ext_modules=ext_modules)
