"""Build hook for the optional compiled kernel extension.

The package is fully functional without it (numpy fallback); any
failure to cythonize or compile falls back to a pure-Python build.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("STICKYBM_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "stickybm._kernels",
                    ["src/stickybm/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
