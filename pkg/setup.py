"""Build script for the optional compiled jump-chain kernel.

The package is fully functional without the extension (a pure-Python
fallback with identical semantics is selected at import time), so a
missing compiler only costs speed.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "qndsim._kernels._gillespie",
                ["src/qndsim/_kernels/_gillespie.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
