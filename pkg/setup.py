"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python mirror of the
kernels is selected at import time), so a missing Cython or C compiler
only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("noesc._ckernels", ["src/noesc/_ckernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
