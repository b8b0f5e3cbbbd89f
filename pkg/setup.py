"""Build the optional Cython kernel for skip-gram SGD.

The package works without the extension (a pure-numpy fallback is selected
at import time); building it just makes embedding training much faster.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "courserec._sgdkernel",
        ["src/courserec/_sgdkernel.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
