"""Build script: compiles the optional scan-kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here should not make the install unusable;
building from an sdist without Cython simply skips the extension.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pooled_annuity._kernels._ckernels",
                ["src/pooled_annuity/_kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
