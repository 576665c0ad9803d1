"""Build the optional compiled forward kernel.

The package works without it (numpy fallback, selected at import); the
extension is only skipped if Cython or a C compiler is unavailable.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension(
            "reconfig._fastforward",
            ["src/reconfig/_fastforward.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython not available; building with the pure-Python kernel only")

setup(ext_modules=ext_modules)
