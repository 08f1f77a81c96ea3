"""Build the optional compiled kernel.

The extension is skipped when Cython or a C compiler is unavailable; the
package then runs on the pure-Python kernel.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("RCEKIT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("rcekit._kernels", ["src/rcekit/_kernels.pyx"],
                       include_dirs=[numpy.get_include()],
                       extra_compile_args=["-O3"],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
