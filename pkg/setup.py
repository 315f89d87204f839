"""Build the optional Cython enumeration kernel.

If Cython or a C compiler is unavailable the package still installs and the
pure-Python kernel is used at import time.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ctxoptics._kernels._enum_cy",
                ["src/ctxoptics/_kernels/_enum_cy.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
