"""Build the optional Cython IPF kernel.

If Cython or a C compiler is unavailable the package still installs and
falls back to the numpy implementation in ``catinfo._ipf_py``.
"""
import numpy as np
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
                "catinfo._ipf_kernel",
                ["src/catinfo/_ipf_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
